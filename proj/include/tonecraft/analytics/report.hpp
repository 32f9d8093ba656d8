#ifndef TONECRAFT_ANALYTICS_REPORT_HPP
#define TONECRAFT_ANALYTICS_REPORT_HPP

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tonecraft/analytics/keywords.hpp"
#include "tonecraft/analytics/ols.hpp"
#include "tonecraft/analytics/pca.hpp"

namespace tonecraft::analytics {

using json = nlohmann::json;

namespace detail {

// JSON has no infinity; emit it as a string.
inline json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return nullptr;
  return x;
}

inline std::string fixed(double x, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << x;
  return os.str();
}

}  // namespace detail

inline json to_json(const Coefficient& c) {
  return json{{"name", c.name},
              {"estimate", detail::number(c.estimate)},
              {"std_error", detail::number(c.std_error)},
              {"t", detail::number(c.t)},
              {"p", detail::number(c.p)},
              {"p_adjusted", detail::number(c.p_adjusted)},
              {"stars", significance_stars(c.p_adjusted)}};
}

inline json to_json(const RegressionResult& r) {
  json coefs = json::array();
  for (const auto& c : r.coefficients) coefs.push_back(to_json(c));
  return json{{"intercept", to_json(r.intercept)}, {"coefficients", std::move(coefs)},
              {"r_squared", r.r_squared},          {"residual_df", r.residual_df},
              {"n", r.n},                          {"k", r.k}};
}

struct NamedRegression {
  std::string dependent;
  RegressionResult result;
};

inline json regression_report_json(const std::vector<NamedRegression>& regressions) {
  json out = json::array();
  for (const auto& r : regressions) {
    json j = to_json(r.result);
    j["dependent"] = r.dependent;
    out.push_back(std::move(j));
  }
  return out;
}

/// One column per dependent user tone; rows are R² and the agent-tone
/// coefficients with stars from the adjusted p-values.
inline void write_regression_table(std::ostream& os, const std::vector<NamedRegression>& regressions) {
  if (regressions.empty()) return;
  constexpr int kLabel = 18, kCell = 16;
  os << std::left << std::setw(kLabel) << "";
  for (const auto& r : regressions) os << std::right << std::setw(kCell) << ("C_" + r.dependent);
  os << '\n' << std::left << std::setw(kLabel) << "R^2";
  for (const auto& r : regressions) os << std::right << std::setw(kCell) << detail::fixed(r.result.r_squared, 2);
  os << '\n';
  const auto& first = regressions.front().result;
  for (std::size_t j = 0; j < first.coefficients.size(); ++j) {
    os << std::left << std::setw(kLabel) << ("A_" + first.coefficients[j].name);
    for (const auto& r : regressions) {
      const auto& c = r.result.coefficients[j];
      os << std::right << std::setw(kCell) << (detail::fixed(c.estimate, 3) + significance_stars(c.p_adjusted));
    }
    os << '\n';
  }
  os << "***p<0.01, **p<0.05, *p<0.1 (Bonferroni-adjusted)\n";
}

inline json to_json(const KeywordResult& k) {
  return json{{"term", k.term},
              {"order", k.order},
              {"count", k.count},
              {"mean_toned", k.mean_toned},
              {"mean_other", k.mean_other},
              {"t", detail::number(k.test.t)},
              {"df", detail::number(k.test.df)},
              {"p", detail::number(k.test.p)},
              {"p_adjusted", detail::number(k.p_adjusted)},
              {"stars", significance_stars(k.p_adjusted)}};
}

inline json keyword_report_json(const std::string& tone, const std::vector<KeywordResult>& keywords) {
  json list = json::array();
  for (const auto& k : keywords) list.push_back(to_json(k));
  return json{{"tone", tone}, {"keywords", std::move(list)}};
}

inline void write_keyword_table(std::ostream& os, const std::string& tone, const std::vector<KeywordResult>& keywords) {
  os << std::left << std::setw(28) << tone << std::right << std::setw(12) << "toned" << std::setw(12) << "other"
     << std::setw(12) << "p_adj" << '\n';
  for (const auto& k : keywords) {
    os << std::left << std::setw(28) << (k.term + significance_stars(k.p_adjusted)) << std::right << std::setw(12)
       << detail::fixed(k.mean_toned, 4) << std::setw(12) << detail::fixed(k.mean_other, 4) << std::setw(12)
       << std::setprecision(3) << std::scientific << k.p_adjusted << std::defaultfloat << '\n';
  }
}

inline json to_json(const PcaResult& r, const std::vector<std::string>& tones) {
  json comps = json::array();
  for (Eigen::Index c = 0; c < r.loadings.rows(); ++c) {
    json loads = json::object();
    for (Eigen::Index j = 0; j < r.loadings.cols(); ++j) {
      const std::string name = static_cast<std::size_t>(j) < tones.size() ? tones[static_cast<std::size_t>(j)]
                                                                           : "t" + std::to_string(j);
      loads[name] = r.loadings(c, j);
    }
    comps.push_back(json{{"eigenvalue", r.eigenvalues(c)},
                         {"explained_variance_ratio", r.explained_variance_ratio(c)},
                         {"loadings", std::move(loads)}});
  }
  return json{{"components", std::move(comps)}};
}

}  // namespace tonecraft::analytics

#endif  // TONECRAFT_ANALYTICS_REPORT_HPP
