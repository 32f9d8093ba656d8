#ifndef TONECRAFT_ANALYTICS_KEYWORDS_HPP
#define TONECRAFT_ANALYTICS_KEYWORDS_HPP

#include <algorithm>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tonecraft/analytics/group_tests.hpp"
#include "tonecraft/error.hpp"

namespace tonecraft::analytics {

struct RatedResponse {
  std::vector<std::string> tokens;
  double rating = 0.0;  // mean rating on the tone under study
};

struct KeywordOptions {
  double rating_threshold = 3.0;  // toned when rating >= threshold
  double alpha = 0.05;
  std::size_t min_count = 10;     // candidates occur strictly more often than this
  std::size_t max_order = 3;      // longest n-gram
};

struct KeywordResult {
  std::string term;
  std::size_t order = 1;
  std::size_t count = 0;     // occurrences across all responses
  double mean_toned = 0.0;   // mean per-response frequency in the toned set
  double mean_other = 0.0;
  TTestResult test;
  double p_adjusted = 1.0;
};

namespace detail {

struct TermStats {
  std::size_t order = 1;
  std::size_t count = 0;
  std::vector<double> toned;  // nonzero frequencies only
  std::vector<double> other;
};

// Mean and n - 1 variance of a sample that is `nonzero` plus implicit zeros.
// Values are summed in sorted order so the result ignores input order.
inline std::pair<double, double> sparse_moments(std::vector<double>& nonzero, std::size_t n) {
  std::sort(nonzero.begin(), nonzero.end());
  double sum = 0.0;
  for (double x : nonzero) sum += x;
  const double mu = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : nonzero) ss += (x - mu) * (x - mu);
  ss += static_cast<double>(n - nonzero.size()) * mu * mu;
  return {mu, ss / static_cast<double>(n - 1)};
}

}  // namespace detail

/// Welch test of per-response frequency (occurrences / response token count)
/// for every 1..max_order-gram seen more than min_count times, toned set
/// versus the rest. Returns every candidate with Bonferroni-adjusted p-values
/// (m = number of candidates), sorted by adjusted p then term.
inline std::vector<KeywordResult> score_terms(std::span<const RatedResponse> responses,
                                              const KeywordOptions& options = {}) {
  if (responses.empty()) throw InvalidArgument("extract_keywords needs at least one response");
  std::size_t n_toned = 0;
  for (const auto& r : responses) n_toned += r.rating >= options.rating_threshold ? 1 : 0;
  const std::size_t n_other = responses.size() - n_toned;
  if (n_toned < 2 || n_other < 2) {
    std::ostringstream msg;
    msg << "rating threshold " << options.rating_threshold << " splits responses into " << n_toned << " toned and "
        << n_other << " other; each side needs at least two";
    throw InvalidArgument(msg.str());
  }

  std::map<std::string, detail::TermStats> terms;
  std::map<std::string, std::size_t> local;
  for (const auto& r : responses) {
    local.clear();
    const std::size_t len = r.tokens.size();
    for (std::size_t order = 1; order <= options.max_order; ++order) {
      for (std::size_t i = 0; i + order <= len; ++i) {
        std::string term = r.tokens[i];
        for (std::size_t k = 1; k < order; ++k) term.append(" ").append(r.tokens[i + k]);
        ++local[term];
        terms[term].order = order;
      }
    }
    const bool toned = r.rating >= options.rating_threshold;
    for (const auto& [term, c] : local) {
      auto& stats = terms[term];
      stats.count += c;
      (toned ? stats.toned : stats.other).push_back(static_cast<double>(c) / static_cast<double>(len));
    }
  }

  std::vector<KeywordResult> out;
  for (auto& [term, stats] : terms) {
    if (stats.count <= options.min_count) continue;
    const auto [mt, vt] = detail::sparse_moments(stats.toned, n_toned);
    const auto [mo, vo] = detail::sparse_moments(stats.other, n_other);
    KeywordResult r;
    r.term = term;
    r.order = stats.order;
    r.count = stats.count;
    r.mean_toned = mt;
    r.mean_other = mo;
    r.test = welch_ttest_from_moments(mt, vt, static_cast<double>(n_toned), mo, vo, static_cast<double>(n_other));
    out.push_back(std::move(r));
  }
  for (auto& r : out) r.p_adjusted = bonferroni_adjust(r.test.p, out.size());
  std::sort(out.begin(), out.end(), [](const KeywordResult& a, const KeywordResult& b) {
    if (a.p_adjusted != b.p_adjusted) return a.p_adjusted < b.p_adjusted;
    return a.term < b.term;
  });
  return out;
}

/// Terms with adjusted p < alpha that are more frequent in the toned set.
inline std::vector<KeywordResult> extract_keywords(std::span<const RatedResponse> responses,
                                                   const KeywordOptions& options = {}) {
  auto scored = score_terms(responses, options);
  std::erase_if(scored, [&](const KeywordResult& r) {
    return !(r.p_adjusted < options.alpha && r.mean_toned > r.mean_other);
  });
  return scored;
}

}  // namespace tonecraft::analytics

#endif  // TONECRAFT_ANALYTICS_KEYWORDS_HPP
