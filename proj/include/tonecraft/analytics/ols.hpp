#ifndef TONECRAFT_ANALYTICS_OLS_HPP
#define TONECRAFT_ANALYTICS_OLS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tonecraft/analytics/distributions.hpp"
#include "tonecraft/analytics/group_tests.hpp"
#include "tonecraft/error.hpp"

namespace tonecraft::analytics {

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double p = 1.0;
  double p_adjusted = 1.0;
};

struct RegressionResult {
  Coefficient intercept;
  std::vector<Coefficient> coefficients;  // one per regressor, in column order
  double r_squared = 0.0;
  double residual_df = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
};

struct OlsOptions {
  // Regressor names; defaults to x1..xk.
  std::vector<std::string> names;
  // Bonferroni family size; 0 means k (the regressors of this fit).
  std::size_t bonferroni_m = 0;
  // Relative size of a QR pivot below which a column counts as dependent.
  double rank_tolerance = 1e-10;
};

/// "***" below 0.01, "**" below 0.05, "*" below 0.1.
inline std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

/// Least squares fit of y on [1, X] with Student-t inference (n - k - 1 df).
///
/// Solved through a Householder QR of the augmented design, so the normal
/// equations are satisfied without forming X'X. A column whose QR pivot is
/// negligible relative to its norm is reported through RankDeficientError.
/// When the residual sum of squares is zero, a zero coefficient gets t = 0,
/// p = 1 and a nonzero one t = ±inf, p = 0.
inline RegressionResult fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const OlsOptions& options = {}) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto k = static_cast<std::size_t>(X.cols());
  if (static_cast<std::size_t>(y.size()) != n) throw InvalidArgument("fit_ols: y and X row counts differ");
  if (n <= k + 1) throw InvalidArgument("fit_ols needs n > k + 1 observations");
  if (!y.allFinite() || !X.allFinite()) throw InvalidArgument("fit_ols: non-finite input");
  if (!options.names.empty() && options.names.size() != k) throw InvalidArgument("fit_ols: names must match columns");

  auto name_of = [&](std::size_t col) {
    if (col == 0) return std::string("intercept");
    return options.names.empty() ? "x" + std::to_string(col) : options.names[col - 1];
  };

  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = X;

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(k + 1).triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j <= k; ++j) {
    const double norm = design.col(static_cast<Eigen::Index>(j)).norm();
    if (norm == 0.0 || std::fabs(R(j, j)) <= options.rank_tolerance * norm) throw RankDeficientError(j, name_of(j));
  }

  const Eigen::VectorXd qty = (qr.householderQ().transpose() * y).head(k + 1);
  const Eigen::VectorXd beta = R.triangularView<Eigen::Upper>().solve(qty);
  const Eigen::VectorXd residuals = y - design * beta;
  const double sse = residuals.squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();

  RegressionResult result;
  result.n = n;
  result.k = k;
  result.residual_df = static_cast<double>(n - k - 1);
  result.r_squared = sst == 0.0 ? 0.0 : std::clamp(1.0 - sse / sst, 0.0, 1.0);

  const double sigma2 = sse / result.residual_df;
  const Eigen::MatrixXd r_inv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k + 1),
                                                                       static_cast<Eigen::Index>(k + 1)));
  const Eigen::VectorXd cov_diag = (r_inv * r_inv.transpose()).diagonal() * sigma2;

  const std::size_t m = options.bonferroni_m == 0 ? std::max<std::size_t>(k, 1) : options.bonferroni_m;
  std::vector<Coefficient> all;
  for (std::size_t j = 0; j <= k; ++j) {
    Coefficient c;
    c.name = name_of(j);
    c.estimate = beta(static_cast<Eigen::Index>(j));
    c.std_error = std::sqrt(std::max(0.0, cov_diag(static_cast<Eigen::Index>(j))));
    if (c.std_error == 0.0) {
      c.t = c.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p = c.estimate == 0.0 ? 1.0 : 0.0;
    } else {
      c.t = c.estimate / c.std_error;
      c.p = student_t_two_sided_p(c.t, result.residual_df);
    }
    c.p_adjusted = bonferroni_adjust(c.p, m);
    all.push_back(std::move(c));
  }
  result.intercept = all.front();
  result.coefficients.assign(all.begin() + 1, all.end());
  return result;
}

}  // namespace tonecraft::analytics

#endif  // TONECRAFT_ANALYTICS_OLS_HPP
