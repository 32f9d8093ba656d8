#ifndef TONECRAFT_ANALYTICS_PCA_HPP
#define TONECRAFT_ANALYTICS_PCA_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tonecraft/error.hpp"

namespace tonecraft::analytics {

struct PcaResult {
  Eigen::MatrixXd loadings;                  // k x d, unit-norm rows
  Eigen::VectorXd explained_variance_ratio;  // k, nonincreasing
  Eigen::VectorXd eigenvalues;               // k
  Eigen::VectorXd column_means;              // d
  Eigen::VectorXd column_stddevs;            // d, zero for constant columns
};

/// Correlation matrix of the columns. Constant columns get an all-zero row
/// and column (including the diagonal).
inline Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data, Eigen::VectorXd* means = nullptr,
                                          Eigen::VectorXd* stddevs = nullptr) {
  const auto n = data.rows();
  Eigen::MatrixXd z = data.rowwise() - data.colwise().mean();
  Eigen::VectorXd sd(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    sd(j) = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (sd(j) > 0.0)
      z.col(j) /= sd(j);
    else
      z.col(j).setZero();
  }
  if (means) *means = data.colwise().mean().transpose();
  if (stddevs) *stddevs = sd;
  return z.transpose() * z / static_cast<double>(n - 1);
}

/// Top-k principal components of the standardized columns.
///
/// Components are eigenvectors of the correlation matrix ordered by
/// descending eigenvalue, each flipped so its largest-magnitude loading is
/// positive (the first one when magnitudes tie within 1e-9 relative).
/// Explained ratios are relative to the trace, i.e. the number of
/// non-constant columns.
inline PcaResult pca(const Eigen::MatrixXd& data, Eigen::Index k) {
  const Eigen::Index d = data.cols();
  if (data.rows() < 2) throw InvalidArgument("pca needs at least two items");
  if (k < 1 || k > d) throw InvalidArgument("pca needs 1 <= k <= d (k = " + std::to_string(k) + ", d = " +
                                            std::to_string(d) + ")");
  if (!data.allFinite()) throw InvalidArgument("pca: non-finite input");

  PcaResult r;
  const Eigen::MatrixXd corr = correlation_matrix(data, &r.column_means, &r.column_stddevs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) throw Error("pca: eigen decomposition failed");
  const double trace = corr.trace();

  r.loadings.resize(k, d);
  r.eigenvalues.resize(k);
  r.explained_variance_ratio.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index src = d - 1 - c;  // solver sorts ascending
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    const double largest = v.cwiseAbs().maxCoeff();
    Eigen::Index arg = 0;
    while (std::fabs(v(arg)) < largest * (1.0 - 1e-9)) ++arg;
    if (v(arg) < 0.0) v = -v;
    r.loadings.row(c) = v.transpose();
    const double lambda = std::max(0.0, solver.eigenvalues()(src));
    r.eigenvalues(c) = lambda;
    r.explained_variance_ratio(c) = trace > 0.0 ? lambda / trace : 0.0;
  }
  return r;
}

/// Projects standardized rows of `data` onto the components.
inline Eigen::MatrixXd pca_scores(const PcaResult& model, const Eigen::MatrixXd& data) {
  Eigen::MatrixXd z = data.rowwise() - model.column_means.transpose();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    if (model.column_stddevs(j) > 0.0)
      z.col(j) /= model.column_stddevs(j);
    else
      z.col(j).setZero();
  }
  return z * model.loadings.transpose();
}

}  // namespace tonecraft::analytics

#endif  // TONECRAFT_ANALYTICS_PCA_HPP
