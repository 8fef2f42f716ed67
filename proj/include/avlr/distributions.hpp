#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "avlr/diffcore.hpp"

namespace avlr::dist {

/// Probability clamp for Bernoulli log-masses: [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-6;

double sigmoid(double u);
/// log sigma(u) = -softplus(-u), stable for large |u|.
double log_sigmoid(double u);
double softplus(double u);

/// Lower-triangular factor stored packed row-major over the lower triangle.
/// Diagonal entries are kept >= kDiagFloor. Dimension 0 is allowed and
/// represents an empty factor.
class CholFactor {
 public:
  CholFactor() = default;
  CholFactor(int dim, std::vector<double> packed);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return packed_[diff::tri_index(i, j)]; }
  std::span<const double> packed() const { return packed_; }

  Eigen::MatrixXd dense() const;
  /// L L^T.
  Eigen::MatrixXd covariance() const;

  /// Cholesky factor of a symmetric positive definite matrix.
  static CholFactor from_covariance(const Eigen::MatrixXd& sigma);

 private:
  int dim_ = 0;
  std::vector<double> packed_;
};

CholFactor chol_from_unconstrained(std::span<const double> ell);
/// Inverse of chol_from_unconstrained (log of the diagonal).
std::vector<double> unconstrained_from_chol(const CholFactor& l);

double mvn_logpdf(std::span<const double> x, std::span<const double> mu, const CholFactor& l);
/// Tape version; `l_packed` is a packed lower factor node.
diff::Var mvn_logpdf(diff::Tape& tape, diff::Var x, diff::Var mu, diff::Var l_packed);

struct GaussianCond {
  std::vector<int> missing;  // indices of the conditioned-on complement, increasing
  std::vector<double> mean;
  CholFactor factor;
  int dim() const { return factor.dim(); }
};

/// Conditional law of the coordinates not in `obs_idx` given x_obs.
GaussianCond gaussian_condition(std::span<const double> mu, const CholFactor& l,
                                std::span<const int> obs_idx, std::span<const double> x_obs);

double bernoulli_logpmf(int r, double pi);

std::vector<double> reparam_sample(std::span<const double> mean, const CholFactor& l,
                                   std::span<const double> eps);
diff::Var reparam_sample(diff::Tape& tape, diff::Var mean, diff::Var l_packed, diff::Var eps);

}  // namespace avlr::dist
