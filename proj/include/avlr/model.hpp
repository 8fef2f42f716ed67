#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "avlr/diffcore.hpp"
#include "avlr/distributions.hpp"

namespace avlr::model {

/// theta = (beta, mu, Sigma). beta has the intercept first; Sigma is carried
/// as the unconstrained Cholesky vector used by dist::chol_from_unconstrained.
struct ModelParams {
  std::vector<double> beta;
  std::vector<double> mu;
  std::vector<double> sigma_chol;

  int dim() const { return static_cast<int>(mu.size()); }
  dist::CholFactor sigma_factor() const { return dist::chol_from_unconstrained(sigma_chol); }
  Eigen::MatrixXd covariance() const { return sigma_factor().covariance(); }

  static ModelParams from_moments(std::vector<double> beta, std::vector<double> mu,
                                  const Eigen::MatrixXd& sigma);
};

/// Linear selection model: row j holds (psi_j0, psi_j1..psi_jd, psi_jy), so the
/// coefficient block is d x (d + 2), row-major.
struct MissParams {
  int d = 0;
  std::vector<double> coef;

  static MissParams zeros(int d);
  int stride() const { return d + 2; }
  double& at(int j, int k) { return coef[static_cast<std::size_t>(j) * stride() + k]; }
  double at(int j, int k) const { return coef[static_cast<std::size_t>(j) * stride() + k]; }
  /// psi_j0 + psi_j,1:d . x + psi_jy * y
  double logit(int j, std::span<const double> x, int y) const;
};

/// log p(y | x; beta), computed as -softplus((1 - 2y) eta).
double loglik_y(int y, std::span<const double> x, std::span<const double> beta);

/// log p_psi(r | x, y) under independent Bernoulli indicators (r = 1 observed).
double loglik_r(std::span<const std::uint8_t> r, std::span<const double> x, int y,
                const MissParams& psi);

/// log p(y | x) + log f(x; mu, Sigma) [+ log p(r | x, y)] - q_logdensity.
/// Throws ConfigError when mnar is set and psi is null.
double joint_log_weight(int y, std::span<const double> x_completed,
                        std::span<const std::uint8_t> r, double q_logdensity,
                        const ModelParams& theta, const MissParams* psi, bool mnar);

/// Tape handles for the generative parameters.
struct ModelVars {
  diff::Var beta;
  diff::Var mu;
  diff::Var sigma_chol;
  diff::Var sigma_factor;  // packed factor derived from sigma_chol
  diff::Var psi;           // invalid when no mechanism is modelled
};

ModelVars register_model(diff::Tape& tape, const ModelParams& theta, const MissParams* psi);

diff::Var loglik_y(diff::Tape& tape, int y, diff::Var x, diff::Var beta);
/// `r` holds the mask as doubles (1 observed).
diff::Var loglik_r(diff::Tape& tape, std::span<const double> r, diff::Var x, int y, diff::Var psi);

diff::Var joint_log_weight(diff::Tape& tape, int y, diff::Var x_completed,
                           std::span<const double> r, diff::Var q_logdensity,
                           const ModelVars& vars, bool mnar);

}  // namespace avlr::model
