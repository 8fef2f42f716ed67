#include "avlr/model.hpp"

#include "avlr/errors.hpp"

namespace avlr::model {

ModelParams ModelParams::from_moments(std::vector<double> beta, std::vector<double> mu,
                                      const Eigen::MatrixXd& sigma) {
  if (beta.size() != mu.size() + 1 || sigma.rows() != static_cast<Eigen::Index>(mu.size())) {
    throw DimensionError("from_moments: inconsistent dimensions");
  }
  ModelParams p;
  p.beta = std::move(beta);
  p.mu = std::move(mu);
  p.sigma_chol = dist::unconstrained_from_chol(dist::CholFactor::from_covariance(sigma));
  return p;
}

MissParams MissParams::zeros(int d) {
  MissParams p;
  p.d = d;
  p.coef.assign(static_cast<std::size_t>(d) * (d + 2), 0.0);
  return p;
}

double MissParams::logit(int j, std::span<const double> x, int y) const {
  double u = at(j, 0) + at(j, d + 1) * y;
  for (int k = 0; k < d; ++k) u += at(j, k + 1) * x[k];
  return u;
}

double loglik_y(int y, std::span<const double> x, std::span<const double> beta) {
  if (beta.size() != x.size() + 1) throw DimensionError("loglik_y: beta must have d + 1 entries");
  double eta = beta[0];
  for (std::size_t j = 0; j < x.size(); ++j) eta += beta[j + 1] * x[j];
  return -dist::softplus((1 - 2 * y) * eta);
}

double loglik_r(std::span<const std::uint8_t> r, std::span<const double> x, int y,
                const MissParams& psi) {
  if (r.size() != x.size() || psi.d != static_cast<int>(x.size())) {
    throw DimensionError("loglik_r: dimension mismatch");
  }
  double total = 0.0;
  for (int j = 0; j < psi.d; ++j) {
    total += dist::bernoulli_logpmf(r[j], dist::sigmoid(psi.logit(j, x, y)));
  }
  return total;
}

double joint_log_weight(int y, std::span<const double> x_completed,
                        std::span<const std::uint8_t> r, double q_logdensity,
                        const ModelParams& theta, const MissParams* psi, bool mnar) {
  if (mnar && psi == nullptr) throw ConfigError("MNAR weight requested without mechanism parameters");
  double w = loglik_y(y, x_completed, theta.beta) +
             dist::mvn_logpdf(x_completed, theta.mu, theta.sigma_factor()) - q_logdensity;
  if (mnar) w += loglik_r(r, x_completed, y, *psi);
  return w;
}

ModelVars register_model(diff::Tape& tape, const ModelParams& theta, const MissParams* psi) {
  ModelVars v;
  v.beta = tape.leaf(theta.beta);
  v.mu = tape.leaf(theta.mu);
  v.sigma_chol = tape.leaf(theta.sigma_chol);
  v.sigma_factor = tape.chol_from_unconstrained(v.sigma_chol);
  if (psi != nullptr) v.psi = tape.leaf(psi->coef);
  return v;
}

diff::Var loglik_y(diff::Tape& tape, int y, diff::Var x, diff::Var beta) {
  const diff::Var one = tape.constant(1.0);
  const diff::Var parts[] = {one, x};
  const diff::Var eta = tape.dot(beta, tape.concat(parts));
  return tape.neg(tape.softplus(tape.scale(eta, 1.0 - 2.0 * y)));
}

diff::Var loglik_r(diff::Tape& tape, std::span<const double> r, diff::Var x, int y, diff::Var psi) {
  const std::size_t d = r.size();
  if (tape.size(x) != d || tape.size(psi) != d * (d + 2)) {
    throw DimensionError("loglik_r: dimension mismatch");
  }
  const diff::Var parts[] = {tape.constant(1.0), x, tape.constant(static_cast<double>(y))};
  const std::vector<double> zeros(d, 0.0);
  const diff::Var logits = tape.affine(tape.concat(parts), psi, tape.constant(zeros));
  return tape.bernoulli_logit_logpmf(logits, r);
}

diff::Var joint_log_weight(diff::Tape& tape, int y, diff::Var x_completed,
                           std::span<const double> r, diff::Var q_logdensity,
                           const ModelVars& vars, bool mnar) {
  if (mnar && !vars.psi.valid()) {
    throw ConfigError("MNAR weight requested without mechanism parameters");
  }
  diff::Var w = tape.add(loglik_y(tape, y, x_completed, vars.beta),
                         dist::mvn_logpdf(tape, x_completed, vars.mu, vars.sigma_factor));
  if (mnar) w = tape.add(w, loglik_r(tape, r, x_completed, y, vars.psi));
  return tape.sub(w, q_logdensity);
}

}  // namespace avlr::model
