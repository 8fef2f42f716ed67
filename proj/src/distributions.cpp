#include "avlr/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "avlr/errors.hpp"

namespace avlr::dist {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double log_sigmoid(double u) { return -softplus(-u); }

CholFactor::CholFactor(int dim, std::vector<double> packed) : dim_(dim), packed_(std::move(packed)) {
  if (dim < 0 || packed_.size() != static_cast<std::size_t>(dim) * (dim + 1) / 2) {
    throw DimensionError("CholFactor: packed length does not match dimension");
  }
  for (int i = 0; i < dim_; ++i) {
    double& dii = packed_[diff::tri_index(i, i)];
    dii = std::max(dii, diff::kDiagFloor);
  }
}

Eigen::MatrixXd CholFactor::dense() const {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) l(i, j) = (*this)(i, j);
  }
  return l;
}

Eigen::MatrixXd CholFactor::covariance() const {
  const Eigen::MatrixXd l = dense();
  return l * l.transpose();
}

CholFactor CholFactor::from_covariance(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw DimensionError("from_covariance: matrix not square");
  const int d = static_cast<int>(sigma.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NumericError("from_covariance: matrix is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  std::vector<double> packed(static_cast<std::size_t>(d) * (d + 1) / 2);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) packed[diff::tri_index(i, j)] = l(i, j);
  }
  return CholFactor(d, std::move(packed));
}

CholFactor chol_from_unconstrained(std::span<const double> ell) {
  const int d = diff::triangular_dim(ell.size());
  std::vector<double> packed(ell.begin(), ell.end());
  for (int i = 0; i < d; ++i) {
    double& dii = packed[diff::tri_index(i, i)];
    dii = std::max(std::exp(dii), diff::kDiagFloor);
  }
  return CholFactor(d, std::move(packed));
}

std::vector<double> unconstrained_from_chol(const CholFactor& l) {
  std::vector<double> ell(l.packed().begin(), l.packed().end());
  for (int i = 0; i < l.dim(); ++i) {
    double& dii = ell[diff::tri_index(i, i)];
    dii = std::log(dii);
  }
  return ell;
}

double mvn_logpdf(std::span<const double> x, std::span<const double> mu, const CholFactor& l) {
  const int d = l.dim();
  if (x.size() != static_cast<std::size_t>(d) || mu.size() != static_cast<std::size_t>(d)) {
    throw DimensionError("mvn_logpdf: dimension mismatch");
  }
  // z = L^{-1}(x - mu)
  std::vector<double> z(d);
  double quad = 0.0;
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) {
    double s = x[i] - mu[i];
    for (int j = 0; j < i; ++j) s -= l(i, j) * z[j];
    z[i] = s / l(i, i);
    quad += z[i] * z[i];
    logdet += std::log(l(i, i));
  }
  return -0.5 * d * kLog2Pi - logdet - 0.5 * quad;
}

diff::Var mvn_logpdf(diff::Tape& tape, diff::Var x, diff::Var mu, diff::Var l_packed) {
  const auto d = static_cast<double>(tape.size(x));
  diff::Var z = tape.tri_solve(l_packed, tape.sub(x, mu));
  diff::Var quad = tape.dot(z, z);
  diff::Var logdet = tape.log_diag_sum(l_packed);
  // -(d/2) ln 2pi - logdet - quad / 2
  return tape.shift(tape.sub(tape.scale(quad, -0.5), logdet), -0.5 * d * kLog2Pi);
}

GaussianCond gaussian_condition(std::span<const double> mu, const CholFactor& l,
                                std::span<const int> obs_idx, std::span<const double> x_obs) {
  const int d = l.dim();
  if (mu.size() != static_cast<std::size_t>(d)) throw DimensionError("gaussian_condition: mean size");
  if (obs_idx.size() != x_obs.size()) {
    throw DimensionError("gaussian_condition: observed values do not match index set");
  }
  std::vector<char> observed(d, 0);
  for (int j : obs_idx) {
    if (j < 0 || j >= d) throw ArgumentError("gaussian_condition: observed index out of range");
    if (observed[j]) throw ArgumentError("gaussian_condition: duplicate observed index");
    observed[j] = 1;
  }
  GaussianCond out;
  for (int j = 0; j < d; ++j) {
    if (!observed[j]) out.missing.push_back(j);
  }
  const int m = static_cast<int>(out.missing.size());
  const int o = static_cast<int>(obs_idx.size());
  if (m == 0) {
    out.factor = CholFactor(0, {});
    return out;
  }
  if (o == 0) {
    out.mean.assign(mu.begin(), mu.end());
    out.factor = l;
    return out;
  }

  const Eigen::MatrixXd sigma = l.covariance();
  Eigen::MatrixXd s_mm(m, m), s_mo(m, o), s_oo(o, o);
  Eigen::VectorXd resid(o);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) s_mm(a, b) = sigma(out.missing[a], out.missing[b]);
    for (int b = 0; b < o; ++b) s_mo(a, b) = sigma(out.missing[a], obs_idx[b]);
  }
  for (int a = 0; a < o; ++a) {
    for (int b = 0; b < o; ++b) s_oo(a, b) = sigma(obs_idx[a], obs_idx[b]);
    resid(a) = x_obs[a] - mu[obs_idx[a]];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s_oo);
  const Eigen::MatrixXd gain = llt.solve(s_mo.transpose()).transpose();  // S_mo S_oo^{-1}
  const Eigen::VectorXd mean_shift = gain * resid;
  Eigen::MatrixXd schur = s_mm - gain * s_mo.transpose();
  schur = 0.5 * (schur + schur.transpose());

  out.mean.resize(m);
  for (int a = 0; a < m; ++a) out.mean[a] = mu[out.missing[a]] + mean_shift(a);
  Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
  if (schur_llt.info() != Eigen::Success) {
    throw NumericError("gaussian_condition: conditional covariance lost positive definiteness");
  }
  out.factor = CholFactor::from_covariance(schur);
  return out;
}

double bernoulli_logpmf(int r, double pi) {
  const double p = std::clamp(pi, kProbFloor, 1.0 - kProbFloor);
  return r ? std::log(p) : std::log1p(-p);
}

std::vector<double> reparam_sample(std::span<const double> mean, const CholFactor& l,
                                   std::span<const double> eps) {
  const int m = l.dim();
  if (mean.size() != static_cast<std::size_t>(m) || eps.size() != static_cast<std::size_t>(m)) {
    throw DimensionError("reparam_sample: dimension mismatch");
  }
  std::vector<double> x(mean.begin(), mean.end());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) x[i] += l(i, j) * eps[j];
  }
  return x;
}

diff::Var reparam_sample(diff::Tape& tape, diff::Var mean, diff::Var l_packed, diff::Var eps) {
  if (tape.size(mean) != tape.size(eps)) throw DimensionError("reparam_sample: dimension mismatch");
  return tape.add(mean, tape.tri_matvec(l_packed, eps));
}

}  // namespace avlr::dist
