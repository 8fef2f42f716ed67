#include "avlr/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "avlr/errors.hpp"
#include "avlr/model.hpp"

namespace avlr::base {

namespace {

double log_likelihood(const RowMatrix& x, std::span<const int> y, const Eigen::VectorXd& beta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double eta = beta(0) + x.row(i).dot(beta.tail(x.cols()));
    ll -= dist::softplus((1 - 2 * y[i]) * eta);
  }
  return ll;
}

std::vector<int> observed_indices(std::span<const std::uint8_t> mask) {
  std::vector<int> idx;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) idx.push_back(static_cast<int>(j));
  }
  return idx;
}

dist::GaussianCond condition_row(std::span<const double> x, std::span<const std::uint8_t> mask,
                                 std::span<const double> mu, const dist::CholFactor& l) {
  const std::vector<int> obs = observed_indices(mask);
  std::vector<double> x_obs;
  for (int j : obs) x_obs.push_back(x[j]);
  return dist::gaussian_condition(mu, l, obs, x_obs);
}

std::vector<double> draw_conditional(const dist::GaussianCond& c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eps(c.dim());
  for (double& e : eps) e = normal(rng);
  return dist::reparam_sample(c.mean, c.factor, eps);
}

}  // namespace

std::vector<double> column_means(const Dataset& data) {
  std::vector<double> means(data.dim(), 0.0);
  for (int j = 0; j < data.dim(); ++j) {
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < data.rows(); ++i) {
      if (data.mask(i, j)) {
        sum += data.x(i, j);
        ++n;
      }
    }
    if (n == 0) throw DataError("column " + std::to_string(j) + " is fully missing");
    means[j] = sum / n;
  }
  return means;
}

RowMatrix mean_impute(const Dataset& data) { return mean_impute(data, column_means(data)); }

RowMatrix mean_impute(const Dataset& data, std::span<const double> means) {
  RowMatrix out = data.x;
  for (int i = 0; i < data.rows(); ++i) {
    for (int j = 0; j < data.dim(); ++j) {
      if (!data.mask(i, j)) out(i, j) = means[j];
    }
  }
  return out;
}

LogisticFit fit_logistic(const RowMatrix& x, std::span<const int> y, std::span<const double> start,
                         int max_iter, double tol) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols() + 1;
  if (static_cast<Eigen::Index>(y.size()) != n) throw DimensionError("fit_logistic: label count");
  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  design.rightCols(p - 1) = x;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (!start.empty()) {
    if (static_cast<Eigen::Index>(start.size()) != p) throw DimensionError("fit_logistic: start size");
    beta = Eigen::Map<const Eigen::VectorXd>(start.data(), p);
  }
  LogisticFit fit;
  double ll = log_likelihood(x, y, beta);
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pr = dist::sigmoid(design.row(i).dot(beta));
      grad += (y[i] - pr) * design.row(i).transpose();
      hess.selfadjointView<Eigen::Lower>().rankUpdate(design.row(i).transpose(), pr * (1.0 - pr));
    }
    hess = hess.selfadjointView<Eigen::Lower>();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success) throw NumericError("fit_logistic: singular Hessian");
    Eigen::VectorXd step = ldlt.solve(grad);

    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double cand_ll = log_likelihood(x, y, candidate);
    int halvings = 0;
    while (!(cand_ll >= ll - 1e-12) && halvings < 40) {
      scale *= 0.5;
      candidate = beta + scale * step;
      cand_ll = log_likelihood(x, y, candidate);
      ++halvings;
    }
    if (halvings == 40) throw NumericError("fit_logistic: step halving failed to improve the likelihood");
    beta = candidate;
    ll = cand_ll;
    fit.iterations = it;
    if ((scale * step).cwiseAbs().maxCoeff() < tol) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged || !beta.allFinite()) {
    throw NumericError("fit_logistic: Newton iterations diverged (separable data?)");
  }
  fit.beta.assign(beta.data(), beta.data() + p);
  return fit;
}

MeanImputationModel fit_mean_imputation(const Dataset& train) {
  MeanImputationModel m;
  m.means = column_means(train);
  const RowMatrix filled = mean_impute(train, m.means);
  m.beta = fit_logistic(filled, train.y).beta;
  const Eigen::MatrixXd centered = filled.rowwise() - filled.colwise().mean();
  m.covariance = centered.transpose() * centered / std::max<double>(1.0, train.rows() - 1.0);
  return m;
}

std::vector<double> predict_mean_imputation(const MeanImputationModel& m, const Dataset& test) {
  const RowMatrix filled = mean_impute(test, m.means);
  std::vector<double> probs(test.rows());
  for (int i = 0; i < test.rows(); ++i) {
    double eta = m.beta[0];
    for (int j = 0; j < test.dim(); ++j) eta += m.beta[j + 1] * filled(i, j);
    probs[i] = dist::sigmoid(eta);
  }
  return probs;
}

void SaemConfig::validate() const {
  if (max_iters < 1) throw ConfigError("SAEM max_iters must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("SAEM tol must be > 0");
  if (burn_in < 0 || burn_in >= max_iters) throw ConfigError("SAEM burn-in must satisfy 0 <= B < max_iters");
  if (!(step_exponent > 0.5 && step_exponent <= 1.0)) throw ConfigError("SAEM step exponent must lie in (0.5, 1]");
  if (mh_steps < 1) throw ConfigError("SAEM MH steps must be >= 1");
}

double saem_step_size(int t, int burn_in, double a) {
  return t <= burn_in ? 1.0 : std::pow(static_cast<double>(t - burn_in), -a);
}

std::vector<double> mh_impute_row(std::span<const double> x, std::span<const std::uint8_t> mask, int y,
                                  std::span<const double> current, std::span<const double> beta,
                                  const dist::GaussianCond& proposal, int steps,
                                  std::mt19937_64& rng, int* accepted) {
  if (current.size() != proposal.missing.size()) throw DimensionError("mh_impute_row: state size");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> full(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) full[j] = mask[j] ? x[j] : 0.0;
  auto loglik_at = [&](std::span<const double> mis) {
    for (std::size_t a = 0; a < mis.size(); ++a) full[proposal.missing[a]] = mis[a];
    return model::loglik_y(y, full, beta);
  };
  std::vector<double> state(current.begin(), current.end());
  double ll_state = loglik_at(state);
  for (int s = 0; s < steps; ++s) {
    std::vector<double> cand = draw_conditional(proposal, rng);
    const double ll_cand = loglik_at(cand);
    // Prior and proposal densities cancel; the ratio is p(y | x') / p(y | x).
    if (std::log(unif(rng)) < ll_cand - ll_state) {
      state = std::move(cand);
      ll_state = ll_cand;
      if (accepted) ++*accepted;
    }
  }
  return state;
}

SaemResult saem_fit(const Dataset& data, const SaemConfig& cfg) {
  cfg.validate();
  data.validate();
  const int n = data.rows();
  const int d = data.dim();
  std::mt19937_64 rng(cfg.seed);

  RowMatrix sample = mean_impute(data);
  SaemResult res;
  res.imputed = sample;
  Eigen::VectorXd s1 = sample.colwise().sum().transpose();
  Eigen::MatrixXd s2 = sample.transpose() * sample;
  const Eigen::MatrixXd jitter = 1e-6 * Eigen::MatrixXd::Identity(d, d);

  auto m_step_moments = [&](Eigen::VectorXd& mu, Eigen::MatrixXd& sigma) {
    mu = s1 / n;
    sigma = s2 / n - mu * mu.transpose() + jitter;
    sigma = 0.5 * (sigma + sigma.transpose());
  };

  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  m_step_moments(mu, sigma);
  std::vector<double> beta = fit_logistic(res.imputed, data.y).beta;
  const bool complete = data.missing_count() == 0;

  for (int t = 1; t <= cfg.max_iters; ++t) {
    // S-step.
    const std::vector<double> mu_v(mu.data(), mu.data() + d);
    const dist::CholFactor l = dist::CholFactor::from_covariance(sigma);
    for (int i = 0; i < n && !complete; ++i) {
      if (data.missing_in_row(i) == 0) continue;
      const dist::GaussianCond prop = condition_row(data.row(i), data.row_mask(i), mu_v, l);
      std::vector<double> cur(prop.missing.size());
      for (std::size_t a = 0; a < cur.size(); ++a) cur[a] = sample(i, prop.missing[a]);
      const std::vector<double> next =
          mh_impute_row(data.row(i), data.row_mask(i), data.y[i], cur, beta, prop, cfg.mh_steps, rng);
      for (std::size_t a = 0; a < next.size(); ++a) sample(i, prop.missing[a]) = next[a];
    }

    // SA-step.
    const double gamma = saem_step_size(t, cfg.burn_in, cfg.step_exponent);
    s1 += gamma * (Eigen::VectorXd(sample.colwise().sum().transpose()) - s1);
    s2 += gamma * (Eigen::MatrixXd(sample.transpose() * sample) - s2);
    res.imputed += gamma * (sample - res.imputed);

    // M-step.
    Eigen::VectorXd new_mu;
    Eigen::MatrixXd new_sigma;
    m_step_moments(new_mu, new_sigma);
    // The logistic term is SA-averaged through its per-draw maximizer; IRLS on
    // the smoothed matrix would regress y on E[x | y, x_obs] and inflate beta.
    const std::vector<double> draw_beta = fit_logistic(sample, data.y, beta).beta;
    std::vector<double> new_beta(beta.size());
    for (std::size_t k = 0; k < beta.size(); ++k) new_beta[k] = beta[k] + gamma * (draw_beta[k] - beta[k]);

    double max_abs = (new_mu - mu).cwiseAbs().maxCoeff();
    max_abs = std::max(max_abs, (new_sigma - sigma).cwiseAbs().maxCoeff());
    double change = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) {
      const double db = new_beta[k] - beta[k];
      change += db * db;
      max_abs = std::max(max_abs, std::abs(db));
    }
    mu = new_mu;
    sigma = new_sigma;
    beta = new_beta;
    res.trace.push_back({t, gamma, change, max_abs, beta});
    if (complete || (t > cfg.burn_in && change < cfg.tol)) {
      res.converged = true;
      break;
    }
  }
  res.beta = beta;
  res.mu.assign(mu.data(), mu.data() + d);
  res.sigma = sigma;
  return res;
}

std::vector<double> saem_predict(const SaemResult& fit, const Dataset& test, int s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const dist::CholFactor l = dist::CholFactor::from_covariance(fit.sigma);
  std::vector<double> probs(test.rows());
  std::vector<double> full(test.dim());
  for (int i = 0; i < test.rows(); ++i) {
    const auto x = test.row(i);
    const auto mask = test.row_mask(i);
    for (int j = 0; j < test.dim(); ++j) full[j] = mask[j] ? x[j] : 0.0;
    auto prob_at = [&]() {
      double eta = fit.beta[0];
      for (int j = 0; j < test.dim(); ++j) eta += fit.beta[j + 1] * full[j];
      return dist::sigmoid(eta);
    };
    if (test.missing_in_row(i) == 0) {
      probs[i] = prob_at();
      continue;
    }
    const dist::GaussianCond c = condition_row(x, mask, fit.mu, l);
    double acc = 0.0;
    for (int k = 0; k < s; ++k) {
      const std::vector<double> mis = draw_conditional(c, rng);
      for (std::size_t a = 0; a < mis.size(); ++a) full[c.missing[a]] = mis[a];
      acc += prob_at();
    }
    probs[i] = acc / s;
  }
  return probs;
}

}  // namespace avlr::base
