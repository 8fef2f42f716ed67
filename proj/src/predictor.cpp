#include "avlr/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "avlr/distributions.hpp"
#include "avlr/encoder.hpp"
#include "avlr/errors.hpp"
#include "avlr/objective.hpp"

namespace avlr::pred {

namespace {

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_mean_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s / static_cast<double>(v.size()));
}

std::vector<int> observed_indices(std::span<const std::uint8_t> mask) {
  std::vector<int> idx;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) idx.push_back(static_cast<int>(j));
  }
  return idx;
}

void check_mnar(const Parameters& params, bool mnar) {
  if (mnar && !params.psi) throw ConfigError("MNAR prediction requested without mechanism parameters");
}

}  // namespace

double ClassLogTerms::p1() const { return std::exp(log_term1 - log_add_exp(log_term0, log_term1)); }
double ClassLogTerms::p0() const { return std::exp(log_term0 - log_add_exp(log_term0, log_term1)); }

ClassLogTerms class_log_terms(const Parameters& params, std::span<const double> x,
                              std::span<const std::uint8_t> mask, const PredictConfig& cfg,
                              std::mt19937_64& rng) {
  if (cfg.s < 1) throw ArgumentError("predict: S must be >= 1");
  check_mnar(params, cfg.mnar);
  const auto& theta = params.theta;
  const std::vector<int> obs = observed_indices(mask);
  std::vector<double> x_full(x.size());
  std::vector<double> x_obs;
  for (std::size_t j = 0; j < x.size(); ++j) x_full[j] = mask[j] ? x[j] : 0.0;
  for (int j : obs) x_obs.push_back(x[j]);

  ClassLogTerms out;
  if (obs.size() == x.size()) {
    for (int c = 0; c < 2; ++c) {
      double t = model::loglik_y(c, x_full, theta.beta);
      if (cfg.mnar) t += model::loglik_r(mask, x_full, c, *params.psi);
      (c == 0 ? out.log_term0 : out.log_term1) = t;
    }
    return out;
  }

  const dist::GaussianCond cond = dist::gaussian_condition(theta.mu, theta.sigma_factor(), obs, x_obs);
  // Both classes reuse the same standard-normal draws.
  const int d_miss = static_cast<int>(x.size() - obs.size());
  const std::vector<double> noise = obj::draw_noise(cfg.s, d_miss, rng);
  std::vector<double> terms(cfg.s);
  for (int c = 0; c < 2; ++c) {
    const enc::VariationalPosterior q = enc::encode(x, mask, c, params.phi);
    for (int s = 0; s < cfg.s; ++s) {
      const std::span<const double> eps(noise.data() + static_cast<std::size_t>(s) * d_miss, d_miss);
      const std::vector<double> x_mis = enc::sample_posterior(q, eps);
      for (int a = 0; a < q.dim(); ++a) x_full[q.missing[a]] = x_mis[a];
      double t = model::loglik_y(c, x_full, theta.beta) + dist::mvn_logpdf(x_mis, cond.mean, cond.factor) -
                 enc::q_logpdf(q, x_mis);
      if (cfg.mnar) t += model::loglik_r(mask, x_full, c, *params.psi);
      terms[s] = t;
    }
    (c == 0 ? out.log_term0 : out.log_term1) = log_mean_exp(terms);
  }
  if (!std::isfinite(out.log_term0) || !std::isfinite(out.log_term1)) {
    throw NumericError("predict: non-finite class term");
  }
  return out;
}

double predict_proba(const Parameters& params, std::span<const double> x,
                     std::span<const std::uint8_t> mask, const PredictConfig& cfg,
                     std::mt19937_64& rng) {
  if (!cfg.mnar && std::all_of(mask.begin(), mask.end(), [](std::uint8_t r) { return r != 0; })) {
    double eta = params.theta.beta[0];
    for (std::size_t j = 0; j < x.size(); ++j) eta += params.theta.beta[j + 1] * x[j];
    return dist::sigmoid(eta);
  }
  const double p = class_log_terms(params, x, mask, cfg, rng).p1();
  if (std::isnan(p)) throw NumericError("predict: NaN probability");
  return p;
}

int classify(double p, double threshold) { return p >= threshold ? 1 : 0; }

std::vector<double> impute_row(const Parameters& params, std::span<const double> x,
                               std::span<const std::uint8_t> mask, int y, int s, bool mnar,
                               std::mt19937_64& rng) {
  check_mnar(params, mnar);
  std::vector<double> x_full(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) x_full[j] = mask[j] ? x[j] : 0.0;
  if (std::all_of(mask.begin(), mask.end(), [](std::uint8_t r) { return r != 0; })) return x_full;

  const enc::VariationalPosterior q = enc::encode(x, mask, y, params.phi);
  const dist::CholFactor prior = params.theta.sigma_factor();
  std::vector<std::vector<double>> draws(s);
  std::vector<double> log_w(s);
  for (int k = 0; k < s; ++k) {
    const std::vector<double> eps = obj::draw_noise(1, q.dim(), rng);
    draws[k] = enc::sample_posterior(q, eps);
    for (int a = 0; a < q.dim(); ++a) x_full[q.missing[a]] = draws[k][a];
    log_w[k] = model::joint_log_weight(y, x_full, mask, enc::q_logpdf(q, draws[k]), params.theta,
                                       params.psi_ptr(), mnar);
  }
  const double m = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  std::vector<double> mean(q.dim(), 0.0);
  for (int k = 0; k < s; ++k) {
    const double w = std::exp(log_w[k] - m);
    total += w;
    for (int a = 0; a < q.dim(); ++a) mean[a] += w * draws[k][a];
  }
  for (int a = 0; a < q.dim(); ++a) x_full[q.missing[a]] = mean[a] / total;
  return x_full;
}

std::vector<double> predict_dataset(const train::FittedModel& model, const Dataset& data,
                                    const PredictConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> probs(data.rows());
  for (int i = 0; i < data.rows(); ++i) {
    const std::vector<double> z = model.standardizer.apply_row(data.row(i));
    probs[i] = predict_proba(model.params, z, data.row_mask(i), cfg, rng);
  }
  return probs;
}

RowMatrix impute_dataset(const train::FittedModel& model, const Dataset& data, int s,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RowMatrix out = data.x;
  for (int i = 0; i < data.rows(); ++i) {
    if (data.missing_in_row(i) == 0) continue;
    const std::vector<double> z = model.standardizer.apply_row(data.row(i));
    const std::vector<double> filled =
        impute_row(model.params, z, data.row_mask(i), data.y[i], s, model.mnar, rng);
    const std::vector<double> raw = model.standardizer.invert_row(filled);
    for (int j = 0; j < data.dim(); ++j) {
      if (!data.mask(i, j)) out(i, j) = raw[j];
    }
  }
  return out;
}

}  // namespace avlr::pred
