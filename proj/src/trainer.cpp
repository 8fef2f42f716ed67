#include "avlr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "avlr/baselines.hpp"
#include "avlr/errors.hpp"
#include "avlr/objective.hpp"

namespace avlr::train {

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (k < 1) throw ConfigError("K must be >= 1");
  if (hidden < 1) throw ConfigError("hidden width must be >= 1");
}

Standardizer Standardizer::fit(const Dataset& data) {
  const int d = data.dim();
  Standardizer s;
  s.center.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  for (int j = 0; j < d; ++j) {
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < data.rows(); ++i) {
      if (data.mask(i, j)) {
        sum += data.x(i, j);
        ++n;
      }
    }
    if (n == 0) throw DataError("column " + std::to_string(j) + " has no observed value");
    const double mean = sum / n;
    double ss = 0.0;
    for (int i = 0; i < data.rows(); ++i) {
      if (data.mask(i, j)) ss += (data.x(i, j) - mean) * (data.x(i, j) - mean);
    }
    const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    s.center[j] = mean;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(int d) {
  return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

Dataset Standardizer::apply(const Dataset& data) const {
  Dataset out = data;
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.dim(); ++j) {
      if (out.mask(i, j)) out.x(i, j) = (out.x(i, j) - center[j]) / scale[j];
    }
  }
  if (out.complete) {
    for (int i = 0; i < out.rows(); ++i) {
      for (int j = 0; j < out.dim(); ++j) {
        (*out.complete)(i, j) = ((*out.complete)(i, j) - center[j]) / scale[j];
      }
    }
  }
  return out;
}

std::vector<double> Standardizer::apply_row(std::span<const double> x) const {
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - center[j]) / scale[j];
  return z;
}

std::vector<double> Standardizer::invert_row(std::span<const double> z) const {
  std::vector<double> x(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) x[j] = center[j] + scale[j] * z[j];
  return x;
}

std::vector<double> FittedModel::original_beta() const {
  const auto& b = params.theta.beta;
  std::vector<double> out(b.size());
  out[0] = b[0];
  for (std::size_t j = 0; j + 1 < b.size(); ++j) {
    out[j + 1] = b[j + 1] / standardizer.scale[j];
    out[0] -= b[j + 1] * standardizer.center[j] / standardizer.scale[j];
  }
  return out;
}

std::vector<double> FittedModel::original_mu() const { return standardizer.invert_row(params.theta.mu); }

Eigen::MatrixXd FittedModel::original_covariance() const {
  const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(
      standardizer.scale.data(), static_cast<Eigen::Index>(standardizer.scale.size()));
  return s.asDiagonal() * params.theta.covariance() * s.asDiagonal();
}

std::optional<model::MissParams> FittedModel::original_psi() const {
  if (!params.psi) return std::nullopt;
  model::MissParams out = *params.psi;
  const int d = out.d;
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      out.at(j, k + 1) = params.psi->at(j, k + 1) / standardizer.scale[k];
      out.at(j, 0) -= params.psi->at(j, k + 1) * standardizer.center[k] / standardizer.scale[k];
    }
  }
  return out;
}

Parameters init_params(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  const int n = data.rows();
  const int d = data.dim();
  if (n == 0) throw DataError("init_params: empty dataset");

  std::vector<double> mu(d, 0.0);
  for (int j = 0; j < d; ++j) {
    double sum = 0.0;
    int cnt = 0;
    for (int i = 0; i < n; ++i) {
      if (data.mask(i, j)) {
        sum += data.x(i, j);
        ++cnt;
      }
    }
    if (cnt == 0) throw DataError("column " + std::to_string(j) + " is fully missing");
    mu[j] = sum / cnt;
  }

  Eigen::MatrixXd centered(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) centered(i, j) = data.mask(i, j) ? data.x(i, j) - mu[j] : 0.0;
  }
  const double denom = n > 1 ? n - 1.0 : 1.0;
  Eigen::MatrixXd sigma = centered.transpose() * centered / denom;
  sigma += 1e-3 * Eigen::MatrixXd::Identity(d, d);

  // beta0 from the mean-imputed design. Falls back to zero when the Newton
  // fit fails (e.g. separable labels).
  RowMatrix filled(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) filled(i, j) = data.mask(i, j) ? data.x(i, j) : mu[j];
  }
  std::vector<double> beta0(d + 1, 0.0);
  try {
    beta0 = base::fit_logistic(filled, data.y).beta;
  } catch (const NumericError&) {
  }
  Parameters p;
  p.theta = model::ModelParams::from_moments(beta0, mu, sigma);
  if (cfg.mnar) p.psi = model::MissParams::zeros(d);
  std::mt19937_64 rng(cfg.seed);
  p.phi = enc::EncoderParams::init(d, cfg.hidden, rng);
  return p;
}

namespace {

[[noreturn]] void report_nan(const Parameters& params, std::span<const obj::RowRef> batch,
                             std::span<const int> index, std::span<const std::vector<double>> noise,
                             const obj::ObjectiveConfig& ocfg, int epoch, int batch_no) {
  int offending = -1;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!std::isfinite(obj::iwelbo_row(params, batch[i], noise[i], ocfg))) {
      offending = index[i];
      break;
    }
  }
  std::ostringstream msg;
  msg << "non-finite loss at epoch " << epoch << ", batch " << batch_no << ", row " << offending;
  throw NumericError(msg.str());
}

}  // namespace

FitResult fit(const Dataset& data, const TrainConfig& cfg, const EpochHook& hook) {
  cfg.validate();
  data.validate();

  FitResult result;
  FittedModel& fitted = result.model;
  fitted.mnar = cfg.mnar;
  fitted.standardizer = Standardizer::fit(data);
  const Dataset z = fitted.standardizer.apply(data);
  fitted.params = init_params(z, cfg);

  const std::vector<obj::RowRef> rows = obj::rows_of(z);
  const int n = z.rows();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const obj::ObjectiveConfig ocfg{cfg.k, cfg.mnar};
  std::vector<double> flat = fitted.params.flatten();
  diff::AdamState adam(flat.size(), cfg.learning_rate);
  diff::Tape tape;
  std::vector<obj::RowRef> batch;
  std::vector<int> batch_index;
  std::vector<std::vector<double>> noise;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batch_no = 0;
    for (int lo = 0; lo < n; lo += cfg.batch_size, ++batch_no) {
      const int hi = std::min(n, lo + cfg.batch_size);
      batch.clear();
      batch_index.clear();
      noise.clear();
      for (int b = lo; b < hi; ++b) {
        batch.push_back(rows[order[b]]);
        batch_index.push_back(order[b]);
        noise.push_back(obj::draw_noise(cfg.k, batch.back().missing(), rng));
      }
      const obj::BatchObjective bo = obj::objective_batch(fitted.params, batch, noise, ocfg, tape);
      if (!std::isfinite(bo.loss)) report_nan(fitted.params, batch, batch_index, noise, ocfg, epoch, batch_no);
      epoch_loss += bo.loss;
      diff::adam_step(flat, bo.grad, adam);
      fitted.params.assign(flat);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = epoch_loss / n;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (hook) hook(fitted, rec);
    result.history.epochs.push_back(rec);
  }
  return result;
}

}  // namespace avlr::train
