#include "avlr/objective.hpp"

#include <cmath>

#include "avlr/encoder.hpp"
#include "avlr/errors.hpp"

namespace avlr::obj {

int RowRef::missing() const {
  int n = 0;
  for (std::uint8_t r : mask) n += r ? 0 : 1;
  return n;
}

std::vector<RowRef> rows_of(const Dataset& data) {
  std::vector<RowRef> rows;
  rows.reserve(data.rows());
  for (int i = 0; i < data.rows(); ++i) rows.push_back({data.y[i], data.row(i), data.row_mask(i)});
  return rows;
}

diff::Var iw_average(diff::Tape& tape, diff::Var log_weights) {
  const auto k = static_cast<double>(tape.size(log_weights));
  return tape.shift(tape.logsumexp(log_weights), -std::log(k));
}

diff::Var iwelbo_row(diff::Tape& tape, const ParamVars& vars, const RowRef& row,
                     std::span<const double> noise, const ObjectiveConfig& cfg) {
  if (cfg.k < 1) throw ArgumentError("iwelbo_row: K must be >= 1");
  if (cfg.mnar && !vars.model.psi.valid()) {
    throw ConfigError("MNAR objective requested without mechanism parameters");
  }
  const std::size_t d = row.x.size();
  const int d_miss = row.missing();
  if (noise.size() != static_cast<std::size_t>(cfg.k) * d_miss) {
    throw DimensionError("iwelbo_row: noise must be K x (number of missing coordinates)");
  }

  std::vector<double> filled(d), r(d);
  for (std::size_t j = 0; j < d; ++j) {
    filled[j] = row.mask[j] ? row.x[j] : 0.0;
    r[j] = row.mask[j] ? 1.0 : 0.0;
  }
  const diff::Var base = tape.constant(filled);

  if (d_miss == 0) {
    // Every sample coincides: the bound is the joint log-density itself.
    return model::joint_log_weight(tape, row.y, base, r, tape.constant(0.0), vars.model, cfg.mnar);
  }

  const enc::PosteriorVars post = enc::encode(tape, vars.encoder, row.x, row.mask, row.y);
  std::vector<diff::Var> log_w;
  log_w.reserve(cfg.k);
  for (int s = 0; s < cfg.k; ++s) {
    const diff::Var eps = tape.constant(noise.subspan(static_cast<std::size_t>(s) * d_miss, d_miss));
    const diff::Var x_mis = enc::sample_posterior(tape, post, eps);
    const diff::Var x_full = tape.scatter(base, x_mis, post.missing);
    const diff::Var lq = enc::q_logpdf(tape, post, x_mis);
    log_w.push_back(model::joint_log_weight(tape, row.y, x_full, r, lq, vars.model, cfg.mnar));
  }
  return iw_average(tape, tape.concat(log_w));
}

double iwelbo_row(const Parameters& params, const RowRef& row, std::span<const double> noise,
                  const ObjectiveConfig& cfg) {
  diff::Tape tape;
  const ParamVars vars = register_params(tape, params);
  return tape.scalar(iwelbo_row(tape, vars, row, noise, cfg));
}

std::vector<double> draw_noise(int k, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eps(static_cast<std::size_t>(k) * dim);
  for (double& e : eps) e = normal(rng);
  return eps;
}

BatchObjective objective_batch(const Parameters& params, std::span<const RowRef> rows,
                               std::span<const std::vector<double>> noise,
                               const ObjectiveConfig& cfg, diff::Tape& tape) {
  if (noise.size() != rows.size()) throw DimensionError("objective_batch: one noise block per row");
  tape.clear();
  const ParamVars vars = register_params(tape, params);
  std::vector<diff::Var> bounds;
  bounds.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bounds.push_back(iwelbo_row(tape, vars, rows[i], noise[i], cfg));
  }
  BatchObjective out;
  if (bounds.empty()) {
    out.grad.assign(params.size(), 0.0);
    return out;
  }
  const diff::Var loss = tape.neg(tape.sum(tape.concat(bounds)));
  tape.backward(loss);
  out.loss = tape.scalar(loss);
  out.grad = collect_gradient(tape, vars, params);
  return out;
}

BatchObjective objective_batch(const Parameters& params, std::span<const RowRef> rows,
                               std::mt19937_64& rng, const ObjectiveConfig& cfg, diff::Tape& tape) {
  std::vector<std::vector<double>> noise;
  noise.reserve(rows.size());
  for (const RowRef& row : rows) noise.push_back(draw_noise(cfg.k, row.missing(), rng));
  return objective_batch(params, rows, noise, cfg, tape);
}

}  // namespace avlr::obj
