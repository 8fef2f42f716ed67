#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "avlr/dataset.hpp"
#include "avlr/diffcore.hpp"
#include "avlr/parameters.hpp"

namespace avlr::obj {

struct ObjectiveConfig {
  int k = 5;  // importance samples per row
  bool mnar = false;
};

/// One training row. Missing cells of x may hold anything (NaN included).
struct RowRef {
  int y = 0;
  std::span<const double> x;
  std::span<const std::uint8_t> mask;

  int missing() const;
};

std::vector<RowRef> rows_of(const Dataset& data);

/// logsumexp(log_weights) - ln K.
diff::Var iw_average(diff::Tape& tape, diff::Var log_weights);

/// K-sample importance-weighted bound for one row. `noise` is K x d_i,
/// row-major, with d_i the number of missing coordinates (may be 0).
diff::Var iwelbo_row(diff::Tape& tape, const ParamVars& vars, const RowRef& row,
                     std::span<const double> noise, const ObjectiveConfig& cfg);

double iwelbo_row(const Parameters& params, const RowRef& row, std::span<const double> noise,
                  const ObjectiveConfig& cfg);

/// K x d standard-normal draws.
std::vector<double> draw_noise(int k, int dim, std::mt19937_64& rng);

struct BatchObjective {
  double loss = 0.0;           // -sum of row bounds
  std::vector<double> grad;    // d loss / d params, flatten order
};

/// Frozen-noise batch objective; noise[i] belongs to rows[i].
BatchObjective objective_batch(const Parameters& params, std::span<const RowRef> rows,
                               std::span<const std::vector<double>> noise,
                               const ObjectiveConfig& cfg, diff::Tape& tape);

/// Draws fresh noise for each row from rng in row order, then evaluates.
BatchObjective objective_batch(const Parameters& params, std::span<const RowRef> rows,
                               std::mt19937_64& rng, const ObjectiveConfig& cfg, diff::Tape& tape);

}  // namespace avlr::obj
