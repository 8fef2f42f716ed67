#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "avlr/dataset.hpp"
#include "avlr/parameters.hpp"
#include "avlr/trainer.hpp"

namespace avlr::pred {

struct PredictConfig {
  int s = 100;  // draws per class
  double threshold = 0.5;
  bool mnar = false;
};

/// Log of the per-class importance-sampling terms sharing one denominator.
struct ClassLogTerms {
  double log_term0 = 0.0;
  double log_term1 = 0.0;
  double p1() const;
  double p0() const;
};

/// Class-enumerated importance sampling of P(y = c, r | x_obs) for c in {0, 1}.
/// Fully observed rows are evaluated exactly.
ClassLogTerms class_log_terms(const Parameters& params, std::span<const double> x,
                              std::span<const std::uint8_t> mask, const PredictConfig& cfg,
                              std::mt19937_64& rng);

/// P(y = 1 | x_obs, r). Exactly sigmoid(beta . [1, x]) for complete rows
/// under the ignorable model.
double predict_proba(const Parameters& params, std::span<const double> x,
                     std::span<const std::uint8_t> mask, const PredictConfig& cfg,
                     std::mt19937_64& rng);

/// 1 iff p >= threshold (ties go to the positive class).
int classify(double p, double threshold = 0.5);

/// Posterior-mean completion of one row by self-normalized importance
/// sampling with the encoder as proposal (label known).
std::vector<double> impute_row(const Parameters& params, std::span<const double> x,
                               std::span<const std::uint8_t> mask, int y, int s, bool mnar,
                               std::mt19937_64& rng);

/// Probabilities for every row of a raw-scale dataset.
std::vector<double> predict_dataset(const train::FittedModel& model, const Dataset& data,
                                    const PredictConfig& cfg, std::uint64_t seed);

/// Raw-scale completed training matrix (observed cells untouched).
RowMatrix impute_dataset(const train::FittedModel& model, const Dataset& data, int s,
                         std::uint64_t seed);

}  // namespace avlr::pred
