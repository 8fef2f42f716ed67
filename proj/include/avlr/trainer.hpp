#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "avlr/dataset.hpp"
#include "avlr/parameters.hpp"

namespace avlr::train {

struct TrainConfig {
  int epochs = 150;
  int batch_size = 256;
  double learning_rate = 1e-3;
  int k = 5;
  bool mnar = false;
  std::uint64_t seed = 0;
  int hidden = 128;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;  // mean negative bound per row
  double seconds = 0.0;
  std::optional<double> eval_auc;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

/// Per-column affine map to zero observed mean and unit observed std.
struct Standardizer {
  std::vector<double> center;
  std::vector<double> scale;

  static Standardizer fit(const Dataset& data);
  static Standardizer identity(int d);
  Dataset apply(const Dataset& data) const;
  std::vector<double> apply_row(std::span<const double> x) const;
  std::vector<double> invert_row(std::span<const double> z) const;
};

/// Trained AV-LR model. `params` live on the standardized scale; the
/// original_* accessors map them back exactly.
struct FittedModel {
  Standardizer standardizer;
  Parameters params;
  bool mnar = false;

  std::vector<double> original_beta() const;
  std::vector<double> original_mu() const;
  Eigen::MatrixXd original_covariance() const;
  /// Mechanism coefficients on the original scale (MNAR only).
  std::optional<model::MissParams> original_psi() const;
};

/// mu0 and Sigma0 from observed moments, beta0 from a logistic fit on the
/// mean-imputed design (zero if that fit fails), phi0 Glorot, psi0 = 0.
/// Throws DataError if a column has no observed value.
Parameters init_params(const Dataset& data, const TrainConfig& cfg);

struct FitResult {
  FittedModel model;
  TrainHistory history;
};

/// Called after every epoch; may fill record.eval_auc.
using EpochHook = std::function<void(const FittedModel&, EpochRecord&)>;

FitResult fit(const Dataset& data, const TrainConfig& cfg, const EpochHook& hook = {});

}  // namespace avlr::train
