#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "avlr/dataset.hpp"

namespace avlr::gen {

struct GenSpec {
  int n = 0;
  int d = 0;
  std::vector<double> mu;
  Eigen::MatrixXd sigma;
  std::vector<double> beta;  // intercept first, length d + 1
  std::uint64_t seed = 0;

  /// Throws ConfigError on bad shapes or a non-SPD covariance.
  void validate() const;
};

/// Declared benchmark constants: mu = 0, unit variances with 0.5 covariances,
/// beta = (0.5, 1, -1, 0.5, -0.5, 1), d = 5.
GenSpec benchmark_spec(int n, std::uint64_t seed);

struct CompleteData {
  RowMatrix x;
  std::vector<int> y;
};

CompleteData gen_complete(const GenSpec& spec);

enum class Mechanism { MCAR, MAR, MNAR, SelfMask, LogisticMech, SeqLogistic };

std::string to_string(Mechanism m);
/// Accepts the enumerator names case-insensitively plus "logistic" and
/// "seq_logistic". Throws ConfigError otherwise.
Mechanism parse_mechanism(const std::string& name);

/// Row j of `coef` is laid out as
///   [intercept, x_1..x_d, y, m_1..m_d]
/// where m_k = 1 - r_k is the missing indicator of an already generated
/// feature (only k > j is read, and only by SeqLogistic). The linear
/// predictor gives the probability that x_j is missing.
struct MechanismSpec {
  Mechanism kind = Mechanism::MCAR;
  double target_rate = 0.5;
  double p = 0.5;  // MCAR only
  Eigen::MatrixXd coef;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(coef.rows()); }
  static int width(int d) { return 2 * d + 2; }
  void validate() const;
};

inline constexpr double kSelfMaskSlope = 2.0;

/// Mechanism with its slope coefficients set (fixed published slopes for MAR and MNAR,
/// kSelfMaskSlope for SelfMask, seeded U(-1, 1) draws for LogisticMech and
/// SeqLogistic). Intercepts are left at the formula value and should be
/// calibrated.
MechanismSpec make_mechanism(Mechanism kind, int d, double target_rate, std::uint64_t seed);

struct MaskDraw {
  MaskMatrix mask;  // 1 = observed
  int redrawn_rows = 0;
  int forced_rows = 0;  // rows that stayed fully missing after 100 redraws
};

MaskDraw apply_mechanism(const RowMatrix& x, std::span<const int> y, const MechanismSpec& mech);

/// Per-feature missing rates of a mask.
std::vector<double> missing_rates(const MaskMatrix& mask);

struct CalibrationOptions {
  double tol = 0.01;
  int max_steps = 60;
  int sweeps = 3;
  double bound = 50.0;
};

/// Per-feature intercept search so that each feature's empirical missing rate
/// matches the target. MCAR keeps p = target when the realized rate is already
/// within tol and otherwise bisects p. Probes reuse mech.seed. Throws ConfigError when the
/// target cannot be bracketed within +-bound.
MechanismSpec calibrate_intercepts(const RowMatrix& x, std::span<const int> y, MechanismSpec mech,
                                   const CalibrationOptions& opt = {});

}  // namespace avlr::gen
