#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "avlr/dataset.hpp"
#include "avlr/distributions.hpp"

namespace avlr::base {

/// Observed column means. Throws DataError on a fully missing column.
std::vector<double> column_means(const Dataset& data);

/// Missing cells replaced by observed column means.
RowMatrix mean_impute(const Dataset& data);
RowMatrix mean_impute(const Dataset& data, std::span<const double> means);

struct LogisticFit {
  std::vector<double> beta;  // intercept first
  int iterations = 0;
  bool converged = false;
};

/// Newton-Raphson (IRLS) maximum likelihood with step halving. Throws
/// NumericError when it fails to converge.
LogisticFit fit_logistic(const RowMatrix& x, std::span<const int> y,
                         std::span<const double> start = {}, int max_iter = 100,
                         double tol = 1e-10);

struct MeanImputationModel {
  std::vector<double> means;
  std::vector<double> beta;
  Eigen::MatrixXd covariance;
};

MeanImputationModel fit_mean_imputation(const Dataset& train);
/// Test rows are completed with the training means before scoring.
std::vector<double> predict_mean_imputation(const MeanImputationModel& m, const Dataset& test);

struct SaemConfig {
  int max_iters = 120;
  double tol = 1e-4;
  int burn_in = 20;
  double step_exponent = 0.7;
  int mh_steps = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// gamma_t = 1 for t <= burn_in, else (t - burn_in)^(-a).
double saem_step_size(int t, int burn_in, double a);

/// Independence Metropolis-Hastings targeting p(x_mis | y, x_obs; theta) with
/// the conditional prior as proposal. `current` holds the chain state over
/// the missing coordinates. Returns the final state; `accepted` counts moves.
std::vector<double> mh_impute_row(std::span<const double> x, std::span<const std::uint8_t> mask, int y,
                                  std::span<const double> current, std::span<const double> beta,
                                  const dist::GaussianCond& proposal, int steps,
                                  std::mt19937_64& rng, int* accepted = nullptr);

struct SaemIteration {
  int iter = 0;
  double gamma = 0.0;
  double change = 0.0;   // squared norm of the beta update; the stopping statistic
  double max_abs = 0.0;  // max absolute change over (beta, mu, Sigma)
  std::vector<double> beta;
};

struct SaemResult {
  std::vector<double> beta;
  std::vector<double> mu;
  Eigen::MatrixXd sigma;
  RowMatrix imputed;  // SA-smoothed completed design
  std::vector<SaemIteration> trace;
  bool converged = false;
};

SaemResult saem_fit(const Dataset& data, const SaemConfig& cfg);

/// Monte-Carlo predictive P(y = 1 | x_obs) with `s` conditional-prior draws per row.
std::vector<double> saem_predict(const SaemResult& fit, const Dataset& test, int s, std::uint64_t seed);

}  // namespace avlr::base
