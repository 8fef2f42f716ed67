#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "avlr/diffcore.hpp"
#include "avlr/distributions.hpp"

namespace avlr::enc {

/// One-hidden-layer inference network. Input is [x zero-filled, mask, y]
/// (length 2d + 1); heads emit a full-d mean and a full unconstrained
/// Cholesky vector of length d(d + 1)/2. All matrices row-major.
struct EncoderParams {
  int d = 0;
  int hidden = 0;
  std::vector<double> w1, b1;          // hidden x (2d + 1), hidden
  std::vector<double> w_mean, b_mean;  // d x hidden, d
  std::vector<double> w_chol, b_chol;  // d(d+1)/2 x hidden, d(d+1)/2

  int input_size() const { return 2 * d + 1; }
  int chol_size() const { return d * (d + 1) / 2; }

  /// Glorot-uniform weights, zero biases (unit initial posterior scales).
  static EncoderParams init(int d, int hidden, std::mt19937_64& rng);
  static EncoderParams zeros(int d, int hidden);
};

/// q(x_mis | x_obs, y, r) for one row, restricted to its missing coordinates.
struct VariationalPosterior {
  int row = -1;
  std::vector<int> missing;
  std::vector<double> mean;
  dist::CholFactor factor;
  int dim() const { return static_cast<int>(missing.size()); }
};

/// Network input [x with missing cells zeroed, r, y].
std::vector<double> encoder_input(std::span<const double> x, std::span<const std::uint8_t> r, int y);

/// Throws ArgumentError when the row has no missing coordinate.
VariationalPosterior encode(std::span<const double> x, std::span<const std::uint8_t> r, int y,
                            const EncoderParams& phi, int row = -1);

double q_logpdf(const VariationalPosterior& post, std::span<const double> x_mis);
std::vector<double> sample_posterior(const VariationalPosterior& post, std::span<const double> eps);

struct EncoderVars {
  diff::Var w1, b1, w_mean, b_mean, w_chol, b_chol;
};

EncoderVars register_encoder(diff::Tape& tape, const EncoderParams& phi);

struct PosteriorVars {
  std::vector<int> missing;
  diff::Var mean;
  diff::Var factor;  // packed restricted factor
};

PosteriorVars encode(diff::Tape& tape, const EncoderVars& phi, std::span<const double> x,
                     std::span<const std::uint8_t> r, int y);
diff::Var q_logpdf(diff::Tape& tape, const PosteriorVars& post, diff::Var x_mis);
diff::Var sample_posterior(diff::Tape& tape, const PosteriorVars& post, diff::Var eps);

}  // namespace avlr::enc
