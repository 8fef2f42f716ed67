#pragma once

#include <optional>
#include <span>
#include <vector>

#include "avlr/diffcore.hpp"
#include "avlr/encoder.hpp"
#include "avlr/model.hpp"

namespace avlr {

/// Everything the optimizer updates: theta, optional psi, phi.
/// Flattened order: beta, mu, sigma_chol, [psi], w1, b1, w_mean, b_mean, w_chol, b_chol.
struct Parameters {
  model::ModelParams theta;
  std::optional<model::MissParams> psi;
  enc::EncoderParams phi;

  const model::MissParams* psi_ptr() const { return psi ? &*psi : nullptr; }
  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

struct ParamVars {
  model::ModelVars model;
  enc::EncoderVars encoder;
};

ParamVars register_params(diff::Tape& tape, const Parameters& params);

/// Gradient of the last backward pass, in Parameters::flatten order.
std::vector<double> collect_gradient(const diff::Tape& tape, const ParamVars& vars,
                                     const Parameters& params);

}  // namespace avlr
