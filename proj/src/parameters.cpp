#include "avlr/parameters.hpp"

#include <algorithm>

#include "avlr/errors.hpp"

namespace avlr {

namespace {

template <typename Fn>
void for_each_block(const Parameters& p, Fn&& fn) {
  fn(p.theta.beta);
  fn(p.theta.mu);
  fn(p.theta.sigma_chol);
  if (p.psi) fn(p.psi->coef);
  fn(p.phi.w1);
  fn(p.phi.b1);
  fn(p.phi.w_mean);
  fn(p.phi.b_mean);
  fn(p.phi.w_chol);
  fn(p.phi.b_chol);
}

template <typename Fn>
void for_each_block_mut(Parameters& p, Fn&& fn) {
  fn(p.theta.beta);
  fn(p.theta.mu);
  fn(p.theta.sigma_chol);
  if (p.psi) fn(p.psi->coef);
  fn(p.phi.w1);
  fn(p.phi.b1);
  fn(p.phi.w_mean);
  fn(p.phi.b_mean);
  fn(p.phi.w_chol);
  fn(p.phi.b_chol);
}

}  // namespace

std::size_t Parameters::size() const {
  std::size_t n = 0;
  for_each_block(*this, [&](const std::vector<double>& b) { n += b.size(); });
  return n;
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  for_each_block(*this, [&](const std::vector<double>& b) { flat.insert(flat.end(), b.begin(), b.end()); });
  return flat;
}

void Parameters::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw DimensionError("Parameters::assign: flat vector has the wrong size");
  std::size_t pos = 0;
  for_each_block_mut(*this, [&](std::vector<double>& b) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), b.size(), b.begin());
    pos += b.size();
  });
}

ParamVars register_params(diff::Tape& tape, const Parameters& params) {
  return {model::register_model(tape, params.theta, params.psi_ptr()),
          enc::register_encoder(tape, params.phi)};
}

std::vector<double> collect_gradient(const diff::Tape& tape, const ParamVars& vars,
                                     const Parameters& params) {
  std::vector<double> g;
  g.reserve(params.size());
  auto take = [&](diff::Var v) {
    const auto part = tape.grad(v);
    g.insert(g.end(), part.begin(), part.end());
  };
  take(vars.model.beta);
  take(vars.model.mu);
  take(vars.model.sigma_chol);
  if (params.psi) take(vars.model.psi);
  take(vars.encoder.w1);
  take(vars.encoder.b1);
  take(vars.encoder.w_mean);
  take(vars.encoder.b_mean);
  take(vars.encoder.w_chol);
  take(vars.encoder.b_chol);
  return g;
}

}  // namespace avlr
