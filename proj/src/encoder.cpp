#include "avlr/encoder.hpp"

#include <cmath>

#include "avlr/errors.hpp"

namespace avlr::enc {

namespace {

std::vector<double> glorot(int fan_out, int fan_in, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> u(-a, a);
  std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
  for (double& v : w) v = u(rng);
  return w;
}

std::vector<int> missing_indices(std::span<const std::uint8_t> r) {
  std::vector<int> m;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (!r[j]) m.push_back(static_cast<int>(j));
  }
  if (m.empty()) throw ArgumentError("encode: row has no missing coordinate; bypass the encoder");
  return m;
}

void affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
            std::vector<double>& out) {
  const std::size_t rows = b.size();
  const std::size_t cols = x.size();
  out.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = b[r];
    for (std::size_t c = 0; c < cols; ++c) s += w[r * cols + c] * x[c];
    out[r] = s;
  }
}

}  // namespace

EncoderParams EncoderParams::init(int d, int hidden, std::mt19937_64& rng) {
  if (d < 1 || hidden < 1) throw ArgumentError("encoder needs d >= 1 and hidden >= 1");
  EncoderParams p = zeros(d, hidden);
  p.w1 = glorot(hidden, p.input_size(), rng);
  p.w_mean = glorot(d, hidden, rng);
  p.w_chol = glorot(p.chol_size(), hidden, rng);
  return p;
}

EncoderParams EncoderParams::zeros(int d, int hidden) {
  if (d < 1 || hidden < 1) throw ArgumentError("encoder needs d >= 1 and hidden >= 1");
  EncoderParams p;
  p.d = d;
  p.hidden = hidden;
  p.w1.assign(static_cast<std::size_t>(hidden) * p.input_size(), 0.0);
  p.b1.assign(hidden, 0.0);
  p.w_mean.assign(static_cast<std::size_t>(d) * hidden, 0.0);
  p.b_mean.assign(d, 0.0);
  p.w_chol.assign(static_cast<std::size_t>(p.chol_size()) * hidden, 0.0);
  p.b_chol.assign(p.chol_size(), 0.0);
  return p;
}

std::vector<double> encoder_input(std::span<const double> x, std::span<const std::uint8_t> r, int y) {
  if (x.size() != r.size()) throw DimensionError("encoder_input: mask size differs from x");
  std::vector<double> in(2 * x.size() + 1);
  for (std::size_t j = 0; j < x.size(); ++j) {
    in[j] = r[j] ? x[j] : 0.0;
    in[x.size() + j] = r[j] ? 1.0 : 0.0;
  }
  in.back() = static_cast<double>(y);
  return in;
}

VariationalPosterior encode(std::span<const double> x, std::span<const std::uint8_t> r, int y,
                            const EncoderParams& phi, int row) {
  if (x.size() != static_cast<std::size_t>(phi.d)) throw DimensionError("encode: row size differs from d");
  VariationalPosterior post;
  post.row = row;
  post.missing = missing_indices(r);

  const std::vector<double> in = encoder_input(x, r, y);
  std::vector<double> h, mean_full, ell_full;
  affine(phi.w1, phi.b1, in, h);
  for (double& v : h) v = std::tanh(v);
  affine(phi.w_mean, phi.b_mean, h, mean_full);
  affine(phi.w_chol, phi.b_chol, h, ell_full);
  const dist::CholFactor full = dist::chol_from_unconstrained(ell_full);

  const int m = post.dim();
  post.mean.resize(m);
  std::vector<double> packed(static_cast<std::size_t>(m) * (m + 1) / 2);
  for (int a = 0; a < m; ++a) {
    post.mean[a] = mean_full[post.missing[a]];
    for (int b = 0; b <= a; ++b) packed[diff::tri_index(a, b)] = full(post.missing[a], post.missing[b]);
  }
  post.factor = dist::CholFactor(m, std::move(packed));
  return post;
}

double q_logpdf(const VariationalPosterior& post, std::span<const double> x_mis) {
  if (x_mis.size() != post.missing.size()) throw DimensionError("q_logpdf: dimension mismatch");
  return dist::mvn_logpdf(x_mis, post.mean, post.factor);
}

std::vector<double> sample_posterior(const VariationalPosterior& post, std::span<const double> eps) {
  return dist::reparam_sample(post.mean, post.factor, eps);
}

EncoderVars register_encoder(diff::Tape& tape, const EncoderParams& phi) {
  return {tape.leaf(phi.w1),     tape.leaf(phi.b1),     tape.leaf(phi.w_mean),
          tape.leaf(phi.b_mean), tape.leaf(phi.w_chol), tape.leaf(phi.b_chol)};
}

PosteriorVars encode(diff::Tape& tape, const EncoderVars& phi, std::span<const double> x,
                     std::span<const std::uint8_t> r, int y) {
  PosteriorVars post;
  post.missing = missing_indices(r);
  const diff::Var in = tape.constant(encoder_input(x, r, y));
  const diff::Var h = tape.tanh(tape.affine(in, phi.w1, phi.b1));
  const diff::Var mean_full = tape.affine(h, phi.w_mean, phi.b_mean);
  const diff::Var ell_full = tape.affine(h, phi.w_chol, phi.b_chol);
  post.mean = tape.gather(mean_full, post.missing);
  post.factor = tape.tri_principal(tape.chol_from_unconstrained(ell_full), post.missing);
  return post;
}

diff::Var q_logpdf(diff::Tape& tape, const PosteriorVars& post, diff::Var x_mis) {
  if (tape.size(x_mis) != post.missing.size()) throw DimensionError("q_logpdf: dimension mismatch");
  return dist::mvn_logpdf(tape, x_mis, post.mean, post.factor);
}

diff::Var sample_posterior(diff::Tape& tape, const PosteriorVars& post, diff::Var eps) {
  return dist::reparam_sample(tape, post.mean, post.factor, eps);
}

}  // namespace avlr::enc
