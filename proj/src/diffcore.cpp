#include "avlr/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avlr/errors.hpp"

namespace avlr::diff {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

double stable_sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

int triangular_dim(std::size_t packed_len) {
  if (packed_len == 0) return 0;
  const auto d = static_cast<std::size_t>(
      std::llround((std::sqrt(8.0 * static_cast<double>(packed_len) + 1.0) - 1.0) / 2.0));
  if (d * (d + 1) / 2 != packed_len) {
    throw ArgumentError("length " + std::to_string(packed_len) + " is not a triangular number");
  }
  return static_cast<int>(d);
}

Var Tape::push(Op op, std::size_t n, std::int32_t a, std::int32_t b, std::int32_t c) {
  Node nd;
  nd.op = op;
  nd.a = a;
  nd.b = b;
  nd.c = c;
  nd.off = vals_.size();
  nd.n = n;
  vals_.resize(vals_.size() + n, 0.0);
  nodes_.push_back(nd);
  has_grad_ = false;
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw ArgumentError("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

Var Tape::leaf(std::span<const double> values) {
  Var out = push(Op::kLeaf, values.size());
  std::copy(values.begin(), values.end(), val(out.id));
  return out;
}

Var Tape::constant(std::span<const double> values) {
  Var out = push(Op::kConst, values.size());
  std::copy(values.begin(), values.end(), val(out.id));
  return out;
}

Var Tape::constant(double value) {
  Var out = push(Op::kConst, 1);
  *val(out.id) = value;
  return out;
}

Var Tape::add(Var a, Var b) {
  require(node(a).n == node(b).n, "add: size mismatch");
  Var out = push(Op::kAdd, len(a.id), a.id, b.id);
  const double* x = val(a.id);
  const double* y = val(b.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) z[i] = x[i] + y[i];
  return out;
}

Var Tape::sub(Var a, Var b) {
  require(node(a).n == node(b).n, "sub: size mismatch");
  Var out = push(Op::kSub, len(a.id), a.id, b.id);
  const double* x = val(a.id);
  const double* y = val(b.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) z[i] = x[i] - y[i];
  return out;
}

Var Tape::mul(Var a, Var b) {
  require(node(a).n == node(b).n, "mul: size mismatch");
  Var out = push(Op::kMul, len(a.id), a.id, b.id);
  const double* x = val(a.id);
  const double* y = val(b.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) z[i] = x[i] * y[i];
  return out;
}

Var Tape::scale(Var a, double c) {
  node(a);
  Var out = push(Op::kScale, len(a.id), a.id);
  nodes_[out.id].k = c;
  const double* x = val(a.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) z[i] = c * x[i];
  return out;
}

Var Tape::shift(Var a, double c) {
  node(a);
  Var out = push(Op::kShift, len(a.id), a.id);
  nodes_[out.id].k = c;
  const double* x = val(a.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) z[i] = x[i] + c;
  return out;
}

Var Tape::exp(Var a) {
  node(a);
  Var out = push(Op::kExp, len(a.id), a.id);
  const double* x = val(a.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) z[i] = std::exp(x[i]);
  return out;
}

Var Tape::log(Var a) {
  node(a);
  Var out = push(Op::kLog, len(a.id), a.id);
  const double* x = val(a.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) z[i] = std::log(x[i]);
  return out;
}

Var Tape::tanh(Var a) {
  node(a);
  Var out = push(Op::kTanh, len(a.id), a.id);
  const double* x = val(a.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) z[i] = std::tanh(x[i]);
  return out;
}

Var Tape::softplus(Var a) {
  node(a);
  Var out = push(Op::kSoftplus, len(a.id), a.id);
  const double* x = val(a.id);
  double* z = val(out.id);
  for (std::size_t i = 0; i < len(out.id); ++i) {
    z[i] = std::max(x[i], 0.0) + std::log1p(std::exp(-std::abs(x[i])));
  }
  return out;
}

Var Tape::sum(Var a) {
  node(a);
  Var out = push(Op::kSum, 1, a.id);
  const double* x = val(a.id);
  double s = 0.0;
  for (std::size_t i = 0; i < len(a.id); ++i) s += x[i];
  *val(out.id) = s;
  return out;
}

Var Tape::dot(Var a, Var b) {
  require(node(a).n == node(b).n, "dot: size mismatch");
  Var out = push(Op::kDot, 1, a.id, b.id);
  const double* x = val(a.id);
  const double* y = val(b.id);
  double s = 0.0;
  for (std::size_t i = 0; i < len(a.id); ++i) s += x[i] * y[i];
  *val(out.id) = s;
  return out;
}

Var Tape::logsumexp(Var a) {
  if (node(a).n == 0) throw ArgumentError("logsumexp of an empty vector");
  Var out = push(Op::kLogSumExp, 1, a.id);
  const double* x = val(a.id);
  const std::size_t n = len(a.id);
  const double m = *std::max_element(x, x + n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  *val(out.id) = m + std::log(s);
  return out;
}

Var Tape::affine(Var x, Var w, Var b) {
  const std::size_t cols = node(x).n;
  const std::size_t rows = node(b).n;
  require(node(w).n == rows * cols, "affine: weight shape does not match x and b");
  Var out = push(Op::kAffine, rows, x.id, w.id, b.id);
  const double* xv = val(x.id);
  const double* wv = val(w.id);
  const double* bv = val(b.id);
  double* z = val(out.id);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = wv + r * cols;
    double s = bv[r];
    for (std::size_t c = 0; c < cols; ++c) s += wr[c] * xv[c];
    z[r] = s;
  }
  return out;
}

Var Tape::gather(Var a, std::span<const int> idx) {
  const std::size_t n = node(a).n;
  for (int i : idx) require(i >= 0 && static_cast<std::size_t>(i) < n, "gather: index out of range");
  Var out = push(Op::kGather, idx.size(), a.id);
  nodes_[out.id].aux_off = iaux_.size();
  nodes_[out.id].aux_n = idx.size();
  iaux_.insert(iaux_.end(), idx.begin(), idx.end());
  const double* x = val(a.id);
  double* z = val(out.id);
  for (std::size_t k = 0; k < idx.size(); ++k) z[k] = x[idx[k]];
  return out;
}

Var Tape::scatter(Var base, Var src, std::span<const int> idx) {
  const std::size_t n = node(base).n;
  require(node(src).n == idx.size(), "scatter: source size differs from index count");
  for (int i : idx) require(i >= 0 && static_cast<std::size_t>(i) < n, "scatter: index out of range");
  Var out = push(Op::kScatter, n, base.id, src.id);
  nodes_[out.id].aux_off = iaux_.size();
  nodes_[out.id].aux_n = idx.size();
  iaux_.insert(iaux_.end(), idx.begin(), idx.end());
  const double* bv = val(base.id);
  const double* sv = val(src.id);
  double* z = val(out.id);
  std::copy(bv, bv + n, z);
  for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = sv[k];
  return out;
}

Var Tape::concat(std::span<const Var> parts) {
  std::size_t total = 0;
  for (Var p : parts) total += node(p).n;
  Var out = push(Op::kConcat, total);
  nodes_[out.id].aux_off = iaux_.size();
  nodes_[out.id].aux_n = parts.size();
  for (Var p : parts) iaux_.push_back(p.id);
  double* z = val(out.id);
  for (Var p : parts) {
    const double* x = val(p.id);
    z = std::copy(x, x + len(p.id), z);
  }
  return out;
}

Var Tape::chol_from_unconstrained(Var ell) {
  const int d = triangular_dim(node(ell).n);
  Var out = push(Op::kCholUnc, len(ell.id), ell.id);
  nodes_[out.id].dim = d;
  const double* x = val(ell.id);
  double* z = val(out.id);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < i; ++j) z[tri_index(i, j)] = x[tri_index(i, j)];
    const std::size_t ii = tri_index(i, i);
    z[ii] = std::max(std::exp(x[ii]), kDiagFloor);
  }
  return out;
}

Var Tape::tri_principal(Var packed, std::span<const int> idx) {
  const int d = triangular_dim(node(packed).n);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] >= 0 && idx[k] < d, "tri_principal: index out of range");
    require(k == 0 || idx[k] > idx[k - 1], "tri_principal: indices must be strictly increasing");
  }
  const int m = static_cast<int>(idx.size());
  Var out = push(Op::kTriPrincipal, static_cast<std::size_t>(m) * (m + 1) / 2, packed.id);
  nodes_[out.id].dim = m;
  nodes_[out.id].aux_off = iaux_.size();
  nodes_[out.id].aux_n = idx.size();
  iaux_.insert(iaux_.end(), idx.begin(), idx.end());
  const double* x = val(packed.id);
  double* z = val(out.id);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b <= a; ++b) z[tri_index(a, b)] = x[tri_index(idx[a], idx[b])];
    z[tri_index(a, a)] = std::max(z[tri_index(a, a)], kDiagFloor);
  }
  return out;
}

Var Tape::tri_matvec(Var packed, Var v) {
  const int d = triangular_dim(node(packed).n);
  require(node(v).n == static_cast<std::size_t>(d), "tri_matvec: vector size differs from factor");
  Var out = push(Op::kTriMatVec, d, packed.id, v.id);
  nodes_[out.id].dim = d;
  const double* l = val(packed.id);
  const double* x = val(v.id);
  double* z = val(out.id);
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += l[tri_index(i, j)] * x[j];
    z[i] = s;
  }
  return out;
}

Var Tape::tri_solve(Var packed, Var v) {
  const int d = triangular_dim(node(packed).n);
  require(node(v).n == static_cast<std::size_t>(d), "tri_solve: vector size differs from factor");
  Var out = push(Op::kTriSolve, d, packed.id, v.id);
  nodes_[out.id].dim = d;
  const double* l = val(packed.id);
  const double* x = val(v.id);
  double* z = val(out.id);
  for (int i = 0; i < d; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s -= l[tri_index(i, j)] * z[j];
    z[i] = s / l[tri_index(i, i)];
  }
  return out;
}

Var Tape::log_diag_sum(Var packed) {
  const int d = triangular_dim(node(packed).n);
  Var out = push(Op::kLogDiagSum, 1, packed.id);
  nodes_[out.id].dim = d;
  const double* l = val(packed.id);
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += std::log(l[tri_index(i, i)]);
  *val(out.id) = s;
  return out;
}

Var Tape::bernoulli_logit_logpmf(Var logits, std::span<const double> r) {
  require(node(logits).n == r.size(), "bernoulli_logit_logpmf: size mismatch");
  Var out = push(Op::kBernLogit, 1, logits.id);
  nodes_[out.id].aux_off = daux_.size();
  nodes_[out.id].aux_n = r.size();
  daux_.insert(daux_.end(), r.begin(), r.end());
  const double* u = val(logits.id);
  double s = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double p = std::clamp(stable_sigmoid(u[j]), kDiagFloor, 1.0 - kDiagFloor);
    s += r[j] * std::log(p) + (1.0 - r[j]) * std::log1p(-p);
  }
  *val(out.id) = s;
  return out;
}

std::span<const double> Tape::value(Var v) const {
  const Node& nd = node(v);
  return {vals_.data() + nd.off, nd.n};
}

double Tape::scalar(Var v) const {
  const Node& nd = node(v);
  if (nd.n != 1) throw DimensionError("scalar: node is not a scalar");
  return vals_[nd.off];
}

std::size_t Tape::size(Var v) const { return node(v).n; }

std::span<const double> Tape::grad(Var v) const {
  const Node& nd = node(v);
  if (!has_grad_) throw ArgumentError("grad requested before backward");
  return {adjs_.data() + nd.off, nd.n};
}

void Tape::clear() {
  nodes_.clear();
  vals_.clear();
  adjs_.clear();
  iaux_.clear();
  daux_.clear();
  has_grad_ = false;
}

void Tape::backward(Var out) {
  if (node(out).n != 1) throw DimensionError("backward: output must be scalar");
  adjs_.assign(vals_.size(), 0.0);
  *adj(out.id) = 1.0;
  for (std::size_t i = static_cast<std::size_t>(out.id) + 1; i-- > 0;) backward_node(i);
  has_grad_ = true;
}

void Tape::backward_node(std::size_t i) {
  const Node nd = nodes_[i];
  const std::int32_t self = static_cast<std::int32_t>(i);
  const double* g = adj(self);
  const double* z = val(self);
  const std::size_t n = nd.n;
  switch (nd.op) {
    case Op::kLeaf:
    case Op::kConst:
      break;
    case Op::kAdd: {
      double* ga = adj(nd.a);
      double* gb = adj(nd.b);
      for (std::size_t k = 0; k < n; ++k) {
        ga[k] += g[k];
        gb[k] += g[k];
      }
      break;
    }
    case Op::kSub: {
      double* ga = adj(nd.a);
      double* gb = adj(nd.b);
      for (std::size_t k = 0; k < n; ++k) {
        ga[k] += g[k];
        gb[k] -= g[k];
      }
      break;
    }
    case Op::kMul: {
      const double* x = val(nd.a);
      const double* y = val(nd.b);
      double* ga = adj(nd.a);
      double* gb = adj(nd.b);
      for (std::size_t k = 0; k < n; ++k) {
        ga[k] += g[k] * y[k];
        gb[k] += g[k] * x[k];
      }
      break;
    }
    case Op::kScale: {
      double* ga = adj(nd.a);
      for (std::size_t k = 0; k < n; ++k) ga[k] += nd.k * g[k];
      break;
    }
    case Op::kShift: {
      double* ga = adj(nd.a);
      for (std::size_t k = 0; k < n; ++k) ga[k] += g[k];
      break;
    }
    case Op::kExp: {
      double* ga = adj(nd.a);
      for (std::size_t k = 0; k < n; ++k) ga[k] += g[k] * z[k];
      break;
    }
    case Op::kLog: {
      const double* x = val(nd.a);
      double* ga = adj(nd.a);
      for (std::size_t k = 0; k < n; ++k) ga[k] += g[k] / x[k];
      break;
    }
    case Op::kTanh: {
      double* ga = adj(nd.a);
      for (std::size_t k = 0; k < n; ++k) ga[k] += g[k] * (1.0 - z[k] * z[k]);
      break;
    }
    case Op::kSoftplus: {
      const double* x = val(nd.a);
      double* ga = adj(nd.a);
      for (std::size_t k = 0; k < n; ++k) ga[k] += g[k] * stable_sigmoid(x[k]);
      break;
    }
    case Op::kSum: {
      double* ga = adj(nd.a);
      for (std::size_t k = 0; k < len(nd.a); ++k) ga[k] += g[0];
      break;
    }
    case Op::kDot: {
      const double* x = val(nd.a);
      const double* y = val(nd.b);
      double* ga = adj(nd.a);
      double* gb = adj(nd.b);
      for (std::size_t k = 0; k < len(nd.a); ++k) {
        ga[k] += g[0] * y[k];
        gb[k] += g[0] * x[k];
      }
      break;
    }
    case Op::kLogSumExp: {
      const double* x = val(nd.a);
      double* ga = adj(nd.a);
      for (std::size_t k = 0; k < len(nd.a); ++k) ga[k] += g[0] * std::exp(x[k] - z[0]);
      break;
    }
    case Op::kAffine: {
      const std::size_t cols = len(nd.a);
      const double* x = val(nd.a);
      const double* w = val(nd.b);
      double* gx = adj(nd.a);
      double* gw = adj(nd.b);
      double* gb = adj(nd.c);
      for (std::size_t r = 0; r < n; ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        gb[r] += gr;
        const double* wr = w + r * cols;
        double* gwr = gw + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
          gx[c] += wr[c] * gr;
          gwr[c] += gr * x[c];
        }
      }
      break;
    }
    case Op::kGather: {
      double* ga = adj(nd.a);
      const int* idx = iaux_.data() + nd.aux_off;
      for (std::size_t k = 0; k < nd.aux_n; ++k) ga[idx[k]] += g[k];
      break;
    }
    case Op::kScatter: {
      double* gbase = adj(nd.a);
      double* gsrc = adj(nd.b);
      const int* idx = iaux_.data() + nd.aux_off;
      // Entries overwritten by src receive no gradient from base.
      std::vector<char>& hit = scratch_flags_;
      hit.assign(n, 0);
      for (std::size_t k = 0; k < nd.aux_n; ++k) hit[idx[k]] = 1;
      for (std::size_t k = 0; k < n; ++k) {
        if (!hit[k]) gbase[k] += g[k];
      }
      for (std::size_t k = 0; k < nd.aux_n; ++k) gsrc[k] += g[idx[k]];
      break;
    }
    case Op::kConcat: {
      const int* parts = iaux_.data() + nd.aux_off;
      std::size_t pos = 0;
      for (std::size_t p = 0; p < nd.aux_n; ++p) {
        double* gp = adj(parts[p]);
        const std::size_t m = len(parts[p]);
        for (std::size_t k = 0; k < m; ++k) gp[k] += g[pos + k];
        pos += m;
      }
      break;
    }
    case Op::kCholUnc: {
      const double* x = val(nd.a);
      double* ga = adj(nd.a);
      for (int r = 0; r < nd.dim; ++r) {
        for (int c = 0; c < r; ++c) ga[tri_index(r, c)] += g[tri_index(r, c)];
        const std::size_t rr = tri_index(r, r);
        const double e = std::exp(x[rr]);
        if (e > kDiagFloor) ga[rr] += g[rr] * e;
      }
      break;
    }
    case Op::kTriPrincipal: {
      const double* x = val(nd.a);
      double* ga = adj(nd.a);
      const int* idx = iaux_.data() + nd.aux_off;
      for (int a = 0; a < nd.dim; ++a) {
        for (int b = 0; b < a; ++b) ga[tri_index(idx[a], idx[b])] += g[tri_index(a, b)];
        const std::size_t src = tri_index(idx[a], idx[a]);
        if (x[src] > kDiagFloor) ga[src] += g[tri_index(a, a)];
      }
      break;
    }
    case Op::kTriMatVec: {
      const double* l = val(nd.a);
      const double* v = val(nd.b);
      double* gl = adj(nd.a);
      double* gv = adj(nd.b);
      for (int r = 0; r < nd.dim; ++r) {
        for (int c = 0; c <= r; ++c) {
          gl[tri_index(r, c)] += g[r] * v[c];
          gv[c] += l[tri_index(r, c)] * g[r];
        }
      }
      break;
    }
    case Op::kTriSolve: {
      const double* l = val(nd.a);
      double* gl = adj(nd.a);
      double* gv = adj(nd.b);
      const int d = nd.dim;
      // u = L^{-T} g by back substitution.
      std::vector<double>& u = scratch_;
      u.assign(d, 0.0);
      for (int r = d - 1; r >= 0; --r) {
        double s = g[r];
        for (int k = r + 1; k < d; ++k) s -= l[tri_index(k, r)] * u[k];
        u[r] = s / l[tri_index(r, r)];
      }
      for (int r = 0; r < d; ++r) {
        gv[r] += u[r];
        for (int c = 0; c <= r; ++c) gl[tri_index(r, c)] -= u[r] * z[c];
      }
      break;
    }
    case Op::kLogDiagSum: {
      const double* l = val(nd.a);
      double* gl = adj(nd.a);
      for (int r = 0; r < nd.dim; ++r) gl[tri_index(r, r)] += g[0] / l[tri_index(r, r)];
      break;
    }
    case Op::kBernLogit: {
      const double* u = val(nd.a);
      double* gu = adj(nd.a);
      const double* r = daux_.data() + nd.aux_off;
      for (std::size_t k = 0; k < nd.aux_n; ++k) {
        const double p = stable_sigmoid(u[k]);
        if (p > kDiagFloor && p < 1.0 - kDiagFloor) gu[k] += g[0] * (r[k] - p);
      }
      break;
    }
  }
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state) {
  if (params.size() != grad.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (std::isnan(grad[i])) {
      throw NumericError("adam_step: NaN gradient at coordinate " + std::to_string(i));
    }
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.eps);
  }
}

std::vector<double> tape_gradient(const ScalarFn& f, std::span<const double> x) {
  Tape tape;
  Var in = tape.leaf(x);
  Var out = f(tape, in);
  tape.backward(out);
  auto g = tape.grad(in);
  return {g.begin(), g.end()};
}

double grad_check(const ScalarFn& f, std::span<const double> x, double h, double floor) {
  if (!(h > 0.0)) throw ArgumentError("grad_check: step must be positive");
  const std::vector<double> analytic = tape_gradient(f, x);
  std::vector<double> probe(x.begin(), x.end());
  Tape tape;
  auto eval = [&](std::span<const double> at) {
    tape.clear();
    return tape.scalar(f(tape, tape.leaf(at)));
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = eval(probe);
    probe[i] = orig - h;
    const double down = eval(probe);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double diff = std::abs(analytic[i] - numeric);
    if (diff == 0.0) continue;
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, diff / denom);
  }
  return worst;
}

}  // namespace avlr::diff
