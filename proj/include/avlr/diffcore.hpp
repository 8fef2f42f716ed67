#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace avlr::diff {

/// Handle to a node on a Tape. Only valid for the tape that created it and
/// only until that tape is cleared.
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over dense row-major double arrays.
///
/// Every node holds a flat value array. Matrices are flat arrays whose shape
/// is supplied by the consuming op (e.g. affine infers rows from the bias).
/// Lower-triangular factors are stored packed, row-major over the lower
/// triangle: entry (i, j), j <= i, lives at i(i+1)/2 + j.
///
/// Nodes are appended in creation order, so parents always precede children.
/// Gradients accumulate additively on fan-out.
class Tape {
 public:
  Tape() = default;

  // Inputs.
  Var leaf(std::span<const double> values);
  Var constant(std::span<const double> values);
  Var constant(double value);

  // Elementwise and reductions.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var shift(Var a, double c);
  Var neg(Var a) { return scale(a, -1.0); }
  Var exp(Var a);
  Var log(Var a);
  Var tanh(Var a);
  Var softplus(Var a);
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var logsumexp(Var a);

  /// W x + b with W of shape size(b) x size(x), row-major.
  Var affine(Var x, Var w, Var b);

  // Index manipulation.
  Var gather(Var a, std::span<const int> idx);
  /// Copy of base with out[idx[k]] = src[k].
  Var scatter(Var base, Var src, std::span<const int> idx);
  Var concat(std::span<const Var> parts);

  // Packed lower-triangular algebra.
  /// Unconstrained vector -> packed lower factor with exp'd, clamped diagonal.
  Var chol_from_unconstrained(Var ell);
  /// Principal submatrix at strictly increasing indices; diagonal re-clamped.
  Var tri_principal(Var packed, std::span<const int> idx);
  Var tri_matvec(Var packed, Var v);
  /// Solves L z = v by forward substitution.
  Var tri_solve(Var packed, Var v);
  Var log_diag_sum(Var packed);

  /// Sum over j of r_j log pi_j + (1 - r_j) log(1 - pi_j), pi = clamp(sigmoid(logits)).
  Var bernoulli_logit_logpmf(Var logits, std::span<const double> r);

  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  std::size_t size(Var v) const;
  std::size_t num_nodes() const { return nodes_.size(); }

  /// Seeds d(out)/d(out) = 1 and propagates to every node. `out` must be scalar.
  void backward(Var out);
  std::span<const double> grad(Var v) const;

  /// Drops all nodes; retains allocated capacity.
  void clear();

 private:
  enum class Op : std::uint8_t {
    kLeaf, kConst, kAdd, kSub, kMul, kScale, kShift, kExp, kLog, kTanh,
    kSoftplus, kSum, kDot, kLogSumExp, kAffine, kGather, kScatter, kConcat,
    kCholUnc, kTriPrincipal, kTriMatVec, kTriSolve, kLogDiagSum, kBernLogit
  };

  struct Node {
    Op op;
    std::int32_t a = -1;
    std::int32_t b = -1;
    std::int32_t c = -1;
    std::size_t off = 0;
    std::size_t n = 0;
    std::size_t aux_off = 0;
    std::size_t aux_n = 0;
    double k = 0.0;
    int dim = 0;
  };

  Var push(Op op, std::size_t n, std::int32_t a = -1, std::int32_t b = -1,
           std::int32_t c = -1);
  const Node& node(Var v) const;
  double* val(std::int32_t id) { return vals_.data() + nodes_[id].off; }
  const double* val(std::int32_t id) const { return vals_.data() + nodes_[id].off; }
  double* adj(std::int32_t id) { return adjs_.data() + nodes_[id].off; }
  std::size_t len(std::int32_t id) const { return nodes_[id].n; }
  void backward_node(std::size_t i);

  std::vector<Node> nodes_;
  std::vector<double> vals_;
  std::vector<double> adjs_;
  std::vector<int> iaux_;
  std::vector<double> daux_;
  std::vector<double> scratch_;
  std::vector<char> scratch_flags_;
  bool has_grad_ = false;
};

/// Dimension d of a packed lower triangle with `packed_len` entries.
/// Throws ArgumentError if the length is not triangular.
int triangular_dim(std::size_t packed_len);
inline std::size_t tri_index(int i, int j) {
  return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
}

/// Lower bound applied to every diagonal entry of a Cholesky factor.
inline constexpr double kDiagFloor = 1e-6;

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n, double lr = 1e-3)
      : m(n, 0.0), v(n, 0.0), learning_rate(lr) {}
};

/// One bias-corrected Adam update of `params` in place. A NaN gradient raises
/// NumericError before anything is modified.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

using ScalarFn = std::function<Var(Tape&, Var)>;

/// Max over coordinates of |g_tape - g_fd| / max(|g_tape|, |g_fd|, floor),
/// with g_fd from central differences of step h. Coordinates where both
/// gradients vanish contribute 0.
double grad_check(const ScalarFn& f, std::span<const double> x, double h = 1e-5,
                  double floor = 1e-8);

/// Reverse-mode gradient of f at x.
std::vector<double> tape_gradient(const ScalarFn& f, std::span<const double> x);

}  // namespace avlr::diff
