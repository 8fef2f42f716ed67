#include "avlr/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "avlr/distributions.hpp"
#include "avlr/errors.hpp"

namespace avlr::gen {

void GenSpec::validate() const {
  if (n < 1 || d < 1) throw ConfigError("GenSpec: n and d must be positive");
  if (static_cast<int>(mu.size()) != d) throw ConfigError("GenSpec: mu has wrong length");
  if (static_cast<int>(beta.size()) != d + 1) throw ConfigError("GenSpec: beta must have length d + 1");
  if (sigma.rows() != d || sigma.cols() != d) throw ConfigError("GenSpec: sigma must be d x d");
  if (!sigma.isApprox(sigma.transpose())) throw ConfigError("GenSpec: sigma is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw ConfigError("GenSpec: sigma is not positive definite");
}

GenSpec benchmark_spec(int n, std::uint64_t seed) {
  const int d = 5;
  GenSpec s;
  s.n = n;
  s.d = d;
  s.mu.assign(d, 0.0);
  s.sigma = Eigen::MatrixXd::Constant(d, d, 0.5);
  s.sigma.diagonal().setOnes();
  s.beta = {0.5, 1.0, -1.0, 0.5, -0.5, 1.0};
  s.seed = seed;
  return s;
}

CompleteData gen_complete(const GenSpec& spec) {
  spec.validate();
  const int d = spec.d;
  const Eigen::MatrixXd l = spec.sigma.llt().matrixL();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  CompleteData out;
  out.x.resize(spec.n, d);
  out.y.resize(spec.n);
  Eigen::VectorXd z(d);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < d; ++j) z(j) = normal(rng);
    const Eigen::VectorXd xi = l * z;
    double eta = spec.beta[0];
    for (int j = 0; j < d; ++j) {
      out.x(i, j) = spec.mu[j] + xi(j);
      eta += spec.beta[j + 1] * out.x(i, j);
    }
    out.y[i] = unif(rng) < dist::sigmoid(eta) ? 1 : 0;
  }
  return out;
}

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::MCAR: return "MCAR";
    case Mechanism::MAR: return "MAR";
    case Mechanism::MNAR: return "MNAR";
    case Mechanism::SelfMask: return "SelfMask";
    case Mechanism::LogisticMech: return "LogisticMech";
    case Mechanism::SeqLogistic: return "SeqLogistic";
  }
  return "?";
}

Mechanism parse_mechanism(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (c != '_' && c != '-') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s == "mcar") return Mechanism::MCAR;
  if (s == "mar") return Mechanism::MAR;
  if (s == "mnar") return Mechanism::MNAR;
  if (s == "selfmask" || s == "selfmasking") return Mechanism::SelfMask;
  if (s == "logisticmech" || s == "logistic") return Mechanism::LogisticMech;
  if (s == "seqlogistic" || s == "sequentiallogistic") return Mechanism::SeqLogistic;
  throw ConfigError("unknown mechanism: " + name);
}

void MechanismSpec::validate() const {
  if (!(target_rate > 0.01 && target_rate < 0.99)) throw ConfigError("mechanism target rate must lie in (0.01, 0.99)");
  const int d = dim();
  if (d < 1 || coef.cols() != width(d)) throw ConfigError("mechanism coefficients have wrong shape");
  if (!coef.allFinite()) throw ConfigError("mechanism coefficients must be finite");
  if (kind == Mechanism::MCAR && !(p >= 0.0 && p <= 1.0)) throw ConfigError("MCAR probability must lie in [0, 1]");
}

MechanismSpec make_mechanism(Mechanism kind, int d, double target_rate, std::uint64_t seed) {
  if (d < 1) throw ConfigError("mechanism dimension must be positive");
  MechanismSpec m;
  m.kind = kind;
  m.target_rate = target_rate;
  m.p = target_rate;
  m.seed = seed;
  m.coef = Eigen::MatrixXd::Zero(d, MechanismSpec::width(d));
  const int ycol = d + 1;
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int j = 0; j < d; ++j) {
    switch (kind) {
      case Mechanism::MCAR:
        break;
      case Mechanism::MAR:
        m.coef(j, 0) = -1.0;
        m.coef(j, 1) = 1.5;
        m.coef(j, ycol) = -0.8;
        break;
      case Mechanism::MNAR:
        m.coef(j, 0) = -1.0;
        for (int k = 0; k < d; ++k) m.coef(j, 1 + k) = -2.0;
        m.coef(j, ycol) = 0.5;
        break;
      case Mechanism::SelfMask:
        m.coef(j, 1 + j) = kSelfMaskSlope;
        break;
      case Mechanism::LogisticMech:
        for (int c = 1; c <= ycol; ++c) m.coef(j, c) = unif(rng);
        break;
      case Mechanism::SeqLogistic:
        for (int c = 1; c <= ycol; ++c) m.coef(j, c) = unif(rng);
        for (int k = j + 1; k < d; ++k) m.coef(j, ycol + 1 + k) = unif(rng);
        break;
    }
  }
  m.validate();
  return m;
}

namespace {

double missing_probability(const MechanismSpec& m, std::span<const double> x, int y,
                           std::span<const std::uint8_t> r, int j) {
  if (m.kind == Mechanism::MCAR) return m.p;
  const int d = m.dim();
  double eta = m.coef(j, 0) + m.coef(j, d + 1) * y;
  for (int k = 0; k < d; ++k) eta += m.coef(j, 1 + k) * x[k];
  if (m.kind == Mechanism::SeqLogistic) {
    for (int k = j + 1; k < d; ++k) eta += m.coef(j, d + 2 + k) * (1 - r[k]);
  }
  return std::clamp(dist::sigmoid(eta), dist::kProbFloor, 1.0 - dist::kProbFloor);
}

void draw_row(const MechanismSpec& m, std::span<const double> x, int y, std::span<std::uint8_t> r,
              std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = m.dim();
  // Reverse order so SeqLogistic sees r_{j+1..d} when drawing r_j.
  for (int j = d - 1; j >= 0; --j) {
    r[j] = unif(rng) < missing_probability(m, x, y, r, j) ? 0 : 1;
  }
}

}  // namespace

MaskDraw apply_mechanism(const RowMatrix& x, std::span<const int> y, const MechanismSpec& mech) {
  mech.validate();
  const int n = static_cast<int>(x.rows());
  const int d = mech.dim();
  if (x.cols() != d) throw DimensionError("apply_mechanism: covariate width differs from mechanism");
  if (static_cast<int>(y.size()) != n) throw DimensionError("apply_mechanism: label count");

  MaskDraw out;
  out.mask.resize(n, d);
  std::mt19937_64 rng(mech.seed);
  for (int i = 0; i < n; ++i) {
    std::span<const double> xi(x.row(i).data(), d);
    std::span<std::uint8_t> ri(out.mask.row(i).data(), d);
    auto all_missing = [&] { return std::none_of(ri.begin(), ri.end(), [](std::uint8_t v) { return v != 0; }); };
    draw_row(mech, xi, y[i], ri, rng);
    int attempts = 0;
    while (all_missing() && attempts < 100) {
      draw_row(mech, xi, y[i], ri, rng);
      ++attempts;
    }
    if (attempts > 0) ++out.redrawn_rows;
    if (all_missing()) {
      std::uniform_int_distribution<int> pick(0, d - 1);
      ri[pick(rng)] = 1;
      ++out.forced_rows;
    }
  }
  return out;
}

std::vector<double> missing_rates(const MaskMatrix& mask) {
  std::vector<double> rates(mask.cols(), 0.0);
  if (mask.rows() == 0) return rates;
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    int missing = 0;
    for (Eigen::Index i = 0; i < mask.rows(); ++i) missing += mask(i, j) == 0;
    rates[j] = static_cast<double>(missing) / static_cast<double>(mask.rows());
  }
  return rates;
}

MechanismSpec calibrate_intercepts(const RowMatrix& x, std::span<const int> y, MechanismSpec mech,
                                   const CalibrationOptions& opt) {
  mech.validate();
  const int d = mech.dim();
  const double target = mech.target_rate;
  if (mech.kind == Mechanism::MCAR) {
    // p = target unless the all-missing redraws pull the realized rate off it.
    auto mean_gap = [&](double p) {
      mech.p = p;
      const std::vector<double> r = missing_rates(apply_mechanism(x, y, mech).mask);
      return std::accumulate(r.begin(), r.end(), 0.0) / d - target;
    };
    if (std::abs(mean_gap(target)) < opt.tol) {
      mech.p = target;
      return mech;
    }
    double lo = 0.0, hi = 1.0;
    for (int step = 0; step < opt.max_steps; ++step) {
      const double mid = 0.5 * (lo + hi);
      const double gap = mean_gap(mid);
      if (std::abs(gap) < opt.tol) break;
      (gap < 0.0 ? lo : hi) = mid;
    }
    return mech;
  }
  auto rate_gap = [&](int j, double intercept) {
    mech.coef(j, 0) = intercept;
    return missing_rates(apply_mechanism(x, y, mech).mask)[j] - target;
  };
  auto all_within = [&] {
    const std::vector<double> r = missing_rates(apply_mechanism(x, y, mech).mask);
    return std::all_of(r.begin(), r.end(), [&](double v) { return std::abs(v - target) < opt.tol; });
  };

  for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
    if (sweep > 0 && all_within()) break;
    // Generation order; for SeqLogistic later features depend on earlier ones.
    for (int j = d - 1; j >= 0; --j) {
      const double start = mech.coef(j, 0);
      double gap = rate_gap(j, start);
      if (std::abs(gap) < opt.tol) continue;

      double lo = 0.0, hi = 0.0;
      double width = 4.0;
      bool bracketed = false;
      while (!bracketed) {
        lo = std::max(-opt.bound, start - width);
        hi = std::min(opt.bound, start + width);
        bracketed = rate_gap(j, lo) <= 0.0 && rate_gap(j, hi) >= 0.0;
        if (!bracketed && lo <= -opt.bound && hi >= opt.bound) {
          throw ConfigError("calibration: target rate " + std::to_string(target) + " not bracketed for feature " +
                            std::to_string(j + 1) + " within +-" + std::to_string(opt.bound));
        }
        width *= 2.0;
      }
      double mid = 0.5 * (lo + hi);
      for (int step = 0; step < opt.max_steps; ++step) {
        mid = 0.5 * (lo + hi);
        gap = rate_gap(j, mid);
        if (std::abs(gap) < opt.tol) break;
        (gap < 0.0 ? lo : hi) = mid;
      }
      mech.coef(j, 0) = mid;
    }
  }
  return mech;
}

}  // namespace avlr::gen
