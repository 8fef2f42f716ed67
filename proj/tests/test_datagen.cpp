#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "avlr/datagen.hpp"
#include "avlr/errors.hpp"
#include "oracles.hpp"

using namespace avlr;
using gen::Mechanism;

namespace {

const Mechanism kAll[] = {Mechanism::MCAR,     Mechanism::MAR,          Mechanism::MNAR,
                          Mechanism::SelfMask, Mechanism::LogisticMech, Mechanism::SeqLogistic};

gen::GenSpec independent_spec(int n, int d, std::uint64_t seed) {
  gen::GenSpec s;
  s.n = n;
  s.d = d;
  s.mu.assign(d, 0.0);
  s.sigma = Eigen::MatrixXd::Identity(d, d);
  s.beta.assign(d + 1, 0.5);
  s.seed = seed;
  return s;
}

}  // namespace

TEST(GenSpec, Validation) {
  gen::GenSpec s = gen::benchmark_spec(10, 0);
  s.validate();
  EXPECT_EQ(s.d, 5);
  EXPECT_EQ(s.beta, (std::vector<double>{0.5, 1, -1, 0.5, -0.5, 1}));
  EXPECT_EQ(s.sigma(0, 0), 1.0);
  EXPECT_EQ(s.sigma(1, 3), 0.5);
  s.sigma(0, 1) = s.sigma(1, 0) = 2.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = gen::benchmark_spec(10, 0);
  s.beta.pop_back();
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(GenComplete, ZeroBetaGivesBalancedLabels) {
  gen::GenSpec s = independent_spec(2000, 3, 1);
  s.beta.assign(4, 0.0);
  const gen::CompleteData cd = gen::gen_complete(s);
  double pos = 0;
  for (int v : cd.y) pos += v;
  EXPECT_NEAR(pos / 2000, 0.5, 3 * std::sqrt(0.25 / 2000));
}

TEST(GenComplete, MomentsWithinCltBand) {
  // 250 coordinate means over 50 seeds: a 4-sigma band should almost never
  // be crossed, and the standardized errors should have unit variance.
  int outside = 0;
  double z2 = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    gen::GenSpec s = gen::benchmark_spec(5000, 1000 + seed);
    s.mu = {1.0, -2.0, 0.0, 0.5, 3.0};
    const Eigen::MatrixXd x = gen::gen_complete(s).x;
    const Eigen::RowVectorXd mean = x.colwise().mean();
    for (int j = 0; j < 5; ++j) {
      outside += std::abs(mean(j) - s.mu[j]) > 4.0 / std::sqrt(5000.0);
      const double z = (mean(j) - s.mu[j]) * std::sqrt(5000.0);
      z2 += z * z;
    }
    if (seed == 0) {
      const Eigen::MatrixXd c = x.rowwise() - mean;
      EXPECT_LT((c.transpose() * c / (x.rows() - 1) - s.sigma).cwiseAbs().maxCoeff(), 0.08);
    }
  }
  EXPECT_LE(outside, 1);
  EXPECT_NEAR(z2 / 250, 1.0, 0.3);
}

TEST(GenComplete, LabelsFollowTheLogisticModel) {
  const gen::GenSpec s = gen::benchmark_spec(20000, 3);
  const gen::CompleteData cd = gen::gen_complete(s);
  const Eigen::VectorXd b = oracle::newton_logistic(cd.x, cd.y);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(b(j), s.beta[j], 0.1);
}

TEST(GenComplete, Deterministic) {
  const gen::CompleteData a = gen::gen_complete(gen::benchmark_spec(100, 4));
  const gen::CompleteData b = gen::gen_complete(gen::benchmark_spec(100, 4));
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_NE(gen::gen_complete(gen::benchmark_spec(100, 5)).x, a.x);
}

TEST(Mechanism, NamesRoundTrip) {
  for (Mechanism m : kAll) EXPECT_EQ(gen::parse_mechanism(gen::to_string(m)), m);
  EXPECT_EQ(gen::parse_mechanism("mnar"), Mechanism::MNAR);
  EXPECT_EQ(gen::parse_mechanism("logistic"), Mechanism::LogisticMech);
  EXPECT_EQ(gen::parse_mechanism("seq_logistic"), Mechanism::SeqLogistic);
  EXPECT_THROW(gen::parse_mechanism("bogus"), ConfigError);
  EXPECT_THROW(gen::make_mechanism(Mechanism::MCAR, 3, 1.0, 0), ConfigError);
}

TEST(ApplyMechanism, McarRates) {
  const gen::CompleteData cd = gen::gen_complete(independent_spec(2000, 5, 6));
  gen::MechanismSpec m = gen::make_mechanism(Mechanism::MCAR, 5, 0.5, 7);
  const gen::MaskDraw half = gen::apply_mechanism(cd.x, cd.y, m);
  double missing = 0;
  for (double r : gen::missing_rates(half.mask)) missing += r;
  EXPECT_NEAR(missing / 5, 0.5, 0.02);

  m.p = 0.0;
  const gen::MaskDraw none = gen::apply_mechanism(cd.x, cd.y, m);
  EXPECT_TRUE((none.mask.array() == 1).all());
  EXPECT_EQ(none.redrawn_rows, 0);
}

TEST(ApplyMechanism, NoRowIsFullyMissing) {
  const gen::CompleteData cd = gen::gen_complete(independent_spec(3000, 2, 8));
  const gen::MaskDraw d = gen::apply_mechanism(cd.x, cd.y, gen::make_mechanism(Mechanism::MCAR, 2, 0.9, 9));
  for (int i = 0; i < d.mask.rows(); ++i) ASSERT_GT(d.mask.row(i).cast<int>().sum(), 0);
  EXPECT_GT(d.redrawn_rows, 0);
}

TEST(ApplyMechanism, SelfMaskSaturates) {
  // Only the first feature self-masks; the others are always observed, so no
  // row needs repair.
  const gen::CompleteData cd = gen::gen_complete(independent_spec(5000, 3, 10));
  gen::MechanismSpec m = gen::make_mechanism(Mechanism::SelfMask, 3, 0.5, 11);
  m.coef(0, 1) = 50.0;
  m.coef(1, 2) = m.coef(2, 3) = 0.0;
  m.coef(1, 0) = m.coef(2, 0) = -50.0;
  const gen::MaskDraw d = gen::apply_mechanism(cd.x, cd.y, m);
  EXPECT_EQ(d.forced_rows, 0);
  int big = 0, big_missing = 0, small_missing = 0;
  for (int i = 0; i < cd.x.rows(); ++i) {
    if (cd.x(i, 0) > 0.5) {
      ++big;
      big_missing += d.mask(i, 0) == 0;
    } else if (cd.x(i, 0) < -0.5) {
      small_missing += d.mask(i, 0) == 0;
    }
  }
  EXPECT_EQ(big_missing, big);
  EXPECT_EQ(small_missing, 0);
}

TEST(ApplyMechanism, McarIndependentOfLabel) {
  int rejections = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const gen::CompleteData cd = gen::gen_complete(gen::benchmark_spec(2000, 100 + seed));
    const gen::MaskDraw d = gen::apply_mechanism(cd.x, cd.y, gen::make_mechanism(Mechanism::MCAR, 5, 0.5, 200 + seed));
    double t[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < 2000; ++i) t[cd.y[i]][d.mask(i, 0)] += 1;
    const double n = 2000;
    double chi = 0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double e = (t[a][0] + t[a][1]) * (t[0][b] + t[1][b]) / n;
        chi += (t[a][b] - e) * (t[a][b] - e) / e;
      }
    }
    rejections += chi > 10.828;
  }
  EXPECT_LE(rejections, 1);
}

TEST(ApplyMechanism, MarDependsOnFirstCovariate) {
  for (int seed = 0; seed < 20; ++seed) {
    const gen::CompleteData cd = gen::gen_complete(gen::benchmark_spec(1000, 300 + seed));
    const gen::MaskDraw d = gen::apply_mechanism(cd.x, cd.y, gen::make_mechanism(Mechanism::MAR, 5, 0.5, 400 + seed));
    std::vector<int> miss(1000);
    for (int i = 0; i < 1000; ++i) miss[i] = d.mask(i, 2) == 0;
    const Eigen::VectorXd b = oracle::newton_logistic(cd.x.col(0), miss);
    EXPECT_GT(b(1), 0.0) << "seed " << seed;
  }
}

TEST(ApplyMechanism, SeqLogisticDeterministic) {
  const gen::CompleteData cd = gen::gen_complete(gen::benchmark_spec(500, 12));
  const gen::MechanismSpec m = gen::make_mechanism(Mechanism::SeqLogistic, 5, 0.5, 13);
  EXPECT_EQ(gen::apply_mechanism(cd.x, cd.y, m).mask, gen::apply_mechanism(cd.x, cd.y, m).mask);
  gen::MechanismSpec other = m;
  other.seed = 14;
  EXPECT_NE(gen::apply_mechanism(cd.x, cd.y, other).mask, gen::apply_mechanism(cd.x, cd.y, m).mask);
  // Only later-generated indicators may feed an earlier feature.
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k <= j; ++k) EXPECT_EQ(m.coef(j, 7 + k), 0.0);
}

TEST(Calibrate, McarIsExact) {
  const gen::CompleteData cd = gen::gen_complete(gen::benchmark_spec(100, 15));
  const gen::MechanismSpec m = gen::calibrate_intercepts(cd.x, cd.y, gen::make_mechanism(Mechanism::MCAR, 5, 0.37, 16));
  EXPECT_EQ(m.p, 0.37);
}

TEST(Calibrate, FlatSelfMaskInterceptNearZero) {
  // Wide enough that fully missing rows (and their redraws) are negligible.
  const gen::CompleteData cd = gen::gen_complete(independent_spec(5000, 12, 17));
  gen::MechanismSpec m = gen::make_mechanism(Mechanism::SelfMask, 12, 0.5, 18);
  for (int j = 0; j < 12; ++j) {
    m.coef(j, 1 + j) = 0.0;
    m.coef(j, 0) = 3.0;
  }
  const gen::MechanismSpec c = gen::calibrate_intercepts(cd.x, cd.y, m);
  for (int j = 0; j < 12; ++j) EXPECT_NEAR(c.coef(j, 0), 0.0, 0.1);
}

TEST(Calibrate, McarCompensatesForRepairedRows) {
  // At d = 2 and p = 0.5 a quarter of rows start fully missing; the redraw
  // lowers the realized rate to about 1/3, so p must move up.
  const gen::CompleteData cd = gen::gen_complete(independent_spec(20000, 2, 24));
  const gen::MechanismSpec c = gen::calibrate_intercepts(cd.x, cd.y, gen::make_mechanism(Mechanism::MCAR, 2, 0.4, 25));
  EXPECT_GT(c.p, 0.4);
  gen::MechanismSpec held = c;
  held.seed = 26;
  for (double r : gen::missing_rates(gen::apply_mechanism(cd.x, cd.y, held).mask)) EXPECT_NEAR(r, 0.4, 0.02);
}

TEST(Calibrate, EveryMechanismHitsTargetOnHeldOutDraw) {
  const gen::CompleteData cd = gen::gen_complete(gen::benchmark_spec(20000, 19));
  for (Mechanism kind : kAll) {
    for (double target : {0.3, 0.5}) {
      SCOPED_TRACE(gen::to_string(kind) + " " + std::to_string(target));
      const gen::MechanismSpec c = gen::calibrate_intercepts(cd.x, cd.y, gen::make_mechanism(kind, 5, target, 20));
      gen::MechanismSpec held = c;
      held.seed = 21;
      for (double r : gen::missing_rates(gen::apply_mechanism(cd.x, cd.y, held).mask)) EXPECT_NEAR(r, target, 0.02);
    }
  }
}

TEST(Calibrate, UnreachableTargetThrows) {
  const gen::CompleteData cd = gen::gen_complete(independent_spec(500, 2, 22));
  gen::MechanismSpec m = gen::make_mechanism(Mechanism::SelfMask, 2, 0.9, 23);
  gen::CalibrationOptions opt;
  opt.bound = 0.5;
  EXPECT_THROW(gen::calibrate_intercepts(cd.x, cd.y, m, opt), ConfigError);
}
