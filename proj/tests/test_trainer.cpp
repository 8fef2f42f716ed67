#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "avlr/datagen.hpp"
#include "avlr/errors.hpp"
#include "avlr/trainer.hpp"
#include "oracles.hpp"

using namespace avlr;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Dataset complete_data(int n, int d, std::uint64_t seed) {
  gen::GenSpec s;
  s.n = n;
  s.d = d;
  s.mu.assign(d, 0.0);
  for (int j = 0; j < d; ++j) s.mu[j] = 0.5 * j - 0.3;
  s.sigma = Eigen::MatrixXd::Identity(d, d) * 1.5 + Eigen::MatrixXd::Constant(d, d, 0.3);
  s.beta.assign(d + 1, 0.0);
  for (int j = 0; j <= d; ++j) s.beta[j] = (j % 2 ? 1.0 : -0.6) * (1 + 0.1 * j);
  s.seed = seed;
  const gen::CompleteData cd = gen::gen_complete(s);
  return make_complete(cd.x, cd.y);
}

Dataset mcar_benchmark(int n, std::uint64_t seed) {
  const gen::CompleteData cd = gen::gen_complete(gen::benchmark_spec(n, seed));
  const gen::MaskDraw m = gen::apply_mechanism(cd.x, cd.y, gen::make_mechanism(gen::Mechanism::MCAR, 5, 0.5, seed + 1));
  return make_incomplete(cd.x, m.mask, cd.y);
}

train::TrainConfig small_cfg(int epochs) {
  train::TrainConfig c;
  c.epochs = epochs;
  c.hidden = 16;
  c.batch_size = 64;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(TrainConfig, Validation) {
  train::TrainConfig c;
  c.validate();
  c.k = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.epochs = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(InitParams, CompleteDataMoments) {
  const Dataset data = complete_data(300, 3, 1);
  const Parameters p = train::init_params(data, small_cfg(0));
  const Eigen::MatrixXd x = data.x;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(p.theta.mu[j], mean(j), 1e-12);
  const Eigen::MatrixXd c = x.rowwise() - mean;
  const Eigen::MatrixXd cov = c.transpose() * c / (x.rows() - 1) + 1e-3 * Eigen::MatrixXd::Identity(3, 3);
  EXPECT_TRUE(p.theta.covariance().isApprox(cov, 1e-10));
  EXPECT_FALSE(p.psi.has_value());
  EXPECT_TRUE(train::init_params(data, [] { auto c = small_cfg(0); c.mnar = true; return c; }())
                  .psi->coef == std::vector<double>(3 * 5, 0.0));
}

TEST(InitParams, SingleObservedValueAndErrors) {
  RowMatrix x(2, 2);
  x << 1.0, kNan, 3.0, 5.0;
  MaskMatrix m(2, 2);
  m << 1, 0, 1, 1;
  Dataset data = make_incomplete(x, m, {0, 1});
  const Parameters p = train::init_params(data, small_cfg(0));
  EXPECT_DOUBLE_EQ(p.theta.mu[0], 2.0);
  EXPECT_DOUBLE_EQ(p.theta.mu[1], 5.0);

  MaskMatrix none(2, 2);
  none << 1, 0, 1, 0;
  EXPECT_THROW(train::init_params(make_incomplete(x, none, {0, 1}), small_cfg(0)), DataError);
}

TEST(InitParams, JitterKeepsDuplicatedRowsPositiveDefinite) {
  RowMatrix x(4, 3);
  x << 1, 2, 3, 1, 2, 3, 1, 2, 3, 2, 4, 6;
  const Parameters p = train::init_params(make_complete(x, {0, 1, 0, 1}), small_cfg(0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.theta.covariance());
  EXPECT_GT(es.eigenvalues().minCoeff(), 5e-4);
}

TEST(Standardizer, RoundTripAndObservedMoments) {
  const Dataset data = mcar_benchmark(400, 2);
  const train::Standardizer s = train::Standardizer::fit(data);
  const Dataset z = s.apply(data);
  for (int j = 0; j < z.dim(); ++j) {
    double sum = 0, sum2 = 0;
    int n = 0;
    for (int i = 0; i < z.rows(); ++i) {
      if (!z.mask(i, j)) continue;
      sum += z.x(i, j);
      sum2 += z.x(i, j) * z.x(i, j);
      ++n;
    }
    EXPECT_NEAR(sum / n, 0.0, 1e-12);
    EXPECT_NEAR((sum2 - sum * sum / n) / (n - 1), 1.0, 1e-12);
  }
  const std::vector<double> raw{0.3, -1.0, 2.0, 0.0, 5.0};
  const std::vector<double> back = s.invert_row(s.apply_row(raw));
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(back[j], raw[j], 1e-14);
}

TEST(Fit, ZeroEpochsReturnsInitialization) {
  const Dataset data = mcar_benchmark(200, 3);
  const train::FitResult r = train::fit(data, small_cfg(0));
  const Parameters init = train::init_params(r.model.standardizer.apply(data), small_cfg(0));
  EXPECT_EQ(r.model.params.flatten(), init.flatten());
  EXPECT_TRUE(r.history.epochs.empty());
}

TEST(Fit, Deterministic) {
  const Dataset data = mcar_benchmark(300, 4);
  const train::FitResult a = train::fit(data, small_cfg(3));
  const train::FitResult b = train::fit(data, small_cfg(3));
  EXPECT_EQ(a.model.params.flatten(), b.model.params.flatten());
  ASSERT_EQ(a.history.epochs.size(), 3u);
  for (int e = 0; e < 3; ++e) EXPECT_EQ(a.history.epochs[e].mean_loss, b.history.epochs[e].mean_loss);

  auto other = small_cfg(3);
  other.seed = 12;
  EXPECT_NE(train::fit(data, other).model.params.flatten(), a.model.params.flatten());
}

TEST(Fit, CompleteDataMatchesNewtonAndLeavesEncoderAlone) {
  const Dataset data = complete_data(2000, 2, 5);
  auto cfg = small_cfg(30);
  cfg.batch_size = 256;
  const train::FitResult r = train::fit(data, cfg);
  const Eigen::VectorXd ref = oracle::newton_logistic(data.x, data.y);
  const std::vector<double> got = r.model.original_beta();
  double se = 0;
  for (int j = 0; j < 3; ++j) se += (got[j] - ref(j)) * (got[j] - ref(j));
  EXPECT_LT(std::sqrt(se / 3), 0.15);

  const Parameters init = train::init_params(r.model.standardizer.apply(data), cfg);
  EXPECT_EQ(r.model.params.phi.w1, init.phi.w1);
  EXPECT_EQ(r.model.params.phi.b_chol, init.phi.b_chol);
  EXPECT_EQ(r.model.params.phi.w_mean, init.phi.w_mean);
}

TEST(Fit, OriginalScaleMomentsOnCompleteData) {
  const Dataset data = complete_data(500, 3, 6);
  const train::FitResult r = train::fit(data, small_cfg(0));
  const Eigen::MatrixXd x = data.x;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const std::vector<double> mu = r.model.original_mu();
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(mu[j], mean(j), 1e-12);
  // Initial beta is the MLE on the standardized design, so on the raw scale
  // it is the raw-scale MLE.
  const Eigen::VectorXd ref = oracle::newton_logistic(x, data.y);
  const std::vector<double> b = r.model.original_beta();
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(b[j], ref(j), 1e-8);
}

TEST(Fit, LossDecreases) {
  const Dataset data = mcar_benchmark(600, 7);
  auto cfg = small_cfg(20);
  cfg.hidden = 32;
  const train::FitResult r = train::fit(data, cfg);
  double first = 0, last = 0;
  for (int e = 0; e < 5; ++e) {
    first += r.history.epochs[e].mean_loss;
    last += r.history.epochs[15 + e].mean_loss;
  }
  EXPECT_GT(first, last);
}

TEST(Fit, HookSeesEveryEpoch) {
  const Dataset data = mcar_benchmark(100, 8);
  int calls = 0;
  const train::FitResult r = train::fit(data, small_cfg(4), [&](const train::FittedModel&, train::EpochRecord& rec) {
    EXPECT_EQ(rec.epoch, calls++);
    rec.eval_auc = 0.5;
  });
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(r.history.epochs.back().eval_auc, 0.5);
}

TEST(Fit, MnarOriginalPsiShape) {
  const Dataset data = mcar_benchmark(100, 9);
  auto cfg = small_cfg(1);
  cfg.mnar = true;
  const train::FitResult r = train::fit(data, cfg);
  ASSERT_TRUE(r.model.original_psi().has_value());
  EXPECT_EQ(r.model.original_psi()->d, 5);
  EXPECT_FALSE(train::fit(data, small_cfg(0)).model.original_psi().has_value());
}
