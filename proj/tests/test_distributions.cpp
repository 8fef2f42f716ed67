#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "avlr/distributions.hpp"
#include "avlr/errors.hpp"
#include "oracles.hpp"

using namespace avlr;
using dist::CholFactor;

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> random_unconstrained(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<double> ell(d * (d + 1) / 2);
  for (double& v : ell) v = n(rng);
  return ell;
}

}  // namespace

TEST(Sigmoid, Values) {
  EXPECT_EQ(dist::sigmoid(0.0), 0.5);
  EXPECT_NEAR(dist::sigmoid(std::log(3.0)), 0.75, 1e-15);
  EXPECT_NEAR(dist::sigmoid(7.3) + dist::sigmoid(-7.3), 1.0, 1e-15);
  EXPECT_EQ(dist::sigmoid(-800.0), 0.0);
  EXPECT_EQ(dist::sigmoid(800.0), 1.0);
}

TEST(Sigmoid, SymmetricAndMonotone) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-40, 40);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(dist::sigmoid(a) + dist::sigmoid(-a), 1.0, 1e-15);
    if (a < b) EXPECT_LE(dist::sigmoid(a), dist::sigmoid(b));
    EXPECT_NEAR(dist::log_sigmoid(a), oracle::log_sigmoid(a), 1e-12);
  }
  EXPECT_NEAR(dist::log_sigmoid(-1e10), -1e10, 1.0);
  EXPECT_TRUE(std::isfinite(dist::softplus(1e10)));
}

TEST(Chol, FromUnconstrained) {
  const CholFactor eye = dist::chol_from_unconstrained(std::vector<double>{0, 0, 0});
  EXPECT_EQ(eye.dim(), 2);
  EXPECT_TRUE(eye.dense().isApprox(Eigen::MatrixXd::Identity(2, 2)));

  const CholFactor two = dist::chol_from_unconstrained(std::vector<double>{std::log(2.0)});
  EXPECT_NEAR(two(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(two.covariance()(0, 0), 4.0, 1e-14);

  EXPECT_THROW(dist::chol_from_unconstrained(std::vector<double>{1, 2}), ArgumentError);
}

TEST(Chol, DiagonalClampedAndRoundTrip) {
  const CholFactor tiny = dist::chol_from_unconstrained(std::vector<double>{-100.0});
  EXPECT_EQ(tiny(0, 0), diff::kDiagFloor);

  std::mt19937_64 rng(2);
  const std::vector<double> ell = random_unconstrained(4, rng);
  const std::vector<double> back = dist::unconstrained_from_chol(dist::chol_from_unconstrained(ell));
  ASSERT_EQ(back.size(), ell.size());
  for (std::size_t i = 0; i < ell.size(); ++i) EXPECT_NEAR(back[i], ell[i], 1e-14);
}

TEST(Chol, CovarianceIsPositiveDefinite) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd s = dist::chol_from_unconstrained(random_unconstrained(3, rng)).covariance();
    EXPECT_TRUE(s.isApprox(s.transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Chol, FromCovarianceReproduces) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd s = oracle::random_spd(4, rng);
  EXPECT_TRUE(CholFactor::from_covariance(s).covariance().isApprox(s, 1e-12));
}

TEST(MvnLogpdf, KnownValues) {
  const CholFactor one = dist::chol_from_unconstrained(std::vector<double>{0.0});
  EXPECT_NEAR(dist::mvn_logpdf(std::vector<double>{0.0}, std::vector<double>{0.0}, one),
              -0.5 * std::log(2 * M_PI), 1e-15);
  const CholFactor eye = dist::chol_from_unconstrained(std::vector<double>{0, 0, 0});
  const std::vector<double> x{0.3, -1.1};
  EXPECT_NEAR(dist::mvn_logpdf(x, x, eye), -std::log(2 * M_PI), 1e-15);
}

TEST(MvnLogpdf, MatchesDenseFormula) {
  Eigen::MatrixXd s(2, 2);
  s << 2, 0.5, 0.5, 1;
  const Eigen::VectorXd x = Eigen::Vector2d(1, -1), mu = Eigen::Vector2d::Zero();
  EXPECT_NEAR(dist::mvn_logpdf(to_vec(x), to_vec(mu), CholFactor::from_covariance(s)),
              oracle::mvn_logpdf_dense(x, mu, s), 1e-13);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int d = 1; d <= 5; ++d) {
    const Eigen::MatrixXd sd = oracle::random_spd(d, rng);
    Eigen::VectorXd xd(d), md(d);
    for (int i = 0; i < d; ++i) xd(i) = n(rng), md(i) = n(rng);
    EXPECT_NEAR(dist::mvn_logpdf(to_vec(xd), to_vec(md), CholFactor::from_covariance(sd)),
                oracle::mvn_logpdf_dense(xd, md, sd), 1e-11);
  }
}

TEST(MvnLogpdf, IntegratesToOneInOneDimension) {
  for (double ell : {-1.0, 0.0, 0.7}) {
    const CholFactor l = dist::chol_from_unconstrained(std::vector<double>{ell});
    const double sd = l(0, 0), mu = 0.4;
    const int n = 20000;
    const double lo = mu - 8 * sd, h = 16 * sd / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * std::exp(dist::mvn_logpdf(std::vector<double>{lo + i * h}, std::vector<double>{mu}, l));
    }
    EXPECT_NEAR(acc * h, 1.0, 1e-6);
  }
}

TEST(MvnLogpdf, TapeMatchesPlainAndGradient) {
  std::mt19937_64 rng(6);
  const int d = 3, m = 6;
  std::normal_distribution<double> n(0, 1);
  std::vector<double> packed(2 * d + m);
  for (double& v : packed) v = 0.5 * n(rng);
  auto f = [&](diff::Tape& t, diff::Var v) {
    std::vector<int> ix(d), im(d), il(m);
    for (int i = 0; i < d; ++i) ix[i] = i, im[i] = d + i;
    for (int i = 0; i < m; ++i) il[i] = 2 * d + i;
    return dist::mvn_logpdf(t, t.gather(v, ix), t.gather(v, im), t.chol_from_unconstrained(t.gather(v, il)));
  };
  diff::Tape t;
  const double tape_val = t.scalar(f(t, t.constant(packed)));
  const std::vector<double> x(packed.begin(), packed.begin() + d), mu(packed.begin() + d, packed.begin() + 2 * d);
  const CholFactor l = dist::chol_from_unconstrained(std::vector<double>(packed.begin() + 2 * d, packed.end()));
  EXPECT_NEAR(tape_val, dist::mvn_logpdf(x, mu, l), 1e-13);
  EXPECT_LT(diff::grad_check(f, packed), 1e-6);
}

TEST(GaussianCondition, NothingObservedIsMarginal) {
  std::mt19937_64 rng(7);
  const CholFactor l = CholFactor::from_covariance(oracle::random_spd(3, rng));
  const std::vector<double> mu{1, 2, 3};
  const dist::GaussianCond c = dist::gaussian_condition(mu, l, {}, {});
  EXPECT_EQ(c.missing, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(c.mean, mu);
  EXPECT_TRUE(c.factor.dense().isApprox(l.dense()));
}

TEST(GaussianCondition, EverythingObservedIsEmpty) {
  const CholFactor l = dist::chol_from_unconstrained(std::vector<double>{0, 0, 0});
  const int obs[] = {0, 1};
  const double xo[] = {1, 2};
  const dist::GaussianCond c = dist::gaussian_condition(std::vector<double>{0, 0}, l, obs, xo);
  EXPECT_EQ(c.dim(), 0);
  EXPECT_TRUE(c.missing.empty());
}

TEST(GaussianCondition, BivariateClosedForm) {
  const double rho = 0.6, t = 1.5;
  Eigen::MatrixXd s(2, 2);
  s << 1, rho, rho, 1;
  const int obs[] = {1};
  const double xo[] = {t};
  const dist::GaussianCond c =
      dist::gaussian_condition(std::vector<double>{0, 0}, CholFactor::from_covariance(s), obs, xo);
  ASSERT_EQ(c.dim(), 1);
  EXPECT_EQ(c.missing[0], 0);
  EXPECT_NEAR(c.mean[0], rho * t, 1e-14);
  EXPECT_NEAR(c.factor.covariance()(0, 0), 1 - rho * rho, 1e-14);
}

TEST(GaussianCondition, JointFactorization) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 1);
  for (int d = 2; d <= 4; ++d) {
    for (int rep = 0; rep < 5; ++rep) {
      const Eigen::MatrixXd s = oracle::random_spd(d, rng);
      Eigen::VectorXd mu(d), x(d);
      for (int i = 0; i < d; ++i) mu(i) = n(rng), x(i) = n(rng);
      // Observe a random nonempty proper subset.
      std::vector<int> obs, mis;
      while (obs.empty() || static_cast<int>(obs.size()) == d) {
        obs.clear();
        mis.clear();
        for (int i = 0; i < d; ++i) (std::bernoulli_distribution(0.5)(rng) ? obs : mis).push_back(i);
      }
      const int no = static_cast<int>(obs.size());
      Eigen::VectorXd xo(no), mo(no);
      Eigen::MatrixXd so(no, no);
      for (int a = 0; a < no; ++a) {
        xo(a) = x(obs[a]);
        mo(a) = mu(obs[a]);
        for (int b = 0; b < no; ++b) so(a, b) = s(obs[a], obs[b]);
      }
      const dist::GaussianCond c =
          dist::gaussian_condition(to_vec(mu), CholFactor::from_covariance(s), obs, to_vec(xo));
      ASSERT_EQ(c.missing, mis);
      std::vector<double> xm;
      for (int j : mis) xm.push_back(x(j));
      const double joint = oracle::mvn_logpdf_dense(x, mu, s);
      const double split = oracle::mvn_logpdf_dense(xo, mo, so) + dist::mvn_logpdf(xm, c.mean, c.factor);
      EXPECT_NEAR(split, joint, 1e-10 * std::abs(joint));
    }
  }
}

TEST(Bernoulli, ValuesAndClamp) {
  EXPECT_NEAR(dist::bernoulli_logpmf(1, 0.5), std::log(0.5), 1e-15);
  EXPECT_NEAR(dist::bernoulli_logpmf(0, 0.5), std::log(0.5), 1e-15);
  EXPECT_NEAR(dist::bernoulli_logpmf(1, 1 - 1e-9), std::log(1 - dist::kProbFloor), 1e-15);
  EXPECT_NEAR(dist::bernoulli_logpmf(0, 1.0), std::log(dist::kProbFloor), 1e-9);
  EXPECT_TRUE(std::isfinite(dist::bernoulli_logpmf(1, 0.0)));
}

TEST(Reparam, Basics) {
  const std::vector<double> mean{0.5, -1.0};
  const CholFactor eye = dist::chol_from_unconstrained(std::vector<double>{0, 0, 0});
  EXPECT_EQ(dist::reparam_sample(mean, eye, std::vector<double>{0, 0}), mean);
  const std::vector<double> e1 = dist::reparam_sample(mean, eye, std::vector<double>{1, 0});
  EXPECT_DOUBLE_EQ(e1[0], 1.5);
  EXPECT_DOUBLE_EQ(e1[1], -1.0);
  EXPECT_THROW(dist::reparam_sample(mean, eye, std::vector<double>{1.0}), DimensionError);
}

TEST(Reparam, EmpiricalCovariance) {
  Eigen::MatrixXd s(2, 2);
  s << 1.5, -0.4, -0.4, 0.8;
  const CholFactor l = CholFactor::from_covariance(s);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  const int draws = 100000;
  const std::vector<double> mean{0.0, 0.0};
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  for (int i = 0; i < draws; ++i) {
    const std::vector<double> e{n(rng), n(rng)};
    const std::vector<double> x = dist::reparam_sample(mean, l, e);
    const Eigen::Vector2d v(x[0], x[1]);
    acc += v * v.transpose();
  }
  acc /= draws;
  EXPECT_LT((acc - s).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Reparam, TapeGradient) {
  const std::vector<double> v{0.3, -0.2, 0.1, 0.4, -0.7};  // mean (2), ell (3)
  const std::vector<double> eps{0.8, -1.3};
  auto f = [&](diff::Tape& t, diff::Var p) {
    const int im[] = {0, 1}, il[] = {2, 3, 4};
    diff::Var x = dist::reparam_sample(t, t.gather(p, im), t.chol_from_unconstrained(t.gather(p, il)), t.constant(eps));
    return t.dot(x, t.tanh(x));
  };
  EXPECT_LT(diff::grad_check(f, v), 1e-6);
}
