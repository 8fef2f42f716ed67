#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "avlr/errors.hpp"
#include "avlr/metrics.hpp"

using namespace avlr;

namespace {

double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / pairs;
}

}  // namespace

TEST(Rmse, Values) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_EQ(metrics::rmse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(metrics::rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}), std::sqrt(12.5));
  EXPECT_THROW(metrics::rmse(std::vector<double>{}, std::vector<double>{}), ArgumentError);
  EXPECT_THROW(metrics::rmse(a, std::vector<double>{1}), DimensionError);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 3);
  std::vector<double> x(500), y(500);
  for (int i = 0; i < 500; ++i) x[i] = n(rng), y[i] = n(rng);
  double ss = 0;
  for (int i = 0; i < 500; ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
  EXPECT_NEAR(metrics::rmse(x, y), std::sqrt(ss / 500), 1e-14);
  EXPECT_EQ(metrics::rmse(x, y), metrics::rmse(y, x));
}

TEST(Rmse, MaskedCellsOnly) {
  RowMatrix est(2, 2), truth(2, 2);
  est << 1, 100, 3, 4;
  truth << 0, -100, 3, 8;
  MaskMatrix m(2, 2);
  m << 0, 1, 1, 0;
  EXPECT_DOUBLE_EQ(metrics::rmse_masked(est, truth, m), std::sqrt((1.0 + 16.0) / 2));
}

TEST(Frobenius, Values) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 3);
  EXPECT_EQ(metrics::frobenius_diff(a, a), 0.0);
  EXPECT_DOUBLE_EQ(metrics::frobenius_diff(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 2)), std::sqrt(2.0));
  const Eigen::MatrixXd b = Eigen::MatrixXd::Random(3, 3);
  double ss = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ss += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  EXPECT_NEAR(metrics::frobenius_diff(a, b), std::sqrt(ss), 1e-14);
  EXPECT_THROW(metrics::frobenius_diff(a, Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}

TEST(Auc, Examples) {
  EXPECT_EQ(metrics::auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}), 1.0);
  EXPECT_EQ(metrics::auc(std::vector<double>{0.1, 0.9}, std::vector<int>{1, 0}), 0.0);
  EXPECT_EQ(metrics::auc(std::vector<double>(6, 0.3), std::vector<int>{1, 0, 1, 0, 0, 1}), 0.5);
  EXPECT_THROW(metrics::auc(std::vector<double>{0.2, 0.4}, std::vector<int>{1, 1}), ArgumentError);
}

TEST(Auc, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> tie_level(0, 20);
  std::bernoulli_distribution coin(0.4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> s(200);
    std::vector<int> y(200);
    for (int i = 0; i < 200; ++i) {
      s[i] = tie_level(rng) / 20.0;
      y[i] = coin(rng);
    }
    EXPECT_EQ(metrics::auc(s, y), brute_auc(s, y));
  }
}

TEST(Auc, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> s(150), e(150), l(150);
  std::vector<int> y(150);
  for (int i = 0; i < 150; ++i) {
    y[i] = i % 3 == 0;
    s[i] = n(rng) + y[i];
    e[i] = std::exp(s[i]);
    l[i] = 3 * s[i] + 1;
  }
  EXPECT_EQ(metrics::auc(s, y), metrics::auc(e, y));
  EXPECT_EQ(metrics::auc(s, y), metrics::auc(l, y));
}

TEST(Confusion, Examples) {
  const std::vector<int> labels{1, 0, 1, 1, 0, 0};
  const metrics::Confusion perfect = metrics::confusion_metrics(labels, labels);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);

  const metrics::Confusion neg = metrics::confusion_metrics(std::vector<int>(6, 0), labels);
  EXPECT_EQ(neg.recall, 0.0);
  EXPECT_EQ(neg.precision, 0.0);
  EXPECT_TRUE(neg.precision_undefined);
  EXPECT_FALSE(neg.recall_undefined);
  EXPECT_EQ(neg.accuracy, 0.5);

  // TP = 2 (rows 0, 3), FN = 1 (row 2), FP = 1 (row 4), TN = 2.
  const metrics::Confusion c = metrics::confusion_metrics(std::vector<int>{1, 0, 0, 1, 1, 0}, labels);
  EXPECT_DOUBLE_EQ(c.accuracy, 4.0 / 6);
  EXPECT_DOUBLE_EQ(c.precision, 2.0 / 3);
  EXPECT_DOUBLE_EQ(c.recall, 2.0 / 3);
  EXPECT_DOUBLE_EQ(c.f1, 2.0 / 3);

  const metrics::Confusion nolab = metrics::confusion_metrics(std::vector<int>{1, 0}, std::vector<int>{0, 0});
  EXPECT_TRUE(nolab.recall_undefined);
}

TEST(Brier, Values) {
  EXPECT_EQ(metrics::brier(std::vector<double>{1, 0, 1}, std::vector<int>{1, 0, 1}), 0.0);
  EXPECT_EQ(metrics::brier(std::vector<double>(4, 0.5), std::vector<int>{1, 0, 0, 1}), 0.25);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> p(300);
  std::vector<int> y(300);
  double ss = 0;
  for (int i = 0; i < 300; ++i) {
    p[i] = u(rng);
    y[i] = u(rng) < 0.3;
    ss += (p[i] - y[i]) * (p[i] - y[i]);
  }
  const double b = metrics::brier(p, y);
  EXPECT_NEAR(b, ss / 300, 1e-14);
  EXPECT_GE(b, 0.0);
  EXPECT_LE(b, 1.0);
}

TEST(Summary, BatchAndStreamingAgree) {
  EXPECT_EQ(metrics::summarize(std::vector<double>{}).n, 0u);
  const metrics::Summary one = metrics::summarize(std::vector<double>{4.2});
  EXPECT_EQ(one.mean, 4.2);
  EXPECT_EQ(one.std, 0.0);
  const metrics::Summary s = metrics::summarize(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(5.0 / 3));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(1e3, 2);
  std::vector<double> v(1000);
  metrics::RunningStats rs;
  for (double& x : v) {
    x = n(rng);
    rs.push(x);
  }
  const metrics::Summary batch = metrics::summarize(v);
  EXPECT_NEAR(rs.summary().mean, batch.mean, 1e-12 * batch.mean);
  EXPECT_NEAR(rs.summary().std, batch.std, 1e-12 * 1e3);
  EXPECT_EQ(rs.summary().n, 1000u);
}
