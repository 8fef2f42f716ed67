#include "avlr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "avlr/errors.hpp"

namespace avlr::metrics {

double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("rmse: length mismatch");
  if (a.empty()) throw ArgumentError("rmse: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss / static_cast<double>(a.size()));
}

double rmse_masked(const RowMatrix& estimate, const RowMatrix& truth, const MaskMatrix& mask) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols() || mask.rows() != truth.rows() ||
      mask.cols() != truth.cols()) {
    throw DimensionError("rmse_masked: shape mismatch");
  }
  double ss = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
      if (mask(i, j)) continue;
      const double e = estimate(i, j) - truth(i, j);
      ss += e * e;
      ++count;
    }
  }
  if (count == 0) throw ArgumentError("rmse_masked: no masked cells");
  return std::sqrt(ss / static_cast<double>(count));
}

double frobenius_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("frobenius_diff: shape mismatch");
  return (a - b).norm();
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives.
  double rank_sum = 0.0;
  std::size_t n1 = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double midrank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum += midrank;
        ++n1;
      }
    }
    lo = hi;
  }
  const std::size_t n0 = n - n1;
  if (n1 == 0 || n0 == 0) throw ArgumentError("auc: undefined with a single class");
  const double u = rank_sum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
  return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

Confusion confusion_metrics(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw DimensionError("confusion_metrics: length mismatch");
  if (preds.empty()) throw ArgumentError("confusion_metrics: empty input");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1) {
      (labels[i] == 1 ? tp : fp) += 1;
    } else {
      (labels[i] == 1 ? fn : tn) += 1;
    }
  }
  Confusion c;
  c.accuracy = static_cast<double>(tp + tn) / static_cast<double>(preds.size());
  c.precision_undefined = tp + fp == 0;
  c.recall_undefined = tp + fn == 0;
  c.precision = c.precision_undefined ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  c.recall = c.recall_undefined ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  c.f1 = c.precision + c.recall > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
  return c;
}

double brier(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw DimensionError("brier: length mismatch");
  if (probs.empty()) throw ArgumentError("brier: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) ss += (probs[i] - labels[i]) * (probs[i] - labels[i]);
  return ss / static_cast<double>(probs.size());
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

void RunningStats::push(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

Summary RunningStats::summary() const {
  Summary s;
  s.n = n_;
  s.mean = mean_;
  s.std = n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0;
  return s;
}

}  // namespace avlr::metrics
