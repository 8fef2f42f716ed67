#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "avlr/dataset.hpp"

namespace avlr::metrics {

/// sqrt(mean (a_i - b_i)^2). Throws ArgumentError on empty input.
double rmse(std::span<const double> a, std::span<const double> b);

/// RMSE over the cells with mask == 0 only.
double rmse_masked(const RowMatrix& estimate, const RowMatrix& truth, const MaskMatrix& mask);

double frobenius_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Mann-Whitney AUC: (concordant + tied / 2) / (n1 * n0). Throws ArgumentError
/// if only one class is present.
double auc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // no positive predictions
  bool recall_undefined = false;     // no positive labels
};

Confusion confusion_metrics(std::span<const int> preds, std::span<const int> labels);

double brier(std::span<const double> probs, std::span<const int> labels);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (divide by n - 1); 0 when n < 2
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

/// Welford accumulator; agrees with summarize().
class RunningStats {
 public:
  void push(double x);
  Summary summary() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace avlr::metrics
