#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace avlr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Incomplete covariates with binary labels. mask(i, j) == 1 means x(i, j) is
/// observed; missing cells of x hold NaN.
struct Dataset {
  RowMatrix x;
  MaskMatrix mask;
  std::vector<int> y;
  std::optional<RowMatrix> complete;
  std::vector<std::string> feature_names;

  int rows() const { return static_cast<int>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }
  std::span<const double> row(int i) const { return {x.row(i).data(), static_cast<std::size_t>(dim())}; }
  std::span<const std::uint8_t> row_mask(int i) const {
    return {mask.row(i).data(), static_cast<std::size_t>(dim())};
  }
  int missing_in_row(int i) const;
  std::size_t missing_count() const;

  /// Throws DataError on shape mismatches, non-binary labels, or observed NaNs.
  void validate() const;
  Dataset subset(std::span<const int> rows) const;
};

/// Builds a dataset from complete covariates and a mask; keeps `complete` as
/// ground truth.
Dataset make_incomplete(const RowMatrix& complete, const MaskMatrix& mask, std::vector<int> y);

/// Fully observed dataset.
Dataset make_complete(const RowMatrix& x, std::vector<int> y);

std::vector<std::string> default_feature_names(int d);

}  // namespace avlr
