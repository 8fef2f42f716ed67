#include "avlr/dataset.hpp"

#include <cmath>
#include <limits>

#include "avlr/errors.hpp"

namespace avlr {

int Dataset::missing_in_row(int i) const {
  int n = 0;
  for (int j = 0; j < dim(); ++j) n += mask(i, j) ? 0 : 1;
  return n;
}

std::size_t Dataset::missing_count() const {
  std::size_t n = 0;
  for (int i = 0; i < rows(); ++i) n += static_cast<std::size_t>(missing_in_row(i));
  return n;
}

void Dataset::validate() const {
  if (mask.rows() != x.rows() || mask.cols() != x.cols()) {
    throw DataError("mask shape differs from covariate shape");
  }
  if (y.size() != static_cast<std::size_t>(x.rows())) {
    throw DataError("label count differs from row count");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw DataError("label at row " + std::to_string(i) + " is not binary");
  }
  for (int i = 0; i < rows(); ++i) {
    for (int j = 0; j < dim(); ++j) {
      if (mask(i, j) && !std::isfinite(x(i, j))) {
        throw DataError("observed cell (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is not finite");
      }
    }
  }
}

Dataset Dataset::subset(std::span<const int> rows) const {
  Dataset out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.x.resize(n, x.cols());
  out.mask.resize(n, x.cols());
  if (complete) out.complete = RowMatrix(n, x.cols());
  out.y.reserve(rows.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    out.x.row(k) = x.row(rows[k]);
    out.mask.row(k) = mask.row(rows[k]);
    if (complete) out.complete->row(k) = complete->row(rows[k]);
    out.y.push_back(y[rows[k]]);
  }
  out.feature_names = feature_names;
  return out;
}

Dataset make_incomplete(const RowMatrix& complete, const MaskMatrix& mask, std::vector<int> y) {
  Dataset out;
  out.x = complete;
  out.mask = mask;
  out.y = std::move(y);
  out.complete = complete;
  out.feature_names = default_feature_names(static_cast<int>(complete.cols()));
  for (Eigen::Index i = 0; i < complete.rows(); ++i) {
    for (Eigen::Index j = 0; j < complete.cols(); ++j) {
      if (!mask(i, j)) out.x(i, j) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  out.validate();
  return out;
}

Dataset make_complete(const RowMatrix& x, std::vector<int> y) {
  return make_incomplete(x, MaskMatrix::Ones(x.rows(), x.cols()), std::move(y));
}

std::vector<std::string> default_feature_names(int d) {
  std::vector<std::string> names;
  for (int j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace avlr
