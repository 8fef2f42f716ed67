#pragma once

#include <string>

#include "avlr/dataset.hpp"

namespace avlr::io {

/// Comma-separated file with a header row. Empty cells and the token NaN (any
/// case) are missing. Throws DataError on unparseable cells, a missing label
/// column, or non-binary labels. An empty label_column reads every column as a
/// covariate and sets all labels to 0.
Dataset read_csv_dataset(const std::string& path, const std::string& label_column);

/// Writes covariates (missing cells empty) followed by the label column.
void write_csv_dataset(const std::string& path, const Dataset& data, const std::string& label_column = "y");

}  // namespace avlr::io
