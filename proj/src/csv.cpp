#include "avlr/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "avlr/errors.hpp"

namespace avlr::io {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

bool is_missing_token(const std::string& s) {
  if (s.empty()) return true;
  if (s.size() != 3) return false;
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower == "nan";
}

double parse_real(const std::string& s, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw DataError("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + s + "'");
  }
  return v;
}

}  // namespace

Dataset read_csv_dataset(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split(line);
  for (auto& h : header) h = trim(h);
  std::size_t label_idx = header.size();
  if (!label_column.empty()) {
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) throw DataError(path + ": no label column '" + label_column + "'");
    label_idx = static_cast<std::size_t>(label_it - header.begin());
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) names.push_back(header[c]);
  }
  const std::size_t d = names.size();
  if (d == 0) throw DataError(path + ": no covariate columns");

  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  std::vector<int> y;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (c == label_idx) {
        if (cell != "0" && cell != "1") {
          throw DataError("row " + std::to_string(row) + ": label '" + cell + "' is not 0 or 1");
        }
        y.push_back(cell == "1" ? 1 : 0);
      } else if (is_missing_token(cell)) {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        mask.push_back(0);
      } else {
        values.push_back(parse_real(cell, row, header[c]));
        mask.push_back(1);
      }
    }
    if (label_idx == header.size()) y.push_back(0);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  Dataset data;
  data.x = Eigen::Map<RowMatrix>(values.data(), n, static_cast<Eigen::Index>(d));
  data.mask = Eigen::Map<MaskMatrix>(mask.data(), n, static_cast<Eigen::Index>(d));
  data.y = std::move(y);
  data.feature_names = std::move(names);
  data.validate();
  return data;
}

void write_csv_dataset(const std::string& path, const Dataset& data, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const std::vector<std::string> names =
      data.feature_names.size() == static_cast<std::size_t>(data.dim()) ? data.feature_names
                                                                        : default_feature_names(data.dim());
  for (const auto& name : names) out << name << ',';
  out << label_column << '\n';
  char buf[64];
  for (int i = 0; i < data.rows(); ++i) {
    for (int j = 0; j < data.dim(); ++j) {
      if (data.mask(i, j)) {
        const auto res = std::to_chars(buf, buf + sizeof buf, data.x(i, j));
        out.write(buf, res.ptr - buf);
      }
      out << ',';
    }
    out << data.y[i] << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace avlr::io
