#pragma once

#include "kacov/kernels.hpp"
#include "kacov/matrix.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kacov {

// Comma-separated numeric table. A first row that does not parse as numbers
// is taken as a header and skipped; blank lines are ignored.
struct CsvTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  bool had_header = false;
};

CsvTable parse_csv(const std::string& text, const std::string& source = "<input>");
CsvTable read_csv(const std::string& path);

// Rows become samples. With shape_dim = d, each row must hold a row-major
// d x d SPD matrix.
SampleSet load_samples(const std::string& path, std::optional<std::size_t> shape_dim = {});
SquareMatrix load_square_matrix(const std::string& path);

// Parses "d" or "dxd".
std::size_t parse_shape(const std::string& text);

// 17 significant digits, enough to round-trip binary64.
std::string format_double(double v);

void write_matrix_csv(std::ostream& out, const SquareMatrix& m);

}  // namespace kacov
