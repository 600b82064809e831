#include "kacov/io.hpp"

#include "kacov/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace kacov {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view field) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::string_view rest(text);
  std::size_t line_no = 0;
  bool first = true;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    const std::string_view line = trim(rest.substr(0, nl));
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (auto f : fields) {
      const auto v = parse_number(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (first) {
        t.had_header = true;
        first = false;
        continue;
      }
      throw Error(ErrorCode::InputError,
                  source + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    first = false;
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::InputError,
                    source + ":" + std::to_string(line_no) + ": non-finite value");
      }
    }
    if (t.rows == 0) {
      t.cols = row.size();
    } else if (row.size() != t.cols) {
      throw Error(ErrorCode::InputError, source + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(t.cols) + " columns, found " +
                                             std::to_string(row.size()));
    }
    t.values.insert(t.values.end(), row.begin(), row.end());
    ++t.rows;
  }
  if (t.rows == 0) throw Error(ErrorCode::InputError, source + ": no data rows");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InputError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

SampleSet load_samples(const std::string& path, std::optional<std::size_t> shape_dim) {
  CsvTable t = read_csv(path);
  try {
    if (!shape_dim) return SampleSet::vectors(t.rows, t.cols, std::move(t.values));
    const std::size_t d = *shape_dim;
    if (t.cols != d * d) {
      throw Error(ErrorCode::InputError, "shape " + std::to_string(d) + "x" + std::to_string(d) +
                                             " needs " + std::to_string(d * d) +
                                             " columns, found " + std::to_string(t.cols));
    }
    return SampleSet::spd_matrices(t.rows, d, std::move(t.values));
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

SquareMatrix load_square_matrix(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.rows != t.cols) {
    throw Error(ErrorCode::InputError, path + ": matrix is " + std::to_string(t.rows) + "x" +
                                           std::to_string(t.cols) + ", expected square");
  }
  SquareMatrix m(t.rows);
  std::copy(t.values.begin(), t.values.end(), m.data());
  return m;
}

std::size_t parse_shape(const std::string& text) {
  const auto x = text.find('x');
  auto number = [&](std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
      throw Error(ErrorCode::InvalidSpec, "bad shape '" + text + "' (expected dxd)");
    }
    return v;
  };
  const std::string_view all(text);
  if (x == std::string::npos) return number(all);
  const std::size_t r = number(all.substr(0, x));
  const std::size_t c = number(all.substr(x + 1));
  if (r != c) throw Error(ErrorCode::InvalidSpec, "shape '" + text + "' is not square");
  return r;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_csv(std::ostream& out, const SquareMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace kacov
