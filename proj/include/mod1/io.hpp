#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mod1/angular.hpp"
#include "mod1/common.hpp"
#include "mod1/grid_graph.hpp"

namespace mod1 {

// 17 significant digits round-trip doubles exactly.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_real(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw io_error("trailing characters after number '" + s + "'", line);
    return v;
  } catch (const io_error&) {
    throw;
  } catch (const std::exception&) {
    throw io_error("cannot parse number '" + s + "'", line);
  }
}

inline std::int64_t parse_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw io_error("trailing characters after integer '" + s + "'", line);
    return v;
  } catch (const io_error&) {
    throw;
  } catch (const std::exception&) {
    throw io_error("cannot parse integer '" + s + "'", line);
  }
}

}  // namespace detail

// Sample files: header `index,x1[,x2,...],y[,clean_f]`, one row per grid point in
// lexicographic order, 1-based index. Coordinates are informational; the grid is
// reconstructed from the dimension and the row count.
inline void write_samples_csv(std::ostream& os, const GridSpec& spec, const Mod1Samples& y,
                              const Eigen::VectorXd* clean_f = nullptr) {
  validate(spec);
  if (y.size() != spec.n()) throw std::invalid_argument("sample count does not match grid");
  os << "index";
  for (int t = 1; t <= spec.d; ++t) os << ",x" << t;
  os << ",y";
  if (clean_f != nullptr) os << ",clean_f";
  os << "\n";
  double x[16];
  for (std::int64_t i = 0; i < spec.n(); ++i) {
    grid_point(spec, i, x);
    os << (i + 1);
    for (int t = 0; t < spec.d; ++t) os << ',' << format_real(x[t]);
    os << ',' << format_real(y[i]);
    if (clean_f != nullptr) os << ',' << format_real((*clean_f)[i]);
    os << "\n";
  }
}

struct SamplesFile {
  int d = 1;
  std::int64_t m = 0;  // points per axis recovered from the row count
  Mod1Samples y;
  Eigen::VectorXd clean_f;
  bool has_clean = false;
};

inline SamplesFile read_samples_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw io_error("empty samples file", 1);
  const std::vector<std::string> header = detail::split_csv(line);
  if (header.size() < 3 || header[0] != "index")
    throw io_error("expected header index,x1[,...],y[,clean_f]", 1);
  SamplesFile out;
  std::size_t col = 1;
  while (col < header.size() && header[col] == "x" + std::to_string(col)) ++col;
  out.d = static_cast<int>(col - 1);
  if (out.d < 1) throw io_error("no coordinate columns in header", 1);
  if (col >= header.size() || header[col] != "y") throw io_error("missing y column", 1);
  ++col;
  if (col < header.size()) {
    if (header[col] != "clean_f" || col + 1 != header.size())
      throw io_error("unexpected trailing header columns", 1);
    out.has_clean = true;
  }

  std::vector<double> ys, cleans;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv(line);
    if (cells.size() != header.size())
      throw io_error("expected " + std::to_string(header.size()) + " columns", lineno);
    const std::int64_t idx = detail::parse_int(cells[0], lineno);
    if (idx != static_cast<std::int64_t>(ys.size()) + 1)
      throw io_error("index column must run 1..n without gaps", lineno);
    const double yv = detail::parse_real(cells[1 + out.d], lineno);
    if (!(yv >= 0.0 && yv < 1.0)) throw io_error("y outside [0, 1)", lineno);
    ys.push_back(yv);
    if (out.has_clean) {
      const double cv = detail::parse_real(cells[2 + out.d], lineno);
      if (!std::isfinite(cv)) throw io_error("clean_f not finite", lineno);
      cleans.push_back(cv);
    }
  }
  if (ys.empty()) throw io_error("samples file has no data rows", lineno);

  const std::int64_t n = static_cast<std::int64_t>(ys.size());
  std::int64_t m = n;
  if (out.d > 1) {
    m = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / out.d)));
    std::int64_t check = 1;
    for (int t = 0; t < out.d; ++t) check *= m;
    if (check != n)
      throw io_error("row count " + std::to_string(n) + " is not a perfect " +
                     std::to_string(out.d) + "-th power");
  }
  out.m = m;
  out.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  if (out.has_clean) out.clean_f = Eigen::Map<Eigen::VectorXd>(cleans.data(), n);
  return out;
}

// Two-column series `index,<name>` used for denoised residues (r_hat) and unwrapped
// values (f_hat).
inline void write_series_csv(std::ostream& os, const std::string& name,
                             const Eigen::VectorXd& values) {
  os << "index," << name << "\n";
  for (Eigen::Index i = 0; i < values.size(); ++i)
    os << (i + 1) << ',' << format_real(values[i]) << "\n";
}

inline Eigen::VectorXd read_series_csv(std::istream& is, const std::string& name) {
  std::string line;
  if (!std::getline(is, line)) throw io_error("empty series file", 1);
  const std::vector<std::string> header = detail::split_csv(line);
  if (header.size() != 2 || header[0] != "index" || header[1] != name)
    throw io_error("expected header index," + name, 1);
  std::vector<double> vals;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv(line);
    if (cells.size() != 2) throw io_error("expected 2 columns", lineno);
    if (detail::parse_int(cells[0], lineno) != static_cast<std::int64_t>(vals.size()) + 1)
      throw io_error("index column must run 1..n without gaps", lineno);
    const double v = detail::parse_real(cells[1], lineno);
    if (!std::isfinite(v)) throw io_error("value not finite", lineno);
    vals.push_back(v);
  }
  if (vals.empty()) throw io_error("series file has no data rows", lineno);
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Elevation grids: first line `rows cols`, then rows*cols values in row-major order,
// whitespace separated with any line structure.
inline Eigen::MatrixXd read_grid_matrix(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw io_error("empty grid file", 1);
  std::istringstream head(line);
  std::int64_t rows = 0, cols = 0;
  if (!(head >> rows >> cols) || rows < 1 || cols < 1)
    throw io_error("first line must be `rows cols`", 1);
  std::string extra;
  if (head >> extra) throw io_error("first line must be `rows cols`", 1);

  Eigen::MatrixXd values(rows, cols);
  std::int64_t have = 0;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      if (have >= rows * cols) throw io_error("more values than rows*cols", lineno);
      const double v = detail::parse_real(tok, lineno);
      if (!std::isfinite(v)) throw io_error("grid value not finite", lineno);
      values(have / cols, have % cols) = v;
      ++have;
    }
  }
  if (have != rows * cols)
    throw io_error("expected " + std::to_string(rows * cols) + " values, found " +
                   std::to_string(have));
  return values;
}

inline void write_grid_matrix(std::ostream& os, const Eigen::MatrixXd& values) {
  os << values.rows() << ' ' << values.cols() << "\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      os << format_real(values(r, c)) << (c + 1 == values.cols() ? "\n" : " ");
  }
}

}  // namespace mod1
