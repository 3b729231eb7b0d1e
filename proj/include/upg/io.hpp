#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "upg/model.hpp"

namespace upg {

// Numeric CSV with a mandatory header row, '.' decimals, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x columns

  Eigen::Index column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return static_cast<Eigen::Index>(j);
    }
    return -1;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_number(const std::string& s, std::size_t line, const std::string& col) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw InputError("csv line " + std::to_string(line) + ", column '" + col + "': not a number: '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) break;
  }
  if (lineno == 0 || detail::trim(line).empty()) throw InputError("csv: missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  t.header = detail::split_csv_line(line);
  for (const auto& h : t.header) {
    if (h.empty()) throw InputError("csv: empty column name in header");
  }
  const std::size_t p = t.header.size();
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != p) {
      throw InputError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(p) + " fields, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> r(p);
    for (std::size_t j = 0; j < p; ++j) r[j] = detail::parse_number(cells[j], lineno, t.header[j]);
    rows.push_back(std::move(r));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) t.values(i, j) = rows[i][j];
  }
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_csv(in);
}

// Design, outcomes and trials pulled out of a table. Everything except `y` and the
// trials column is a covariate; the intercept column is appended last.
struct FitInput {
  Matrix X;
  IVector y;
  IVector n;
  std::vector<std::string> names;
};

inline FitInput table_to_input(const CsvTable& t, bool append_intercept, const std::string& trials_col = "") {
  const Eigen::Index yc = t.column("y");
  if (yc < 0) throw InputError("csv: no 'y' column");
  const Eigen::Index nc = trials_col.empty() ? -1 : t.column(trials_col);
  if (!trials_col.empty() && nc < 0) throw InputError("csv: no '" + trials_col + "' trials column");

  auto as_int = [&](Eigen::Index i, Eigen::Index j) {
    const double v = t.values(i, j);
    if (v != std::round(v)) {
      throw InputError("row " + std::to_string(i + 1) + ": '" + t.header[j] + "' must be an integer");
    }
    return static_cast<int>(v);
  };

  FitInput f;
  const Eigen::Index N = t.values.rows();
  std::vector<Eigen::Index> cov;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(t.header.size()); ++j) {
    if (j != yc && j != nc) {
      cov.push_back(j);
      f.names.push_back(t.header[j]);
    }
  }
  const Eigen::Index d = static_cast<Eigen::Index>(cov.size()) + (append_intercept ? 1 : 0);
  if (d == 0) throw InputError("csv: no covariates and no intercept");
  f.X.resize(N, d);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < cov.size(); ++j) f.X(i, j) = t.values(i, cov[j]);
    if (append_intercept) f.X(i, d - 1) = 1.0;
  }
  if (append_intercept) f.names.push_back("intercept");
  f.y.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) f.y[i] = as_int(i, yc);
  if (nc >= 0) {
    f.n.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) f.n[i] = as_int(i, nc);
  }
  return f;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
    out << '\n';
  }
}

// Simulated data in the layout `fit` reads back: covariates x1.., then n (binomial), then y.
inline void write_simulated_csv(std::ostream& out, const SimulatedData& sim, Model model) {
  const Eigen::Index d = sim.X.cols();
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j + 1 < d; ++j) header.push_back("x" + std::to_string(j + 1));
  const bool binomial = model == Model::Binomial;
  if (binomial) header.push_back("n");
  header.push_back("y");
  Matrix v(sim.X.rows(), static_cast<Eigen::Index>(header.size()));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j + 1 < d; ++j) v(i, c++) = sim.X(i, j);
    if (binomial) v(i, c++) = sim.n[i];
    v(i, c) = sim.y[i];
  }
  write_csv(out, header, v);
}

}  // namespace upg
