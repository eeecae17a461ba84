// Copyright 2026 The boxscreen Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats.
//
//   A:       Matrix Market (array or coordinate; real, integer or pattern;
//            general, symmetric or skew-symmetric), or headerless CSV.
//            Coordinate files are densified.
//   y:       one value per line (CSV, single column).
//   bounds:  "nn" (l = 0, u = inf), "box:LO:HI", or a two-column CSV with
//            one "l,u" row per coordinate; "inf" is accepted for u.
//   traces:  CSV with header round,elapsed_s,primal,dual,gap,preserved,ratio.
//
// Doubles are written in shortest round-trip form.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "boxscreen/driver.hpp"
#include "boxscreen/error.hpp"
#include "boxscreen/model.hpp"

namespace boxscreen::harness {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string lower_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] inline void parse_fail(const std::string& path, size_t line,
                                    size_t column, const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line;
  if (column > 0) msg << ":" << column;
  msg << ": " << what;
  throw Error(ErrorCode::kParseError, msg.str());
}

inline double parse_number(std::string_view token, const std::string& path,
                           size_t line, size_t column) {
  token = trim(token);
  const std::string lower = lower_case(token);
  if (lower == "inf" || lower == "+inf" || lower == "infinity") return kInf;
  if (lower == "-inf" || lower == "-infinity") return -kInf;
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() ||
      res.ptr != token.data() + token.size()) {
    parse_fail(path, line, column,
               "cannot parse '" + std::string(token) + "' as a number");
  }
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  const bool comma = line.find(',') != std::string_view::npos;
  size_t start = 0;
  if (comma) {
    while (true) {
      const size_t pos = line.find(',', start);
      out.push_back(trim(line.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  } else {
    while (start < line.size()) {
      const size_t b = line.find_first_not_of(" \t\r", start);
      if (b == std::string_view::npos) break;
      const size_t e = line.find_first_of(" \t\r", b);
      out.push_back(line.substr(b, e - b));
      if (e == std::string_view::npos) break;
      start = e;
    }
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kParseError, "cannot write " + path);
  return out;
}

}  // namespace detail

inline Matrix read_matrix_market(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  size_t line_no = 1;
  if (!std::getline(in, line)) detail::parse_fail(path, 1, 0, "empty file");
  std::istringstream banner(detail::lower_case(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix") {
    detail::parse_fail(path, 1, 0, "missing %%MatrixMarket matrix banner");
  }
  if (format != "array" && format != "coordinate") {
    detail::parse_fail(path, 1, 0, "unsupported format '" + format + "'");
  }
  if (field != "real" && field != "integer" && field != "double" &&
      !(field == "pattern" && format == "coordinate")) {
    detail::parse_fail(path, 1, 0, "unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" &&
      symmetry != "skew-symmetric") {
    detail::parse_fail(path, 1, 0, "unsupported symmetry '" + symmetry + "'");
  }

  // Size line, after comments.
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '%') continue;
    fields = detail::split_fields(t);
    break;
  }
  const size_t want = format == "array" ? 2 : 3;
  if (fields.size() != want) {
    detail::parse_fail(path, line_no, 0, "malformed size line");
  }
  std::vector<double> dims;
  for (size_t k = 0; k < fields.size(); ++k) {
    const double d = detail::parse_number(fields[k], path, line_no, k + 1);
    if (d < 0 || d != std::floor(d)) {
      detail::parse_fail(path, line_no, k + 1, "size must be a nonnegative integer");
    }
    dims.push_back(d);
  }
  const Index rows = static_cast<Index>(dims[0]);
  const Index cols = static_cast<Index>(dims[1]);
  Matrix a = Matrix::Zero(rows, cols);
  const bool symmetric = symmetry != "general";
  const double mirror = symmetry == "skew-symmetric" ? -1.0 : 1.0;

  if (symmetric && rows != cols) {
    detail::parse_fail(path, line_no, 0, "symmetric matrix must be square");
  }

  if (format == "array") {
    // Column-major; symmetric storage lists the lower triangle only and
    // skew-symmetric storage omits the diagonal as well.
    const Index skip = symmetry == "skew-symmetric" ? 1 : 0;
    auto first_row = [&](Index j) { return symmetric ? j + skip : Index{0}; };
    Index j = 0;
    Index i = first_row(0);
    auto advance = [&] {
      while (j < cols && i >= rows) {
        ++j;
        i = first_row(j);
      }
    };
    advance();
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = detail::trim(line);
      if (t.empty() || t.front() == '%') continue;
      if (j >= cols) detail::parse_fail(path, line_no, 0, "too many entries");
      const double v = detail::parse_number(t, path, line_no, 1);
      a(i, j) = v;
      if (symmetric && i != j) a(j, i) = mirror * v;
      ++i;
      advance();
    }
    if (j < cols) detail::parse_fail(path, line_no, 0, "too few entries");
    return a;
  }

  const Index nnz = static_cast<Index>(dims[2]);
  Index seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '%') continue;
    const auto f = detail::split_fields(t);
    const size_t expect = field == "pattern" ? 2 : 3;
    if (f.size() != expect) {
      detail::parse_fail(path, line_no, 0,
                         "expected " + std::to_string(expect) + " fields");
    }
    const double ri = detail::parse_number(f[0], path, line_no, 1);
    const double ci = detail::parse_number(f[1], path, line_no, 2);
    if (ri < 1 || ri > rows || ci < 1 || ci > cols || ri != std::floor(ri) ||
        ci != std::floor(ci)) {
      detail::parse_fail(path, line_no, 1, "index out of range");
    }
    const double v =
        field == "pattern" ? 1.0 : detail::parse_number(f[2], path, line_no, 3);
    const Index r = static_cast<Index>(ri) - 1;
    const Index c = static_cast<Index>(ci) - 1;
    a(r, c) += v;
    if (symmetric && r != c) a(c, r) += mirror * v;
    ++seen;
  }
  if (seen != nnz) {
    detail::parse_fail(path, line_no, 0,
                       "expected " + std::to_string(nnz) + " entries, found " +
                           std::to_string(seen));
  }
  return a;
}

// Headerless CSV (comma or whitespace separated), one matrix row per line.
inline Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = detail::split_fields(t);
    std::vector<double> row;
    row.reserve(f.size());
    for (size_t k = 0; k < f.size(); ++k) {
      row.push_back(detail::parse_number(f[k], path, line_no, k + 1));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      detail::parse_fail(path, line_no, 0,
                         "expected " + std::to_string(rows.front().size()) +
                             " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) detail::parse_fail(path, line_no, 0, "no data");
  Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[i][j];
  }
  return a;
}

inline bool looks_like_matrix_market(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::string first;
  std::getline(in, first);
  return detail::lower_case(first).rfind("%%matrixmarket", 0) == 0;
}

inline Matrix read_matrix(const std::string& path) {
  return looks_like_matrix_market(path) ? read_matrix_market(path)
                                        : read_csv_matrix(path);
}

inline Vector read_vector_csv(const std::string& path) {
  const Matrix m = read_csv_matrix(path);
  if (m.cols() != 1) {
    throw Error(ErrorCode::kParseError,
                path + ": expected a single column, found " +
                    std::to_string(m.cols()));
  }
  return m.col(0);
}

struct Bounds {
  Vector lower;
  Vector upper;
};

inline Bounds parse_bounds(const std::string& spec, Index n) {
  if (spec == "nn") return {Vector::Zero(n), Vector::Constant(n, kInf)};
  if (spec.rfind("box:", 0) == 0) {
    const std::string rest = spec.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kParseError, "bounds '" + spec + "': expected box:LO:HI");
    }
    const double lo = detail::parse_number(rest.substr(0, colon), spec, 1, 1);
    const double hi = detail::parse_number(rest.substr(colon + 1), spec, 1, 2);
    return {Vector::Constant(n, lo), Vector::Constant(n, hi)};
  }
  const Matrix b = read_csv_matrix(spec);
  if (b.cols() != 2) {
    throw Error(ErrorCode::kParseError,
                spec + ": bounds file needs two columns (l,u)");
  }
  if (b.rows() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                spec + ": " + std::to_string(b.rows()) + " bound rows for " +
                    std::to_string(n) + " columns");
  }
  return {b.col(0), b.col(1)};
}

struct LoadOptions {
  bool normalize_columns = false;
};

inline Problem load_problem(const std::string& path_a, const std::string& path_y,
                            const std::string& bounds_spec,
                            const LoadOptions& opts = {}) {
  Matrix a = read_matrix(path_a);
  Vector y = read_vector_csv(path_y);
  if (y.size() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "y has " + std::to_string(y.size()) + " entries but A has " +
                    std::to_string(a.rows()) + " rows");
  }
  for (Index j = 0; j < a.cols(); ++j) {
    if (a.col(j).squaredNorm() == 0.0) {
      throw Error(ErrorCode::kZeroColumn,
                  path_a + ": column " + std::to_string(j) +
                      " (0-based) is all zeros");
    }
  }
  for (Index i = 0; i < a.rows(); ++i) {
    if (a.row(i).squaredNorm() == 0.0) {
      throw Error(ErrorCode::kZeroColumn,
                  path_a + ": row " + std::to_string(i) +
                      " (0-based) is all zeros");
    }
  }
  if (opts.normalize_columns) a.colwise().normalize();
  Bounds b = parse_bounds(bounds_spec, a.cols());
  return Problem(std::move(a), std::move(y), std::move(b.lower),
                 std::move(b.upper));
}

inline void write_matrix_market(const std::string& path, const Matrix& a) {
  std::ofstream out = detail::open_output(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << " " << a.cols() << "\n";
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) out << format_double(a(i, j)) << "\n";
  }
}

inline void write_vector_csv(const std::string& path, const Vector& v) {
  std::ofstream out = detail::open_output(path);
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << "\n";
}

inline void write_bounds_csv(const std::string& path, const Vector& lower,
                             const Vector& upper) {
  std::ofstream out = detail::open_output(path);
  for (Index j = 0; j < lower.size(); ++j) {
    out << format_double(lower[j]) << "," << format_double(upper[j]) << "\n";
  }
}

struct ProblemFiles {
  std::string a;
  std::string y;
  std::string bounds;
};

inline ProblemFiles problem_files(const std::string& prefix) {
  return {prefix + "_A.mtx", prefix + "_y.csv", prefix + "_bounds.csv"};
}

inline ProblemFiles save_problem(const std::string& prefix, const Problem& p) {
  const ProblemFiles files = problem_files(prefix);
  write_matrix_market(files.a, p.a());
  write_vector_csv(files.y, p.y());
  write_bounds_csv(files.bounds, p.lower(), p.upper());
  return files;
}

inline void write_trace_csv(std::ostream& out,
                            const std::vector<TraceRecord>& trace) {
  out << "round,elapsed_s,primal,dual,gap,preserved,ratio\n";
  for (const TraceRecord& r : trace) {
    out << r.round << "," << format_double(r.elapsed) << ","
        << format_double(r.primal) << "," << format_double(r.dual) << ","
        << format_double(r.gap) << "," << r.preserved_count << ","
        << format_double(r.screening_ratio) << "\n";
  }
}

inline void write_trace_csv(const std::string& path,
                            const std::vector<TraceRecord>& trace) {
  std::ofstream out = detail::open_output(path);
  write_trace_csv(out, trace);
}

inline nlohmann::json to_json(const TraceRecord& r) {
  return {{"round", r.round},
          {"elapsed_s", r.elapsed},
          {"primal", r.primal},
          {"dual", r.dual},
          {"gap", r.gap},
          {"preserved", r.preserved_count},
          {"ratio", r.screening_ratio},
          {"new_lower", r.newly_screened_lower},
          {"new_upper", r.newly_screened_upper}};
}

inline nlohmann::json to_json(const SolveResult& res) {
  nlohmann::json trace = nlohmann::json::array();
  for (const TraceRecord& r : res.trace) trace.push_back(to_json(r));
  return {{"solver", std::string(to_string(res.solver))},
          {"screening", res.screening == Screening::kOn},
          {"converged", res.converged},
          {"rounds", res.rounds},
          {"elapsed_s", res.elapsed},
          {"primal", res.primal},
          {"dual", res.dual},
          {"gap", res.gap},
          {"preserved", res.preserved_count},
          {"screening_ratio", res.screening_ratio()},
          {"x", std::vector<double>(res.x.data(), res.x.data() + res.x.size())},
          {"theta", std::vector<double>(res.theta.data(),
                                        res.theta.data() + res.theta.size())},
          {"trace", std::move(trace)}};
}

// FNV-1a over the raw bytes of A, y, l and u.
inline std::uint64_t instance_hash(const Problem& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const double* data, Index count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (size_t k = 0; k < static_cast<size_t>(count) * sizeof(double); ++k) {
      h ^= bytes[k];
      h *= 0x100000001b3ULL;
    }
  };
  const double dims[2] = {static_cast<double>(p.rows()),
                          static_cast<double>(p.cols())};
  mix(dims, 2);
  mix(p.a().data(), p.a().size());
  mix(p.y().data(), p.y().size());
  mix(p.lower().data(), p.lower().size());
  mix(p.upper().data(), p.upper().size());
  return h;
}

}  // namespace boxscreen::harness
