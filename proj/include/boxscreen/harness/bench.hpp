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

// Paired screening-off / screening-on benchmark sweeps.
//
// A sweep is a list of cells (instance recipe + solver settings). For every
// repetition of a cell the instance is generated once and solved with
// screening off and then on. Reported times are medians over repetitions and
// speedup = median_off / median_on.
//
// Cells may run on several threads (BOXSCREEN_THREADS, default 1); a single
// timed solve always stays on one thread.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "boxscreen/driver.hpp"
#include "boxscreen/error.hpp"
#include "boxscreen/harness/generators.hpp"
#include "boxscreen/harness/io.hpp"
#include "boxscreen/solvers.hpp"

namespace boxscreen::harness {

inline constexpr double kSaturationTol = 1e-7;

struct BenchCell {
  GenSpec spec;
  SolverKind solver = SolverKind::kCoordinateDescent;
  double gap_tol = 1e-6;
  int inner_passes = 1;
};

struct BenchOptions {
  int repetitions = 5;
  // Use seed + repetition for repetition k instead of one fixed instance.
  bool vary_seed = false;
  int threads = 1;
};

struct RunRow {
  std::size_t cell = 0;
  int repetition = 0;
  SolverKind solver = SolverKind::kCoordinateDescent;
  bool screening = false;
  Family family = Family::kNnlsHalfNormal;
  Index m = 0;
  Index n = 0;
  std::uint64_t seed = 0;
  std::uint64_t instance_hash = 0;
  double elapsed = 0.0;
  std::int64_t rounds = 0;
  double primal = 0.0;
  double gap = 0.0;
  double screening_ratio = 0.0;
  bool converged = false;
  std::string error;
};

struct SummaryRow {
  BenchCell cell;
  std::uint64_t instance_hash = 0;
  double median_off = 0.0;
  double median_on = 0.0;
  double speedup = 0.0;
  // Fraction of coordinates of the screening-off solution within
  // kSaturationTol of a bound.
  double saturation_ratio = 0.0;
  double screening_ratio = 0.0;
  bool ok = false;
  std::string error;
};

struct BenchReport {
  std::vector<RunRow> runs;
  std::vector<SummaryRow> summary;
  int repetitions = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

inline double saturation_ratio(const Problem& p, const Vector& x,
                               double tol = kSaturationTol) {
  Index count = 0;
  for (Index j = 0; j < p.cols(); ++j) {
    const bool at_lower = std::abs(x[j] - p.lower()[j]) <= tol;
    const bool at_upper =
        !p.upper_is_infinite(j) && std::abs(x[j] - p.upper()[j]) <= tol;
    if (at_lower || at_upper) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(p.cols());
}

inline int threads_from_env() {
  const char* v = std::getenv("BOXSCREEN_THREADS");
  if (v == nullptr) return 1;
  const int t = std::atoi(v);
  return t >= 1 ? t : 1;
}

namespace detail {

struct CellOutcome {
  std::vector<RunRow> runs;
  SummaryRow summary;
};

inline CellOutcome run_cell(std::size_t index, const BenchCell& cell,
                            const BenchOptions& opts) {
  CellOutcome out;
  out.summary.cell = cell;
  SolverConfig cfg;
  cfg.kind = cell.solver;
  cfg.gap_tol = cell.gap_tol;
  cfg.inner_passes = cell.inner_passes;
  cfg.record_trace = false;

  std::vector<double> t_off;
  std::vector<double> t_on;
  for (int rep = 0; rep < opts.repetitions; ++rep) {
    GenSpec spec = cell.spec;
    if (opts.vary_seed) spec.seed += static_cast<std::uint64_t>(rep);
    RunRow base;
    base.cell = index;
    base.repetition = rep;
    base.solver = cell.solver;
    base.family = spec.family;
    base.m = spec.m;
    base.n = spec.n;
    base.seed = spec.seed;
    try {
      const Problem p = generate(spec);
      base.instance_hash = instance_hash(p);
      if (rep == 0) out.summary.instance_hash = base.instance_hash;
      for (const Screening mode : {Screening::kOff, Screening::kOn}) {
        RunRow row = base;
        row.screening = mode == Screening::kOn;
        try {
          const SolveResult res = solve(p, cfg, mode);
          row.elapsed = res.elapsed;
          row.rounds = res.rounds;
          row.primal = res.primal;
          row.gap = res.gap;
          row.screening_ratio = res.screening_ratio();
          row.converged = res.converged;
          if (!res.converged) row.error = "NotConverged";
          if (mode == Screening::kOff) {
            if (rep == 0) out.summary.saturation_ratio = saturation_ratio(p, res.x);
            t_off.push_back(res.elapsed);
          } else {
            if (rep == 0) out.summary.screening_ratio = res.screening_ratio();
            t_on.push_back(res.elapsed);
          }
        } catch (const Error& e) {
          row.error = e.what();
        }
        if (!row.error.empty() && out.summary.error.empty()) {
          out.summary.error = row.error;
        }
        out.runs.push_back(std::move(row));
      }
    } catch (const Error& e) {
      base.error = e.what();
      if (out.summary.error.empty()) out.summary.error = base.error;
      out.runs.push_back(std::move(base));
    }
  }
  out.summary.median_off = median(t_off);
  out.summary.median_on = median(t_on);
  out.summary.speedup = out.summary.median_off / out.summary.median_on;
  out.summary.ok = out.summary.error.empty() &&
                   static_cast<int>(t_off.size()) == opts.repetitions &&
                   static_cast<int>(t_on.size()) == opts.repetitions;
  return out;
}

}  // namespace detail

inline BenchReport run_bench(const std::vector<BenchCell>& cells,
                             const BenchOptions& opts) {
  if (opts.repetitions < 1) {
    throw Error(ErrorCode::kInvalidConfig, "repetitions must be >= 1");
  }
  std::vector<detail::CellOutcome> outcomes(cells.size());
  const int threads =
      std::max(1, std::min<int>(opts.threads, static_cast<int>(cells.size())));
  if (threads == 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      outcomes[k] = detail::run_cell(k, cells[k], opts);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < cells.size(); k = next++) {
          outcomes[k] = detail::run_cell(k, cells[k], opts);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  BenchReport report;
  report.repetitions = opts.repetitions;
  for (auto& o : outcomes) {
    for (auto& r : o.runs) report.runs.push_back(std::move(r));
    report.summary.push_back(std::move(o.summary));
  }
  return report;
}

// Desk-scale nonnegative sweep: m = 200, growing n, coordinate descent.
inline std::vector<BenchCell> preset_table1(std::uint64_t seed = 0) {
  std::vector<BenchCell> cells;
  for (Index n : {100, 200, 400, 600}) {
    BenchCell c;
    c.spec.family = Family::kNnlsHalfNormal;
    c.spec.m = 200;
    c.spec.n = n;
    c.spec.sparsity = 0.05;
    c.spec.noise_std = 1.0;
    c.spec.seed = seed;
    c.solver = SolverKind::kCoordinateDescent;
    cells.push_back(c);
  }
  return cells;
}

// Box half-widths 10^e for 12 exponents evenly spaced in [-3.5, -0.5].
inline std::vector<double> preset_fig2_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 12; ++k) {
    grid.push_back(std::pow(10.0, -3.5 + 3.0 * k / 11.0));
  }
  return grid;
}

// Desk-scale box sweep: m = 400, n = 200, projected gradient.
inline std::vector<BenchCell> preset_fig2(std::uint64_t seed = 0) {
  std::vector<BenchCell> cells;
  for (double b : preset_fig2_grid()) {
    BenchCell c;
    c.spec.family = Family::kBvlsGaussian;
    c.spec.m = 400;
    c.spec.n = 200;
    c.spec.box_halfwidth = b;
    c.spec.seed = seed;
    c.solver = SolverKind::kProjectedGradient;
    cells.push_back(c);
  }
  return cells;
}

namespace detail {

inline std::vector<nlohmann::json> as_list(const nlohmann::json& v) {
  if (v.is_array()) return {v.begin(), v.end()};
  return {v};
}

}  // namespace detail

// Sweep spec:
//   {"repetitions": 5, "vary_seed": false,
//    "cells": [{"family": "nnls", "m": 200, "n": [100, 200], "solver": "cd",
//               "seed": 0, "sparsity": 0.05, "noise_std": 1.0, "b": 1.0,
//               "gap_tol": 1e-6, "inner_passes": 1}]}
// Array-valued fields expand to their cartesian product.
inline std::vector<BenchCell> parse_bench_cells(const nlohmann::json& doc) {
  if (!doc.contains("cells") || !doc["cells"].is_array()) {
    throw Error(ErrorCode::kBadSpec, "bench spec needs a 'cells' array");
  }
  std::vector<BenchCell> cells;
  for (const auto& entry : doc["cells"]) {
    if (!entry.is_object()) {
      throw Error(ErrorCode::kBadSpec, "each cell must be an object");
    }
    std::vector<BenchCell> partial(1);
    for (auto it = entry.begin(); it != entry.end(); ++it) {
      const std::string key = it.key();
      std::vector<BenchCell> next;
      for (const BenchCell& base : partial) {
        for (const auto& v : detail::as_list(it.value())) {
          BenchCell c = base;
          try {
            if (key == "family") {
              const auto f = parse_family(v.get<std::string>());
              if (!f) throw Error(ErrorCode::kBadSpec, "unknown family");
              c.spec.family = *f;
            } else if (key == "m") {
              c.spec.m = v.get<Index>();
            } else if (key == "n") {
              c.spec.n = v.get<Index>();
            } else if (key == "b") {
              c.spec.box_halfwidth = v.get<double>();
            } else if (key == "sparsity") {
              c.spec.sparsity = v.get<double>();
            } else if (key == "noise_std") {
              c.spec.noise_std = v.get<double>();
            } else if (key == "seed") {
              c.spec.seed = v.get<std::uint64_t>();
            } else if (key == "solver") {
              const auto s = parse_solver_kind(v.get<std::string>());
              if (!s) throw Error(ErrorCode::kBadSpec, "unknown solver");
              c.solver = *s;
            } else if (key == "gap_tol") {
              c.gap_tol = v.get<double>();
            } else if (key == "inner_passes") {
              c.inner_passes = v.get<int>();
            } else {
              throw Error(ErrorCode::kBadSpec, "unknown field");
            }
          } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kBadSpec,
                        "cell field '" + key + "': " + e.what());
          } catch (const Error& e) {
            throw Error(ErrorCode::kBadSpec,
                        "cell field '" + key + "': " + e.what());
          }
          next.push_back(c);
        }
      }
      partial = std::move(next);
    }
    for (const BenchCell& c : partial) {
      c.spec.validate();
      cells.push_back(c);
    }
  }
  return cells;
}

inline void write_runs_csv(std::ostream& out, const BenchReport& r) {
  out << "cell,repetition,solver,screening,family,m,n,seed,instance_hash,"
         "elapsed_s,rounds,primal,gap,screening_ratio,converged,error\n";
  for (const RunRow& row : r.runs) {
    out << row.cell << "," << row.repetition << "," << to_string(row.solver)
        << "," << (row.screening ? "on" : "off") << ","
        << to_string(row.family) << "," << row.m << "," << row.n << ","
        << row.seed << "," << row.instance_hash << ","
        << format_double(row.elapsed) << "," << row.rounds << ","
        << format_double(row.primal) << "," << format_double(row.gap) << ","
        << format_double(row.screening_ratio) << ","
        << (row.converged ? 1 : 0) << ",\"" << row.error << "\"\n";
  }
}

inline void write_summary_csv(std::ostream& out, const BenchReport& r) {
  out << "solver,family,m,n,b,sparsity,seed,gap_tol,instance_hash,"
         "median_off_s,median_on_s,speedup,saturation_ratio,screening_ratio,"
         "ok,error\n";
  for (const SummaryRow& s : r.summary) {
    out << to_string(s.cell.solver) << "," << to_string(s.cell.spec.family)
        << "," << s.cell.spec.m << "," << s.cell.spec.n << ","
        << format_double(s.cell.spec.box_halfwidth) << ","
        << format_double(s.cell.spec.sparsity) << "," << s.cell.spec.seed
        << "," << format_double(s.cell.gap_tol) << "," << s.instance_hash
        << "," << format_double(s.median_off) << ","
        << format_double(s.median_on) << "," << format_double(s.speedup)
        << "," << format_double(s.saturation_ratio) << ","
        << format_double(s.screening_ratio) << "," << (s.ok ? 1 : 0) << ",\""
        << s.error << "\"\n";
  }
}

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const RunRow& row : r.runs) {
    runs.push_back({{"cell", row.cell},
                    {"repetition", row.repetition},
                    {"solver", std::string(to_string(row.solver))},
                    {"screening", row.screening},
                    {"family", std::string(to_string(row.family))},
                    {"m", row.m},
                    {"n", row.n},
                    {"seed", row.seed},
                    {"instance_hash", row.instance_hash},
                    {"elapsed_s", row.elapsed},
                    {"rounds", row.rounds},
                    {"primal", row.primal},
                    {"gap", row.gap},
                    {"screening_ratio", row.screening_ratio},
                    {"converged", row.converged},
                    {"error", row.error}});
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const SummaryRow& s : r.summary) {
    summary.push_back({{"solver", std::string(to_string(s.cell.solver))},
                       {"family", std::string(to_string(s.cell.spec.family))},
                       {"m", s.cell.spec.m},
                       {"n", s.cell.spec.n},
                       {"b", s.cell.spec.box_halfwidth},
                       {"sparsity", s.cell.spec.sparsity},
                       {"noise_std", s.cell.spec.noise_std},
                       {"seed", s.cell.spec.seed},
                       {"gap_tol", s.cell.gap_tol},
                       {"instance_hash", s.instance_hash},
                       {"median_off_s", s.median_off},
                       {"median_on_s", s.median_on},
                       {"speedup", s.speedup},
                       {"saturation_ratio", s.saturation_ratio},
                       {"screening_ratio", s.screening_ratio},
                       {"ok", s.ok},
                       {"error", s.error}});
  }
  return {{"prng", std::string(kPrngName)},
          {"repetitions", r.repetitions},
          {"summary", std::move(summary)},
          {"runs", std::move(runs)}};
}

// Writes PREFIX_runs.csv, PREFIX_summary.csv and PREFIX.json.
inline void write_bench_report(const std::string& prefix, const BenchReport& r) {
  {
    std::ofstream out = detail::open_output(prefix + "_runs.csv");
    write_runs_csv(out, r);
  }
  {
    std::ofstream out = detail::open_output(prefix + "_summary.csv");
    write_summary_csv(out, r);
  }
  std::ofstream out = detail::open_output(prefix + ".json");
  out << to_json(r).dump(2) << "\n";
}

}  // namespace boxscreen::harness
