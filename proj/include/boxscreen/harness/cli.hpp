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

// Command-line front end.
//
//   boxscreen gen       --family nnls|bvls --m M --n N --out PREFIX ...
//   boxscreen solve     --a A --y Y [--bounds nn|box:LO:HI|FILE] ...
//   boxscreen bench     (--spec FILE | --preset table1|fig2) --out PREFIX
//   boxscreen compare-t --a A --y Y --out PREFIX [--strategy S ...]
//
// Exit status: 0 on success, 1 on usage or input errors, 2 on numerical
// failures (including solves that hit max_rounds).

#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "boxscreen/driver.hpp"
#include "boxscreen/duality.hpp"
#include "boxscreen/error.hpp"
#include "boxscreen/harness/bench.hpp"
#include "boxscreen/harness/generators.hpp"
#include "boxscreen/harness/io.hpp"
#include "boxscreen/solvers.hpp"

namespace boxscreen::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

// Accepted spellings: neg-ones, neg-column=J, neg-column=most-correlated,
// neg-column=least-correlated, neg-mean-column, solve-linear, custom=FILE.
inline TStrategy parse_t_strategy(const std::string& text, const Problem& p) {
  if (text == "neg-ones") return TStrategy::neg_ones();
  if (text == "neg-mean-column") return TStrategy::neg_mean_column();
  if (text == "solve-linear") return TStrategy::solve_linear();
  const std::string column_prefix = "neg-column=";
  if (text.rfind(column_prefix, 0) == 0) {
    const std::string arg = text.substr(column_prefix.size());
    if (arg == "most-correlated") {
      return TStrategy::neg_column(correlated_column(p.a(), true));
    }
    if (arg == "least-correlated") {
      return TStrategy::neg_column(correlated_column(p.a(), false));
    }
    const double j = detail::parse_number(arg, "--t-strategy", 1, 0);
    if (j < 0 || j != static_cast<double>(static_cast<Index>(j))) {
      throw Error(ErrorCode::kInvalidConfig,
                  "neg-column expects a column index, got '" + arg + "'");
    }
    return TStrategy::neg_column(static_cast<Index>(j));
  }
  const std::string custom_prefix = "custom=";
  if (text.rfind(custom_prefix, 0) == 0) {
    return TStrategy::custom_vector(
        read_vector_csv(text.substr(custom_prefix.size())));
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown t strategy '" + text + "'");
}

inline int exit_code_for(const Error& e) {
  return is_numerical(e.code()) ? kExitNumerical : kExitUsage;
}

namespace detail {

inline std::string slug(std::string s) {
  for (char& c : s) {
    if (c == '=' || c == '/' || c == ' ') c = '-';
  }
  return s;
}

struct ProblemArgs {
  std::string a;
  std::string y;
  std::string bounds = "nn";
  bool normalize_columns = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--a", a, "Matrix A (Matrix Market or CSV)")->required();
    cmd->add_option("--y", y, "Observation vector (one-column CSV)")
        ->required();
    cmd->add_option("--bounds", bounds,
                    "nn | box:LO:HI | two-column CSV of l,u");
    cmd->add_flag("--normalize-columns", normalize_columns,
                  "Scale every column of A to unit norm");
  }

  Problem load() const {
    return load_problem(a, y, bounds, LoadOptions{normalize_columns});
  }
};

struct SolverArgs {
  std::string solver = "cd";
  double tol = 1e-6;
  int inner_passes = 1;
  std::uint64_t seed = 0;
  std::int64_t max_rounds = 0;
  double step_size = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--solver", solver, "pg | cd | active-set")
        ->check(CLI::IsMember({"pg", "cd", "active-set", "as"}));
    cmd->add_option("--tol", tol, "Duality gap tolerance");
    cmd->add_option("--inner-passes", inner_passes,
                    "Primal updates per screening round");
    cmd->add_option("--seed", seed, "Seed for the spectral norm estimate");
    cmd->add_option("--max-rounds", max_rounds, "Round budget (0 = default)");
    cmd->add_option("--step-size", step_size,
                    "Projected gradient step (0 = estimated)");
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.kind = *parse_solver_kind(solver);
    cfg.gap_tol = tol;
    cfg.inner_passes = inner_passes;
    cfg.seed = seed;
    if (max_rounds > 0) cfg.max_rounds = max_rounds;
    if (step_size > 0.0) cfg.step_size = step_size;
    cfg.record_trace = true;
    cfg.validate();
    return cfg;
  }
};

inline std::optional<TranslationVector> translation_for(
    const Problem& p, const std::string& strategy) {
  if (p.all_bounded()) return std::nullopt;
  return select_translation_vector(p, parse_t_strategy(strategy, p));
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out,
                    std::ostream& err) {
  CLI::App app{"Safe screening for box-constrained least squares"};
  app.name("boxscreen");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // gen
  GenSpec gen;
  std::string gen_family = "nnls";
  std::string gen_out;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Write a synthetic problem");
  gen_cmd->add_option("--family", gen_family, "nnls | bvls")
      ->check(CLI::IsMember({"nnls", "bvls"}));
  gen_cmd->add_option("--m", gen.m, "Rows")->required();
  gen_cmd->add_option("--n", gen.n, "Columns")->required();
  gen_cmd->add_option("--b", gen.box_halfwidth, "Box half-width (bvls)");
  gen_cmd->add_option("--sparsity", gen.sparsity,
                      "Fraction of nonzeros in the planted signal (nnls)");
  gen_cmd->add_option("--noise-std", gen.noise_std, "Noise level (nnls)");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--out", gen_out, "Output prefix")->required();

  // solve
  detail::ProblemArgs solve_problem;
  detail::SolverArgs solve_solver;
  std::string screen = "on";
  std::string t_strategy = "neg-ones";
  std::string trace_out;
  std::string result_out;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one problem");
  solve_problem.add_to(solve_cmd);
  solve_solver.add_to(solve_cmd);
  solve_cmd->add_option("--screen", screen, "on | off")
      ->check(CLI::IsMember({"on", "off"}));
  solve_cmd->add_option("--t-strategy", t_strategy,
                        "neg-ones | neg-column=J | neg-mean-column | "
                        "solve-linear | custom=FILE");
  solve_cmd->add_option("--trace-out", trace_out, "Trace CSV path");
  solve_cmd->add_option("--result-out", result_out, "Result JSON path");

  // bench
  std::string bench_spec;
  std::string bench_preset;
  std::string bench_out = "bench";
  int bench_reps = 0;
  std::uint64_t bench_seed = 0;
  bool bench_vary_seed = false;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Paired screening on/off timing sweep");
  auto* spec_opt =
      bench_cmd->add_option("--spec", bench_spec, "Sweep spec (JSON)");
  auto* preset_opt = bench_cmd->add_option("--preset", bench_preset,
                                           "table1 | fig2")
                         ->check(CLI::IsMember({"table1", "fig2"}));
  spec_opt->excludes(preset_opt);
  bench_cmd->add_option("--reps", bench_reps,
                        "Repetitions (overrides the spec; default 5)");
  bench_cmd->add_option("--seed", bench_seed, "Seed for preset instances");
  bench_cmd->add_flag("--vary-seed", bench_vary_seed,
                      "Draw a fresh instance per repetition");
  bench_cmd->add_option("--out", bench_out, "Output prefix");

  // compare-t
  detail::ProblemArgs cmp_problem;
  detail::SolverArgs cmp_solver;
  std::vector<std::string> strategies;
  std::string cmp_out;
  CLI::App* cmp_cmd = app.add_subcommand(
      "compare-t", "Screening ratio per round for several translations");
  cmp_problem.add_to(cmp_cmd);
  cmp_solver.add_to(cmp_cmd);
  cmp_cmd->add_option("--strategy", strategies,
                      "Translation strategies (repeatable)");
  cmp_cmd->add_option("--out", cmp_out, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) {
      gen.family = *parse_family(gen_family);
      const Problem p = generate(gen);
      const ProblemFiles files = save_problem(gen_out, p);
      out << "A: " << files.a << "\ny: " << files.y
          << "\nbounds: " << files.bounds << "\n";
      if (gen.family == Family::kNnlsHalfNormal) {
        write_vector_csv(gen_out + "_truth.csv", gen_nnls_truth(gen));
        out << "truth: " << gen_out << "_truth.csv\n";
      }
      out << "prng: " << kPrngName << "\n";
      return kExitOk;
    }

    if (*solve_cmd) {
      const Problem p = solve_problem.load();
      const SolverConfig cfg = solve_solver.config();
      const Screening mode = screen == "on" ? Screening::kOn : Screening::kOff;
      const SolveResult res =
          solve(p, cfg, mode, detail::translation_for(p, t_strategy));
      if (!trace_out.empty()) write_trace_csv(trace_out, res.trace);
      if (!result_out.empty()) {
        std::ofstream f = detail::open_output(result_out);
        f << to_json(res).dump(2) << "\n";
      }
      out << "solver: " << to_string(res.solver) << "\n"
          << "screening: " << screen << "\n"
          << "converged: " << (res.converged ? "true" : "false") << "\n"
          << "rounds: " << res.rounds << "\n"
          << "primal: " << format_double(res.primal) << "\n"
          << "gap: " << format_double(res.gap) << "\n"
          << "screening_ratio: " << format_double(res.screening_ratio())
          << "\n"
          << "elapsed_s: " << format_double(res.elapsed) << "\n";
      if (!res.converged) {
        err << "NotConverged: gap " << format_double(res.gap)
            << " after " << res.rounds << " rounds\n";
        return kExitNumerical;
      }
      return kExitOk;
    }

    if (*bench_cmd) {
      std::vector<BenchCell> cells;
      BenchOptions opts;
      opts.threads = threads_from_env();
      if (!bench_spec.empty()) {
        std::ifstream in = detail::open_input(bench_spec);
        nlohmann::json doc;
        try {
          in >> doc;
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorCode::kParseError, bench_spec + ": " + e.what());
        }
        cells = parse_bench_cells(doc);
        opts.repetitions = doc.value("repetitions", 5);
        opts.vary_seed = doc.value("vary_seed", false);
      } else if (bench_preset == "table1") {
        cells = preset_table1(bench_seed);
      } else if (bench_preset == "fig2") {
        cells = preset_fig2(bench_seed);
      } else {
        err << "bench: one of --spec or --preset is required\n"
            << bench_cmd->help();
        return kExitUsage;
      }
      if (bench_reps > 0) opts.repetitions = bench_reps;
      if (bench_vary_seed) opts.vary_seed = true;
      const BenchReport report = run_bench(cells, opts);
      write_bench_report(bench_out, report);
      write_summary_csv(out, report);
      const bool all_ok =
          std::all_of(report.summary.begin(), report.summary.end(),
                      [](const SummaryRow& s) { return s.ok; });
      return all_ok ? kExitOk : kExitNumerical;
    }

    if (*cmp_cmd) {
      const Problem p = cmp_problem.load();
      if (p.all_bounded()) {
        err << "compare-t needs at least one infinite upper bound\n";
        return kExitUsage;
      }
      SolverConfig cfg = cmp_solver.config();
      if (strategies.empty()) {
        strategies = {"neg-ones", "neg-column=most-correlated",
                      "neg-column=least-correlated", "neg-mean-column",
                      "solve-linear"};
      }
      struct Curve {
        std::string name;
        SolveResult result;
      };
      std::vector<Curve> curves;
      nlohmann::json summary = nlohmann::json::array();
      for (const std::string& name : strategies) {
        nlohmann::json entry = {{"strategy", name}};
        try {
          const TStrategy strategy = parse_t_strategy(name, p);
          TranslationVector tv = select_translation_vector(p, strategy);
          SolveResult res = solve(p, cfg, Screening::kOn, std::move(tv));
          entry["ok"] = true;
          entry["converged"] = res.converged;
          entry["rounds"] = res.rounds;
          entry["primal"] = res.primal;
          entry["gap"] = res.gap;
          entry["screening_ratio"] = res.screening_ratio();
          entry["sat_lower"] = res.sat_lower;
          entry["sat_upper"] = res.sat_upper;
          curves.push_back({name, std::move(res)});
        } catch (const Error& e) {
          entry["ok"] = false;
          entry["error"] = e.what();
          err << name << ": " << e.what() << "\n";
        }
        summary.push_back(std::move(entry));
      }
      if (curves.empty()) return kExitNumerical;

      // Common round grid; a finished run keeps its last ratio.
      std::int64_t last_round = 0;
      for (const Curve& c : curves) {
        last_round = std::max(last_round, c.result.trace.back().round);
      }
      auto ratio_at = [](const SolveResult& r, std::int64_t round) {
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(round),
                                               r.trace.size() - 1);
        return r.trace[idx].screening_ratio;
      };
      std::ofstream combined = detail::open_output(cmp_out + "_ratios.csv");
      combined << "round";
      for (const Curve& c : curves) combined << "," << c.name;
      combined << "\n";
      for (std::int64_t k = 0; k <= last_round; ++k) {
        combined << k;
        for (const Curve& c : curves) {
          combined << "," << format_double(ratio_at(c.result, k));
        }
        combined << "\n";
      }
      for (const Curve& c : curves) {
        const std::string path = cmp_out + "_" + detail::slug(c.name) + ".csv";
        std::ofstream f = detail::open_output(path);
        f << "round,ratio\n";
        for (std::int64_t k = 0; k <= last_round; ++k) {
          f << k << "," << format_double(ratio_at(c.result, k)) << "\n";
        }
        out << c.name << ": " << path << "\n";
      }
      std::ofstream js = detail::open_output(cmp_out + "_summary.json");
      js << nlohmann::json{{"rounds", last_round}, {"strategies", summary}}
                .dump(2)
         << "\n";
      const bool all_ok = curves.size() == strategies.size() &&
                          std::all_of(curves.begin(), curves.end(),
                                      [](const Curve& c) {
                                        return c.result.converged;
                                      });
      return all_ok ? kExitOk : kExitNumerical;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace boxscreen::harness
