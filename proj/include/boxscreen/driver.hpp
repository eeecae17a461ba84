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

// The screening loop. Each round:
//
//   1. PrimalUpdate on (A_P, z, y);
//   2. theta from the residual, by dual scaling (all u finite) or dual
//      translation (some u infinite, mixed bounds included);
//   3. gap and radius r = sqrt(2 Gap / alpha);
//   4. sphere test on the preserved columns, pin and fold screened
//      coordinates into z;
//   5. stop once the gap drops below gap_tol.
//
// Steps 2-3 use the problem restricted to the preserved set, whose optimum
// coincides with the full one once screened coordinates are pinned, so the
// inner products A_P^T theta come straight from the solver's gradient. When
// that gap falls below gap_tol the full-problem gap is recomputed from
// scratch; only that certificate ends the solve.
//
// With screening off the same dual point and gap are computed every round so
// that both variants stop on the same criterion, but that work is excluded
// from the timed interval.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "boxscreen/duality.hpp"
#include "boxscreen/error.hpp"
#include "boxscreen/model.hpp"
#include "boxscreen/screening.hpp"
#include "boxscreen/solvers.hpp"

namespace boxscreen {

enum class Screening { kOff, kOn };

struct TraceRecord {
  std::int64_t round = 0;
  double elapsed = 0.0;  // seconds
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  Index preserved_count = 0;
  double screening_ratio = 0.0;
  Index newly_screened_lower = 0;
  Index newly_screened_upper = 0;
};

struct SolveResult {
  Vector x;
  Vector theta;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  std::int64_t rounds = 0;
  bool converged = false;
  double elapsed = 0.0;
  SolverKind solver = SolverKind::kCoordinateDescent;
  Screening screening = Screening::kOn;
  Index preserved_count = 0;
  std::vector<Index> sat_lower;
  std::vector<Index> sat_upper;
  std::vector<TraceRecord> trace;

  double screening_ratio() const {
    return x.size() == 0 ? 0.0
                         : static_cast<double>(x.size() - preserved_count) /
                               static_cast<double>(x.size());
  }
};

// Monotonic stopwatch that can exclude intervals.
class Stopwatch {
 public:
  using Clock = std::chrono::steady_clock;

  void start() {
    accumulated_ = Clock::duration::zero();
    running_ = true;
    since_ = Clock::now();
  }
  void pause() {
    if (!running_) return;
    accumulated_ += Clock::now() - since_;
    running_ = false;
  }
  void resume() {
    if (running_) return;
    since_ = Clock::now();
    running_ = true;
  }
  double seconds() const {
    auto total = accumulated_;
    if (running_) total += Clock::now() - since_;
    return std::chrono::duration<double>(total).count();
  }

 private:
  Clock::duration accumulated_{};
  Clock::time_point since_{};
  bool running_ = false;
};

inline TraceRecord record_trace(std::int64_t round, double elapsed,
                                double primal, double dual, double gap,
                                const ScreeningState& st, Index new_lower,
                                Index new_upper) {
  TraceRecord rec;
  rec.round = round;
  rec.elapsed = elapsed;
  rec.primal = primal;
  rec.dual = dual;
  rec.gap = gap;
  rec.preserved_count = st.preserved_count();
  rec.screening_ratio = st.screening_ratio();
  rec.newly_screened_lower = new_lower;
  rec.newly_screened_upper = new_upper;
  return rec;
}

namespace detail {

using AnySolverState = std::variant<PgState, CdState, ActiveSetState>;

inline SolverWork& work_of(AnySolverState& s) {
  return std::visit([](auto& v) -> SolverWork& { return v.work; }, s);
}

}  // namespace detail

inline SolveResult solve(const Problem& p, const SolverConfig& cfg,
                         Screening screening = Screening::kOn,
                         std::optional<TranslationVector> tv = std::nullopt) {
  cfg.validate();
  if (!p.all_bounded() && !tv) {
    tv = select_translation_vector(p, TStrategy::neg_ones());
  }
  const QuadraticLoss loss;
  const bool screen = screening == Screening::kOn;

  ScreeningState st(p);
  if (tv) st.set_translation(*tv);
  const TranslationVector* tvp = tv ? &*tv : nullptr;

  PrimalPoint pt{clip_to_box(p, Vector::Zero(p.cols())), std::nullopt};

  SolveResult result;
  result.solver = cfg.kind;
  result.screening = screening;

  Stopwatch watch;
  watch.start();

  detail::AnySolverState state;
  switch (cfg.kind) {
    case SolverKind::kProjectedGradient: {
      PgState s;
      pg_init(s, p, st, pt, cfg, loss);
      state = std::move(s);
      break;
    }
    case SolverKind::kCoordinateDescent: {
      CdState s;
      cd_init(s, p, st, pt);
      state = std::move(s);
      break;
    }
    case SolverKind::kActiveSet: {
      ActiveSetState s;
      active_set_init(s, p, st, pt);
      state = std::move(s);
      break;
    }
  }
  SolverWork& work = detail::work_of(state);

  // Dual point on the preserved problem. theta = -r (+ eps t).
  const Vector t = tv ? tv->t() : Vector();
  auto round_dual = [&](Vector& theta, Vector& a_t_theta, double& primal,
                        double& dual) {
    const Vector& g = ensure_gradient(work, st);
    theta = -work.r;
    a_t_theta = -g;
    if (st.has_translation()) {
      const double eps = translation_amount(a_t_theta, st.a_t_t(), st.upper());
      if (eps > 0.0) {
        theta += eps * t;
        a_t_theta += eps * st.a_t_t();
      }
    }
    primal = 0.5 * work.r.squaredNorm();
    dual = dual_objective(theta, p.y(), st.z(), a_t_theta, st.lower(),
                          st.upper(), loss);
    return clamp_gap(primal - dual, primal);
  };

  Vector theta;
  Vector a_t_theta;
  double primal = 0.0;
  double dual = 0.0;

  if (cfg.record_trace) {
    watch.pause();
    const double gap0 = round_dual(theta, a_t_theta, primal, dual);
    result.trace.push_back(record_trace(0, 0.0, primal, dual, gap0, st, 0, 0));
    watch.resume();
  }

  const std::int64_t max_rounds = cfg.effective_max_rounds(p.cols());
  std::optional<DualState> certificate;
  std::int64_t round = 0;
  while (round < max_rounds) {
    ++round;
    switch (cfg.kind) {
      case SolverKind::kProjectedGradient:
        pg_update(p, st, pt, std::get<PgState>(state), cfg);
        break;
      case SolverKind::kCoordinateDescent:
        cd_update(p, st, pt, std::get<CdState>(state), cfg);
        break;
      case SolverKind::kActiveSet:
        active_set_update(p, st, pt, std::get<ActiveSetState>(state), cfg);
        break;
    }

    if (!screen) watch.pause();
    const double gap = round_dual(theta, a_t_theta, primal, dual);
    Index new_lower = 0;
    Index new_upper = 0;
    if (screen) {
      st.set_radius(
          gap_safe_radius(screening_gap(gap, primal), loss.alpha()));
      const ScreenSets sets = safe_screen_test(st, a_t_theta, p);
      new_lower = static_cast<Index>(sets.lower.size());
      new_upper = static_cast<Index>(sets.upper.size());
      const ScreenUpdate update = apply_screening(st, sets, pt, p);
      if (auto* as = std::get_if<ActiveSetState>(&state)) {
        active_set_after_screening(*as, st, pt, p, update);
      } else {
        after_screening(work, st, pt, p, update);
        if (auto* pg = std::get_if<PgState>(&state); pg && update.moved_x) {
          pg->objective = 0.5 * work.r.squaredNorm();
        }
      }
    }
    if (!screen) watch.resume();

    if (cfg.record_trace) {
      result.trace.push_back(record_trace(round, watch.seconds(), primal, dual,
                                          gap, st, new_lower, new_upper));
    }

    if (gap < cfg.gap_tol) {
      watch.pause();
      DualState full = dual_point(p, tvp, PrimalPoint{pt.x, std::nullopt}, loss);
      watch.resume();
      if (full.gap < cfg.gap_tol) {
        certificate = std::move(full);
        result.converged = true;
        break;
      }
    }
  }
  watch.pause();
  result.elapsed = watch.seconds();

  if (!certificate) {
    certificate = dual_point(p, tvp, PrimalPoint{pt.x, std::nullopt}, loss);
  }
  result.x = pt.x;
  result.rounds = round;
  result.primal = loss_sum(p.a() * pt.x, p.y(), loss);
  result.dual = certificate->d_value;
  result.gap = clamp_gap(certificate->gap, result.primal);
  result.theta = std::move(certificate->theta);
  result.preserved_count = st.preserved_count();
  result.sat_lower = st.sat_lower();
  result.sat_upper = st.sat_upper();
  return result;
}

}  // namespace boxscreen
