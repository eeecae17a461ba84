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

// Primal updaters for least squares over the preserved set:
//
//   minimize 1/2 |A_P x_P + z - y|^2  subject to l_P <= x_P <= u_P.
//
// Each updater sees only the preserved columns (through ScreeningState) and
// keeps the residual r = A x - y current. After an update it can provide
// g = A_P^T r in working order; the driver reuses g both for the dual point
// and for the screening test.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "boxscreen/error.hpp"
#include "boxscreen/model.hpp"
#include "boxscreen/screening.hpp"

namespace boxscreen {

enum class SolverKind { kProjectedGradient, kCoordinateDescent, kActiveSet };

constexpr std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kProjectedGradient: return "pg";
    case SolverKind::kCoordinateDescent: return "cd";
    case SolverKind::kActiveSet: return "active-set";
  }
  return "unknown";
}

inline std::optional<SolverKind> parse_solver_kind(std::string_view name) {
  if (name == "pg") return SolverKind::kProjectedGradient;
  if (name == "cd") return SolverKind::kCoordinateDescent;
  if (name == "active-set" || name == "as") return SolverKind::kActiveSet;
  return std::nullopt;
}

struct SolverConfig {
  SolverKind kind = SolverKind::kCoordinateDescent;
  // Projected gradient step; estimated from |A|_2 when unset.
  std::optional<double> step_size;
  int power_iters = 50;
  // PrimalUpdate calls per screening round.
  int inner_passes = 1;
  // Unset: 10^6 rounds for pg/cd, 10 n for active set.
  std::optional<std::int64_t> max_rounds;
  double gap_tol = 1e-6;
  std::uint64_t seed = 0;
  bool record_trace = true;

  void validate() const {
    if (!(gap_tol > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "gap_tol must be positive");
    }
    if (inner_passes < 1) {
      throw Error(ErrorCode::kInvalidConfig, "inner_passes must be >= 1");
    }
    if (step_size && !(*step_size > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "step_size must be positive");
    }
    if (power_iters < 1) {
      throw Error(ErrorCode::kInvalidConfig, "power_iters must be >= 1");
    }
    if (max_rounds && *max_rounds < 1) {
      throw Error(ErrorCode::kInvalidConfig, "max_rounds must be >= 1");
    }
  }

  std::int64_t effective_max_rounds(Index n) const {
    if (max_rounds) return *max_rounds;
    return kind == SolverKind::kActiveSet ? 10 * static_cast<std::int64_t>(n)
                                          : 1'000'000;
  }
};

// Lanczos iteration on A^T A from a seeded random start, with full
// reorthogonalization. Returns sqrt of the largest Ritz value, which never
// exceeds |A|_2 and is exact once `iters` reaches the column count.
inline double spectral_norm_estimate(const Eigen::Ref<const Matrix>& a,
                                     int iters = 50, std::uint64_t seed = 0) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "empty matrix");
  }
  const Index n = a.cols();
  const Index steps = std::min<Index>(std::max(iters, 1), n);
  std::mt19937_64 engine(seed);
  Matrix basis(n, steps);
  Vector v(n);
  for (Index j = 0; j < n; ++j) {
    // Uniform in [0.5, 1.5): positive start, never orthogonal to the
    // leading singular vector of a nonnegative matrix.
    v[j] = 0.5 + static_cast<double>(engine() >> 11) * 0x1.0p-53;
  }
  v.normalize();
  Vector alpha(steps);
  Vector beta(steps);
  Vector av(a.rows());
  Vector w(n);
  Index k = 0;
  for (; k < steps; ++k) {
    basis.col(k) = v;
    av.noalias() = a * v;
    w.noalias() = a.transpose() * av;
    alpha[k] = v.dot(w);
    for (int sweep = 0; sweep < 2; ++sweep) {
      const Vector coeff = basis.leftCols(k + 1).transpose() * w;
      w.noalias() -= basis.leftCols(k + 1) * coeff;
    }
    beta[k] = w.norm();
    if (beta[k] <= 1e-13 * std::max(alpha.head(k + 1).cwiseAbs().maxCoeff(), 1e-300)) {
      ++k;
      break;
    }
    v = w / beta[k];
  }
  Matrix tri = Matrix::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    tri(i, i) = alpha[i];
    if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[i];
  }
  const double lambda =
      Eigen::SelfAdjointEigenSolver<Matrix>(tri, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  return std::sqrt(std::max(lambda, 0.0));
}

// Residual and gradient shared by every updater.
struct SolverWork {
  Vector r;          // A x - y
  Vector g;          // A_P^T r, working order
  bool g_valid = false;
};

// r = A_P x_P + z - y from scratch; refreshes pt.ax_cache.
inline void refresh_residual(SolverWork& work, const Problem& p,
                             const ScreeningState& st, PrimalPoint& pt) {
  Vector ax = forward_product(st, p, st.gather(pt.x));
  work.r = ax - p.y();
  pt.ax_cache = std::move(ax);
}

inline const Vector& ensure_gradient(SolverWork& work,
                                     const ScreeningState& st) {
  if (!work.g_valid) {
    work.g.noalias() = st.columns().transpose() * work.r;
    work.g_valid = true;
  }
  return work.g;
}

// Realigns the workspace after apply_screening.
inline void after_screening(SolverWork& work, const ScreeningState& st,
                            const PrimalPoint& pt, const Problem& p,
                            const ScreenUpdate& update) {
  if (update.removed == 0) return;
  if (update.moved_x) {
    work.r = *pt.ax_cache - p.y();
    work.g_valid = false;
  } else if (work.g_valid) {
    st.compact(work.g);
  }
}

// ---------------------------------------------------------------------------
// Projected gradient

struct PgState {
  SolverWork work;
  double step = 0.0;
  double objective = 0.0;
};

inline void pg_init(PgState& state, const Problem& p, const ScreeningState& st,
                    PrimalPoint& pt, const SolverConfig& cfg,
                    const QuadraticLoss& loss = {}) {
  if (cfg.step_size) {
    state.step = *cfg.step_size;
  } else {
    // Inflate the (lower) Lanczos estimate so 1/L stays an upper
    // bound, then keep a 0.99 margin.
    const double sigma =
        spectral_norm_estimate(st.columns(), cfg.power_iters, cfg.seed) /
        0.999;
    state.step = 0.99 * loss.alpha() / (sigma * sigma);
  }
  refresh_residual(state.work, p, st, pt);
  state.objective = 0.5 * state.work.r.squaredNorm();
}

// inner_passes steps of x_P <- clip(x_P - step * A_P^T (A_P x_P + z - y)).
inline void pg_update(const Problem& p, const ScreeningState& st,
                      PrimalPoint& pt, PgState& state, const SolverConfig& cfg) {
  SolverWork& work = state.work;
  const auto cols = st.columns();
  for (int pass = 0; pass < cfg.inner_passes; ++pass) {
    const Vector& g = ensure_gradient(work, st);
    Vector x = st.gather(pt.x);
    x = (x - state.step * g).cwiseMax(st.lower()).cwiseMin(st.upper());
    st.scatter(x, pt.x);

    Vector ax = st.z();
    ax.noalias() += cols * x;
    work.r = ax - p.y();
    pt.ax_cache = std::move(ax);

    const double objective = 0.5 * work.r.squaredNorm();
    if (objective > state.objective + 1e-9 * std::max(1.0, state.objective)) {
      std::ostringstream msg;
      msg << "objective rose from " << state.objective << " to " << objective
          << " with step " << state.step;
      throw Error(ErrorCode::kStepSizeTooLarge, msg.str());
    }
    state.objective = objective;
    work.g.noalias() = cols.transpose() * work.r;
    work.g_valid = true;
  }
}

// ---------------------------------------------------------------------------
// Cyclic coordinate descent

struct CdState {
  SolverWork work;
  std::int64_t sweeps = 0;
};

inline constexpr std::int64_t kCdRefreshSweeps = 1000;

inline void cd_init(CdState& state, const Problem& p, const ScreeningState& st,
                    PrimalPoint& pt) {
  refresh_residual(state.work, p, st, pt);
  state.sweeps = 0;
}

// One cyclic pass (per inner pass) over the preserved coordinates with exact
// coordinate minimization and a rank-1 residual update.
inline void cd_update(const Problem& p, const ScreeningState& st,
                      PrimalPoint& pt, CdState& state, const SolverConfig& cfg) {
  SolverWork& work = state.work;
  const auto cols = st.columns();
  const auto norms = st.norms();
  const auto lower = st.lower();
  const auto upper = st.upper();
  const auto order = st.preserved();
  Vector& r = work.r;
  for (int pass = 0; pass < cfg.inner_passes; ++pass) {
    for (Index pos = 0; pos < st.preserved_count(); ++pos) {
      const auto a = cols.col(pos);
      const Index j = order[pos];
      const double xj = pt.x[j];
      const double nrm = norms[pos];
      const double target = xj - a.dot(r) / (nrm * nrm);
      const double next = std::clamp(target, lower[pos], upper[pos]);
      const double delta = next - xj;
      if (delta != 0.0) {
        r.noalias() += delta * a;
        pt.x[j] = next;
      }
    }
    if (++state.sweeps % kCdRefreshSweeps == 0) {
      refresh_residual(work, p, st, pt);
    }
  }
  pt.ax_cache = r + p.y();
  work.g_valid = false;
}

// ---------------------------------------------------------------------------
// Active set (Lawson-Hanson, extended to two-sided bounds)

enum class BoundStatus : std::uint8_t { kLower, kUpper, kFree };

struct ActiveSetState {
  SolverWork work;
  std::vector<BoundStatus> status;  // original order
  double tol = 0.0;
  std::int64_t outer_iterations = 0;
  bool optimal = false;  // no entering candidate and nothing moved
};

// Coordinates strictly inside the box start at the nearer bound; everything
// else is classified by the bound it sits on.
inline void active_set_init(ActiveSetState& state, const Problem& p,
                            const ScreeningState& st, PrimalPoint& pt) {
  const Index n = p.cols();
  state.status.assign(static_cast<size_t>(n), BoundStatus::kLower);
  for (Index j = 0; j < n; ++j) {
    const double l = p.lower()[j];
    const double u = p.upper()[j];
    double& xj = pt.x[j];
    if (xj == l) {
      state.status[j] = BoundStatus::kLower;
    } else if (xj == u) {
      state.status[j] = BoundStatus::kUpper;
    } else if (std::isinf(u) || std::abs(xj - l) <= std::abs(u - xj)) {
      xj = l;
      state.status[j] = BoundStatus::kLower;
    } else {
      xj = u;
      state.status[j] = BoundStatus::kUpper;
    }
  }
  const double norm1 = p.a().cwiseAbs().colwise().sum().maxCoeff();
  state.tol = 10.0 * std::numeric_limits<double>::epsilon() * norm1 *
              static_cast<double>(std::max(p.rows(), p.cols()));
  state.outer_iterations = 0;
  state.optimal = false;
  refresh_residual(state.work, p, st, pt);
}

namespace detail {

// Unconstrained least squares on the free columns with the bound columns
// held fixed. Returns the minimizer in the order of `free_pos`.
inline Vector solve_free_subproblem(const ScreeningState& st,
                                    const std::vector<Index>& free_pos,
                                    const Vector& x_free, const Vector& r) {
  const auto cols = st.columns();
  const Index k = static_cast<Index>(free_pos.size());
  Matrix a_free(cols.rows(), k);
  for (Index c = 0; c < k; ++c) a_free.col(c) = cols.col(free_pos[c]);
  // Target for A_F s: y - z - A_B x_B = A_F x_F - r.
  Vector target = -r;
  target.noalias() += a_free * x_free;
  const Matrix gram = a_free.transpose() * a_free;
  const Vector rhs = a_free.transpose() * target;
  Eigen::LDLT<Matrix> ldlt(gram);
  const Vector diag = ldlt.vectorD();
  const double dmax = diag.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(diag.minCoeff() > 1e-13 * dmax)) {
    std::ostringstream msg;
    msg << "normal equations on " << k << " free columns are singular";
    throw Error(ErrorCode::kSingularSubproblem, msg.str());
  }
  return ldlt.solve(rhs);
}

}  // namespace detail

// One outer iteration: the bound coordinate that most violates optimality
// is freed, then the free-set least squares is solved with the usual
// back-off toward the current point whenever it leaves the box.
inline void active_set_update(const Problem& p, const ScreeningState& st,
                              PrimalPoint& pt, ActiveSetState& state,
                              const SolverConfig& cfg) {
  SolverWork& work = state.work;
  const auto lower = st.lower();
  const auto upper = st.upper();
  const auto order = st.preserved();
  const Index k = st.preserved_count();

  for (int pass = 0; pass < cfg.inner_passes; ++pass) {
    ++state.outer_iterations;
    const Vector& g = ensure_gradient(work, st);

    // Entering coordinate: largest violation of the sign conditions on
    // w = -g, skipping candidates rejected as numerically degenerate.
    std::vector<Index> rejected;
    Index entering = -1;
    Vector solution;
    std::vector<Index> free_pos;
    while (true) {
      entering = -1;
      double best = state.tol;
      for (Index pos = 0; pos < k; ++pos) {
        const BoundStatus s = state.status[order[pos]];
        double violation = 0.0;
        if (s == BoundStatus::kLower) {
          violation = -g[pos];
        } else if (s == BoundStatus::kUpper) {
          violation = g[pos];
        } else {
          continue;
        }
        if (violation > best &&
            std::find(rejected.begin(), rejected.end(), pos) ==
                rejected.end()) {
          best = violation;
          entering = pos;
        }
      }
      if (entering >= 0) state.status[order[entering]] = BoundStatus::kFree;

      free_pos.clear();
      for (Index pos = 0; pos < k; ++pos) {
        if (state.status[order[pos]] == BoundStatus::kFree) {
          free_pos.push_back(pos);
        }
      }
      if (free_pos.empty()) break;
      Vector x_free(static_cast<Index>(free_pos.size()));
      for (size_t c = 0; c < free_pos.size(); ++c) {
        x_free[c] = pt.x[order[free_pos[c]]];
      }
      solution = detail::solve_free_subproblem(st, free_pos, x_free, work.r);
      if (entering < 0) break;
      // The entering coordinate must move into the box; otherwise the
      // selection was a round-off artifact.
      const auto it = std::find(free_pos.begin(), free_pos.end(), entering);
      const double s = solution[it - free_pos.begin()];
      const bool from_lower = pt.x[order[entering]] == lower[entering];
      if ((from_lower && s > lower[entering]) ||
          (!from_lower && s < upper[entering])) {
        break;
      }
      state.status[order[entering]] =
          from_lower ? BoundStatus::kLower : BoundStatus::kUpper;
      rejected.push_back(entering);
    }

    bool moved = false;
    while (!free_pos.empty()) {
      const Index nf = static_cast<Index>(free_pos.size());
      Vector x_free(nf);
      for (Index c = 0; c < nf; ++c) x_free[c] = pt.x[order[free_pos[c]]];

      double alpha = 1.0;
      Index blocking = -1;
      for (Index c = 0; c < nf; ++c) {
        const Index pos = free_pos[c];
        const double s = solution[c];
        const double x = x_free[c];
        double step = 1.0;
        if (s <= lower[pos]) {
          if (x > s) step = (x - lower[pos]) / (x - s);
        } else if (s >= upper[pos]) {
          if (s > x) step = (upper[pos] - x) / (s - x);
        } else {
          continue;
        }
        if (blocking < 0 || step < alpha) {
          alpha = step;
          blocking = c;
        }
      }
      if (blocking < 0) {
        // Interior solution: accept it.
        for (Index c = 0; c < nf; ++c) {
          if (solution[c] != x_free[c]) moved = true;
          pt.x[order[free_pos[c]]] = solution[c];
        }
        break;
      }

      alpha = std::clamp(alpha, 0.0, 1.0);
      std::vector<Index> still_free;
      for (Index c = 0; c < nf; ++c) {
        const Index pos = free_pos[c];
        const Index j = order[pos];
        double v = x_free[c] + alpha * (solution[c] - x_free[c]);
        const double lo_gap = v - lower[pos];
        const double hi_gap = upper[pos] - v;
        const double snap = 1e-12 * (1.0 + std::abs(v));
        if (c == blocking ? solution[c] <= lower[pos] : lo_gap <= snap) {
          v = lower[pos];
          state.status[j] = BoundStatus::kLower;
        } else if (c == blocking ? solution[c] >= upper[pos]
                                 : hi_gap <= snap) {
          v = upper[pos];
          state.status[j] = BoundStatus::kUpper;
        } else {
          still_free.push_back(pos);
        }
        if (v != pt.x[j]) moved = true;
        pt.x[j] = v;
      }
      free_pos = std::move(still_free);
      refresh_residual(work, p, st, pt);
      if (free_pos.empty()) break;
      Vector next_free(static_cast<Index>(free_pos.size()));
      for (size_t c = 0; c < free_pos.size(); ++c) {
        next_free[c] = pt.x[order[free_pos[c]]];
      }
      solution = detail::solve_free_subproblem(st, free_pos, next_free, work.r);
    }

    state.optimal = entering < 0 && !moved;
    refresh_residual(work, p, st, pt);
    work.g_valid = false;
    if (state.optimal) break;
  }
}

// Drops screened coordinates from the free set; their values are already
// pinned by apply_screening.
inline void active_set_after_screening(ActiveSetState& state,
                                       const ScreeningState& st,
                                       const PrimalPoint& pt, const Problem& p,
                                       const ScreenUpdate& update) {
  if (update.removed == 0) return;
  for (Index j : st.sat_lower()) state.status[j] = BoundStatus::kLower;
  for (Index j : st.sat_upper()) state.status[j] = BoundStatus::kUpper;
  state.optimal = false;
  after_screening(state.work, st, pt, p, update);
}

}  // namespace boxscreen
