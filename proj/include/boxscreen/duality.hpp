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

// Dual objective, dual feasibility and duality gap, plus the two ways of
// turning a primal iterate into a dual feasible point:
//
//   * dual scaling, theta = -grad F(Ax), when every upper bound is finite
//     (the dual is then unconstrained);
//   * dual translation, theta = z + eps * t with z = -grad F(Ax), when some
//     upper bounds are infinite. t must satisfy a_j^T t < 0 for every
//     constrained column j, and eps is the smallest shift that restores
//     a_j^T theta <= 0.
//
// Dual feasible set: { theta : a_j^T theta <= 0 for all j with u_j = +inf }.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include "boxscreen/error.hpp"
#include "boxscreen/model.hpp"

namespace boxscreen {

// Slack accepted on a_j^T theta <= 0 to absorb accumulation error.
inline constexpr double kDualFeasibilityTol = 1e-12;
// Negative gaps above -kGapRoundoffTol * max(1, |P|) are treated as zero.
inline constexpr double kGapRoundoffTol = 1e-9;
// Interior test for translation vectors: a_j^T t < -kInteriorTol * |a_j|.
inline constexpr double kInteriorTol = 1e-10;

struct DualState {
  Vector theta;
  double d_value = 0.0;
  double gap = 0.0;
  Vector a_t_theta;
};

// l [c]^- + u [c]^+, the support function of [l, u] at c. The u term is
// dropped when u is infinite: feasibility already forces c <= 0 there.
inline double box_support(double c, double l, double u) {
  double s = l * std::min(c, 0.0);
  if (c > 0.0 && !std::isinf(u)) s += u * c;
  return s;
}

// Dual objective of min F(A x + z; y) over l <= x <= u, evaluated from
// theta and the precomputed inner products c = A^T theta:
//
//   D(theta) = -sum_i f*(-theta_i; y_i) - theta^T z - sum_j box_support(c_j).
//
// With z = 0 this is the dual of the full problem; the driver passes the
// saturated contribution z and the preserved columns only.
template <Loss L = QuadraticLoss>
double dual_objective(const Eigen::Ref<const Vector>& theta,
                      const Eigen::Ref<const Vector>& y,
                      const Eigen::Ref<const Vector>& z,
                      const Eigen::Ref<const Vector>& a_t_theta,
                      const Eigen::Ref<const Vector>& lower,
                      const Eigen::Ref<const Vector>& upper,
                      const L& loss = {}) {
  double value = 0.0;
  for (Index i = 0; i < theta.size(); ++i) {
    value -= loss.conjugate(-theta[i], y[i]);
  }
  if (z.size() > 0) value -= theta.dot(z);
  for (Index j = 0; j < a_t_theta.size(); ++j) {
    value -= box_support(a_t_theta[j], lower[j], upper[j]);
  }
  return value;
}

template <Loss L = QuadraticLoss>
double eval_dual(const Problem& p, const Vector& theta, const L& loss = {}) {
  if (theta.size() != p.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "theta has length " + std::to_string(theta.size()) +
                    ", expected " + std::to_string(p.rows()));
  }
  const Vector c = p.a().transpose() * theta;
  return dual_objective(theta, p.y(), Vector(), c, p.lower(), p.upper(), loss);
}

inline bool is_dual_feasible(const Problem& p, const Vector& theta) {
  if (p.all_bounded()) return true;
  for (Index j : p.j_inf()) {
    if (p.column(j).dot(theta) > kDualFeasibilityTol) return false;
  }
  return true;
}

// Clamp round-off negative gaps to zero; reject anything larger.
inline double clamp_gap(double gap, double primal) {
  if (gap >= 0.0) return gap;
  if (gap < -kGapRoundoffTol * std::max(1.0, std::abs(primal))) {
    std::ostringstream msg;
    msg << "duality gap " << gap << " is negative beyond round-off (P = "
        << primal << ")";
    throw Error(ErrorCode::kInconsistentGap, msg.str());
  }
  return 0.0;
}

template <Loss L = QuadraticLoss>
double duality_gap(const Problem& p, const PrimalPoint& pt, const Vector& theta,
                   const L& loss = {}) {
  if (!is_dual_feasible(p, theta)) {
    throw Error(ErrorCode::kInfeasiblePoint, "theta is not dual feasible");
  }
  return eval_primal(p, pt, loss) - eval_dual(p, theta, loss);
}

// ---------------------------------------------------------------------------
// Translation vectors

enum class TStrategyKind {
  kNegOnes,
  kNegColumn,
  kNegMeanColumn,
  kSolveLinear,
  kCustom,
};

struct TStrategy {
  TStrategyKind kind = TStrategyKind::kNegOnes;
  Index column = 0;   // kNegColumn
  Vector custom;      // kCustom

  static TStrategy neg_ones() { return {}; }
  static TStrategy neg_column(Index j) {
    return {TStrategyKind::kNegColumn, j, {}};
  }
  static TStrategy neg_mean_column() {
    return {TStrategyKind::kNegMeanColumn, 0, {}};
  }
  static TStrategy solve_linear() {
    return {TStrategyKind::kSolveLinear, 0, {}};
  }
  static TStrategy custom_vector(Vector t) {
    return {TStrategyKind::kCustom, 0, std::move(t)};
  }

  std::string name() const {
    switch (kind) {
      case TStrategyKind::kNegOnes: return "neg-ones";
      case TStrategyKind::kNegColumn:
        return "neg-column=" + std::to_string(column);
      case TStrategyKind::kNegMeanColumn: return "neg-mean-column";
      case TStrategyKind::kSolveLinear: return "solve-linear";
      case TStrategyKind::kCustom: return "custom";
    }
    return "unknown";
  }
};

// A direction t strictly inside the dual feasible set, with A^T t cached.
class TranslationVector {
 public:
  // Validates a_j^T t < -kInteriorTol * |a_j| for every j with u_j = +inf.
  static TranslationVector create(const Problem& p, Vector t,
                                  TStrategy strategy) {
    if (t.size() != p.rows()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "translation vector has length " + std::to_string(t.size()) +
                      ", expected " + std::to_string(p.rows()));
    }
    if (!t.allFinite()) {
      throw Error(ErrorCode::kNoInteriorPoint,
                  "translation vector is not finite (" + strategy.name() + ")");
    }
    Vector a_t_t = p.a().transpose() * t;
    for (Index j : p.j_inf()) {
      const double bound = -kInteriorTol * p.column(j).norm();
      if (!(a_t_t[j] < bound)) {
        std::ostringstream msg;
        msg << "strategy " << strategy.name() << " gives a_" << j
            << "^T t = " << a_t_t[j] << ", not strictly negative";
        throw Error(ErrorCode::kNoInteriorPoint, msg.str());
      }
    }
    return TranslationVector(std::move(t), std::move(a_t_t),
                             std::move(strategy));
  }

  const Vector& t() const { return t_; }
  const Vector& a_t_t() const { return a_t_t_; }
  const TStrategy& strategy() const { return strategy_; }

 private:
  TranslationVector(Vector t, Vector a_t_t, TStrategy strategy)
      : t_(std::move(t)),
        a_t_t_(std::move(a_t_t)),
        strategy_(std::move(strategy)) {}

  Vector t_;
  Vector a_t_t_;
  TStrategy strategy_;
};

// eps = max_j (c_j)^+ / |a_j^T t| over the columns with u_j = +inf, where
// c = A^T z. Works on any aligned subset of columns.
inline double translation_amount(const Eigen::Ref<const Vector>& c,
                                 const Eigen::Ref<const Vector>& a_t_t,
                                 const Eigen::Ref<const Vector>& upper) {
  double eps = 0.0;
  for (Index j = 0; j < c.size(); ++j) {
    if (c[j] > 0.0 && std::isinf(upper[j])) {
      eps = std::max(eps, c[j] / std::abs(a_t_t[j]));
    }
  }
  return eps;
}

inline Vector dual_translate(const Problem& p, const TranslationVector& tv,
                             const Vector& z) {
  if (z.size() != p.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "z has wrong length");
  }
  for (Index j : p.j_inf()) {
    if (!(tv.a_t_t()[j] < 0.0)) {
      throw Error(ErrorCode::kNotInterior,
                  "a_" + std::to_string(j) + "^T t is not negative");
    }
  }
  const Vector c = p.a().transpose() * z;
  double eps = translation_amount(c, tv.a_t_t(), p.upper());
  if (eps == 0.0) return z;
  Vector theta = z + eps * tv.t();
  // Rounding in z + eps t can leave a correlation a few ulps above zero when
  // |z| is large; top eps up until the computed point is feasible.
  for (int pass = 0; pass < 4; ++pass) {
    const Vector c_theta = p.a().transpose() * theta;
    const double extra = translation_amount(c_theta, tv.a_t_t(), p.upper());
    if (extra == 0.0) break;
    eps += std::max(extra, eps * std::numeric_limits<double>::epsilon());
    theta = z + eps * tv.t();
  }
  return theta;
}

namespace detail {

template <Loss L>
Vector forward_residual_dual(const Problem& p, const PrimalPoint& pt,
                             const L& loss) {
  check_box_feasible(p, pt.x);
  const Vector ax = pt.ax_cache ? *pt.ax_cache : Vector(p.a() * pt.x);
  Vector z(p.rows());
  for (Index i = 0; i < p.rows(); ++i) z[i] = -loss.derivative(ax[i], p.y()[i]);
  return z;
}

template <Loss L>
DualState finish_dual_state(const Problem& p, const PrimalPoint& pt,
                            Vector theta, Vector c, const L& loss) {
  DualState ds;
  ds.d_value =
      dual_objective(theta, p.y(), Vector(), c, p.lower(), p.upper(), loss);
  const double primal = eval_primal(p, pt, loss);
  ds.gap = primal - ds.d_value;
  ds.theta = std::move(theta);
  ds.a_t_theta = std::move(c);
  return ds;
}

}  // namespace detail

// Dual scaling: theta = -grad F(Ax; y). Only valid when all u_j are finite.
template <Loss L = QuadraticLoss>
DualState dual_point_bvlr(const Problem& p, const PrimalPoint& pt,
                          const L& loss = {}) {
  if (!p.all_bounded()) {
    throw Error(ErrorCode::kWrongVariant,
                "dual scaling needs every upper bound finite");
  }
  Vector theta = detail::forward_residual_dual(p, pt, loss);
  Vector c = p.a().transpose() * theta;
  return detail::finish_dual_state(p, pt, std::move(theta), std::move(c),
                                   loss);
}

// Dual translation: theta = z + eps t with z = -grad F(Ax; y). A^T theta is
// assembled as A^T z + eps A^T t from the cached A^T t.
template <Loss L = QuadraticLoss>
DualState dual_point_nnlr(const Problem& p, const TranslationVector& tv,
                          const PrimalPoint& pt, const L& loss = {}) {
  for (Index j : p.j_inf()) {
    if (!(tv.a_t_t()[j] < 0.0)) {
      throw Error(ErrorCode::kNotInterior,
                  "a_" + std::to_string(j) + "^T t is not negative");
    }
  }
  Vector theta = detail::forward_residual_dual(p, pt, loss);
  Vector c = p.a().transpose() * theta;
  const double eps = translation_amount(c, tv.a_t_t(), p.upper());
  if (eps > 0.0) {
    theta += eps * tv.t();
    c += eps * tv.a_t_t();
  }
  return detail::finish_dual_state(p, pt, std::move(theta), std::move(c),
                                   loss);
}

// Picks whichever of the two constructions applies to p.
template <Loss L = QuadraticLoss>
DualState dual_point(const Problem& p, const TranslationVector* tv,
                     const PrimalPoint& pt, const L& loss = {}) {
  if (p.all_bounded()) return dual_point_bvlr(p, pt, loss);
  if (tv == nullptr) {
    throw Error(ErrorCode::kWrongVariant,
                "infinite upper bounds need a translation vector");
  }
  return dual_point_nnlr(p, *tv, pt, loss);
}

// Column whose summed cosine similarity to all columns is largest
// (most_correlated = true) or smallest.
inline Index correlated_column(const Matrix& a, bool most_correlated) {
  Matrix normalized = a;
  for (Index j = 0; j < a.cols(); ++j) normalized.col(j).normalize();
  const Vector total = normalized.rowwise().sum();
  const Vector score = normalized.transpose() * total;
  Index best = 0;
  if (most_correlated) {
    score.maxCoeff(&best);
  } else {
    score.minCoeff(&best);
  }
  return best;
}

// Builds a translation vector. The constructions cover: full column rank
// A (solve A^T t = -1), orthogonal A (negative combination of columns,
// passed as custom), nonnegative A without zero columns (t = -1), and A
// whose Gram matrix has a positive column j (t = -a_j). Every result is
// verified before it is returned.
inline TranslationVector select_translation_vector(const Problem& p,
                                                   const TStrategy& strategy) {
  if (p.all_bounded()) {
    throw Error(ErrorCode::kWrongVariant,
                "translation vectors need at least one infinite upper bound");
  }
  const Index m = p.rows();
  Vector t;
  switch (strategy.kind) {
    case TStrategyKind::kNegOnes:
      t = Vector::Constant(m, -1.0);
      break;
    case TStrategyKind::kNegColumn:
      if (strategy.column < 0 || strategy.column >= p.cols()) {
        throw Error(ErrorCode::kInvalidConfig,
                    "column " + std::to_string(strategy.column) +
                        " out of range");
      }
      t = -p.column(strategy.column);
      break;
    case TStrategyKind::kNegMeanColumn:
      t = -p.a().rowwise().mean();
      break;
    case TStrategyKind::kSolveLinear: {
      // Least-norm solution of A_J^T t = -1 over the constrained columns J.
      const auto& cols = p.j_inf();
      const Index k = static_cast<Index>(cols.size());
      if (k > m) {
        throw Error(ErrorCode::kSingularGram,
                    "A^T t = b needs rank(A) = n <= m, got n = " +
                        std::to_string(k) + " > m = " + std::to_string(m));
      }
      const Matrix a_j = p.a()(Eigen::all, cols);
      Eigen::ColPivHouseholderQR<Matrix> qr(a_j);
      if (qr.rank() < k) {
        throw Error(ErrorCode::kSingularGram,
                    "A is rank deficient (rank " + std::to_string(qr.rank()) +
                        " < " + std::to_string(k) + ")");
      }
      const Matrix gram = a_j.transpose() * a_j;
      const Vector w = gram.ldlt().solve(Vector::Constant(k, -1.0));
      t = a_j * w;
      break;
    }
    case TStrategyKind::kCustom:
      t = strategy.custom;
      break;
  }
  return TranslationVector::create(p, std::move(t), strategy);
}

}  // namespace boxscreen
