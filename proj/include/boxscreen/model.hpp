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

// Box-constrained linear regression
//
//   minimize   P(x) = sum_i f([Ax]_i ; y_i)
//   subject to l <= x <= u,
//
// with u_j allowed to be +infinity. The loss is an abstraction point
// (value, derivative, conjugate and the constant alpha such that f' is
// 1/alpha-Lipschitz); only the quadratic instance f(z;y) = (z-y)^2/2 ships.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "boxscreen/error.hpp"

namespace boxscreen {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

template <class L>
concept Loss = requires(const L& f, double z, double y) {
  { f.value(z, y) } -> std::convertible_to<double>;
  { f.derivative(z, y) } -> std::convertible_to<double>;
  { f.conjugate(z, y) } -> std::convertible_to<double>;
  { f.alpha() } -> std::convertible_to<double>;
};

inline double eval_loss(double z, double y) {
  const double d = z - y;
  return 0.5 * d * d;
}

inline double grad_loss(double z, double y) { return z - y; }

// Fenchel conjugate of z -> (z-y)^2/2, i.e. sup_z (z*u - (z-y)^2/2).
inline double conj_loss(double u, double y) { return u * y + 0.5 * u * u; }

struct QuadraticLoss {
  double value(double z, double y) const { return eval_loss(z, y); }
  double derivative(double z, double y) const { return grad_loss(z, y); }
  double conjugate(double u, double y) const { return conj_loss(u, y); }
  double alpha() const { return 1.0; }
};

static_assert(Loss<QuadraticLoss>);

// Immutable problem instance. Columns of A are stored contiguously
// (Eigen's default column-major layout).
class Problem {
 public:
  Problem(Matrix a, Vector y, Vector lower, Vector upper)
      : a_(std::move(a)),
        y_(std::move(y)),
        lower_(std::move(lower)),
        upper_(std::move(upper)) {
    validate();
    for (Index j = 0; j < cols(); ++j) {
      if (std::isinf(upper_[j])) j_inf_.push_back(j);
    }
  }

  // l = 0, u = +inf.
  static Problem nnls(Matrix a, Vector y) {
    const Index n = a.cols();
    return Problem(std::move(a), std::move(y), Vector::Zero(n),
                   Vector::Constant(n, kInf));
  }

  // Uniform box [lo, hi] on every coordinate.
  static Problem box(Matrix a, Vector y, double lo, double hi) {
    const Index n = a.cols();
    return Problem(std::move(a), std::move(y), Vector::Constant(n, lo),
                   Vector::Constant(n, hi));
  }

  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols(); }
  const Matrix& a() const { return a_; }
  const Vector& y() const { return y_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  auto column(Index j) const { return a_.col(j); }

  // Indices with an infinite upper bound, ascending.
  const std::vector<Index>& j_inf() const { return j_inf_; }
  bool upper_is_infinite(Index j) const { return std::isinf(upper_[j]); }

  // All upper bounds finite: the dual is unconstrained.
  bool all_bounded() const { return j_inf_.empty(); }
  bool is_nonnegative() const {
    return static_cast<Index>(j_inf_.size()) == cols() &&
           (lower_.array() == 0.0).all();
  }

 private:
  void validate() const {
    if (a_.rows() < 1 || a_.cols() < 1) {
      throw Error(ErrorCode::kInvalidProblem, "A must have m >= 1, n >= 1");
    }
    if (y_.size() != a_.rows()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "y has length " + std::to_string(y_.size()) +
                      ", expected " + std::to_string(a_.rows()));
    }
    if (lower_.size() != a_.cols() || upper_.size() != a_.cols()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "bounds must have length " + std::to_string(a_.cols()));
    }
    if (a_.hasNaN() || y_.hasNaN() || lower_.hasNaN() || upper_.hasNaN()) {
      throw Error(ErrorCode::kInvalidProblem, "NaN in problem data");
    }
    if (!a_.allFinite() || !y_.allFinite()) {
      throw Error(ErrorCode::kInvalidProblem, "A and y must be finite");
    }
    for (Index j = 0; j < a_.cols(); ++j) {
      if (!std::isfinite(lower_[j])) {
        std::ostringstream msg;
        msg << "lower bound " << j << " must be finite";
        throw Error(ErrorCode::kInvalidProblem, msg.str());
      }
      if (!(lower_[j] < upper_[j]) || upper_[j] == -kInf) {
        std::ostringstream msg;
        msg << "bounds at " << j << " must satisfy l < u (got " << lower_[j]
            << ", " << upper_[j] << ")";
        throw Error(ErrorCode::kInvalidProblem, msg.str());
      }
      if (a_.col(j).squaredNorm() == 0.0) {
        throw Error(ErrorCode::kZeroColumn,
                    "column " + std::to_string(j) + " of A is zero");
      }
    }
  }

  Matrix a_;
  Vector y_;
  Vector lower_;
  Vector upper_;
  std::vector<Index> j_inf_;
};

// A primal iterate, optionally carrying A*x.
struct PrimalPoint {
  Vector x;
  std::optional<Vector> ax_cache;

  static PrimalPoint with_cache(const Problem& p, Vector x) {
    Vector ax = p.a() * x;
    return PrimalPoint{std::move(x), std::move(ax)};
  }
};

inline bool is_box_feasible(const Problem& p, const Vector& x) {
  if (x.size() != p.cols()) return false;
  for (Index j = 0; j < x.size(); ++j) {
    if (!(x[j] >= p.lower()[j] && x[j] <= p.upper()[j])) return false;
  }
  return true;
}

inline void check_box_feasible(const Problem& p, const Vector& x) {
  if (x.size() != p.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "x has length " + std::to_string(x.size()) + ", expected " +
                    std::to_string(p.cols()));
  }
  for (Index j = 0; j < x.size(); ++j) {
    if (!(x[j] >= p.lower()[j] && x[j] <= p.upper()[j])) {
      std::ostringstream msg;
      msg << "x[" << j << "] = " << x[j] << " outside [" << p.lower()[j]
          << ", " << p.upper()[j] << "]";
      throw Error(ErrorCode::kInfeasiblePoint, msg.str());
    }
  }
}

// Projection of x onto [l, u].
inline Vector clip_to_box(const Problem& p, const Vector& x) {
  return x.cwiseMax(p.lower()).cwiseMin(p.upper());
}

// sum_i f(ax_i ; y_i)
template <Loss L = QuadraticLoss>
double loss_sum(const Eigen::Ref<const Vector>& ax,
                const Eigen::Ref<const Vector>& y, const L& loss = {}) {
  double total = 0.0;
  for (Index i = 0; i < ax.size(); ++i) total += loss.value(ax[i], y[i]);
  return total;
}

template <Loss L = QuadraticLoss>
double eval_primal(const Problem& p, const PrimalPoint& pt, const L& loss = {}) {
  check_box_feasible(p, pt.x);
  if (pt.ax_cache) {
    if (pt.ax_cache->size() != p.rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "ax_cache has wrong length");
    }
    return loss_sum(*pt.ax_cache, p.y(), loss);
  }
  const Vector ax = p.a() * pt.x;
  return loss_sum(ax, p.y(), loss);
}

}  // namespace boxscreen
