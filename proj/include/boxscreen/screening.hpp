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

// Gap safe sphere screening.
//
// For a feasible pair (x, theta) the ball B(theta, r), r = sqrt(2 Gap / alpha),
// contains the dual optimum, so
//
//   a_j^T theta < -r |a_j|  =>  x*_j = l_j
//   a_j^T theta >  r |a_j|  =>  x*_j = u_j   (u_j finite)
//
// Screened coordinates are pinned to their bound and their contribution is
// accumulated in z, so that A x = A_P x_P + z over the preserved set P.
//
// ScreeningState keeps a compacted copy of the preserved columns: the first
// preserved_count() columns of the working matrix are exactly A_P, in
// "working order". Screened columns are erased in place and the survivors
// keep their relative order, so forward products cost O(m (|P| + 1)), read
// contiguous memory, and cyclic solvers visit coordinates in the same
// sequence as without screening. Column-indexed solver workspaces in working
// order are kept aligned through compact().

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "boxscreen/duality.hpp"
#include "boxscreen/error.hpp"
#include "boxscreen/model.hpp"

namespace boxscreen {

inline double gap_safe_radius(double gap, double alpha) {
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "alpha must be positive");
  }
  if (gap < 0.0) {
    throw Error(ErrorCode::kNegativeGap,
                "gap " + std::to_string(gap) + " must be clamped first");
  }
  return std::sqrt(2.0 * gap / alpha);
}

// Relative floor added to a computed gap before it sets the sphere radius.
inline constexpr double kScreeningGapFloor = 1e-12;

// A computed gap of zero does not mean the true gap is zero: both objectives
// carry rounding error of order eps * |P|, and at an exact optimum the
// correlations of free coordinates are pure rounding noise. Padding the gap
// keeps the sphere wide enough to contain the optimal dual point.
inline double screening_gap(double gap, double primal) {
  return gap + kScreeningGapFloor * std::max(1.0, std::abs(primal));
}

// Coordinates newly identified as saturated, as original column indices.
struct ScreenSets {
  std::vector<Index> lower;
  std::vector<Index> upper;

  bool empty() const { return lower.empty() && upper.empty(); }
};

struct ScreenUpdate {
  Index removed = 0;
  // Some screened x_j was not already at its bound, so A x moved.
  bool moved_x = false;
};

class ScreeningState {
 public:
  explicit ScreeningState(const Problem& p)
      : columns_(p.a()),
        order_(p.cols()),
        position_(p.cols()),
        lower_(p.lower()),
        upper_(p.upper()),
        col_norms_(p.cols()),
        z_(Vector::Zero(p.rows())),
        preserved_(p.cols()) {
    for (Index j = 0; j < p.cols(); ++j) {
      order_[j] = j;
      position_[j] = j;
      col_norms_[j] = p.column(j).norm();
    }
    norms_ = col_norms_;
  }

  Index size() const { return static_cast<Index>(order_.size()); }
  Index preserved_count() const { return preserved_; }
  double screening_ratio() const {
    return static_cast<double>(size() - preserved_) /
           static_cast<double>(size());
  }

  // Original indices of the preserved coordinates, in working order.
  std::span<const Index> preserved() const {
    return {order_.data(), static_cast<size_t>(preserved_)};
  }
  bool is_preserved(Index j) const { return position_[j] < preserved_; }
  Index position_of(Index j) const { return position_[j]; }

  const std::vector<Index>& sat_lower() const { return sat_lower_; }
  const std::vector<Index>& sat_upper() const { return sat_upper_; }
  const Vector& z() const { return z_; }
  // |a_j|, original order.
  const Vector& col_norms() const { return col_norms_; }

  double radius() const { return radius_; }
  void set_radius(double r) { radius_ = r; }

  // Preserved block A_P of the working matrix and aligned per-column data.
  auto columns() const { return columns_.leftCols(preserved_); }
  auto lower() const { return lower_.head(preserved_); }
  auto upper() const { return upper_.head(preserved_); }
  auto norms() const { return norms_.head(preserved_); }
  auto a_t_t() const { return a_t_t_.head(preserved_); }
  bool has_translation() const { return a_t_t_.size() == size(); }

  void set_translation(const TranslationVector& tv) {
    a_t_t_.resize(size());
    for (Index pos = 0; pos < size(); ++pos) {
      a_t_t_[pos] = tv.a_t_t()[order_[pos]];
    }
  }

  // x_P in working order.
  Vector gather(const Vector& x) const {
    Vector out(preserved_);
    for (Index pos = 0; pos < preserved_; ++pos) out[pos] = x[order_[pos]];
    return out;
  }
  void scatter(const Vector& x_preserved, Vector& x) const {
    for (Index pos = 0; pos < preserved_; ++pos) {
      x[order_[pos]] = x_preserved[pos];
    }
  }

  // Applies the most recent removal to a working-order vector sized for the
  // previous preserved count.
  template <class V>
  void compact(V& v) const {
    const Index old_size = static_cast<Index>(v.size());
    Index write = 0;
    auto removed = last_removed_.begin();
    for (Index read = 0; read < old_size; ++read) {
      if (removed != last_removed_.end() && *removed == read) {
        ++removed;
        continue;
      }
      if (write != read) v[write] = v[read];
      ++write;
    }
    v.conservativeResize(write);
  }

  const std::vector<Index>& last_removed_positions() const {
    return last_removed_;
  }

 private:
  friend ScreenUpdate apply_screening(ScreeningState&, const ScreenSets&,
                                      PrimalPoint&, const Problem&);

  // Erases the positions listed in last_removed_ (ascending).
  void erase_removed() {
    Index write = 0;
    auto removed = last_removed_.begin();
    for (Index read = 0; read < preserved_; ++read) {
      if (removed != last_removed_.end() && *removed == read) {
        ++removed;
        continue;
      }
      if (write != read) {
        columns_.col(write) = columns_.col(read);
        order_[write] = order_[read];
        lower_[write] = lower_[read];
        upper_[write] = upper_[read];
        norms_[write] = norms_[read];
        if (has_translation()) a_t_t_[write] = a_t_t_[read];
      }
      ++write;
    }
    // Screened indices move behind the preserved block.
    Index tail = write;
    for (Index pos : removed_indices_) order_[tail++] = pos;
    preserved_ = write;
    for (Index pos = 0; pos < size(); ++pos) position_[order_[pos]] = pos;
  }

  Matrix columns_;
  std::vector<Index> order_;     // working position -> original index
  std::vector<Index> position_;  // original index -> working position
  Vector lower_;
  Vector upper_;
  Vector norms_;
  Vector a_t_t_;
  Vector col_norms_;
  Vector z_;
  Index preserved_;
  double radius_ = kInf;
  std::vector<Index> sat_lower_;
  std::vector<Index> sat_upper_;
  std::vector<Index> last_removed_;     // ascending working positions
  std::vector<Index> removed_indices_;  // original indices, same order
};

// Sphere test over the preserved coordinates. a_t_theta is A_P^T theta in
// working order; the radius is taken from st. Comparisons are strict.
inline ScreenSets safe_screen_test(const ScreeningState& st,
                                   const Eigen::Ref<const Vector>& a_t_theta,
                                   const Problem& p) {
  (void)p;
  if (a_t_theta.size() != st.preserved_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "a_t_theta must have one entry per preserved coordinate");
  }
  ScreenSets sets;
  const double r = st.radius();
  const auto norms = st.norms();
  const auto upper = st.upper();
  const auto order = st.preserved();
  for (Index pos = 0; pos < a_t_theta.size(); ++pos) {
    const double threshold = r * norms[pos];
    const double c = a_t_theta[pos];
    if (c < -threshold) {
      sets.lower.push_back(order[pos]);
    } else if (c > threshold && !std::isinf(upper[pos])) {
      sets.upper.push_back(order[pos]);
    }
  }
  return sets;
}

// Pins the newly screened coordinates to their bounds, folds them into z and
// drops them from the preserved set. Keeps pt.ax_cache current if present.
inline ScreenUpdate apply_screening(ScreeningState& st, const ScreenSets& sets,
                                    PrimalPoint& pt, const Problem& p) {
  ScreenUpdate update;
  st.last_removed_.clear();
  if (sets.empty()) return update;

  std::vector<char> seen(static_cast<size_t>(st.size()), 0);
  auto admit = [&](Index j) {
    if (j < 0 || j >= st.size() || !st.is_preserved(j) || seen[j]) {
      throw Error(ErrorCode::kIndexOutOfPreserved,
                  "coordinate " + std::to_string(j) +
                      " is not in the preserved set");
    }
    seen[j] = 1;
    st.last_removed_.push_back(st.position_[j]);
  };
  for (Index j : sets.lower) admit(j);
  for (Index j : sets.upper) {
    if (p.upper_is_infinite(j)) {
      throw Error(ErrorCode::kIndexOutOfPreserved,
                  "coordinate " + std::to_string(j) +
                      " has no finite upper bound");
    }
    admit(j);
  }

  auto pin = [&](Index j, double bound) {
    const double delta = bound - pt.x[j];
    pt.x[j] = bound;
    if (bound != 0.0) st.z_ += bound * p.column(j);
    if (delta != 0.0) {
      update.moved_x = true;
      if (pt.ax_cache) *pt.ax_cache += delta * p.column(j);
    }
  };
  for (Index j : sets.lower) {
    pin(j, p.lower()[j]);
    st.sat_lower_.push_back(j);
  }
  for (Index j : sets.upper) {
    pin(j, p.upper()[j]);
    st.sat_upper_.push_back(j);
  }

  std::sort(st.last_removed_.begin(), st.last_removed_.end());
  st.removed_indices_.clear();
  for (Index pos : st.last_removed_) st.removed_indices_.push_back(st.order_[pos]);
  st.erase_removed();
  update.removed = static_cast<Index>(st.last_removed_.size());
  return update;
}

// A_P x_P + z.
inline Vector forward_product(const ScreeningState& st, const Problem& p,
                              const Eigen::Ref<const Vector>& x_preserved) {
  if (x_preserved.size() != st.preserved_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "x_preserved has length " + std::to_string(x_preserved.size()) +
                    ", expected " + std::to_string(st.preserved_count()));
  }
  (void)p;
  Vector ax = st.z();
  ax.noalias() += st.columns() * x_preserved;
  return ax;
}

}  // namespace boxscreen
