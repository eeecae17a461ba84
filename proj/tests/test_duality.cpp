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

#include "boxscreen/duality.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>

#include "test_util.hpp"

namespace boxscreen {
namespace {

using testing::Kind;
using testing::Rng;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidProblem;
}

Problem one_by_one(double a, double y) {
  return Problem::nnls(Matrix::Constant(1, 1, a), Vector::Constant(1, y));
}

TEST(EvalDualTest, Examples) {
  EXPECT_DOUBLE_EQ(eval_dual(one_by_one(1, -1), Vector::Constant(1, -1)), 0.5);
  const Problem q = testing::random_instance(Kind::kNnls, 6, 4, 3);
  EXPECT_EQ(eval_dual(q, Vector::Zero(6)), 0.0);
  const Problem box(Matrix::Identity(1, 1), Vector::Zero(1),
                    Vector::Constant(1, -1), Vector::Constant(1, 1));
  EXPECT_DOUBLE_EQ(eval_dual(box, Vector::Constant(1, 2)), -4.0);
}

TEST(EvalDualTest, RejectsWrongLength) {
  EXPECT_EQ(code_of([] { eval_dual(one_by_one(1, 1), Vector::Zero(2)); }),
            ErrorCode::kDimensionMismatch);
}

TEST(EvalDualTest, MatchesLagrangianOracle) {
  for (Kind kind : {Kind::kNnls, Kind::kBvls, Kind::kMixed}) {
    for (int seed = 0; seed < 30; ++seed) {
      const Problem p = testing::random_instance(kind, 15, 10, seed);
      Rng rng(seed + 100);
      Vector x = clip_to_box(p, p.lower() + 0.3 * rng.gaussian(10).cwiseAbs());
      const Vector theta = testing::oracle_dual_point(p, x);
      const double oracle = testing::lagrangian_dual(p, theta);
      EXPECT_NEAR(eval_dual(p, theta), oracle,
                  1e-10 * std::max(1.0, std::abs(oracle)))
          << testing::kind_name(kind) << " seed " << seed;
    }
  }
}

TEST(EvalDualTest, NonnegativeSpecializationIsConjugateSum) {
  Rng rng(4);
  for (int seed = 0; seed < 20; ++seed) {
    const Problem p = testing::random_instance(Kind::kNnls, 8, 5, seed);
    const Vector theta = -rng.gaussian(8).cwiseAbs();
    double expected = 0.0;
    for (Index i = 0; i < 8; ++i) expected -= conj_loss(-theta[i], p.y()[i]);
    EXPECT_EQ(eval_dual(p, theta), expected);
    // Quadratic form of the same quantity.
    EXPECT_NEAR(expected,
                0.5 * p.y().squaredNorm() - 0.5 * (p.y() - theta).squaredNorm(),
                1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(EvalDualTest, BoundedSpecializationHasNoConstraint) {
  const Problem p = testing::random_instance(Kind::kBvls, 8, 5, 9);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vector theta = 10.0 * rng.gaussian(8);
    EXPECT_TRUE(is_dual_feasible(p, theta));
    const Vector c = p.a().transpose() * theta;
    double expected = theta.dot(p.y()) - 0.5 * theta.squaredNorm();
    for (Index j = 0; j < 5; ++j) {
      expected -= c[j] > 0 ? p.upper()[j] * c[j] : p.lower()[j] * c[j];
    }
    EXPECT_NEAR(eval_dual(p, theta), expected,
                1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST(DualFeasibleTest, Examples) {
  const Problem nn = Problem::nnls(Matrix::Identity(2, 2), Vector::Ones(2));
  EXPECT_TRUE(is_dual_feasible(nn, (Vector(2) << -1, -2).finished()));
  EXPECT_FALSE(is_dual_feasible(nn, (Vector(2) << 1, -2).finished()));
  const Problem box = Problem::box(Matrix::Identity(2, 2), Vector::Ones(2), 0, 1);
  EXPECT_TRUE(is_dual_feasible(box, (Vector(2) << 5, 5).finished()));
}

TEST(DualityGapTest, Examples) {
  EXPECT_NEAR(duality_gap(one_by_one(1, -1), PrimalPoint{Vector::Zero(1), {}},
                          Vector::Constant(1, -1)),
              0.0, 1e-15);
  EXPECT_DOUBLE_EQ(duality_gap(one_by_one(1, 2), PrimalPoint{Vector::Zero(1), {}},
                               Vector::Zero(1)),
                   2.0);
  EXPECT_EQ(code_of([] {
              duality_gap(one_by_one(1, 2), PrimalPoint{Vector::Zero(1), {}},
                          Vector::Constant(1, 1));
            }),
            ErrorCode::kInfeasiblePoint);
}

TEST(DualityGapTest, WeakDualityOnRandomPairs) {
  Rng rng(6);
  int pairs = 0;
  for (int seed = 0; pairs < 1000; ++seed) {
    const Kind kind = static_cast<Kind>(seed % 3);
    const Index m = rng.integer(1, 30);
    const Index n = rng.integer(1, 30);
    const Problem p = testing::random_instance(kind, m, n, seed);
    for (int k = 0; k < 10; ++k, ++pairs) {
      Vector x = p.lower();
      for (Index j = 0; j < n; ++j) x[j] += std::abs(rng.normal());
      x = clip_to_box(p, x);
      Vector x2 = clip_to_box(p, p.lower() + rng.gaussian(n).cwiseAbs());
      const Vector theta = testing::oracle_dual_point(p, x2);
      EXPECT_GE(duality_gap(p, PrimalPoint{x, {}}, theta), -1e-9);
    }
  }
}

TEST(DualityGapTest, ClampAcceptsRoundoffOnly) {
  EXPECT_EQ(clamp_gap(0.25, 1.0), 0.25);
  EXPECT_EQ(clamp_gap(-1e-12, 1.0), 0.0);
  EXPECT_EQ(clamp_gap(-1e-7, 1e3), 0.0);
  EXPECT_EQ(code_of([] { clamp_gap(-1e-6, 1.0); }), ErrorCode::kInconsistentGap);
}

TEST(DualPointTest, ScalingExamples) {
  const Problem p =
      Problem::box(Matrix::Identity(2, 2), (Vector(2) << 1, 2).finished(), -5, 5);
  EXPECT_EQ(dual_point_bvlr(p, PrimalPoint{Vector::Zero(2), {}}).theta,
            (Vector(2) << 1, 2).finished());
  EXPECT_EQ(dual_point_bvlr(p, PrimalPoint{(Vector(2) << 1, 2).finished(), {}})
                .theta,
            Vector::Zero(2));
  Matrix a(2, 2);
  a << 1, 0, 0, 2;
  const Problem q = Problem::box(a, Vector::Ones(2), -5, 5);
  const DualState ds =
      dual_point_bvlr(q, PrimalPoint{(Vector(2) << 1, 0.25).finished(), {}});
  EXPECT_EQ(ds.theta, (Vector(2) << 0, 0.5).finished());
  EXPECT_EQ(ds.a_t_theta, (Vector(2) << 0, 1).finished());
}

TEST(DualPointTest, ScalingRejectsUnboundedInstances) {
  EXPECT_EQ(code_of([] {
              dual_point_bvlr(one_by_one(1, 1), PrimalPoint{Vector::Zero(1), {}});
            }),
            ErrorCode::kWrongVariant);
}

TranslationVector neg_ones(const Problem& p) {
  return select_translation_vector(p, TStrategy::neg_ones());
}

TEST(DualTranslateTest, IdentityExamples) {
  const Problem p = Problem::nnls(Matrix::Identity(2, 2), Vector::Ones(2));
  const TranslationVector tv = neg_ones(p);
  EXPECT_EQ(dual_translate(p, tv, (Vector(2) << -1, -2).finished()),
            (Vector(2) << -1, -2).finished());
  EXPECT_EQ(dual_translate(p, tv, (Vector(2) << 1, -2).finished()),
            (Vector(2) << 0, -3).finished());
}

// Smallest eps >= 0 with A_J^T (z + eps t) <= 0, by bisection.
double bisect_shift(const Problem& p, const Vector& t, const Vector& z) {
  auto ok = [&](double eps) {
    const Vector c = p.a().transpose() * (z + eps * t);
    for (Index j : p.j_inf())
      if (c[j] > 1e-14) return false;
    return true;
  };
  if (ok(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (!ok(hi)) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

TEST(DualTranslateTest, ThreeColumnExampleAgainstBisection) {
  Matrix a(2, 3);
  const double s = 1.0 / std::sqrt(2.0);
  a << 1, 0, s, 0, 1, s;
  const Problem p = Problem::nnls(a, Vector::Ones(2));
  const TranslationVector tv = neg_ones(p);
  const Vector z = Vector::Ones(2);
  const Vector out = dual_translate(p, tv, z);
  const double eps = bisect_shift(p, tv.t(), z);
  EXPECT_NEAR(out[0], z[0] - eps, 1e-12);
  EXPECT_NEAR(out[1], z[1] - eps, 1e-12);
  EXPECT_LE((a.transpose() * out).maxCoeff(), 1e-12);
}

TEST(DualTranslateTest, RandomTranslationsAreFeasible) {
  Rng rng(7);
  for (int k = 0; k < 1000; ++k) {
    const Index m = rng.integer(1, 30);
    const Index n = rng.integer(1, 30);
    const Problem p = Problem::nnls(rng.half_normal(m, n), rng.gaussian(m));
    const Vector z = 3.0 * rng.gaussian(m);
    const Vector out = dual_translate(p, neg_ones(p), z);
    EXPECT_LE((p.a().transpose() * out).maxCoeff(), 1e-12) << "trial " << k;
    EXPECT_NEAR((out - z).norm(),
                bisect_shift(p, -Vector::Ones(m), z) * std::sqrt(double(m)),
                1e-9 * std::max(1.0, (out - z).norm()));
  }
}

TEST(DualTranslateTest, FeasibleInputsAreFixedBitwise) {
  Rng rng(8);
  for (int k = 0; k < 200; ++k) {
    const Index m = rng.integer(1, 20);
    const Index n = rng.integer(1, 20);
    const Problem p = Problem::nnls(rng.half_normal(m, n), rng.gaussian(m));
    const Vector z = -rng.gaussian(m).cwiseAbs();
    const Vector out = dual_translate(p, neg_ones(p), z);
    ASSERT_EQ(out.size(), z.size());
    for (Index i = 0; i < m; ++i) {
      EXPECT_EQ(std::memcmp(&out[i], &z[i], sizeof(double)), 0);
    }
  }
}

TEST(DualPointTest, TranslationExamples) {
  const Problem p = one_by_one(1, -1);
  DualState ds = dual_point_nnlr(p, neg_ones(p), PrimalPoint{Vector::Zero(1), {}});
  EXPECT_EQ(ds.theta, Vector::Constant(1, -1));
  const Problem q = one_by_one(1, 2);
  ds = dual_point_nnlr(q, neg_ones(q), PrimalPoint{Vector::Zero(1), {}});
  EXPECT_EQ(ds.theta, Vector::Zero(1));
  EXPECT_DOUBLE_EQ(ds.gap, 2.0);
}

TEST(DualPointTest, CachedInnerProductsMatchTheta) {
  for (Kind kind : {Kind::kNnls, Kind::kMixed, Kind::kBvls}) {
    const Problem p = testing::random_instance(kind, 20, 12, 3);
    std::optional<TranslationVector> tv;
    if (!p.all_bounded()) tv = neg_ones(p);
    const Vector x = clip_to_box(p, p.lower() + 0.2 * Vector::Ones(12));
    const DualState ds = dual_point(p, tv ? &*tv : nullptr, PrimalPoint{x, {}});
    const Vector c = p.a().transpose() * ds.theta;
    EXPECT_LE((c - ds.a_t_theta).norm(), 1e-10 * std::max(1.0, c.norm()));
    EXPECT_TRUE(is_dual_feasible(p, ds.theta));
    EXPECT_NEAR(ds.gap, testing::primal_value(p, x) -
                            testing::lagrangian_dual(p, ds.theta),
                1e-9 * std::max(1.0, ds.gap));
  }
}

TEST(DualPointTest, ConvergesToDualOptimum) {
  for (Kind kind : {Kind::kNnls, Kind::kBvls, Kind::kMixed}) {
    for (int seed = 0; seed < 5; ++seed) {
      const Problem p = testing::random_instance(kind, 12, 6, seed);
      const Vector x_ref = testing::reference_solution(p);
      const Vector theta_ref = p.y() - p.a() * x_ref;
      std::optional<TranslationVector> tv;
      if (!p.all_bounded()) tv = neg_ones(p);
      const DualState ds =
          dual_point(p, tv ? &*tv : nullptr, PrimalPoint{x_ref, {}});
      EXPECT_LT(ds.gap, 1e-11);
      EXPECT_LT((ds.theta - theta_ref).norm(), 1e-5)
          << testing::kind_name(kind) << " seed " << seed;
    }
  }
}

TEST(TranslationVectorTest, NegOnesOnNonnegativeMatrix) {
  Rng rng(9);
  const Problem p = Problem::nnls(rng.half_normal(7, 5), rng.gaussian(7));
  const TranslationVector tv = neg_ones(p);
  EXPECT_EQ(tv.t(), -Vector::Ones(7));
  for (Index j = 0; j < 5; ++j) {
    EXPECT_NEAR(tv.a_t_t()[j], -p.column(j).lpNorm<1>(), 1e-12);
  }
}

TEST(TranslationVectorTest, OrthogonalCustom) {
  const Problem p = Problem::nnls(Matrix::Identity(2, 2), Vector::Ones(2));
  const TranslationVector tv = select_translation_vector(
      p, TStrategy::custom_vector(-p.column(0) - p.column(1)));
  EXPECT_EQ(tv.t(), (Vector(2) << -1, -1).finished());
}

TEST(TranslationVectorTest, SolveLinearTwoByTwo) {
  Matrix a(2, 2);
  a << 1, -1, 1, 1;
  a /= std::sqrt(2.0);
  const Problem p = Problem::nnls(a, Vector::Ones(2));
  const TranslationVector tv =
      select_translation_vector(p, TStrategy::solve_linear());
  // Oracle: the unique solution of the 2x2 system A^T t = -1.
  const Vector expected = a.transpose().fullPivLu().solve(-Vector::Ones(2));
  EXPECT_NEAR((tv.t() - expected).norm(), 0.0, 1e-12);
  EXPECT_NEAR(tv.t()[0], 0.0, 1e-12);
  EXPECT_NEAR(tv.t()[1], -std::sqrt(2.0), 1e-12);
  // Transposed layout (the same entries read as columns).
  const Problem q = Problem::nnls(a.transpose(), Vector::Ones(2));
  const TranslationVector tq =
      select_translation_vector(q, TStrategy::solve_linear());
  EXPECT_NEAR(tq.t()[0], -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(tq.t()[1], 0.0, 1e-12);
}

TEST(TranslationVectorTest, SolveLinearRejectsRankDeficiency) {
  Matrix a(3, 3);
  a << 1, 2, 0, 2, 4, 0, 1, 0, 0;
  a.col(2) = a.col(0) + a.col(1);
  const Problem p = Problem::nnls(a, Vector::Ones(3));
  EXPECT_EQ(code_of([&] { select_translation_vector(p, TStrategy::solve_linear()); }),
            ErrorCode::kSingularGram);
  Rng rng(10);
  const Problem wide = Problem::nnls(rng.gaussian(3, 5), Vector::Ones(3));
  EXPECT_EQ(code_of([&] {
              select_translation_vector(wide, TStrategy::solve_linear());
            }),
            ErrorCode::kSingularGram);
}

TEST(TranslationVectorTest, NegColumnWithPositiveGramColumn) {
  Matrix a(2, 3);
  a << 1, 0.5, 1, 0.2, 1, -0.5;  // a_0 has positive inner product with all
  const Problem p = Problem::nnls(a, Vector::Ones(2));
  const Vector gram_col = a.transpose() * a.col(0);
  ASSERT_GT(gram_col.minCoeff(), 0.0);
  const TranslationVector tv =
      select_translation_vector(p, TStrategy::neg_column(0));
  EXPECT_EQ(tv.a_t_t(), -gram_col);
  EXPECT_EQ(code_of([&] { select_translation_vector(p, TStrategy::neg_column(3)); }),
            ErrorCode::kInvalidConfig);
}

TEST(TranslationVectorTest, InvalidCandidatesRaiseNoInteriorPoint) {
  const Problem p = Problem::nnls(Matrix::Identity(2, 2), Vector::Ones(2));
  EXPECT_EQ(code_of([&] {
              select_translation_vector(
                  p, TStrategy::custom_vector((Vector(2) << -1, 0).finished()));
            }),
            ErrorCode::kNoInteriorPoint);
  Matrix a(1, 2);
  a << 1, -1;  // cone of the columns is the whole line
  const Problem q = Problem::nnls(a, Vector::Ones(1));
  EXPECT_EQ(code_of([&] { select_translation_vector(q, TStrategy::neg_mean_column()); }),
            ErrorCode::kNoInteriorPoint);
  EXPECT_EQ(code_of([&] {
              select_translation_vector(
                  Problem::box(Matrix::Identity(2, 2), Vector::Ones(2), 0, 1),
                  TStrategy::neg_ones());
            }),
            ErrorCode::kWrongVariant);
}

TEST(TranslationVectorTest, MixedBoundsOnlyConstrainUnboundedColumns) {
  Matrix a(1, 2);
  a << 1, -1;
  const Problem p(a, Vector::Ones(1), Vector::Zero(2),
                  (Vector(2) << kInf, 1.0).finished());
  const TranslationVector tv = neg_ones(p);
  EXPECT_EQ(tv.a_t_t()[1], 1.0);
  const Vector out = dual_translate(p, tv, Vector::Constant(1, 2.0));
  EXPECT_EQ(out, Vector::Zero(1));
}

TEST(TranslationVectorTest, FourMatrixClasses) {
  Rng rng(12);
  for (int k = 0; k < 50; ++k) {
    const Index m = rng.integer(2, 25);
    const Index n = rng.integer(1, m);
    // Full column rank.
    const Problem full = Problem::nnls(rng.gaussian(m, n), rng.gaussian(m));
    const TranslationVector t1 =
        select_translation_vector(full, TStrategy::solve_linear());
    EXPECT_LT((full.a().transpose() * t1.t()).maxCoeff(), 0.0);
    // Orthogonal, with a random negative combination.
    const Matrix q = rng.gaussian(m, m).householderQr().householderQ();
    const Problem orth = Problem::nnls(q, rng.gaussian(m));
    Vector beta = -rng.gaussian(m).cwiseAbs() - Vector::Constant(m, 0.01);
    const TranslationVector t2 =
        select_translation_vector(orth, TStrategy::custom_vector(q * beta));
    EXPECT_LT((q.transpose() * t2.t()).maxCoeff(), 0.0);
    // Nonnegative without zero columns.
    const Problem nonneg = Problem::nnls(rng.half_normal(m, n), rng.gaussian(m));
    const TranslationVector t3 = neg_ones(nonneg);
    EXPECT_LT((nonneg.a().transpose() * t3.t()).maxCoeff(), 0.0);
    // A Gram column with positive entries: shift Gaussian columns along a
    // common direction until column 0 correlates positively with all.
    Matrix g = rng.gaussian(m, n);
    const Vector dir = rng.gaussian(m).normalized();
    for (Index j = 0; j < n; ++j) g.col(j) += 3.0 * std::sqrt(double(m)) * dir;
    const Problem gram = Problem::nnls(g, rng.gaussian(m));
    ASSERT_GT((g.transpose() * g.col(0)).minCoeff(), 0.0);
    const TranslationVector t4 =
        select_translation_vector(gram, TStrategy::neg_column(0));
    EXPECT_LT((g.transpose() * t4.t()).maxCoeff(), 0.0);
  }
}

TEST(CorrelatedColumnTest, MatchesPairwiseCosineSums) {
  Rng rng(13);
  const Matrix a = rng.half_normal(6, 9);
  Vector score = Vector::Zero(9);
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 9; ++j)
      score[i] += a.col(i).dot(a.col(j)) / (a.col(i).norm() * a.col(j).norm());
  Index best, worst;
  score.maxCoeff(&best);
  score.minCoeff(&worst);
  EXPECT_EQ(correlated_column(a, true), best);
  EXPECT_EQ(correlated_column(a, false), worst);
}

}  // namespace
}  // namespace boxscreen
