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

#include "boxscreen/harness/generators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

namespace boxscreen::harness {
namespace {

GenSpec bvls_spec(Index m, Index n, double b, std::uint64_t seed) {
  GenSpec s;
  s.family = Family::kBvlsGaussian;
  s.m = m;
  s.n = n;
  s.box_halfwidth = b;
  s.seed = seed;
  return s;
}

GenSpec nnls_spec(Index m, Index n, std::uint64_t seed) {
  GenSpec s;
  s.family = Family::kNnlsHalfNormal;
  s.m = m;
  s.n = n;
  s.seed = seed;
  return s;
}

TEST(SplitMixTest, KnownValues) {
  // Reference outputs of the splitmix64 finalizer for seed 0 and 1.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(1), 0x910a2dec89025cc1ULL);
}

TEST(FamilyTest, ParseAndName) {
  EXPECT_EQ(parse_family("bvls"), Family::kBvlsGaussian);
  EXPECT_EQ(parse_family("nnls"), Family::kNnlsHalfNormal);
  EXPECT_FALSE(parse_family("lasso").has_value());
  EXPECT_EQ(to_string(Family::kBvlsGaussian), "bvls");
  EXPECT_EQ(to_string(Family::kNnlsHalfNormal), "nnls");
}

TEST(GeneratorTest, SameSeedSameInstance) {
  for (const GenSpec& s : {bvls_spec(20, 30, 0.1, 7), nnls_spec(20, 40, 7)}) {
    const Problem a = generate(s);
    const Problem b = generate(s);
    EXPECT_EQ(a.a(), b.a());
    EXPECT_EQ(a.y(), b.y());
    EXPECT_EQ(a.lower(), b.lower());
    EXPECT_EQ(a.upper(), b.upper());
  }
}

TEST(GeneratorTest, DifferentSeedsDiffer) {
  EXPECT_NE(generate(bvls_spec(5, 5, 1, 1)).a(), generate(bvls_spec(5, 5, 1, 2)).a());
  EXPECT_NE(generate(nnls_spec(5, 20, 1)).y(), generate(nnls_spec(5, 20, 2)).y());
}

TEST(GeneratorTest, StreamsAreIndependentOfOtherParameters) {
  GenSpec s = nnls_spec(10, 40, 3);
  const Problem base = generate(s);
  s.noise_std = 0.25;
  const Problem quiet = generate(s);
  EXPECT_EQ(base.a(), quiet.a());
  EXPECT_NE(base.y(), quiet.y());

  GenSpec b = bvls_spec(10, 40, 0.5, 3);
  const Problem wide = generate(b);
  b.box_halfwidth = 0.01;
  const Problem narrow = generate(b);
  EXPECT_EQ(wide.a(), narrow.a());
  EXPECT_EQ(wide.y(), narrow.y());
}

TEST(GeneratorTest, BvlsShapeAndBounds) {
  const Problem p = generate(bvls_spec(7, 11, 0.3, 5));
  EXPECT_EQ(p.rows(), 7);
  EXPECT_EQ(p.cols(), 11);
  EXPECT_TRUE(p.all_bounded());
  for (Index j = 0; j < 11; ++j) {
    EXPECT_EQ(p.lower()[j], -0.3);
    EXPECT_EQ(p.upper()[j], 0.3);
  }
}

TEST(GeneratorTest, BvlsEntriesAreStandardNormal) {
  const Problem p = generate(bvls_spec(400, 250, 1.0, 6));
  const Matrix& a = p.a();
  const double count = static_cast<double>(a.size());
  const double mean = a.sum() / count;
  const double var = (a.array() - mean).square().sum() / (count - 1);
  // 10^5 samples: standard errors of about 0.003 and 0.0045.
  EXPECT_NEAR(mean, 0.0, 0.015);
  EXPECT_NEAR(var, 1.0, 0.025);
  const double within_one = (a.array().abs() < 1.0).cast<double>().sum() / count;
  EXPECT_NEAR(within_one, 0.682689, 0.01);
}

TEST(GeneratorTest, NnlsTruthHasExactSupport) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenSpec s = nnls_spec(10, 100 + static_cast<Index>(seed), seed);
    s.sparsity = 0.07;
    const Vector truth = gen_nnls_truth(s);
    Index nonzeros = 0;
    for (Index j = 0; j < truth.size(); ++j) {
      EXPECT_GE(truth[j], 0.0);
      if (truth[j] != 0.0) ++nonzeros;
    }
    EXPECT_EQ(nonzeros, s.support_size());
  }
}

TEST(GeneratorTest, NnlsSupportIsUniform) {
  std::vector<int> hits(20, 0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    GenSpec s = nnls_spec(2, 20, seed);
    s.sparsity = 0.1;  // two nonzeros
    const Vector truth = gen_nnls_truth(s);
    for (Index j = 0; j < 20; ++j) hits[j] += truth[j] != 0.0;
  }
  // Expected 400 hits per index, sd about 19.
  for (int h : hits) EXPECT_NEAR(h, 400, 100);
}

TEST(GeneratorTest, NnlsObservationModel) {
  GenSpec s = nnls_spec(30, 60, 9);
  s.noise_std = 0.0;
  const Problem p = generate(s);
  EXPECT_TRUE(p.is_nonnegative());
  EXPECT_GE(p.a().minCoeff(), 0.0);
  const Vector truth = gen_nnls_truth(s);
  EXPECT_LE((p.y() - p.a() * truth).norm(), 1e-12 * p.y().norm());

  const Problem big = generate(nnls_spec(400, 250, 10));
  const double mean = big.a().mean();
  EXPECT_NEAR(mean, std::sqrt(2.0 / std::numbers::pi), 0.01);
}

TEST(GeneratorTest, RejectsBadSpecs) {
  auto code = [](const GenSpec& s) {
    try {
      generate(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidProblem;
  };
  EXPECT_EQ(code(bvls_spec(0, 3, 1, 0)), ErrorCode::kBadSpec);
  EXPECT_EQ(code(bvls_spec(3, 3, 0, 0)), ErrorCode::kBadSpec);
  EXPECT_EQ(code(bvls_spec(3, 3, INFINITY, 0)), ErrorCode::kBadSpec);
  GenSpec s = nnls_spec(3, 5, 0);
  s.sparsity = 0.05;  // rounds to zero nonzeros
  EXPECT_EQ(code(s), ErrorCode::kBadSpec);
  s.sparsity = 1.5;
  EXPECT_EQ(code(s), ErrorCode::kBadSpec);
  s = nnls_spec(3, 40, 0);
  s.noise_std = -1;
  EXPECT_EQ(code(s), ErrorCode::kBadSpec);
  EXPECT_THROW(gen_bvls(nnls_spec(3, 40, 0)), Error);
  EXPECT_THROW(gen_nnls(bvls_spec(3, 3, 1, 0)), Error);
}

}  // namespace
}  // namespace boxscreen::harness
