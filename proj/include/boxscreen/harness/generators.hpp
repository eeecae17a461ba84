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

// Synthetic instances.
//
//   BvlsGaussian:   a_ij ~ N(0,1), y_i ~ N(0,1), box [-b, b].
//   NnlsHalfNormal: a_ij = |N(0,1)|, y = A xbar + noise, l = 0, u = +inf,
//                   xbar with round(sparsity n) half-normal entries at
//                   uniformly drawn positions.
//
// Each matrix/vector is drawn from its own stream so that changing one shape
// does not perturb the other draws. Streams are mt19937_64 engines seeded by
// splitmix64(seed, stream id); normals come from Boost's ziggurat sampler,
// whose output is specified by the library rather than by the platform.

#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boxscreen/error.hpp"
#include "boxscreen/model.hpp"

namespace boxscreen::harness {

inline constexpr std::string_view kPrngName =
    "boost::random::mt19937_64/splitmix64-streams/ziggurat-normal";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
  kMatrix = 1,
  kObservation = 2,
  kSupport = 3,
  kAmplitude = 4,
  kNoise = 5,
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, Stream stream)
      : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

  double normal() { return normal_(engine_); }
  double half_normal() { return std::abs(normal_(engine_)); }
  // Uniform on {0, ..., n - 1}.
  std::int64_t index(std::int64_t n) {
    boost::random::uniform_int_distribution<std::int64_t> dist(0, n - 1);
    return dist(engine_);
  }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

enum class Family { kBvlsGaussian, kNnlsHalfNormal };

inline std::string_view to_string(Family f) {
  return f == Family::kBvlsGaussian ? "bvls" : "nnls";
}

inline std::optional<Family> parse_family(std::string_view name) {
  if (name == "bvls") return Family::kBvlsGaussian;
  if (name == "nnls") return Family::kNnlsHalfNormal;
  return std::nullopt;
}

struct GenSpec {
  Family family = Family::kNnlsHalfNormal;
  Index m = 200;
  Index n = 100;
  double box_halfwidth = 1.0;  // bvls
  double sparsity = 0.05;      // nnls
  double noise_std = 1.0;      // nnls
  std::uint64_t seed = 0;

  Index support_size() const {
    return static_cast<Index>(std::llround(sparsity * static_cast<double>(n)));
  }

  void validate() const {
    if (m < 1 || n < 1) throw Error(ErrorCode::kBadSpec, "m and n must be >= 1");
    if (family == Family::kBvlsGaussian) {
      if (!(box_halfwidth > 0.0) || !std::isfinite(box_halfwidth)) {
        throw Error(ErrorCode::kBadSpec, "box half-width must be positive");
      }
    } else {
      if (!(sparsity > 0.0 && sparsity <= 1.0)) {
        throw Error(ErrorCode::kBadSpec, "sparsity must lie in (0, 1]");
      }
      if (support_size() < 1) {
        throw Error(ErrorCode::kBadSpec,
                    "sparsity * n must give at least one nonzero");
      }
      if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
        throw Error(ErrorCode::kBadSpec, "noise_std must be >= 0");
      }
    }
  }
};

inline Problem gen_bvls(const GenSpec& spec) {
  if (spec.family != Family::kBvlsGaussian) {
    throw Error(ErrorCode::kBadSpec, "gen_bvls needs the bvls family");
  }
  spec.validate();
  RandomStream a_rng(spec.seed, Stream::kMatrix);
  RandomStream y_rng(spec.seed, Stream::kObservation);
  Matrix a(spec.m, spec.n);
  for (Index j = 0; j < spec.n; ++j) {
    for (Index i = 0; i < spec.m; ++i) a(i, j) = a_rng.normal();
  }
  Vector y(spec.m);
  for (Index i = 0; i < spec.m; ++i) y[i] = y_rng.normal();
  return Problem::box(std::move(a), std::move(y), -spec.box_halfwidth,
                      spec.box_halfwidth);
}

// The planted nonnegative signal for an nnls spec.
inline Vector gen_nnls_truth(const GenSpec& spec) {
  RandomStream support_rng(spec.seed, Stream::kSupport);
  RandomStream amp_rng(spec.seed, Stream::kAmplitude);
  const Index s = spec.support_size();
  // Partial Fisher-Yates over 0..n-1.
  std::vector<Index> perm(static_cast<size_t>(spec.n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Vector truth = Vector::Zero(spec.n);
  for (Index k = 0; k < s; ++k) {
    const Index pick = k + static_cast<Index>(support_rng.index(spec.n - k));
    std::swap(perm[k], perm[pick]);
    truth[perm[k]] = amp_rng.half_normal();
  }
  return truth;
}

inline Problem gen_nnls(const GenSpec& spec) {
  if (spec.family != Family::kNnlsHalfNormal) {
    throw Error(ErrorCode::kBadSpec, "gen_nnls needs the nnls family");
  }
  spec.validate();
  RandomStream a_rng(spec.seed, Stream::kMatrix);
  RandomStream noise_rng(spec.seed, Stream::kNoise);
  Matrix a(spec.m, spec.n);
  for (Index j = 0; j < spec.n; ++j) {
    for (Index i = 0; i < spec.m; ++i) a(i, j) = a_rng.half_normal();
  }
  const Vector truth = gen_nnls_truth(spec);
  Vector y = a * truth;
  for (Index i = 0; i < spec.m; ++i) y[i] += spec.noise_std * noise_rng.normal();
  return Problem::nnls(std::move(a), std::move(y));
}

inline Problem generate(const GenSpec& spec) {
  return spec.family == Family::kBvlsGaussian ? gen_bvls(spec) : gen_nnls(spec);
}

}  // namespace boxscreen::harness
