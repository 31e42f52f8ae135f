// Copyright 2026 The CityPulse Authors.
//
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

#ifndef CITYPULSE_RNG_HPP_
#define CITYPULSE_RNG_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace citypulse {

/// SplitMix64 generator. Every random decision in the library goes through
/// this type so that results depend only on the seed and the algorithm below,
/// never on a standard-library distribution implementation.
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// uniform() takes the top 53 bits of next() scaled by 2^-53. below(n) uses
/// rejection on the top of the 64-bit range, so it is exactly uniform.
/// split(k) derives an independent child stream seeded with mix(seed ^ mix(k)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next();

  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  double normal();
  /// Marsaglia-Tsang; shape > 0, unit scale.
  double gamma(double shape);
  /// Knuth's product method below 30, rounded normal approximation above.
  std::uint64_t poisson(double lambda);
  std::vector<double> dirichlet(std::span<const double> alpha);
  /// Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  Rng split(std::uint64_t stream) const;
  std::uint64_t seed() const { return seed_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace citypulse

#endif  // CITYPULSE_RNG_HPP_
