// Copyright 2026 The robustpsr Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace robustpsr {

/**
 * Exception carrying a stable machine-readable code next to the human
 * readable message.  Codes in use: "shape", "too-large", "unreachable-history",
 * "core-tests-insufficient", "class-incompatible", "infeasible", "unbounded",
 * "insufficient-points", "undefined-scaling".
 */
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& what) {
  throw Error(std::move(code), what);
}

/// splitmix64 step; used to derive independent seeds for parallel work so that
/// results do not depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a stream seed from a master seed and two indices (counter-based
/// splitting; deterministic and independent of evaluation order).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
  (void)splitmix64(s);
  s ^= 0xbf58476d1ce4e5b9ULL * (b + 1);
  return splitmix64(s);
}

/**
 * Small deterministic RNG wrapper.  The raw mt19937_64 stream is pinned by the
 * standard, and the uniform/discrete helpers below avoid the library-defined
 * distribution adaptors, so sequences are reproducible across platforms.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Samples an index proportionally to nonnegative weights.  Weights need not
  /// be normalized; the walk clamps to the last positive-weight index so a sum
  /// marginally below the target from rounding cannot fall off the end.
  int sample(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = static_cast<int>(i);
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace robustpsr
