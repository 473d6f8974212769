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
#include <span>
#include <vector>

#include "robustpsr/common.hpp"

namespace robustpsr {

/// Hard cap on dense enumeration sizes.  Anything above this raises
/// Error("too-large").
inline constexpr long kEnumerationCap = 10'000'000L;

/**
 * Process dimensions: episode length `horizon` (number of observation/action
 * steps), observation alphabet size and action alphabet size.
 *
 * Index spaces used throughout, all ranked mixed-radix with step 1 most
 * significant and the per-step code o * num_actions + a:
 *  - full histories  tau_h = (o_1,a_1,...,o_h,a_h), rank space (OA)^h;
 *  - info prefixes   x_h   = (o_1,...,o_h, a_1,...,a_{h-1}), formed by the
 *    rank of tau_{h-1} followed by o_h, rank space (OA)^{h-1} * O;
 *  - bare action sequences a_{1:len}, rank space A^len.
 */
struct Dims {
  int horizon = 0;
  int num_obs = 0;
  int num_actions = 0;

  bool operator==(const Dims&) const = default;

  long pair_count() const { return static_cast<long>(num_obs) * num_actions; }

  /// (OA)^h with overflow / cap protection.
  long history_count(int h) const { return checked_pow(pair_count(), h); }

  /// Number of x_h prefixes, (OA)^{h-1} * O.
  long infoset_count(int h) const {
    if (h <= 0) return 1;
    return checked_pow(pair_count(), h - 1) * num_obs;
  }

  long action_seq_count(int len) const {
    return checked_pow(num_actions, len < 0 ? 0 : len);
  }

  long obs_seq_count(int len) const {
    return checked_pow(num_obs, len < 0 ? 0 : len);
  }

  void validate() const {
    if (horizon < 1 || num_obs < 1 || num_actions < 1)
      fail("shape", "dimensions must be positive");
  }

  static long checked_pow(long base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) {
      if (base != 0 && r > kEnumerationCap)
        fail("too-large", "index space exceeds enumeration cap");
      r *= base;
    }
    return r;
  }
};

inline long step_code(const Dims& d, int o, int a) {
  return static_cast<long>(o) * d.num_actions + a;
}

/// rank(tau_h . (o, a)) from rank(tau_h).
inline long extend_history(const Dims& d, long hist_rank, int o, int a) {
  return hist_rank * d.pair_count() + step_code(d, o, a);
}

/// rank of x_{h+1} = (tau_h, o) from rank(tau_h).
inline long infoset_rank(const Dims& d, long hist_rank, int o) {
  return hist_rank * d.num_obs + o;
}

/// Rank of a full history given parallel observation/action arrays.
inline long history_rank(const Dims& d, std::span<const int> obs,
                         std::span<const int> acts, int h) {
  long r = 0;
  for (int t = 0; t < h; ++t) r = extend_history(d, r, obs[t], acts[t]);
  return r;
}

inline long action_seq_rank(const Dims& d, std::span<const int> acts, int len) {
  long r = 0;
  for (int t = 0; t < len; ++t) r = r * d.num_actions + acts[t];
  return r;
}

/// Inverse of history_rank; writes h observations and h actions.
inline void unrank_history(const Dims& d, int h, long rank,
                           std::vector<int>& obs, std::vector<int>& acts) {
  obs.assign(h, 0);
  acts.assign(h, 0);
  for (int t = h - 1; t >= 0; --t) {
    long code = rank % d.pair_count();
    rank /= d.pair_count();
    obs[t] = static_cast<int>(code / d.num_actions);
    acts[t] = static_cast<int>(code % d.num_actions);
  }
}

inline void unrank_action_seq(const Dims& d, int len, long rank,
                              std::vector<int>& acts) {
  acts.assign(len, 0);
  for (int t = len - 1; t >= 0; --t) {
    acts[t] = static_cast<int>(rank % d.num_actions);
    rank /= d.num_actions;
  }
}

inline void unrank_obs_seq(const Dims& d, int len, long rank,
                           std::vector<int>& obs) {
  obs.assign(len, 0);
  for (int t = len - 1; t >= 0; --t) {
    obs[t] = static_cast<int>(rank % d.num_obs);
    rank /= d.num_obs;
  }
}

}  // namespace robustpsr
