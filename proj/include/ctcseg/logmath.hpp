// Copyright 2026 The ctcseg Authors
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

#ifndef CTCSEG_LOGMATH_HPP_
#define CTCSEG_LOGMATH_HPP_

#include <cmath>
#include <limits>
#include <span>

namespace ctcseg {

// Posterior files store log(0) as a large negative finite value so they stay
// portable across runtimes that reject IEEE infinities; anything at or below
// kLogZeroThreshold is read back as log(0). Inside the dynamic program the
// working representation is a genuine -infinity, which propagates correctly
// through additions and comparisons.
inline constexpr float kLogZeroSentinel = -1e30f;
inline constexpr double kLogZeroThreshold = -1e29;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double v) { return v <= kLogZeroThreshold; }

inline double to_working_log(float stored) {
  double v = stored;
  return v <= kLogZeroThreshold ? kNegInf : v;
}

inline float to_stored_log(double working) {
  if (working <= kLogZeroThreshold) return kLogZeroSentinel;
  return static_cast<float>(working);
}

// Numerically stable log(sum_i exp(values[i])) over stored log probabilities.
// Returns log(0) as -infinity when every entry is log(0).
inline double log_sum_exp(std::span<const float> values) {
  double max = kNegInf;
  for (float v : values) {
    double w = to_working_log(v);
    if (w > max) max = w;
  }
  if (max == kNegInf) return kNegInf;
  double sum = 0.0;
  for (float v : values) {
    double w = to_working_log(v);
    if (w != kNegInf) sum += std::exp(w - max);
  }
  return max + std::log(sum);
}

}  // namespace ctcseg

#endif  // CTCSEG_LOGMATH_HPP_
