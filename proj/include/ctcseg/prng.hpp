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

#ifndef CTCSEG_PRNG_HPP_
#define CTCSEG_PRNG_HPP_

#include <cstdint>
#include <random>

namespace ctcseg {

// Seeded random source built on the standard mt19937_64 engine. The
// distributions are written out by hand because the standard library's
// distribution objects are implementation-defined: this way a seed produces
// the same stream on every platform, which keeps generated test fixtures
// and augmented evaluations reproducible.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53 significant bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound); bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection sampling keeps the result exactly uniform.
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ctcseg

#endif  // CTCSEG_PRNG_HPP_
