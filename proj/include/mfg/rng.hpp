// Copyright 2026 The MFGLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFG_RNG_HPP_
#define MFG_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace mfg {

// Counter-splittable pseudo-random stream (splitmix64 core).  All randomness
// in the project is derived from one root seed expanded along integer paths
// (scenario index, player index, purpose tag), so runs are reproducible
// bit-for-bit independently of scheduling and worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  // Derives an independent stream from a root seed and an integer path.
  static RngStream Derive(std::uint64_t root,
                          std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = root;
    for (std::uint64_t p : path) {
      s = Mix(s ^ Mix(p + 0x9e3779b97f4a7c15ULL));
    }
    return RngStream(s);
  }

  std::uint64_t NextU64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }

  // Uniform on (0,1): 53 random bits, never returns 0 or 1.
  double NextUniform() {
    return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (deterministic across platforms, unlike
  // std::normal_distribution).
  double NextNormal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = NextUniform();
    double u2 = NextUniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform index in {0, ..., n-1}.
  int NextIndex(int n) {
    return static_cast<int>(NextUniform() * n) % n;
  }

 private:
  static std::uint64_t Mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mfg

#endif  // MFG_RNG_HPP_
