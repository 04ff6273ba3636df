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

#ifndef MFG_BELIEF_HPP_
#define MFG_BELIEF_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfg {

inline constexpr double kBeliefSumTol = 1e-12;

// Point on the probability simplex over the type set {1, ..., I}, I >= 2.
// Checked on construction: nonnegative entries summing to 1 within
// kBeliefSumTol.
class Belief {
 public:
  Belief() = default;

  static Belief Make(std::vector<double> w) {
    if (w.size() < 2) {
      throw std::invalid_argument("Belief: need at least 2 types, got " +
                                  std::to_string(w.size()));
    }
    double sum = 0.0;
    for (double v : w) {
      if (v < 0.0) {
        throw std::invalid_argument("Belief: negative entry " +
                                    std::to_string(v));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kBeliefSumTol) {
      throw std::invalid_argument("Belief: entries sum to " +
                                  std::to_string(sum) + ", expected 1");
    }
    Belief b;
    b.w_ = std::move(w);
    return b;
  }

  static Belief Vertex(int i, int num_types) {
    std::vector<double> w(num_types, 0.0);
    w.at(i) = 1.0;
    return Make(std::move(w));
  }

  static Belief Uniform(int num_types) {
    std::vector<double> w(num_types, 1.0 / num_types);
    return Make(std::move(w));
  }

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[i]; }
  const std::vector<double>& weights() const { return w_; }

  bool operator==(const Belief& other) const { return w_ == other.w_; }

 private:
  std::vector<double> w_;
};

// Convex combination sum_c q_c p_c of beliefs; the result is renormalized
// only through the final Make check (weights are expected to sum to 1).
inline Belief MixBeliefs(const std::vector<Belief>& ps,
                         const std::vector<double>& q) {
  if (ps.empty() || ps.size() != q.size()) {
    throw std::invalid_argument("MixBeliefs: size mismatch");
  }
  std::vector<double> w(ps[0].size(), 0.0);
  for (std::size_t c = 0; c < ps.size(); ++c) {
    for (int i = 0; i < ps[c].size(); ++i) w[i] += q[c] * ps[c][i];
  }
  return Belief::Make(std::move(w));
}

}  // namespace mfg

#endif  // MFG_BELIEF_HPP_
