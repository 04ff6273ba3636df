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

#ifndef MFG_ENCODER_HPP_
#define MFG_ENCODER_HPP_

#include <vector>

#include "mfg/solver.hpp"
#include "mfg/tree.hpp"

namespace mfg {

// Piecewise-constant control segment on [t_begin, t_end).
struct ControlSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  double u = 0.0;
  bool is_window = false;  // part of a signaling window
};

struct EncodedPath {
  int leaf_id = -1;
  double prob = 0.0;
  std::vector<int> node_ids;  // the source belief path, root first
  std::vector<ControlSegment> segments;
};

// Randomized piecewise-constant control family that encodes the belief path
// of a revelation tree: on each subdivision interval [kT/n, (k+1)T/n) a
// signaling window of length eps = T/2^n spells the current belief through
// runs of the designated actions (run lengths proportional to the belief
// components), followed by the myopic action.  Breakpoints are snapped to a
// time grid of nt_snap steps, so beliefs are transmitted with resolution
// 1/window_steps (recorded below).
struct EncodedControl {
  int n = 0;
  double horizon = 0.0;
  double eps = 0.0;
  int nt_snap = 0;
  double dt_snap = 0.0;
  int window_steps = 0;
  double belief_quantum = 0.0;
  std::vector<double> actions;  // designated lattice points of U0
  std::vector<EncodedPath> paths;
};

// The I designated actions: first points of a fixed lattice in U0.
std::vector<double> DesignatedActions(const ModelSpec& model);

// Belief quantization induced by breakpoint snapping: cumulative rounding to
// multiples of 1/window_steps (component sums preserved).
Belief QuantizeBelief(const Belief& p, int window_steps);

// Encodes the solved tree at refinement n.  Requires the tree's revelation
// times to sit on the subdivision {kT/n} and eps_n >= 4 * (T / nt_snap).
EncodedControl Encode(const ModelSpec& model, const MFGSolution& sol, int n,
                      int nt_snap);

// Belief filter reconstructed from an observed control path.
struct BeliefFilter {
  std::vector<double> times;                 // subdivision times
  std::vector<std::vector<double>> beliefs;  // posterior after each window
  std::vector<bool> valid;                   // false: malformed window, the
                                             // previous belief was held
};

BeliefFilter Decode(const std::vector<ControlSegment>& path, int n,
                    int nt_snap, double horizon,
                    const std::vector<double>& actions);

// The tree actually transmitted: leaf beliefs quantized, interior beliefs
// recomputed bottom-up so the martingale constraint holds exactly.
// *max_adjustment reports the largest belief component change.
RevelationTree DecodedTree(const RevelationTree& source, int window_steps,
                           double* max_adjustment);

struct J0Result {
  double j0 = 0.0;
  double jbar = 0.0;  // relaxed objective of the same solution
  double gap = 0.0;   // j0 - jbar (always >= 0: pointwise minimality)
  double window_excess = 0.0;
  double offwindow_excess = 0.0;
  double signaling_time = 0.0;   // n * eps
  double signaling_bound = 0.0;  // ||L0||_inf * signaling_time
};

// Major player's cost of the encoded control family against the MFG solution
// of the decoded tree, with the exact decomposition of the gap to the
// relaxed objective into window and frozen-argmin parts.
J0Result EvaluateJ0(const ModelSpec& model, const EncodedControl& enc,
                    const MFGSolution& decoded_solution);

}  // namespace mfg

#endif  // MFG_ENCODER_HPP_
