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

#ifndef MFG_TREE_HPP_
#define MFG_TREE_HPP_

#include <string>
#include <vector>

#include "json.hpp"
#include "mfg/belief.hpp"

namespace mfg {

inline constexpr double kMartingaleTol = 1e-10;

// Node of a revelation tree.  A node at stage k carries the public belief on
// the time interval [t_k, t_{k+1}), where t_0 = 0, t_{K+1} = T and
// t_1 < ... < t_K are the revelation times.
struct TreeNode {
  int id = 0;
  int stage = 0;
  Belief belief;
  int parent = -1;
  double weight = 1.0;  // edge weight from parent; 1 for the root
  std::vector<int> children;
};

// Finite-support belief martingale: piecewise-constant simplex-valued paths
// branching at the revelation times, with the martingale constraint
// sum_c q_c p_c = p_parent at every internal node.  Immutable by convention;
// the mutating helpers below return fresh trees.
struct RevelationTree {
  double horizon = 0.0;
  std::vector<double> revelation_times;  // strictly increasing, in [0, T)
  std::vector<TreeNode> nodes;           // nodes[0] is the root

  static RevelationTree Root(Belief p0, double horizon,
                             std::vector<double> times);

  const Belief& p0() const { return nodes[0].belief; }
  int num_types() const { return nodes[0].belief.size(); }
  int num_stages() const { return static_cast<int>(revelation_times.size()); }
  double StageStart(int k) const {
    return k == 0 ? 0.0 : revelation_times[k - 1];
  }
  double StageEnd(int k) const {
    return k == num_stages() ? horizon : revelation_times[k];
  }
  std::vector<int> NodesAtStage(int k) const;
  std::vector<int> Leaves() const;
  double NodeProbability(int id) const;

  // Unchecked node append; used by builders and deserialization.
  int AddChildRaw(int parent, Belief belief, double weight);
};

// Constant-belief tree (no information ever disclosed).
RevelationTree NoReveal(Belief p0, double horizon);

// One revelation at time t that discloses the type: leaves are the simplex
// vertices e_i with weight p0_i (types with zero prior mass are dropped).
RevelationTree FullReveal(Belief p0, double horizon, double t);

// Splits `node_id` (a childless node below the final stage) into children
// with the given posteriors.  If `weights` is empty they are solved from the
// martingale constraint together with sum-to-one; splits violating the
// constraint beyond kMartingaleTol are rejected.
RevelationTree AddSplit(const RevelationTree& tree, int node_id,
                        const std::vector<Belief>& posteriors,
                        std::vector<double> weights = {});

// Extends every dangling node with identity (pass-through) children so all
// leaves sit at the final stage.
RevelationTree PadPassThrough(const RevelationTree& tree);

struct TreeViolation {
  int node = -1;
  std::string constraint;
  std::vector<double> residual;
};

struct TreeValidation {
  bool ok = true;
  std::vector<TreeViolation> violations;
  std::string Summary() const;
};

// Checks belief validity, time ordering, weight normalization, the
// martingale constraint at every internal node, and full leaf depth.
// The report names the first violated node per constraint kind.
TreeValidation Validate(const RevelationTree& tree);

// One root-to-leaf path, with probability = product of edge weights.
struct BeliefPath {
  std::vector<int> node_ids;  // one per stage, root first
  double probability = 0.0;
};

std::vector<BeliefPath> EnumeratePaths(const RevelationTree& tree);

// Pointwise convex combination of child value fields (the pre-revelation
// value).  Fields must share a grid; weights must sum to 1 within
// kMartingaleTol.
std::vector<double> ConditionalExpectation(
    const std::vector<std::vector<double>>& child_fields,
    const std::vector<double>& weights);

nlohmann::json TreeToJson(const RevelationTree& tree);
RevelationTree TreeFromJson(const nlohmann::json& j);

}  // namespace mfg

#endif  // MFG_TREE_HPP_
