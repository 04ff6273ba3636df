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

#include "mfg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mfg {

RevelationTree RevelationTree::Root(Belief p0, double horizon,
                                    std::vector<double> times) {
  if (horizon <= 0.0) throw std::invalid_argument("tree: horizon <= 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || times[k] >= horizon) {
      throw std::invalid_argument("tree: revelation time outside [0, T)");
    }
    if (k > 0 && times[k] <= times[k - 1]) {
      throw std::invalid_argument("tree: revelation times not increasing");
    }
  }
  RevelationTree t;
  t.horizon = horizon;
  t.revelation_times = std::move(times);
  TreeNode root;
  root.id = 0;
  root.stage = 0;
  root.belief = std::move(p0);
  t.nodes.push_back(std::move(root));
  return t;
}

std::vector<int> RevelationTree::NodesAtStage(int k) const {
  std::vector<int> out;
  for (const TreeNode& n : nodes) {
    if (n.stage == k) out.push_back(n.id);
  }
  return out;
}

std::vector<int> RevelationTree::Leaves() const {
  std::vector<int> out;
  for (const TreeNode& n : nodes) {
    if (n.children.empty()) out.push_back(n.id);
  }
  return out;
}

double RevelationTree::NodeProbability(int id) const {
  double p = 1.0;
  for (int cur = id; cur >= 0; cur = nodes[cur].parent) {
    p *= nodes[cur].weight;
  }
  return p;
}

int RevelationTree::AddChildRaw(int parent, Belief belief, double weight) {
  TreeNode n;
  n.id = static_cast<int>(nodes.size());
  n.stage = nodes[parent].stage + 1;
  n.belief = std::move(belief);
  n.parent = parent;
  n.weight = weight;
  nodes[parent].children.push_back(n.id);
  nodes.push_back(std::move(n));
  return nodes.back().id;
}

RevelationTree NoReveal(Belief p0, double horizon) {
  return RevelationTree::Root(std::move(p0), horizon, {});
}

RevelationTree FullReveal(Belief p0, double horizon, double t) {
  RevelationTree tree = RevelationTree::Root(p0, horizon, {t});
  const int types = p0.size();
  for (int i = 0; i < types; ++i) {
    if (p0[i] > 0.0) {
      tree.AddChildRaw(0, Belief::Vertex(i, types), p0[i]);
    }
  }
  return tree;
}

namespace {

// Least-squares solve for weights w with sum_c w_c p_c = p_parent and
// sum_c w_c = 1 (normal equations; the systems are tiny).
std::vector<double> SolveSplitWeights(const Belief& parent,
                                      const std::vector<Belief>& posteriors) {
  const int B = static_cast<int>(posteriors.size());
  const int I = parent.size();
  // Rows: I martingale components plus the weight-sum row.
  std::vector<std::vector<double>> ata(B, std::vector<double>(B, 0.0));
  std::vector<double> atb(B, 0.0);
  for (int r = 0; r <= I; ++r) {
    double rhs = (r == I) ? 1.0 : parent[r];
    for (int c = 0; c < B; ++c) {
      double arc = (r == I) ? 1.0 : posteriors[c][r];
      atb[c] += arc * rhs;
      for (int c2 = 0; c2 < B; ++c2) {
        double arc2 = (r == I) ? 1.0 : posteriors[c2][r];
        ata[c][c2] += arc * arc2;
      }
    }
  }
  // Gaussian elimination with partial pivoting.
  std::vector<int> piv(B);
  for (int i = 0; i < B; ++i) piv[i] = i;
  for (int col = 0; col < B; ++col) {
    int best = col;
    for (int r = col + 1; r < B; ++r) {
      if (std::abs(ata[r][col]) > std::abs(ata[best][col])) best = r;
    }
    std::swap(ata[col], ata[best]);
    std::swap(atb[col], atb[best]);
    if (std::abs(ata[col][col]) < 1e-14) {
      throw std::invalid_argument("add_split: degenerate posterior set");
    }
    for (int r = col + 1; r < B; ++r) {
      double f = ata[r][col] / ata[col][col];
      for (int c = col; c < B; ++c) ata[r][c] -= f * ata[col][c];
      atb[r] -= f * atb[col];
    }
  }
  std::vector<double> w(B);
  for (int r = B - 1; r >= 0; --r) {
    double s = atb[r];
    for (int c = r + 1; c < B; ++c) s -= ata[r][c] * w[c];
    w[r] = s / ata[r][r];
  }
  return w;
}

}  // namespace

RevelationTree AddSplit(const RevelationTree& tree, int node_id,
                        const std::vector<Belief>& posteriors,
                        std::vector<double> weights) {
  if (node_id < 0 || node_id >= static_cast<int>(tree.nodes.size())) {
    throw std::invalid_argument("add_split: bad node id");
  }
  const TreeNode& node = tree.nodes[node_id];
  if (!node.children.empty()) {
    throw std::invalid_argument("add_split: node already split");
  }
  if (node.stage >= tree.num_stages()) {
    throw std::invalid_argument("add_split: node is at the final stage");
  }
  if (posteriors.empty()) {
    throw std::invalid_argument("add_split: no posteriors");
  }
  for (const Belief& q : posteriors) {
    if (q.size() != node.belief.size()) {
      throw std::invalid_argument("add_split: posterior size mismatch");
    }
  }
  if (weights.empty()) {
    weights = SolveSplitWeights(node.belief, posteriors);
  }
  if (weights.size() != posteriors.size()) {
    throw std::invalid_argument("add_split: weight count mismatch");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (w <= 0.0 || w > 1.0) {
      throw std::invalid_argument("add_split: weight outside (0,1]: " +
                                  std::to_string(w));
    }
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > kMartingaleTol) {
    throw std::invalid_argument("add_split: weights sum to " +
                                std::to_string(wsum));
  }
  for (int i = 0; i < node.belief.size(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < posteriors.size(); ++c) {
      s += weights[c] * posteriors[c][i];
    }
    if (std::abs(s - node.belief[i]) > kMartingaleTol) {
      throw std::invalid_argument(
          "add_split: martingale constraint violated, component " +
          std::to_string(i) + " residual " +
          std::to_string(s - node.belief[i]));
    }
  }
  RevelationTree out = tree;
  for (std::size_t c = 0; c < posteriors.size(); ++c) {
    out.AddChildRaw(node_id, posteriors[c], weights[c]);
  }
  return out;
}

RevelationTree PadPassThrough(const RevelationTree& tree) {
  RevelationTree out = tree;
  bool grew = true;
  while (grew) {
    grew = false;
    const int n = static_cast<int>(out.nodes.size());
    for (int id = 0; id < n; ++id) {
      if (out.nodes[id].children.empty() &&
          out.nodes[id].stage < out.num_stages()) {
        out.AddChildRaw(id, out.nodes[id].belief, 1.0);
        grew = true;
      }
    }
  }
  return out;
}

std::string TreeValidation::Summary() const {
  if (ok) return "ok";
  std::ostringstream os;
  for (const TreeViolation& v : violations) {
    os << "node " << v.node << ": " << v.constraint;
    if (!v.residual.empty()) {
      os << " residual (";
      for (std::size_t i = 0; i < v.residual.size(); ++i) {
        os << (i ? "," : "") << v.residual[i];
      }
      os << ")";
    }
    os << "; ";
  }
  return os.str();
}

TreeValidation Validate(const RevelationTree& tree) {
  TreeValidation rep;
  auto add = [&](int node, const std::string& what,
                 std::vector<double> residual) {
    rep.ok = false;
    rep.violations.push_back({node, what, std::move(residual)});
  };

  for (std::size_t k = 0; k < tree.revelation_times.size(); ++k) {
    double t = tree.revelation_times[k];
    if (t < 0.0 || t >= tree.horizon ||
        (k > 0 && t <= tree.revelation_times[k - 1])) {
      add(-1, "revelation times must be strictly increasing in [0,T)", {t});
    }
  }

  for (const TreeNode& n : tree.nodes) {
    double sum = 0.0;
    double min_w = 0.0;
    for (int i = 0; i < n.belief.size(); ++i) {
      sum += n.belief[i];
      min_w = std::min(min_w, n.belief[i]);
    }
    if (min_w < 0.0) add(n.id, "belief has a negative entry", {min_w});
    if (std::abs(sum - 1.0) > kBeliefSumTol) {
      add(n.id, "belief weights do not sum to 1", {sum - 1.0});
    }
    if (n.id != 0 && (n.weight <= 0.0 || n.weight > 1.0)) {
      add(n.id, "edge weight outside (0,1]", {n.weight});
    }
  }

  for (const TreeNode& n : tree.nodes) {
    if (n.children.empty()) {
      if (n.stage != tree.num_stages()) {
        add(n.id, "leaf not at the final time index",
            {static_cast<double>(n.stage)});
      }
      continue;
    }
    double wsum = 0.0;
    std::vector<double> mart(n.belief.size(), 0.0);
    for (int c : n.children) {
      wsum += tree.nodes[c].weight;
      for (int i = 0; i < n.belief.size(); ++i) {
        mart[i] += tree.nodes[c].weight * tree.nodes[c].belief[i];
      }
    }
    if (std::abs(wsum - 1.0) > kMartingaleTol) {
      add(n.id, "child weights do not sum to 1", {wsum - 1.0});
    }
    double worst = 0.0;
    for (int i = 0; i < n.belief.size(); ++i) {
      mart[i] -= n.belief[i];
      worst = std::max(worst, std::abs(mart[i]));
    }
    if (worst > kMartingaleTol) {
      add(n.id, "martingale constraint violated", mart);
    }
  }
  return rep;
}

std::vector<BeliefPath> EnumeratePaths(const RevelationTree& tree) {
  std::vector<BeliefPath> out;
  std::vector<int> stack_path;
  // Depth-first, children in stored order: deterministic enumeration.
  struct Frame {
    int node;
    std::size_t next_child;
  };
  std::vector<Frame> stack{{0, 0}};
  stack_path.push_back(0);
  while (!stack.empty()) {
    Frame& f = stack.back();
    const TreeNode& n = tree.nodes[f.node];
    if (n.children.empty()) {
      BeliefPath p;
      p.node_ids = stack_path;
      p.probability = tree.NodeProbability(f.node);
      out.push_back(std::move(p));
      stack.pop_back();
      stack_path.pop_back();
      continue;
    }
    if (f.next_child < n.children.size()) {
      int c = n.children[f.next_child++];
      stack.push_back({c, 0});
      stack_path.push_back(c);
    } else {
      stack.pop_back();
      stack_path.pop_back();
    }
  }
  return out;
}

std::vector<double> ConditionalExpectation(
    const std::vector<std::vector<double>>& child_fields,
    const std::vector<double>& weights) {
  if (child_fields.empty() || child_fields.size() != weights.size()) {
    throw std::invalid_argument("conditional_expectation: size mismatch");
  }
  const std::size_t n = child_fields[0].size();
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (std::abs(wsum - 1.0) > kMartingaleTol) {
    throw std::invalid_argument("conditional_expectation: weights sum to " +
                                std::to_string(wsum));
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t c = 0; c < child_fields.size(); ++c) {
    if (child_fields[c].size() != n) {
      throw std::invalid_argument("conditional_expectation: grid mismatch");
    }
    for (std::size_t j = 0; j < n; ++j) out[j] += weights[c] * child_fields[c][j];
  }
  return out;
}

nlohmann::json TreeToJson(const RevelationTree& tree) {
  nlohmann::json j;
  j["horizon"] = tree.horizon;
  j["revelation_times"] = tree.revelation_times;
  j["p0"] = tree.p0().weights();
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : tree.nodes) {
    nodes.push_back({{"id", n.id},
                     {"stage", n.stage},
                     {"parent", n.parent},
                     {"weight", n.weight},
                     {"belief", n.belief.weights()}});
  }
  j["nodes"] = std::move(nodes);
  return j;
}

RevelationTree TreeFromJson(const nlohmann::json& j) {
  RevelationTree tree;
  tree.horizon = j.at("horizon").get<double>();
  tree.revelation_times = j.at("revelation_times").get<std::vector<double>>();
  for (const auto& nj : j.at("nodes")) {
    TreeNode n;
    n.id = nj.at("id").get<int>();
    n.stage = nj.at("stage").get<int>();
    n.parent = nj.at("parent").get<int>();
    n.weight = nj.at("weight").get<double>();
    n.belief = Belief::Make(nj.at("belief").get<std::vector<double>>());
    if (n.id != static_cast<int>(tree.nodes.size())) {
      throw std::invalid_argument("tree json: node ids must be contiguous");
    }
    tree.nodes.push_back(std::move(n));
  }
  for (TreeNode& n : tree.nodes) {
    if (n.parent >= 0) tree.nodes[n.parent].children.push_back(n.id);
  }
  return tree;
}

}  // namespace mfg
