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

#include "mfg/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "mfg/optimizer.hpp"

namespace mfg {

std::vector<double> DesignatedActions(const ModelSpec& model) {
  std::vector<double> a(model.num_types);
  double step = (model.u0_max - model.u0_min) / model.num_types;
  for (int i = 0; i < model.num_types; ++i) {
    a[i] = model.u0_min + i * step;
  }
  return a;
}

Belief QuantizeBelief(const Belief& p, int window_steps) {
  std::vector<double> q(p.size());
  long long prev = 0;
  double cum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    cum += p[i];
    long long c = std::llround(cum * window_steps);
    q[i] = static_cast<double>(c - prev) / window_steps;
    prev = c;
  }
  return Belief::Make(std::move(q));
}

EncodedControl Encode(const ModelSpec& model, const MFGSolution& sol, int n,
                      int nt_snap) {
  const Grid1D& g = sol.grid;
  const RevelationTree& tree = sol.tree;
  if (n < 1) throw std::invalid_argument("encode: refinement n must be >= 1");

  EncodedControl enc;
  enc.n = n;
  enc.horizon = tree.horizon;
  enc.eps = tree.horizon / std::pow(2.0, n);
  enc.nt_snap = nt_snap;
  enc.dt_snap = tree.horizon / nt_snap;
  enc.window_steps = static_cast<int>(std::lround(enc.eps / enc.dt_snap));
  if (enc.window_steps < 4) {
    throw std::invalid_argument(
        "encode: refinement n=" + std::to_string(n) +
        " refused: eps_n = " + std::to_string(enc.eps) +
        " violates the rule eps_n >= 4*dt (dt = " +
        std::to_string(enc.dt_snap) + ")");
  }
  enc.belief_quantum = 1.0 / enc.window_steps;
  enc.actions = DesignatedActions(model);

  // Revelation times must sit on the subdivision {k T/n}.
  const double sub = tree.horizon / n;
  for (double t : tree.revelation_times) {
    double k = t / sub;
    if (std::abs(k - std::lround(k)) > 1e-9) {
      throw std::invalid_argument(
          "encode: revelation time " + std::to_string(t) +
          " not representable at refinement n=" + std::to_string(n));
    }
  }

  // Myopic actions per (node, subdivision index), shared across paths.
  std::map<std::pair<int, int>, double> myopic;
  auto myopic_action = [&](int node_id, int k) {
    auto key = std::make_pair(node_id, k);
    auto it = myopic.find(key);
    if (it != myopic.end()) return it->second;
    double t_k = k * sub;
    int pde_step = std::min(static_cast<int>(t_k / g.dt + 1e-9), g.nt);
    const NodeFields& f = sol.fields[node_id];
    int local = std::clamp(pde_step - f.step_begin, 0, f.NumSteps() - 1);
    MeasureSummary ms{TrapzMean(g, f.m[local])};
    double u =
        model.BarMajorCost(t_k, ms, tree.nodes[node_id].belief).second;
    myopic.emplace(key, u);
    return u;
  };

  std::vector<BeliefPath> paths = EnumeratePaths(tree);
  const int steps_per_sub = nt_snap / n;  // may be rounded below per k
  (void)steps_per_sub;
  for (const BeliefPath& path : paths) {
    EncodedPath ep;
    ep.leaf_id = path.node_ids.back();
    ep.prob = path.probability;
    ep.node_ids = path.node_ids;
    for (int k = 0; k < n; ++k) {
      double t_k = k * sub;
      double t_next = (k + 1) * sub;
      // Active node at t_k (cadlag: revelation at t_k already happened).
      int snap_begin = static_cast<int>(std::lround(t_k / enc.dt_snap));
      int snap_end = static_cast<int>(std::lround(t_next / enc.dt_snap));
      int pde_step = std::min(static_cast<int>(t_k / g.dt + 1e-9), g.nt);
      int node_id = sol.NodeAtStep(path.node_ids, pde_step);
      const Belief& p = tree.nodes[node_id].belief;
      Belief q = QuantizeBelief(p, enc.window_steps);
      // Signaling runs: action i over a stretch proportional to q_i.
      int pos = snap_begin;
      for (int i = 0; i < q.size(); ++i) {
        int len = static_cast<int>(std::lround(q[i] * enc.window_steps));
        if (len == 0) continue;
        ep.segments.push_back({pos * enc.dt_snap, (pos + len) * enc.dt_snap,
                               enc.actions[i], true});
        pos += len;
      }
      // Myopic stretch to the end of the subdivision interval.
      if (pos < snap_end) {
        ep.segments.push_back({pos * enc.dt_snap, snap_end * enc.dt_snap,
                               myopic_action(node_id, k), false});
      }
    }
    enc.paths.push_back(std::move(ep));
  }
  return enc;
}

namespace {

double SegmentValueAt(const std::vector<ControlSegment>& segs, double t,
                      bool* found) {
  for (const ControlSegment& s : segs) {
    if (t >= s.t_begin && t < s.t_end) {
      *found = true;
      return s.u;
    }
  }
  *found = false;
  return 0.0;
}

}  // namespace

BeliefFilter Decode(const std::vector<ControlSegment>& path, int n,
                    int nt_snap, double horizon,
                    const std::vector<double>& actions) {
  BeliefFilter out;
  const double dt = horizon / nt_snap;
  const double eps = horizon / std::pow(2.0, n);
  const int window_steps = static_cast<int>(std::lround(eps / dt));
  const int num_actions = static_cast<int>(actions.size());
  std::vector<double> prev(num_actions, 1.0 / num_actions);

  for (int k = 0; k < n; ++k) {
    double t_k = k * horizon / n;
    int snap_begin = static_cast<int>(std::lround(t_k / dt));
    std::vector<long long> counts(num_actions, 0);
    int cursor = 0;
    bool ok = true;
    for (int s = 0; s < window_steps && ok; ++s) {
      double t = (snap_begin + s + 0.5) * dt;
      bool found = false;
      double u = SegmentValueAt(path, t, &found);
      if (!found) {
        ok = false;
        break;
      }
      // Accept the current action or any later one (runs are ordered).
      int match = -1;
      for (int i = cursor; i < num_actions; ++i) {
        if (std::abs(u - actions[i]) <= 1e-12) {
          match = i;
          break;
        }
      }
      if (match < 0) {
        ok = false;
        break;
      }
      cursor = match;
      ++counts[match];
    }
    out.times.push_back(t_k);
    out.valid.push_back(ok);
    if (ok) {
      std::vector<double> b(num_actions);
      for (int i = 0; i < num_actions; ++i) {
        b[i] = static_cast<double>(counts[i]) / window_steps;
      }
      prev = b;
      out.beliefs.push_back(std::move(b));
    } else {
      out.beliefs.push_back(prev);  // hold the previous belief
    }
  }
  return out;
}

RevelationTree DecodedTree(const RevelationTree& source, int window_steps,
                           double* max_adjustment) {
  RevelationTree out = source;
  double adj = 0.0;
  // Quantize the leaves, then restore the martingale constraint upward.
  for (int id = static_cast<int>(out.nodes.size()) - 1; id >= 0; --id) {
    TreeNode& node = out.nodes[id];
    Belief fresh;
    if (node.children.empty()) {
      fresh = QuantizeBelief(node.belief, window_steps);
    } else {
      std::vector<Belief> kids;
      std::vector<double> w;
      for (int c : node.children) {
        kids.push_back(out.nodes[c].belief);
        w.push_back(out.nodes[c].weight);
      }
      fresh = MixBeliefs(kids, w);
    }
    for (int i = 0; i < fresh.size(); ++i) {
      adj = std::max(adj, std::abs(fresh[i] - node.belief[i]));
    }
    node.belief = std::move(fresh);
  }
  if (max_adjustment != nullptr) *max_adjustment = adj;
  return out;
}

J0Result EvaluateJ0(const ModelSpec& model, const EncodedControl& enc,
                    const MFGSolution& sol) {
  const Grid1D& g = sol.grid;
  J0Result res;
  res.signaling_time = enc.n * enc.eps;
  res.signaling_bound = model.L0Bound(g.x_max) * res.signaling_time;

  for (const EncodedPath& ep : enc.paths) {
    double path_j0 = 0.0, path_jbar = 0.0;
    double win_ex = 0.0, off_ex = 0.0;
    for (int n = 0; n < g.nt; ++n) {
      double t_a = n * g.dt;
      double t_b = t_a + g.dt;
      int node_id = sol.NodeAtStep(ep.node_ids, n);
      const TreeNode& node = sol.tree.nodes[node_id];
      const NodeFields& f = sol.fields[node_id];
      MeasureSummary ms{TrapzMean(g, f.m[n - f.step_begin])};
      double bar = model.BarMajorCost(t_a, ms, node.belief).first;
      path_jbar += g.dt * bar;
      for (const ControlSegment& s : ep.segments) {
        double lo = std::max(t_a, s.t_begin);
        double hi = std::min(t_b, s.t_end);
        if (hi <= lo) continue;
        double len = hi - lo;
        double cost = model.MajorCostValue(t_a, s.u, ms, node.belief);
        path_j0 += len * cost;
        double excess = len * (cost - bar);
        if (s.is_window) {
          win_ex += excess;
        } else {
          off_ex += excess;
        }
      }
    }
    res.j0 += ep.prob * path_j0;
    res.jbar += ep.prob * path_jbar;
    res.window_excess += ep.prob * win_ex;
    res.offwindow_excess += ep.prob * off_ex;
  }
  res.gap = res.j0 - res.jbar;
  return res;
}

}  // namespace mfg
