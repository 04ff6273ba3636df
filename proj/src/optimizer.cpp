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

#include "mfg/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <unordered_map>

#include "mfg/rng.hpp"

namespace mfg {

double EvaluateOnSolution(const ModelSpec& model, const MFGSolution& sol) {
  double total = 0.0;
  for (const TreeNode& node : sol.tree.nodes) {
    const NodeFields& f = sol.fields[node.id];
    if (f.NumSteps() < 2) continue;  // zero-length slab: no time mass
    double prob = sol.tree.NodeProbability(node.id);
    double acc = 0.0;
    for (int n = 0; n + 1 < f.NumSteps(); ++n) {
      double t = (f.step_begin + n) * sol.grid.dt;
      MeasureSummary ms{TrapzMean(sol.grid, f.m[n])};
      acc += model.BarMajorCost(t, ms, node.belief).first;
    }
    total += prob * acc * sol.grid.dt;
  }
  return total;
}

double EvaluateTree(const ModelSpec& model, const Grid1D& g,
                    const RevelationTree& tree, const SolverParams& prm) {
  MFGSolution sol = SolveMfg(model, g, tree, prm);
  if (!sol.converged) {
    throw SolverError(
        "fixed point not converged within " +
        std::to_string(sol.iterations) + " iterations, last residual " +
        std::to_string(sol.exploitability_history.back()));
  }
  return EvaluateOnSolution(model, sol);
}

// ---------------------------------------------------------------------------
// Parameterization

namespace {

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double Logit(double p) {
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

// Softmax with the last logit pinned at zero: bijection R^{I-1} -> int(Delta).
std::vector<double> SimplexFromLogits(const double* theta, int types,
                                      double clip) {
  std::vector<double> p(types);
  double zmax = 0.0;
  for (int i = 0; i + 1 < types; ++i) {
    zmax = std::max(zmax, std::clamp(theta[i], -clip, clip));
  }
  double denom = std::exp(-zmax);
  for (int i = 0; i + 1 < types; ++i) {
    p[i] = std::exp(std::clamp(theta[i], -clip, clip) - zmax);
    denom += p[i];
  }
  for (int i = 0; i + 1 < types; ++i) p[i] /= denom;
  p[types - 1] = std::exp(-zmax) / denom;
  return p;
}

std::vector<double> LogitsFromSimplex(const std::vector<double>& p) {
  std::vector<double> theta(p.size() - 1);
  double last = std::max(p.back(), 1e-12);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    theta[i] = std::log(std::max(p[i], 1e-12) / last);
  }
  return theta;
}

// Stick-breaking: eta in R^{B-1} -> weights w_1..w_B in (0,1), sum 1.
std::vector<double> WeightsFromSticks(const double* eta, int branches,
                                      double clip) {
  std::vector<double> w(branches);
  double rest = 1.0;
  for (int c = 0; c + 1 < branches; ++c) {
    double s = Sigmoid(std::clamp(eta[c], -clip, clip));
    w[c] = s * rest;
    rest -= w[c];
  }
  w[branches - 1] = rest;
  return w;
}

std::vector<double> SticksFromWeights(const std::vector<double>& w) {
  std::vector<double> eta(w.size() - 1);
  double rest = 1.0;
  for (std::size_t c = 0; c + 1 < w.size(); ++c) {
    eta[c] = Logit(w[c] / rest);
    rest -= w[c];
  }
  return eta;
}

}  // namespace

int TreeParameterization::NumInternalNodes() const {
  int count = 0, layer = 1;
  for (std::size_t k = 0; k < topology.times.size(); ++k) {
    count += layer;
    layer *= topology.branching;
  }
  return count;
}

int TreeParameterization::ParamsPerNode() const {
  int types = p0.size();
  return (topology.branching - 1) * (types - 1) + (topology.branching - 1);
}

int TreeParameterization::Dim() const {
  return NumInternalNodes() * ParamsPerNode();
}

RevelationTree TreeParameterization::Build(const std::vector<double>& params,
                                           double* slack) const {
  const int B = topology.branching;
  const int types = p0.size();
  if (static_cast<int>(params.size()) != Dim()) {
    throw std::invalid_argument("tree parameterization: wrong dimension");
  }
  *slack = 0.0;
  RevelationTree tree = RevelationTree::Root(p0, horizon, topology.times);
  // BFS over internal nodes; parameters are consumed in node-id order, which
  // coincides with construction order.
  std::size_t off = 0;
  for (int id = 0; id < static_cast<int>(tree.nodes.size()); ++id) {
    if (tree.nodes[id].stage >= num_stages_checked()) break;
    const Belief parent = tree.nodes[id].belief;
    std::vector<std::vector<double>> posts;
    for (int c = 0; c + 1 < B; ++c) {
      posts.push_back(SimplexFromLogits(&params[off], types, theta_clip));
      off += types - 1;
    }
    std::vector<double> w = WeightsFromSticks(&params[off], B, theta_clip);
    off += B - 1;
    // Recover the final posterior from the martingale constraint.
    std::vector<double> last(types);
    double worst_neg = 0.0;
    for (int i = 0; i < types; ++i) {
      double v = parent[i];
      for (int c = 0; c + 1 < B; ++c) v -= w[c] * posts[c][i];
      v /= w[B - 1];
      worst_neg = std::min(worst_neg, v);
      last[i] = v;
    }
    double w_low = *std::min_element(w.begin(), w.end());
    *slack += std::max(0.0, -worst_neg) + std::max(0.0, w_min - w_low);
    if (*slack > 0.0) return tree;  // caller must discard
    double sum = 0.0;
    for (double& v : last) {
      v = std::max(v, 0.0);
      sum += v;
    }
    for (double& v : last) v /= sum;
    posts.push_back(std::move(last));
    std::vector<Belief> beliefs;
    for (auto& pv : posts) beliefs.push_back(Belief::Make(std::move(pv)));
    tree = AddSplit(tree, id, beliefs, w);
  }
  return tree;
}

int TreeParameterization::num_stages_checked() const {
  return static_cast<int>(topology.times.size());
}

std::vector<double> TreeParameterization::MakeStart(StartKind kind) const {
  const int B = topology.branching;
  const int types = p0.size();
  std::vector<double> params;
  params.reserve(Dim());
  // Walk the tree as Build will, tracking realized parent beliefs.
  std::vector<std::vector<double>> beliefs{p0.weights()};
  std::vector<int> stages{0};
  for (std::size_t id = 0; id < beliefs.size(); ++id) {
    if (stages[id] >= static_cast<int>(topology.times.size())) continue;
    std::vector<std::vector<double>> posts;
    std::vector<double> w;
    bool reveal = kind == StartKind::kFullReveal && stages[id] == 0;
    if (reveal) {
      // First-stage split toward the simplex vertices, weights ~ prior.
      for (int c = 0; c + 1 < B; ++c) {
        std::vector<double> v(types, 1e-9);
        v[std::min(c, types - 1)] = 1.0;
        double s = 0.0;
        for (double x : v) s += x;
        for (double& x : v) x /= s;
        posts.push_back(std::move(v));
      }
      w.assign(B, 1.0 / B);
      for (int c = 0; c < B; ++c) {
        int i = std::min(c, types - 1);
        w[c] = std::max(beliefs[id][i], 1e-6);
      }
      double s = 0.0;
      for (double x : w) s += x;
      for (double& x : w) x /= s;
    } else {
      for (int c = 0; c + 1 < B; ++c) posts.push_back(beliefs[id]);
      w.assign(B, 1.0 / B);
    }
    for (int c = 0; c + 1 < B; ++c) {
      std::vector<double> theta = LogitsFromSimplex(posts[c]);
      params.insert(params.end(), theta.begin(), theta.end());
    }
    std::vector<double> eta = SticksFromWeights(w);
    params.insert(params.end(), eta.begin(), eta.end());
    // Children for the walk: reconstruct like Build does.
    std::vector<double> last(types);
    for (int i = 0; i < types; ++i) {
      double v = beliefs[id][i];
      for (int c = 0; c + 1 < B; ++c) v -= w[c] * posts[c][i];
      last[i] = std::max(v / w[B - 1], 0.0);
    }
    double s = 0.0;
    for (double x : last) s += x;
    for (double& x : last) x /= s;
    posts.push_back(std::move(last));
    for (int c = 0; c < B; ++c) {
      beliefs.push_back(posts[c]);
      stages.push_back(stages[id] + 1);
    }
  }
  return params;
}

// ---------------------------------------------------------------------------
// Baselines and Nelder-Mead search

BaselineCosts Baselines(const ModelSpec& model, const Grid1D& g,
                        const TreeTopology& topology,
                        const SolverParams& prm) {
  BaselineCosts b;
  double t0 = topology.times.empty() ? 0.0 : topology.times.front();
  b.no_reveal_tree = NoReveal(model.p0, model.horizon);
  b.full_reveal_tree = FullReveal(model.p0, model.horizon, t0);
  b.no_reveal_cost = EvaluateTree(model, g, b.no_reveal_tree, prm);
  b.full_reveal_cost = EvaluateTree(model, g, b.full_reveal_tree, prm);
  return b;
}

namespace {

std::uint64_t HashParams(const std::vector<double>& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : p) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

constexpr double kInfeasiblePenalty = 1e9;

struct Objective {
  const ModelSpec* model;
  const Grid1D* grid;
  const TreeParameterization* par;
  const OptimizerParams* prm;
  std::vector<TraceRow>* trace;
  std::unordered_map<std::uint64_t, double> cache;
  std::mutex mutex;
  int evals = 0;
  double best_cost = kInfeasiblePenalty * 2;
  RevelationTree best_tree;
  bool have_best = false;

  bool BudgetLeft() {
    std::lock_guard<std::mutex> lk(mutex);
    return evals < prm->max_evals;
  }

  double operator()(const std::vector<double>& params) {
    {
      std::lock_guard<std::mutex> lk(mutex);
      auto it = cache.find(HashParams(params));
      if (it != cache.end()) return it->second;
    }
    double slack = 0.0;
    RevelationTree tree = par->Build(params, &slack);
    double cost;
    if (slack > 0.0) {
      cost = kInfeasiblePenalty * (1.0 + slack);
    } else {
      cost = EvaluateTree(*model, *grid, tree, prm->solver);
    }
    std::lock_guard<std::mutex> lk(mutex);
    ++evals;
    cache[HashParams(params)] = cost;
    trace->push_back({evals, params, cost, slack});
    if (slack == 0.0 && cost < best_cost) {
      best_cost = cost;
      best_tree = tree;
      have_best = true;
    }
    return cost;
  }
};

// Standard Nelder-Mead on R^d with an evaluation budget.
void NelderMead(Objective& obj, std::vector<double> start, double step,
                int max_iters) {
  const int d = static_cast<int>(start.size());
  std::vector<std::vector<double>> simplex{start};
  for (int i = 0; i < d; ++i) {
    std::vector<double> v = start;
    v[i] += step;
    simplex.push_back(std::move(v));
  }
  std::vector<double> f(d + 1);
  for (int i = 0; i <= d; ++i) {
    if (!obj.BudgetLeft()) return;
    f[i] = obj(simplex[i]);
  }
  for (int iter = 0; iter < max_iters; ++iter) {
    if (!obj.BudgetLeft()) return;
    std::vector<int> order(d + 1);
    for (int i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return f[a] < f[b]; });
    int lo = order[0], hi = order[d], second_hi = order[d - 1];
    if (std::abs(f[hi] - f[lo]) <= 1e-10 * (1.0 + std::abs(f[lo]))) return;
    std::vector<double> centroid(d, 0.0);
    for (int i = 0; i <= d; ++i) {
      if (i == hi) continue;
      for (int j = 0; j < d; ++j) centroid[j] += simplex[i][j] / d;
    }
    auto blend = [&](double coef) {
      std::vector<double> v(d);
      for (int j = 0; j < d; ++j) {
        v[j] = centroid[j] + coef * (simplex[hi][j] - centroid[j]);
      }
      return v;
    };
    std::vector<double> refl = blend(-1.0);
    double f_refl = obj(refl);
    if (f_refl < f[lo]) {
      std::vector<double> expa = blend(-2.0);
      if (!obj.BudgetLeft()) return;
      double f_expa = obj(expa);
      if (f_expa < f_refl) {
        simplex[hi] = std::move(expa);
        f[hi] = f_expa;
      } else {
        simplex[hi] = std::move(refl);
        f[hi] = f_refl;
      }
    } else if (f_refl < f[second_hi]) {
      simplex[hi] = std::move(refl);
      f[hi] = f_refl;
    } else {
      std::vector<double> contr = blend(0.5);
      if (!obj.BudgetLeft()) return;
      double f_contr = obj(contr);
      if (f_contr < f[hi]) {
        simplex[hi] = std::move(contr);
        f[hi] = f_contr;
      } else {
        for (int i = 0; i <= d; ++i) {  // shrink toward the best vertex
          if (i == lo) continue;
          for (int j = 0; j < d; ++j) {
            simplex[i][j] = 0.5 * (simplex[i][j] + simplex[lo][j]);
          }
          if (!obj.BudgetLeft()) return;
          f[i] = obj(simplex[i]);
        }
      }
    }
  }
}

}  // namespace

OptResult Optimize(const ModelSpec& model, const Grid1D& g,
                   const TreeTopology& topology, const OptimizerParams& prm) {
  OptResult res;
  res.baselines = Baselines(model, g, topology, prm.solver);
  res.trace.push_back({0, {}, res.baselines.no_reveal_cost, 0.0});
  res.trace.push_back({0, {}, res.baselines.full_reveal_cost, 0.0});

  TreeParameterization par;
  par.topology = topology;
  par.p0 = model.p0;
  par.horizon = model.horizon;
  par.w_min = prm.w_min;
  par.theta_clip = prm.theta_clip;

  Objective obj{&model, &g, &par, &prm, &res.trace};
  std::vector<std::vector<double>> starts;
  starts.push_back(par.MakeStart(TreeParameterization::StartKind::kIdentity));
  if (prm.starts > 1) {
    starts.push_back(
        par.MakeStart(TreeParameterization::StartKind::kFullReveal));
  }
  RngStream rng = RngStream::Derive(prm.seed, {0x0b7});
  for (int s = 2; s < prm.starts; ++s) {
    std::vector<double> v = starts[0];
    for (double& x : v) x += 2.0 * rng.NextNormal();
    starts.push_back(std::move(v));
  }

  for (const auto& start : starts) {
    if (!obj.BudgetLeft()) {
      res.budget_exhausted = true;
      break;
    }
    NelderMead(obj, start, prm.nm_step, prm.max_evals);
  }
  res.evaluations = obj.evals;
  if (obj.evals >= prm.max_evals) res.budget_exhausted = true;

  // Baselines are candidate outputs: the reported optimum is never above
  // min(baselines).
  res.best_cost = res.baselines.no_reveal_cost;
  res.best_tree = res.baselines.no_reveal_tree;
  if (res.baselines.full_reveal_cost < res.best_cost) {
    res.best_cost = res.baselines.full_reveal_cost;
    res.best_tree = res.baselines.full_reveal_tree;
  }
  if (obj.have_best && obj.best_cost < res.best_cost) {
    res.best_cost = obj.best_cost;
    res.best_tree = obj.best_tree;
  }
  return res;
}

}  // namespace mfg
