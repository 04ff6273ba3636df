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

#ifndef MFG_OPTIMIZER_HPP_
#define MFG_OPTIMIZER_HPP_

#include <cstdint>
#include <vector>

#include "mfg/solver.hpp"
#include "mfg/tree.hpp"

namespace mfg {

// The major player's relaxed objective on a solved tree:
//   sum over nodes of P(node) * sum over the node's steps of
//   dt * min_{u0} L0(t, u0, m_t, p_node).
double EvaluateOnSolution(const ModelSpec& model, const MFGSolution& sol);

// Solves the MFG system on the tree and evaluates the relaxed objective.
// Solver non-convergence is propagated as SolverError.
double EvaluateTree(const ModelSpec& model, const Grid1D& g,
                    const RevelationTree& tree, const SolverParams& prm);

// Fixed revelation times and branching factor of the search space; every
// internal node of the full B-ary tree is parameterized by (B-1) free
// posteriors and (B-1) free weights, the final weight and posterior being
// recovered from the martingale constraint.
struct TreeTopology {
  std::vector<double> times;
  int branching = 2;
};

struct TreeParameterization {
  TreeTopology topology;
  Belief p0;
  double horizon = 0.0;
  double w_min = 1e-3;      // recovered weights below this are infeasible
  double theta_clip = 30.0; // simplex-logit clip

  int NumInternalNodes() const;
  int ParamsPerNode() const;
  int Dim() const;

  // Builds the tree for a parameter vector.  On return *slack is 0 when all
  // recovered weights/posteriors are feasible; otherwise it measures the
  // violation and the returned tree must not be used.
  RevelationTree Build(const std::vector<double>& params, double* slack) const;

  enum class StartKind { kIdentity, kFullReveal };
  std::vector<double> MakeStart(StartKind kind) const;

  int num_stages_checked() const;
};

struct OptimizerParams {
  int starts = 4;
  int max_evals = 120;      // solver evaluations across all starts
  double tol_opt = 1e-4;
  double w_min = 1e-3;
  double theta_clip = 30.0;
  double nm_step = 0.8;     // initial Nelder-Mead simplex edge
  std::uint64_t seed = 1;
  SolverParams solver;
};

struct TraceRow {
  int eval = 0;
  std::vector<double> params;  // empty for baseline evaluations
  double cost = 0.0;
  double slack = 0.0;          // feasibility slack (0 = feasible)
};

struct BaselineCosts {
  double no_reveal_cost = 0.0;
  double full_reveal_cost = 0.0;
  RevelationTree no_reveal_tree;
  RevelationTree full_reveal_tree;
};

// Costs of the two canonical disclosure policies; full revelation happens at
// the first topology time (or t = 0 when the topology has none).
BaselineCosts Baselines(const ModelSpec& model, const Grid1D& g,
                        const TreeTopology& topology, const SolverParams& prm);

struct OptResult {
  RevelationTree best_tree;
  double best_cost = 0.0;
  BaselineCosts baselines;
  std::vector<TraceRow> trace;
  bool budget_exhausted = false;
  int evaluations = 0;
};

// Multi-start Nelder-Mead over the unconstrained tree parameterization.
// Baseline trees are seeded as candidates, so the result never exceeds
// min(baselines).  The reported value is an upper bound for the relaxed
// problem (the search space is the finite-tree slice).
OptResult Optimize(const ModelSpec& model, const Grid1D& g,
                   const TreeTopology& topology, const OptimizerParams& prm);

}  // namespace mfg

#endif  // MFG_OPTIMIZER_HPP_
