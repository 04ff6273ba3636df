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

#ifndef MFG_SOLVER_HPP_
#define MFG_SOLVER_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/coupling.hpp"
#include "mfg/grid.hpp"
#include "mfg/model.hpp"
#include "mfg/tree.hpp"

namespace mfg {

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverParams {
  double tol_fp = 1e-5;     // fixed-point stop: best-response W1 residual
  int max_iters = 600;
  double tau_mass = 1e-6;   // allowed deviation of each density's mass from 1
  double dphi_ceiling = 100.0;  // configured bound on ||D phi||_inf
  double phi_ceiling = 1e8;     // divergence detector for the nonlinear step
  enum class Init { kHeatFlow, kFrozenInitial };
  Init init = Init::kHeatFlow;
};

// Value/density/drift fields of one tree node on its time slab.  Arrays are
// indexed locally: global time step n corresponds to n - step_begin, and both
// slab endpoints are stored.
struct NodeFields {
  int step_begin = 0;
  int step_end = 0;
  std::vector<std::vector<double>> phi;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> drift;  // -H_xi(x, D phi, p)

  int NumSteps() const { return step_end - step_begin + 1; }
};

struct MFGSolution {
  Grid1D grid;
  RevelationTree tree;
  std::vector<int> stage_step;  // stage boundaries as time indices, size K+2
  std::vector<NodeFields> fields;  // parallel to tree.nodes
  // Discrete martingale increments at revelation nodes: for each non-root
  // node, the field phi_child(t_rev) - phi_parent(t_rev^-).
  std::vector<std::vector<double>> jump_residual;
  std::vector<double> update_history;          // W1 update distance per iter
  std::vector<double> exploitability_history;  // best-response W1 residual
  bool converged = false;
  int iterations = 0;
  double max_mass_drift = 0.0;  // worst per-step mass change before renorm
  double dphi_max = 0.0;

  int StageOfStep(int n) const;
  // Node id active at global step n along a root-to-leaf node path.
  int NodeAtStep(const std::vector<int>& path_nodes, int n) const;
};

// Backward HJB sweep along the tree for frozen density fields: within each
// constant-belief slab an implicit-diffusion / explicit-upwind-Hamiltonian
// step, with the conditional-expectation jump at every revelation node.
// `m_fields` must carry per-node density flows on the solution layout.
void SolveHjbBackward(const ModelSpec& model, const Grid1D& g,
                      const MollifierStencil& kernel, const SolverParams& prm,
                      const RevelationTree& tree,
                      const std::vector<int>& stage_step,
                      const std::vector<NodeFields>& m_fields,
                      std::vector<NodeFields>& out);

// Forward Fokker-Planck sweep using the exact discrete adjoint of the HJB
// upwind Hamiltonian stencil; densities are continuous across revelations.
void SolveFpForward(const ModelSpec& model, const Grid1D& g,
                    const SolverParams& prm, const RevelationTree& tree,
                    const std::vector<int>& stage_step,
                    const std::vector<NodeFields>& phi_fields,
                    std::vector<NodeFields>& out, double* max_mass_drift);

// Damped fixed-point (fictitious play, delta_k = 2/(k+2)) of
// m -> FP(HJB(m)).  Returns the full residual history; `converged` is false
// if the tolerance was not reached within max_iters (never silently
// accepted by downstream consumers).
MFGSolution SolveMfg(const ModelSpec& model, const Grid1D& g,
                     const RevelationTree& tree, const SolverParams& prm);

struct VerifyReport {
  double lhs = 0.0;       // integral of phi_0 against the initial density
  double rhs = 0.0;       // Monte Carlo cost of the feedback control
  double gap = 0.0;
  double mc_se = 0.0;
  double tolerance = 0.0;  // 3 * (mc_se + dx + dt)
  bool pass = false;
  double perturb_eps = 0.0;
  double perturb_delta = 0.0;     // cost(feedback+eps) - cost(feedback)
  double perturb_delta_se = 0.0;  // paired (common-noise) standard error
  double perturb_predicted = 0.0; // quadratic penalty estimate
  bool perturb_pass = false;      // delta positive at 3 sigma
};

// Checks the value-function identity: quadrature of phi_0 against m0 vs the
// simulated cost of the feedback control, plus the suboptimality of a
// constant control perturbation.
VerifyReport VerifyValue(const ModelSpec& model, const MFGSolution& sol,
                         int n_mc, std::uint64_t seed, double perturb_eps);

}  // namespace mfg

#endif  // MFG_SOLVER_HPP_
