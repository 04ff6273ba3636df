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

#include "mfg/solver.hpp"

#include <algorithm>
#include <cmath>

#include "mfg/rng.hpp"
#include "mfg/wasserstein.hpp"

namespace mfg {
namespace {

std::vector<int> BuildStageSteps(const Grid1D& g, const RevelationTree& tree) {
  std::vector<int> s;
  s.push_back(0);
  for (double t : tree.revelation_times) {
    s.push_back(g.SnapTimeIndex(t));
  }
  s.push_back(g.nt);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (s[k] > s[k + 1]) {
      throw SolverError("revelation times disordered after grid snapping");
    }
  }
  return s;
}

std::vector<NodeFields> AllocateFields(const RevelationTree& tree,
                                       const std::vector<int>& stage_step,
                                       int nx, bool with_phi, bool with_m) {
  std::vector<NodeFields> out(tree.nodes.size());
  for (const TreeNode& n : tree.nodes) {
    NodeFields& f = out[n.id];
    f.step_begin = stage_step[n.stage];
    f.step_end = stage_step[n.stage + 1];
    int len = f.NumSteps();
    if (with_phi) f.phi.assign(len, std::vector<double>(nx, 0.0));
    if (with_m) f.m.assign(len, std::vector<double>(nx, 0.0));
  }
  return out;
}

// Per-node effective Hamiltonian coefficients on the grid.
std::vector<std::vector<double>> NodeCoeffs(const ModelSpec& model,
                                            const Grid1D& g,
                                            const RevelationTree& tree) {
  std::vector<std::vector<double>> abar(tree.nodes.size());
  for (const TreeNode& n : tree.nodes) {
    abar[n.id].resize(g.nx);
    for (int j = 0; j < g.nx; ++j) {
      abar[n.id][j] = model.EffectiveCoeff(g.x[j], n.belief);
    }
  }
  return abar;
}

// Engquist-Osher numerical Hamiltonian for H(x, xi) = abar(x) xi^2 (convex,
// minimum at xi = 0): abar * (max(D^- phi, 0)^2 + min(D^+ phi, 0)^2), with
// one-sided differences dropped at the boundary (homogeneous Neumann).
void UpwindHamiltonian(const Grid1D& g, const std::vector<double>& abar,
                       const std::vector<double>& phi,
                       std::vector<double>& out) {
  const int nx = g.nx;
  out.resize(nx);
  for (int j = 0; j < nx; ++j) {
    double dm = (j > 0) ? (phi[j] - phi[j - 1]) / g.dx : 0.0;
    double dp = (j < nx - 1) ? (phi[j + 1] - phi[j]) / g.dx : 0.0;
    double up = std::max(dm, 0.0);
    double dn = std::min(dp, 0.0);
    out[j] = abar[j] * (up * up + dn * dn);
  }
}

void CheckFinite(const std::vector<double>& v, double ceiling,
                 const char* what) {
  for (double x : v) {
    if (!(std::abs(x) <= ceiling)) {
      throw SolverError(std::string(what) + " exceeded ceiling " +
                        std::to_string(ceiling) + " (divergence)");
    }
  }
}

}  // namespace

int MFGSolution::StageOfStep(int n) const {
  const int K = static_cast<int>(stage_step.size()) - 2;
  for (int k = K; k >= 0; --k) {
    if (stage_step[k] <= n) return k;
  }
  return 0;
}

int MFGSolution::NodeAtStep(const std::vector<int>& path_nodes, int n) const {
  return path_nodes[StageOfStep(n)];
}

void SolveHjbBackward(const ModelSpec& model, const Grid1D& g,
                      const MollifierStencil& kernel, const SolverParams& prm,
                      const RevelationTree& tree,
                      const std::vector<int>& stage_step,
                      const std::vector<NodeFields>& m_fields,
                      std::vector<NodeFields>& out) {
  out = AllocateFields(tree, stage_step, g.nx, /*with_phi=*/true,
                       /*with_m=*/false);
  auto abar = NodeCoeffs(model, g, tree);
  std::vector<double> ham;
  // Node ids are topologically ordered (parents before children), so a
  // descending sweep sees every child before its parent.
  for (int id = static_cast<int>(tree.nodes.size()) - 1; id >= 0; --id) {
    const TreeNode& node = tree.nodes[id];
    NodeFields& f = out[id];
    const int len = f.NumSteps();
    if (node.children.empty()) {
      f.phi[len - 1] = CouplingField(model, g, kernel,
                                     m_fields[id].m[len - 1], node.belief,
                                     /*terminal=*/true);
    } else {
      // Jump condition: the pre-revelation value is the weighted average of
      // the children's post-revelation values, enforced by construction.
      std::vector<std::vector<double>> child_fields;
      std::vector<double> weights;
      for (int c : node.children) {
        child_fields.push_back(out[c].phi.front());
        weights.push_back(tree.nodes[c].weight);
      }
      f.phi[len - 1] = ConditionalExpectation(child_fields, weights);
    }
    for (int n = len - 2; n >= 0; --n) {
      const std::vector<double>& phi_next = f.phi[n + 1];
      std::vector<double> coupling = CouplingField(
          model, g, kernel, m_fields[id].m[n + 1], node.belief,
          /*terminal=*/false, prm.tau_mass);
      UpwindHamiltonian(g, abar[id], phi_next, ham);
      std::vector<double> rhs(g.nx);
      for (int j = 0; j < g.nx; ++j) {
        rhs[j] = phi_next[j] + g.dt * (coupling[j] - ham[j]);
      }
      ImplicitDiffusionStep(g, g.dt, rhs);
      CheckFinite(rhs, prm.phi_ceiling, "||phi||");
      f.phi[n] = std::move(rhs);
    }
  }
}

void SolveFpForward(const ModelSpec& model, const Grid1D& g,
                    const SolverParams& prm, const RevelationTree& tree,
                    const std::vector<int>& stage_step,
                    const std::vector<NodeFields>& phi_fields,
                    std::vector<NodeFields>& out, double* max_mass_drift) {
  out = AllocateFields(tree, stage_step, g.nx, /*with_phi=*/false,
                       /*with_m=*/true);
  auto abar = NodeCoeffs(model, g, tree);
  GridDensity m0 = model.m0.Sample(g);
  double drift_track = 0.0;

  for (const TreeNode& node : tree.nodes) {
    NodeFields& f = out[node.id];
    const int len = f.NumSteps();
    if (node.parent < 0) {
      f.m[0] = m0.values;
    } else {
      f.m[0] = out[node.parent].m.back();  // densities have no jumps
    }
    for (int n = 0; n + 1 < len; ++n) {
      const std::vector<double>& phi = phi_fields[node.id].phi[n + 1];
      const std::vector<double>& m_cur = f.m[n];
      const std::vector<double>& ab = abar[node.id];
      const int nx = g.nx;
      // Upwind split of the drift H_xi = 2 abar D phi, transposed from the
      // Hamiltonian stencil: u = outgoing-right flux part, v = outgoing-left.
      std::vector<double> u(nx, 0.0), v(nx, 0.0);
      double cfl = 0.0;
      for (int j = 0; j < nx; ++j) {
        double dm = (j > 0) ? (phi[j] - phi[j - 1]) / g.dx : 0.0;
        double dp = (j < nx - 1) ? (phi[j + 1] - phi[j]) / g.dx : 0.0;
        double up = std::max(dm, 0.0);
        double dn = std::min(dp, 0.0);
        u[j] = 2.0 * ab[j] * up * m_cur[j];
        v[j] = 2.0 * ab[j] * dn * m_cur[j];
        cfl = std::max(cfl, 2.0 * ab[j] * (up - dn) * g.dt / g.dx);
      }
      if (cfl >= 1.0) {
        throw SolverError("FP advection CFL breach: |drift| dt/dx = " +
                          std::to_string(cfl));
      }
      double sum_before = 0.0;
      for (double mv : m_cur) sum_before += mv;
      std::vector<double> next(nx);
      for (int j = 0; j < nx; ++j) {
        double flux_right = (j + 1 < nx ? u[j + 1] : 0.0) - u[j];
        double flux_left = v[j] - (j > 0 ? v[j - 1] : 0.0);
        next[j] = m_cur[j] + g.dt * (flux_right + flux_left) / g.dx;
      }
      ImplicitDiffusionStep(g, g.dt, next);
      double min_m = 0.0;
      double sum_after = 0.0;
      for (double mv : next) {
        min_m = std::min(min_m, mv);
        sum_after += mv;
      }
      if (min_m < -1e-10) {
        throw SolverError("FP produced negative density " +
                          std::to_string(min_m) + " (dt too large)");
      }
      // The advection fluxes telescope and the Neumann Laplacian has zero
      // column sums, so the nodal sum is conserved up to roundoff; any
      // violation beyond tau_mass means the stencil leaked mass.
      double step_leak = std::abs(sum_after - sum_before) * g.dx;
      drift_track = std::max(drift_track, step_leak);
      if (step_leak > prm.tau_mass) {
        throw SolverError("FP mass leak " + std::to_string(step_leak) +
                          " in one step");
      }
      // Trapezoid mass differs from the nodal sum only through the boundary
      // half-cells; rescale so stored densities integrate to 1 exactly.
      double mass = Trapz(g, next);
      for (double& mv : next) mv /= mass;
      f.m[n + 1] = std::move(next);
    }
  }
  if (max_mass_drift != nullptr) {
    *max_mass_drift = std::max(*max_mass_drift, drift_track);
  }
}

namespace {

double SupW1(const Grid1D& g, const std::vector<NodeFields>& a,
             const std::vector<NodeFields>& b) {
  double worst = 0.0;
  for (std::size_t id = 0; id < a.size(); ++id) {
    for (int n = 0; n < a[id].NumSteps(); ++n) {
      worst = std::max(worst, Wasserstein1Grid(g, a[id].m[n], b[id].m[n]));
    }
  }
  return worst;
}

}  // namespace

MFGSolution SolveMfg(const ModelSpec& model, const Grid1D& g,
                     const RevelationTree& tree_in, const SolverParams& prm) {
  model.Validate();
  RevelationTree tree = PadPassThrough(tree_in);
  TreeValidation tv = Validate(tree);
  if (!tv.ok) {
    throw std::invalid_argument("solve_mfg: invalid tree: " + tv.Summary());
  }
  MollifierStencil kernel = MollifierStencil::Make(g, model.kernel_sigma);

  MFGSolution sol;
  sol.grid = g;
  sol.tree = tree;
  sol.stage_step = BuildStageSteps(g, tree);

  // Initial guess for the density flow.
  std::vector<NodeFields> m_fields;
  if (prm.init == SolverParams::Init::kHeatFlow) {
    std::vector<NodeFields> zero_phi = AllocateFields(
        tree, sol.stage_step, g.nx, /*with_phi=*/true, /*with_m=*/false);
    SolveFpForward(model, g, prm, tree, sol.stage_step, zero_phi, m_fields,
                   &sol.max_mass_drift);
  } else {
    m_fields = AllocateFields(tree, sol.stage_step, g.nx, false, true);
    GridDensity m0 = model.m0.Sample(g);
    for (NodeFields& f : m_fields) {
      for (auto& level : f.m) level = m0.values;
    }
  }

  std::vector<NodeFields> phi_fields;
  std::vector<NodeFields> m_br;
  for (int k = 0; k < prm.max_iters; ++k) {
    SolveHjbBackward(model, g, kernel, prm, tree, sol.stage_step, m_fields,
                     phi_fields);
    SolveFpForward(model, g, prm, tree, sol.stage_step, phi_fields, m_br,
                   &sol.max_mass_drift);
    double residual = SupW1(g, m_br, m_fields);
    double delta = 2.0 / (k + 2.0);
    sol.exploitability_history.push_back(residual);
    sol.update_history.push_back(delta * residual);
    sol.iterations = k + 1;
    if (residual < prm.tol_fp) {
      sol.converged = true;
      // Keep the best response: it is within tol of the averaged iterate and
      // exactly consistent with phi.
      m_fields = std::move(m_br);
      break;
    }
    for (std::size_t id = 0; id < m_fields.size(); ++id) {
      for (int n = 0; n < m_fields[id].NumSteps(); ++n) {
        std::vector<double>& cur = m_fields[id].m[n];
        const std::vector<double>& br = m_br[id].m[n];
        for (int j = 0; j < g.nx; ++j) {
          cur[j] = (1.0 - delta) * cur[j] + delta * br[j];
        }
      }
    }
  }

  // Final consistent backward sweep plus exported drift fields.
  SolveHjbBackward(model, g, kernel, prm, tree, sol.stage_step, m_fields,
                   phi_fields);
  auto abar = NodeCoeffs(model, g, tree);
  for (const TreeNode& node : tree.nodes) {
    NodeFields& f = phi_fields[node.id];
    f.m = std::move(m_fields[node.id].m);
    f.drift.assign(f.NumSteps(), std::vector<double>(g.nx, 0.0));
    for (int n = 0; n < f.NumSteps(); ++n) {
      const std::vector<double>& phi = f.phi[n];
      for (int j = 0; j < g.nx; ++j) {
        double d;
        if (j == 0) {
          d = (phi[1] - phi[0]) / g.dx;
        } else if (j == g.nx - 1) {
          d = (phi[j] - phi[j - 1]) / g.dx;
        } else {
          d = (phi[j + 1] - phi[j - 1]) / (2.0 * g.dx);
        }
        sol.dphi_max = std::max(sol.dphi_max, std::abs(d));
        f.drift[n][j] = -2.0 * abar[node.id][j] * d;
      }
    }
  }
  if (sol.dphi_max > prm.dphi_ceiling) {
    throw SolverError("||D phi|| = " + std::to_string(sol.dphi_max) +
                      " exceeds the configured bound " +
                      std::to_string(prm.dphi_ceiling));
  }
  sol.fields = std::move(phi_fields);

  // Discrete martingale increments at the revelation nodes.
  sol.jump_residual.resize(tree.nodes.size());
  for (const TreeNode& node : tree.nodes) {
    if (node.parent < 0) continue;
    const std::vector<double>& before = sol.fields[node.parent].phi.back();
    const std::vector<double>& after = sol.fields[node.id].phi.front();
    std::vector<double> jump(g.nx);
    for (int j = 0; j < g.nx; ++j) jump[j] = after[j] - before[j];
    sol.jump_residual[node.id] = std::move(jump);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Value verification (feedback-control Monte Carlo vs quadrature of phi_0).

namespace {

struct GridSampler {
  const Grid1D* g;
  std::vector<double> cdf;

  GridSampler(const Grid1D& grid, const std::vector<double>& density)
      : g(&grid) {
    cdf.resize(grid.nx, 0.0);
    for (int j = 1; j < grid.nx; ++j) {
      cdf[j] = cdf[j - 1] + 0.5 * (density[j - 1] + density[j]) * grid.dx;
    }
    for (double& c : cdf) c /= cdf.back();
  }

  double Sample(double u) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int j = static_cast<int>(it - cdf.begin());
    if (j <= 0) return g->x.front();
    if (j >= g->nx) return g->x.back();
    double seg = cdf[j] - cdf[j - 1];
    double frac = seg > 0.0 ? (u - cdf[j - 1]) / seg : 0.0;
    return g->x[j - 1] + frac * g->dx;
  }
};

double Reflect(double x, double lo, double hi) {
  while (x < lo || x > hi) {
    if (x < lo) x = 2.0 * lo - x;
    if (x > hi) x = 2.0 * hi - x;
  }
  return x;
}

}  // namespace

VerifyReport VerifyValue(const ModelSpec& model, const MFGSolution& sol,
                         int n_mc, std::uint64_t seed, double perturb_eps) {
  const Grid1D& g = sol.grid;
  MollifierStencil kernel = MollifierStencil::Make(g, model.kernel_sigma);
  GridDensity m0 = model.m0.Sample(g);

  VerifyReport rep;
  rep.perturb_eps = perturb_eps;
  {
    std::vector<double> prod(g.nx);
    const std::vector<double>& phi0 = sol.fields[0].phi.front();
    for (int j = 0; j < g.nx; ++j) prod[j] = phi0[j] * m0.values[j];
    rep.lhs = Trapz(g, prod);
  }

  // Precompute running/terminal coupling fields per node and step.
  std::vector<std::vector<std::vector<double>>> F(sol.tree.nodes.size());
  std::vector<std::vector<double>> G(sol.tree.nodes.size());
  for (const TreeNode& node : sol.tree.nodes) {
    const NodeFields& f = sol.fields[node.id];
    F[node.id].resize(f.NumSteps());
    for (int n = 0; n < f.NumSteps(); ++n) {
      F[node.id][n] = CouplingField(model, g, kernel, f.m[n], node.belief,
                                    /*terminal=*/false);
    }
    if (node.children.empty()) {
      G[node.id] = CouplingField(model, g, kernel, f.m.back(), node.belief,
                                 /*terminal=*/true);
    }
  }

  std::vector<BeliefPath> paths = EnumeratePaths(sol.tree);
  std::vector<double> cum;
  double acc = 0.0;
  for (const BeliefPath& p : paths) {
    acc += p.probability;
    cum.push_back(acc);
  }

  GridSampler sampler(g, m0.values);

  auto run_path = [&](int s, double shift, double* predicted) -> double {
    RngStream rng = RngStream::Derive(seed, {0x7e5, (std::uint64_t)s});
    double u_path = rng.NextUniform() * cum.back();
    int pi = static_cast<int>(
        std::lower_bound(cum.begin(), cum.end(), u_path) - cum.begin());
    if (pi >= static_cast<int>(paths.size()))
      pi = static_cast<int>(paths.size()) - 1;
    const BeliefPath& path = paths[pi];
    double x = sampler.Sample(rng.NextUniform());
    double cost = 0.0;
    const double root2dt = std::sqrt(2.0 * g.dt);
    for (int n = 0; n < g.nt; ++n) {
      int node = sol.NodeAtStep(path.node_ids, n);
      const TreeNode& tn = sol.tree.nodes[node];
      int local = n - sol.fields[node].step_begin;
      double alpha = g.Interpolate(sol.fields[node].drift[local], x) + shift;
      cost += g.dt * (model.Lagrangian(x, alpha, tn.belief) +
                      g.Interpolate(F[node][local], x));
      if (predicted != nullptr) {
        *predicted += g.dt * perturb_eps * perturb_eps /
                      (4.0 * model.EffectiveCoeff(x, tn.belief));
      }
      x += g.dt * alpha + root2dt * rng.NextNormal();
      x = Reflect(x, -g.x_max, g.x_max);
    }
    int leaf = path.node_ids.back();
    cost += g.Interpolate(G[leaf], x);
    return cost;
  };

  double sum = 0.0, sum2 = 0.0;
  double dsum = 0.0, dsum2 = 0.0;
  double predicted = 0.0;
  for (int s = 0; s < n_mc; ++s) {
    double base = run_path(s, 0.0, &predicted);
    double pert = run_path(s, perturb_eps, nullptr);
    sum += base;
    sum2 += base * base;
    double d = pert - base;
    dsum += d;
    dsum2 += d * d;
  }
  rep.rhs = sum / n_mc;
  double var = std::max(0.0, sum2 / n_mc - rep.rhs * rep.rhs);
  rep.mc_se = std::sqrt(var / n_mc);
  rep.gap = std::abs(rep.lhs - rep.rhs);
  rep.tolerance = 3.0 * (rep.mc_se + g.dx + g.dt);
  rep.pass = rep.gap <= rep.tolerance;

  rep.perturb_delta = dsum / n_mc;
  double dvar = std::max(0.0, dsum2 / n_mc - rep.perturb_delta * rep.perturb_delta);
  rep.perturb_delta_se = std::sqrt(dvar / n_mc);
  rep.perturb_predicted = predicted / n_mc;
  rep.perturb_pass = rep.perturb_delta > 3.0 * rep.perturb_delta_se;
  return rep;
}

}  // namespace mfg
