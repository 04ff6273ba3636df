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

#ifndef MFG_SIM_HPP_
#define MFG_SIM_HPP_

#include <cstdint>
#include <vector>

#include "mfg/encoder.hpp"
#include "mfg/solver.hpp"

namespace mfg {

// Open-loop N-player simulation under the mean-field feedback policy.
// Scenarios are independent (type, belief path, initial draws, Brownian
// noise); all randomness is derived from (seed, scenario, player) so runs
// are reproducible and players are exchangeable by construction.
struct SimOptions {
  int num_players = 64;
  int n_mc = 100;
  std::uint64_t seed = 0;
  int nt_sim = 0;  // Euler steps; 0 = solver grid; must be a multiple of nt
  int batches = 10;
  std::vector<int> test_players;       // deviation test set
  std::vector<double> shifts;          // constant-shift deviations
  const EncodedControl* control = nullptr;  // major control (else myopic)
  bool minor_costs = false;   // per-player running costs J^{N,j}
  bool deviations = false;    // Nash-gap estimates (implies minor_costs)
  bool major_cost = false;    // major player's empirical cost
  bool dump_positions = false;  // keep scenario-0 particle positions
  int workers = 1;  // scenario-level worker pool (results are reduced in
                    // scenario order, so the output is worker-independent)
};

struct DeviationRow {
  double shift = 0.0;
  double delta = 0.0;  // mean of J_dev - J_base (common random numbers)
  double se = 0.0;
};

struct SimReport {
  int num_players = 0;
  int n_mc = 0;
  // Propagation-of-chaos diagnostics.
  double sup_w1 = 0.0;     // sup over grid times of scenario-mean d1
  double sup_w1_se = 0.0;  // batch standard error at the argmax time
  int argmax_step = 0;
  std::vector<double> w1_by_step;
  // Moment comparison at T.
  double terminal_mean_emp = 0.0, terminal_mean_mf = 0.0;
  double terminal_var_emp = 0.0, terminal_var_mf = 0.0;
  double terminal_mean_se = 0.0;
  // Costs.
  double minor_cost_mean = 0.0, minor_cost_se = 0.0;
  double major_cost = 0.0, major_cost_se = 0.0;
  // Nash-gap estimate: min over deviations (zero shift included) of the mean
  // cost change; gap >= 0 means no profitable deviation was found.
  std::vector<DeviationRow> deviations;
  double gap = 0.0, gap_se = 0.0;
  double negative_part = 0.0;
  // Exclusive-vs-inclusive empirical measure check (test players).
  double max_excl_incl_d1 = 0.0;
  double excl_incl_bound = 0.0;  // 2 x_max / N
  // Boundary reflections per particle-step (abort above 0.1%).
  double reflect_fraction = 0.0;
  // Scenario-0 particle positions on the PDE grid (dump_positions only).
  std::vector<std::vector<double>> scenario0_positions;
};

SimReport Simulate(const ModelSpec& model, const MFGSolution& sol,
                   const SimOptions& opt);

struct ChaosRow {
  int num_players = 0;
  double sup_w1 = 0.0;
  double se = 0.0;
};

struct ChaosTable {
  std::vector<ChaosRow> rows;
  double loglog_slope = 0.0;
};

// sup-over-time chaos distance for an increasing player-count ladder, with
// batched confidence intervals and the fitted log-log slope.
ChaosTable ChaosDistance(const ModelSpec& model, const MFGSolution& sol,
                         const SimOptions& opt,
                         const std::vector<int>& n_list);

}  // namespace mfg

#endif  // MFG_SIM_HPP_
