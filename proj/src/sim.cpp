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

#include "mfg/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mfg/rng.hpp"
#include "mfg/wasserstein.hpp"

namespace mfg {
namespace {

constexpr std::uint64_t kTagScenario = 11;
constexpr std::uint64_t kTagInit = 13;
constexpr std::uint64_t kTagNoise = 17;

double Reflect(double x, double lo, double hi, long long* count) {
  while (x < lo || x > hi) {
    if (x < lo) x = 2.0 * lo - x;
    if (x > hi) x = 2.0 * hi - x;
    ++(*count);
  }
  return x;
}

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

struct Scenario {
  int index = 0;
  int type = 0;
  int path_index = 0;
  const BeliefPath* path = nullptr;
};

struct ScenarioStats {
  std::vector<double> w1_by_step;
  double minor_cost_sum = 0.0;
  double major_cost = 0.0;
  double terminal_mean = 0.0, terminal_var = 0.0;
  double terminal_mean_mf = 0.0, terminal_var_mf = 0.0;
  double max_excl_incl_d1 = 0.0;
  long long reflections = 0;
  long long particle_steps = 0;
  std::vector<double> base_costs;              // per test player
  std::vector<std::vector<double>> dev_costs;  // [shift][test player]
  std::vector<std::vector<double>> dump;       // positions (scenario 0 only)
};

struct SimContext {
  const ModelSpec* model;
  const MFGSolution* sol;
  const SimOptions* opt;
  MollifierStencil kernel;
  GridSampler sampler;
  std::vector<BeliefPath> paths;
  std::vector<std::vector<double>> path_cum_by_type;
  int nt_sim;
  int sim_per_pde;
  double dt_sim;

  SimContext(const ModelSpec& m, const MFGSolution& s, const SimOptions& o,
             const GridDensity& m0)
      : model(&m),
        sol(&s),
        opt(&o),
        kernel(MollifierStencil::Make(s.grid, m.kernel_sigma)),
        sampler(s.grid, m0.values),
        paths(EnumeratePaths(s.tree)) {
    nt_sim = o.nt_sim > 0 ? o.nt_sim : s.grid.nt;
    if (nt_sim % s.grid.nt != 0) {
      throw std::invalid_argument(
          "sim: nt_sim must be a multiple of the solver nt");
    }
    sim_per_pde = nt_sim / s.grid.nt;
    dt_sim = s.grid.horizon / nt_sim;
    // Belief-path law conditioned on the realized type (Bayes): the path
    // weight is prob * leaf_belief[type] / p0[type].
    path_cum_by_type.resize(m.num_types);
    for (int i = 0; i < m.num_types; ++i) {
      double acc = 0.0;
      for (const BeliefPath& p : paths) {
        const Belief& leaf = s.tree.nodes[p.node_ids.back()].belief;
        if (m.p0[i] > 0.0) acc += p.probability * leaf[i] / m.p0[i];
        path_cum_by_type[i].push_back(acc);
      }
    }
  }

  double Drift(const std::vector<int>& node_path, int pde_step,
               double x) const {
    int node = sol->NodeAtStep(node_path, pde_step);
    const NodeFields& f = sol->fields[node];
    int local = std::clamp(pde_step - f.step_begin, 0, f.NumSteps() - 1);
    return sol->grid.Interpolate(f.drift[local], x);
  }

  RngStream InitStream(int scenario, int player) const {
    return RngStream::Derive(opt->seed, {kTagInit, (std::uint64_t)scenario,
                                         (std::uint64_t)player});
  }
  RngStream NoiseStream(int scenario, int player) const {
    return RngStream::Derive(opt->seed, {kTagNoise, (std::uint64_t)scenario,
                                         (std::uint64_t)player});
  }
};

// Smoothed exclusive coupling at the point x: the other players' kernel
// deposit is the inclusive one minus this player's BASE-trajectory mass.
double ExclusiveCoupling(const SimContext& ctx, const CouplingProfile& prof,
                         const std::vector<double>& S_level, double base_pos,
                         double x) {
  const Grid1D& g = ctx.sol->grid;
  const int N = ctx.opt->num_players;
  int center = static_cast<int>(std::lround((x - g.x.front()) / g.dx));
  int lo = std::max(0, center - ctx.kernel.half_width);
  int hi = std::min(g.nx - 1, center + ctx.kernel.half_width);
  double acc = 0.0;
  for (int j = lo; j <= hi; ++j) {
    double sj = (N * S_level[j] - ctx.kernel.At(g.x[j] - base_pos)) / (N - 1);
    double w = (j == 0 || j == g.nx - 1) ? 0.5 * g.dx : g.dx;
    acc += ctx.kernel.At(x - g.x[j]) * w * prof.Value(g.x[j], std::max(sj, 0.0));
  }
  return acc;
}

// Running + terminal cost of one player against the frozen rest of the
// population.  With use_stored the base trajectory is read back instead of
// re-evolved; a replay with shift = 0 reproduces the stored trajectory (and
// so the cost) bit-for-bit, since it consumes the same noise stream.
double PlayerCost(const SimContext& ctx, const Scenario& sc, int player,
                  double shift, const std::vector<std::vector<double>>& S,
                  const std::vector<std::vector<double>>& base_positions,
                  bool use_stored, long long* reflections) {
  const ModelSpec& model = *ctx.model;
  const Grid1D& g = ctx.sol->grid;
  const Belief type_belief = Belief::Vertex(sc.type, model.num_types);
  const CouplingProfile& fprof = model.f[sc.type];
  const CouplingProfile& gprof = model.g[sc.type];

  double x = 0.0;
  RngStream noise(0);
  if (use_stored) {
    x = base_positions[0][player];
  } else {
    RngStream init = ctx.InitStream(sc.index, player);
    x = ctx.sampler.Sample(init.NextUniform());
    noise = ctx.NoiseStream(sc.index, player);
  }
  const double root2dt = std::sqrt(2.0 * ctx.dt_sim);
  double cost = 0.0;
  for (int s = 0; s < ctx.nt_sim; ++s) {
    int pde_step = s / ctx.sim_per_pde;
    if (s % ctx.sim_per_pde == 0) {
      if (use_stored) x = base_positions[pde_step][player];
      double alpha = ctx.Drift(sc.path->node_ids, pde_step, x) + shift;
      double run = model.Lagrangian(x, alpha, type_belief);
      if (!fprof.IsNone()) {
        run += ExclusiveCoupling(ctx, fprof, S[pde_step],
                                 base_positions[pde_step][player], x);
      }
      cost += g.dt * run;
    }
    if (!use_stored) {
      double alpha = ctx.Drift(sc.path->node_ids, pde_step, x) + shift;
      x += ctx.dt_sim * alpha + root2dt * noise.NextNormal();
      x = Reflect(x, -g.x_max, g.x_max, reflections);
    }
  }
  if (use_stored) x = base_positions[g.nt][player];
  if (!gprof.IsNone()) {
    cost += ExclusiveCoupling(ctx, gprof, S[g.nt],
                              base_positions[g.nt][player], x);
  }
  return cost;
}

ScenarioStats RunScenario(const SimContext& ctx, int scenario) {
  const ModelSpec& model = *ctx.model;
  const Grid1D& g = ctx.sol->grid;
  const SimOptions& opt = *ctx.opt;
  const int N = opt.num_players;
  ScenarioStats st;

  RngStream draw =
      RngStream::Derive(opt.seed, {kTagScenario, (std::uint64_t)scenario});
  double u = draw.NextUniform();
  int type = 0;
  double acc = 0.0;
  for (int i = 0; i < model.num_types; ++i) {
    acc += model.p0[i];
    if (u <= acc || i == model.num_types - 1) {
      type = i;
      break;
    }
  }
  const std::vector<double>& cum = ctx.path_cum_by_type[type];
  double up = draw.NextUniform() * cum.back();
  int path_index = static_cast<int>(
      std::lower_bound(cum.begin(), cum.end(), up) - cum.begin());
  path_index = std::min(path_index, static_cast<int>(ctx.paths.size()) - 1);

  Scenario sc{scenario, type, path_index, &ctx.paths[path_index]};
  const std::vector<int>& node_path = sc.path->node_ids;

  // Joint evolution; positions (and kernel deposits when costs are needed)
  // recorded on the PDE time grid.
  std::vector<double> x(N);
  std::vector<RngStream> noise;
  noise.reserve(N);
  for (int j = 0; j < N; ++j) {
    RngStream init = ctx.InitStream(scenario, j);
    x[j] = ctx.sampler.Sample(init.NextUniform());
    noise.push_back(ctx.NoiseStream(scenario, j));
  }

  const bool need_costs = opt.minor_costs || opt.deviations;
  std::vector<std::vector<double>> positions(g.nt + 1);
  std::vector<std::vector<double>> S;
  if (need_costs) S.resize(g.nt + 1);

  const double root2dt = std::sqrt(2.0 * ctx.dt_sim);
  for (int s = 0; s <= ctx.nt_sim; ++s) {
    if (s % ctx.sim_per_pde == 0) {
      int pde_step = s / ctx.sim_per_pde;
      positions[pde_step] = x;
      if (need_costs) S[pde_step] = DepositParticles(g, ctx.kernel, x);
    }
    if (s == ctx.nt_sim) break;
    int pde_step = s / ctx.sim_per_pde;
    for (int j = 0; j < N; ++j) {
      double alpha = ctx.Drift(node_path, pde_step, x[j]);
      x[j] += ctx.dt_sim * alpha + root2dt * noise[j].NextNormal();
      x[j] = Reflect(x[j], -g.x_max, g.x_max, &st.reflections);
    }
    st.particle_steps += N;
  }

  if (opt.dump_positions && scenario == 0) st.dump = positions;

  st.w1_by_step.resize(g.nt + 1);
  for (int n = 0; n <= g.nt; ++n) {
    int node = ctx.sol->NodeAtStep(node_path, n);
    const NodeFields& f = ctx.sol->fields[node];
    st.w1_by_step[n] =
        Wasserstein1SamplesGrid(positions[n], g, f.m[n - f.step_begin]);
  }

  {
    const std::vector<double>& xt = positions[g.nt];
    double m1 = 0.0, m2 = 0.0;
    for (double v : xt) {
      m1 += v;
      m2 += v * v;
    }
    m1 /= N;
    m2 /= N;
    st.terminal_mean = m1;
    st.terminal_var = m2 - m1 * m1;
    int leaf = node_path.back();
    const std::vector<double>& mT = ctx.sol->fields[leaf].m.back();
    double mf1 = TrapzMean(g, mT);
    std::vector<double> xx(g.nx);
    for (int j = 0; j < g.nx; ++j) xx[j] = g.x[j] * g.x[j] * mT[j];
    double mf2 = Trapz(g, xx);
    st.terminal_mean_mf = mf1;
    st.terminal_var_mf = mf2 - mf1 * mf1;
  }

  if (opt.major_cost) {
    const MajorCost& l0 = model.l0[type];
    for (int n = 0; n < g.nt; ++n) {
      double t_a = n * g.dt, t_b = t_a + g.dt;
      double mean = 0.0;
      for (double v : positions[n]) mean += v;
      MeasureSummary ms{mean / N};
      if (opt.control != nullptr) {
        const EncodedPath& ep = opt.control->paths[path_index];
        for (const ControlSegment& seg : ep.segments) {
          double lo = std::max(t_a, seg.t_begin);
          double hi = std::min(t_b, seg.t_end);
          if (hi <= lo) continue;
          st.major_cost += (hi - lo) * l0.Value(t_a, seg.u, ms);
        }
      } else {
        int node = ctx.sol->NodeAtStep(node_path, n);
        const TreeNode& tn = ctx.sol->tree.nodes[node];
        const NodeFields& f = ctx.sol->fields[node];
        MeasureSummary mf{TrapzMean(g, f.m[n - f.step_begin])};
        double u0 = model.BarMajorCost(t_a, mf, tn.belief).second;
        st.major_cost += g.dt * l0.Value(t_a, u0, ms);
      }
    }
  }

  if (need_costs) {
    if (opt.minor_costs) {
      long long dummy = 0;
      for (int j = 0; j < N; ++j) {
        st.minor_cost_sum += PlayerCost(ctx, sc, j, 0.0, S, positions,
                                        /*use_stored=*/true, &dummy);
      }
    }
    if (opt.deviations) {
      st.base_costs.resize(opt.test_players.size());
      st.dev_costs.assign(opt.shifts.size(),
                          std::vector<double>(opt.test_players.size()));
      long long dummy = 0;
      for (std::size_t tj = 0; tj < opt.test_players.size(); ++tj) {
        int j = opt.test_players[tj] % N;
        st.base_costs[tj] = PlayerCost(ctx, sc, j, 0.0, S, positions,
                                       /*use_stored=*/true, &dummy);
        for (std::size_t si = 0; si < opt.shifts.size(); ++si) {
          st.dev_costs[si][tj] =
              PlayerCost(ctx, sc, j, opt.shifts[si], S, positions,
                         /*use_stored=*/false, &dummy);
        }
      }
      for (std::size_t tj = 0; tj < opt.test_players.size(); ++tj) {
        int j = opt.test_players[tj] % N;
        for (int n = 0; n <= g.nt; n += 8) {
          std::vector<double> excl;
          excl.reserve(N - 1);
          for (int k = 0; k < N; ++k) {
            if (k != j) excl.push_back(positions[n][k]);
          }
          st.max_excl_incl_d1 =
              std::max(st.max_excl_incl_d1,
                       Wasserstein1Samples(excl, positions[n]));
        }
      }
    }
  }
  return st;
}

double BatchSe(const std::vector<double>& values, int batches) {
  int n = static_cast<int>(values.size());
  int B = std::max(2, std::min(batches, n));
  std::vector<double> means(B, 0.0);
  std::vector<int> counts(B, 0);
  for (int i = 0; i < n; ++i) {
    means[i % B] += values[i];
    counts[i % B] += 1;
  }
  double grand = 0.0;
  for (int b = 0; b < B; ++b) {
    means[b] /= std::max(counts[b], 1);
    grand += means[b] / B;
  }
  double var = 0.0;
  for (int b = 0; b < B; ++b) var += (means[b] - grand) * (means[b] - grand);
  var /= (B - 1);
  return std::sqrt(var / B);
}

}  // namespace

SimReport Simulate(const ModelSpec& model, const MFGSolution& sol,
                   const SimOptions& opt_in) {
  SimOptions opt = opt_in;
  if (opt.deviations) opt.minor_costs = true;
  if (opt.num_players < 2) throw std::invalid_argument("sim: N >= 2 required");
  GridDensity m0 = model.m0.Sample(sol.grid);
  SimContext ctx(model, sol, opt, m0);

  SimReport rep;
  rep.num_players = opt.num_players;
  rep.n_mc = opt.n_mc;
  rep.excl_incl_bound = 2.0 * sol.grid.x_max / opt.num_players;

  std::vector<ScenarioStats> stats(opt.n_mc);
  int workers = std::max(1, opt.workers);
  if (workers == 1) {
    for (int s = 0; s < opt.n_mc; ++s) stats[s] = RunScenario(ctx, s);
  } else {
    std::atomic<int> next{0};
    auto work = [&] {
      for (int s = next.fetch_add(1); s < opt.n_mc; s = next.fetch_add(1)) {
        stats[s] = RunScenario(ctx, s);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  long long reflections = 0, particle_steps = 0;
  for (const ScenarioStats& st : stats) {
    reflections += st.reflections;
    particle_steps += st.particle_steps;
  }
  rep.reflect_fraction =
      particle_steps > 0 ? static_cast<double>(reflections) / particle_steps
                         : 0.0;
  if (opt.dump_positions && !stats.empty()) {
    rep.scenario0_positions = stats[0].dump;
  }
  if (rep.reflect_fraction > 1e-3) {
    throw std::runtime_error(
        "sim: " + std::to_string(100.0 * rep.reflect_fraction) +
        "% of particle-steps hit the domain boundary");
  }

  const int nt = sol.grid.nt;
  rep.w1_by_step.assign(nt + 1, 0.0);
  for (const ScenarioStats& st : stats) {
    for (int n = 0; n <= nt; ++n) {
      rep.w1_by_step[n] += st.w1_by_step[n] / opt.n_mc;
    }
  }
  rep.argmax_step = static_cast<int>(
      std::max_element(rep.w1_by_step.begin(), rep.w1_by_step.end()) -
      rep.w1_by_step.begin());
  rep.sup_w1 = rep.w1_by_step[rep.argmax_step];
  {
    std::vector<double> at_argmax;
    for (const ScenarioStats& st : stats) {
      at_argmax.push_back(st.w1_by_step[rep.argmax_step]);
    }
    rep.sup_w1_se = BatchSe(at_argmax, opt.batches);
  }

  {
    std::vector<double> means;
    for (const ScenarioStats& st : stats) {
      rep.terminal_mean_emp += st.terminal_mean / opt.n_mc;
      rep.terminal_var_emp += st.terminal_var / opt.n_mc;
      rep.terminal_mean_mf += st.terminal_mean_mf / opt.n_mc;
      rep.terminal_var_mf += st.terminal_var_mf / opt.n_mc;
      means.push_back(st.terminal_mean);
    }
    rep.terminal_mean_se = BatchSe(means, opt.batches);
  }

  if (opt.minor_costs) {
    std::vector<double> vals;
    for (const ScenarioStats& st : stats) {
      vals.push_back(st.minor_cost_sum / opt.num_players);
    }
    for (double v : vals) rep.minor_cost_mean += v / opt.n_mc;
    rep.minor_cost_se = BatchSe(vals, opt.batches);
  }
  if (opt.major_cost) {
    std::vector<double> vals;
    for (const ScenarioStats& st : stats) vals.push_back(st.major_cost);
    for (double v : vals) rep.major_cost += v / opt.n_mc;
    rep.major_cost_se = BatchSe(vals, opt.batches);
  }
  if (opt.deviations && !opt.test_players.empty()) {
    std::vector<double> all_shifts{0.0};
    all_shifts.insert(all_shifts.end(), opt.shifts.begin(), opt.shifts.end());
    rep.gap = 0.0;
    double gap_se = 0.0;
    for (std::size_t si = 0; si < all_shifts.size(); ++si) {
      std::vector<double> deltas;
      for (const ScenarioStats& st : stats) {
        double d = 0.0;
        for (std::size_t tj = 0; tj < opt.test_players.size(); ++tj) {
          double dev =
              (si == 0) ? st.base_costs[tj] : st.dev_costs[si - 1][tj];
          d += (dev - st.base_costs[tj]) / opt.test_players.size();
        }
        deltas.push_back(d);
      }
      DeviationRow row;
      row.shift = all_shifts[si];
      for (double d : deltas) row.delta += d / opt.n_mc;
      row.se = BatchSe(deltas, opt.batches);
      if (row.delta < rep.gap) {
        rep.gap = row.delta;
        gap_se = row.se;
      }
      rep.deviations.push_back(row);
    }
    rep.gap_se = gap_se;
    rep.negative_part = std::max(0.0, -rep.gap);
    for (const ScenarioStats& st : stats) {
      rep.max_excl_incl_d1 =
          std::max(rep.max_excl_incl_d1, st.max_excl_incl_d1);
    }
  }
  return rep;
}

ChaosTable ChaosDistance(const ModelSpec& model, const MFGSolution& sol,
                         const SimOptions& opt_in,
                         const std::vector<int>& n_list) {
  ChaosTable table;
  for (int N : n_list) {
    SimOptions opt = opt_in;
    opt.num_players = N;
    opt.minor_costs = false;
    opt.deviations = false;
    opt.major_cost = false;
    SimReport rep = Simulate(model, sol, opt);
    table.rows.push_back({N, rep.sup_w1, rep.sup_w1_se});
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = static_cast<int>(table.rows.size());
  for (const ChaosRow& r : table.rows) {
    double lx = std::log(static_cast<double>(r.num_players));
    double ly = std::log(std::max(r.sup_w1, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  if (n >= 2) {
    table.loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return table;
}

}  // namespace mfg
