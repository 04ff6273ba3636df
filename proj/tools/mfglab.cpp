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

// Command-line front end: solves the conditional MFG system on a revelation
// tree, optimizes the disclosure policy, encodes it into signaling controls,
// and validates the mean-field limit against N-player simulations.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfg/config.hpp"
#include "mfg/encoder.hpp"
#include "mfg/manifest.hpp"
#include "mfg/optimizer.hpp"
#include "mfg/sim.hpp"
#include "mfg/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitCheckFailed = 4;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double Ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  int workers = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool dump_trajectories = false;
};

mfg::RunConfig Load(const CommonArgs& args) {
  mfg::ConfigFile cfg = mfg::ConfigFile::ParseFile(args.config_path);
  mfg::RunConfig rc = mfg::LoadRunConfig(cfg);
  if (args.seed_set) {
    rc.seed = args.seed;
    rc.sim.seed = args.seed;
    rc.optimizer.seed = args.seed + 1;
  }
  rc.sim.workers = args.workers;
  rc.sim.dump_positions = args.dump_trajectories;
  return rc;
}

mfg::MFGSolution SolveConfigured(const mfg::RunConfig& rc) {
  mfg::MFGSolution sol =
      mfg::SolveMfg(rc.model, rc.grid, rc.MakeTree(), rc.solver);
  if (!sol.converged) {
    throw mfg::SolverError("fixed point not converged: residual " +
                           std::to_string(sol.exploitability_history.back()) +
                           " after " + std::to_string(sol.iterations) +
                           " iterations");
  }
  return sol;
}

void WriteSolution(mfg::RunManifest& man, const mfg::MFGSolution& sol) {
  const mfg::Grid1D& g = sol.grid;
  for (const mfg::TreeNode& node : sol.tree.nodes) {
    const mfg::NodeFields& f = sol.fields[node.id];
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(f.NumSteps()) * g.nx);
    for (int n = 0; n < f.NumSteps(); ++n) {
      double t = (f.step_begin + n) * g.dt;
      for (int j = 0; j < g.nx; ++j) {
        rows.push_back({t, g.x[j], f.phi[n][j], f.m[n][j], f.drift[n][j]});
      }
    }
    man.WriteCsv("solution_node" + std::to_string(node.id) + ".csv",
                 {"t", "x", "phi", "m", "drift"}, rows);
  }
  nlohmann::json meta;
  meta["tree"] = mfg::TreeToJson(sol.tree);
  meta["grid"] = {{"x_max", g.x_max}, {"nx", g.nx}, {"nt", g.nt},
                  {"dx", g.dx},       {"dt", g.dt}};
  meta["iterations"] = sol.iterations;
  meta["converged"] = sol.converged;
  meta["update_history"] = sol.update_history;
  meta["exploitability_history"] = sol.exploitability_history;
  meta["max_mass_drift"] = sol.max_mass_drift;
  meta["dphi_max"] = sol.dphi_max;
  man.WriteJson("solution.json", meta);
}

int CmdSolve(const CommonArgs& args) {
  mfg::RunConfig rc = Load(args);
  mfg::RunManifest man(args.out_dir, rc.config_hash, rc.seed);
  Timer timer;
  mfg::MFGSolution sol = SolveConfigured(rc);
  man.RecordTiming("solve", timer.Ms());
  man.RecordTolerance("tol_fp", rc.solver.tol_fp);
  man.RecordTolerance("tau_mass", rc.solver.tau_mass);
  WriteSolution(man, sol);
  man.Finish("solve");
  std::printf("solve: converged in %d iterations, residual %.3g\n",
              sol.iterations, sol.exploitability_history.back());
  return kExitOk;
}

int CmdOptimize(const CommonArgs& args) {
  mfg::RunConfig rc = Load(args);
  mfg::RunManifest man(args.out_dir, rc.config_hash, rc.seed);
  Timer timer;
  mfg::OptResult res =
      mfg::Optimize(rc.model, rc.grid, rc.topology, rc.optimizer);
  man.RecordTiming("optimize", timer.Ms());
  man.RecordTolerance("tol_opt", rc.optimizer.tol_opt);

  std::vector<std::string> tags;
  std::vector<std::vector<double>> rows;
  for (const mfg::TraceRow& r : res.trace) {
    std::string params;
    for (std::size_t i = 0; i < r.params.size(); ++i) {
      params += (i ? ";" : "") + mfg::FormatDouble(r.params[i]);
    }
    tags.push_back(params.empty() ? "baseline" : params);
    rows.push_back({static_cast<double>(r.eval), r.cost, r.slack});
  }
  man.WriteCsvTagged("optimize_trace.csv",
                     {"parameters", "eval", "cost", "feasibility_slack"},
                     tags, rows);
  man.WriteJson("best_tree.json", mfg::TreeToJson(res.best_tree));
  nlohmann::json j;
  j["best_cost"] = res.best_cost;
  j["no_reveal_cost"] = res.baselines.no_reveal_cost;
  j["full_reveal_cost"] = res.baselines.full_reveal_cost;
  j["evaluations"] = res.evaluations;
  j["budget_exhausted"] = res.budget_exhausted;
  j["value_semantics"] =
      "upper bound for the relaxed problem (finite-tree search space)";
  man.WriteJson("optimize_result.json", j);
  man.Finish("optimize");
  std::printf(
      "optimize: best %.6g (no_reveal %.6g, full_reveal %.6g) in %d evals\n",
      res.best_cost, res.baselines.no_reveal_cost,
      res.baselines.full_reveal_cost, res.evaluations);
  return kExitOk;
}

int CmdEncode(const CommonArgs& args) {
  mfg::RunConfig rc = Load(args);
  mfg::RunManifest man(args.out_dir, rc.config_hash, rc.seed);
  Timer timer;
  mfg::MFGSolution sol = SolveConfigured(rc);
  int nt_snap = rc.encoder_nt_snap > 0
                    ? rc.encoder_nt_snap
                    : (rc.sim.nt_sim > 0 ? rc.sim.nt_sim : rc.grid.nt);
  mfg::EncodedControl enc = mfg::Encode(rc.model, sol, rc.encoder_n, nt_snap);

  for (std::size_t k = 0; k < enc.paths.size(); ++k) {
    const mfg::EncodedPath& ep = enc.paths[k];
    std::vector<std::vector<double>> rows;
    for (const mfg::ControlSegment& s : ep.segments) {
      rows.push_back({s.t_begin, s.u});
    }
    rows.push_back({enc.horizon, ep.segments.back().u});
    man.WriteCsv("control_path" + std::to_string(k) + ".csv", {"t", "u0"},
                 rows);
    mfg::BeliefFilter filter =
        mfg::Decode(ep.segments, enc.n, enc.nt_snap, enc.horizon, enc.actions);
    std::vector<std::string> header{"t"};
    for (int i = 1; i <= rc.model.num_types; ++i) {
      header.push_back("p" + std::to_string(i));
    }
    std::vector<std::vector<double>> frows;
    for (std::size_t q = 0; q < filter.times.size(); ++q) {
      std::vector<double> row{filter.times[q]};
      row.insert(row.end(), filter.beliefs[q].begin(),
                 filter.beliefs[q].end());
      frows.push_back(std::move(row));
    }
    man.WriteCsv("filter_path" + std::to_string(k) + ".csv", header, frows);
  }

  double max_adjust = 0.0;
  mfg::RevelationTree decoded =
      mfg::DecodedTree(sol.tree, enc.window_steps, &max_adjust);
  mfg::MFGSolution dsol = (max_adjust <= 1e-14)
                              ? std::move(sol)
                              : mfg::SolveMfg(rc.model, rc.grid, decoded,
                                              rc.solver);
  mfg::J0Result j0 = mfg::EvaluateJ0(rc.model, enc, dsol);
  man.RecordTiming("encode", timer.Ms());

  nlohmann::json j;
  j["n"] = enc.n;
  j["eps"] = enc.eps;
  j["window_steps"] = enc.window_steps;
  j["belief_quantum"] = enc.belief_quantum;
  j["decode_max_adjustment"] = max_adjust;
  j["actions"] = enc.actions;
  j["j0"] = j0.j0;
  j["jbar"] = j0.jbar;
  j["gap"] = j0.gap;
  j["window_excess"] = j0.window_excess;
  j["offwindow_excess"] = j0.offwindow_excess;
  j["signaling_time"] = j0.signaling_time;
  j["signaling_bound"] = j0.signaling_bound;
  man.WriteJson("encode_result.json", j);
  man.Finish("encode");
  std::printf("encode: n=%d eps=%.6g J0=%.6g Jbar=%.6g gap=%.3g\n", enc.n,
              enc.eps, j0.j0, j0.jbar, j0.gap);
  return kExitOk;
}

int CmdSimulate(const CommonArgs& args) {
  mfg::RunConfig rc = Load(args);
  mfg::RunManifest man(args.out_dir, rc.config_hash, rc.seed);
  Timer timer;
  mfg::MFGSolution sol = SolveConfigured(rc);

  mfg::EncodedControl enc;
  bool use_control = rc.encoder_nt_snap > 0 || rc.sim.nt_sim > 0;
  mfg::SimOptions opt = rc.sim;
  if (use_control) {
    int nt_snap =
        rc.encoder_nt_snap > 0
            ? rc.encoder_nt_snap
            : (rc.sim.nt_sim > 0 ? rc.sim.nt_sim : rc.grid.nt);
    enc = mfg::Encode(rc.model, sol, rc.encoder_n, nt_snap);
    opt.control = &enc;
  }
  opt.minor_costs = true;
  opt.deviations = !opt.test_players.empty();
  opt.major_cost = true;
  mfg::SimReport rep = mfg::Simulate(rc.model, sol, opt);

  mfg::SimOptions chaos_opt = rc.sim;
  mfg::ChaosTable chaos = mfg::ChaosDistance(rc.model, sol, chaos_opt,
                                             rc.sim_n_list);
  man.RecordTiming("simulate", timer.Ms());

  std::vector<std::vector<double>> crows;
  for (const mfg::ChaosRow& r : chaos.rows) {
    crows.push_back({static_cast<double>(r.num_players), r.sup_w1, r.se});
  }
  man.WriteCsv("chaos.csv", {"N", "sup_w1", "se"}, crows);

  nlohmann::json j;
  j["N"] = rep.num_players;
  j["n_mc"] = rep.n_mc;
  j["sup_w1"] = rep.sup_w1;
  j["sup_w1_se"] = rep.sup_w1_se;
  j["terminal_mean_emp"] = rep.terminal_mean_emp;
  j["terminal_mean_mf"] = rep.terminal_mean_mf;
  j["terminal_var_emp"] = rep.terminal_var_emp;
  j["terminal_var_mf"] = rep.terminal_var_mf;
  j["minor_cost_mean"] = rep.minor_cost_mean;
  j["minor_cost_se"] = rep.minor_cost_se;
  j["major_cost"] = rep.major_cost;
  j["major_cost_se"] = rep.major_cost_se;
  j["gap"] = rep.gap;
  j["gap_se"] = rep.gap_se;
  j["negative_part"] = rep.negative_part;
  j["max_excl_incl_d1"] = rep.max_excl_incl_d1;
  j["excl_incl_bound"] = rep.excl_incl_bound;
  j["reflect_fraction"] = rep.reflect_fraction;
  j["chaos_slope"] = chaos.loglog_slope;
  nlohmann::json devs = nlohmann::json::array();
  for (const mfg::DeviationRow& d : rep.deviations) {
    devs.push_back({{"shift", d.shift}, {"delta", d.delta}, {"se", d.se}});
  }
  j["deviations"] = devs;
  man.WriteJson("sim_report.json", j);

  if (args.dump_trajectories && !rep.scenario0_positions.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < rep.scenario0_positions.size(); ++n) {
      double t = static_cast<double>(n) * sol.grid.dt;
      for (std::size_t p = 0; p < rep.scenario0_positions[n].size(); ++p) {
        rows.push_back({t, static_cast<double>(p),
                        rep.scenario0_positions[n][p]});
      }
    }
    man.WriteCsv("trajectories.csv", {"t", "player", "x"}, rows);
  }
  man.Finish("simulate");
  std::printf("simulate: N=%d sup_w1=%.4g gap=%.4g major=%.6g slope=%.3f\n",
              rep.num_players, rep.sup_w1, rep.gap, rep.major_cost,
              chaos.loglog_slope);
  return kExitOk;
}

int CmdVerify(const CommonArgs& args) {
  mfg::ConfigFile cfg = mfg::ConfigFile::ParseFile(args.config_path);
  mfg::RunConfig rc = Load(args);
  int n_mc = cfg.GetInt("verify", "n_mc", 20000);
  double eps = cfg.GetDouble("verify", "eps", 0.2);
  mfg::RunManifest man(args.out_dir, rc.config_hash, rc.seed);
  Timer timer;
  mfg::MFGSolution sol = SolveConfigured(rc);
  mfg::VerifyReport rep = mfg::VerifyValue(rc.model, sol, n_mc, rc.seed, eps);
  man.RecordTiming("verify", timer.Ms());
  man.RecordTolerance("value_gap_tolerance", rep.tolerance);

  nlohmann::json j;
  j["lhs_phi0_quadrature"] = rep.lhs;
  j["rhs_mc_cost"] = rep.rhs;
  j["gap"] = rep.gap;
  j["mc_se"] = rep.mc_se;
  j["tolerance"] = rep.tolerance;
  j["pass"] = rep.pass;
  j["perturb_eps"] = rep.perturb_eps;
  j["perturb_delta"] = rep.perturb_delta;
  j["perturb_delta_se"] = rep.perturb_delta_se;
  j["perturb_predicted"] = rep.perturb_predicted;
  j["perturb_pass"] = rep.perturb_pass;
  man.WriteJson("verify.json", j);
  man.Finish("verify");
  std::printf("verify: lhs=%.6g rhs=%.6g gap=%.3g tol=%.3g %s\n", rep.lhs,
              rep.rhs, rep.gap, rep.tolerance,
              rep.pass && rep.perturb_pass ? "PASS" : "FAIL");
  return rep.pass && rep.perturb_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfglab: optimal information disclosure in mean field games"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonArgs args;
  app.add_option("--config", args.config_path, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", args.out_dir, "output directory");
  app.add_option("--workers", args.workers, "worker pool size");
  auto* seed_opt = app.add_option("--seed", args.seed, "root seed override");
  app.add_flag("--dump-trajectories", args.dump_trajectories,
               "dump scenario-0 particle trajectories (large)");

  auto* solve = app.add_subcommand("solve", "solve the MFG system on a tree");
  auto* optimize =
      app.add_subcommand("optimize", "search disclosure trees for minimal cost");
  auto* encode =
      app.add_subcommand("encode", "encode the tree into signaling controls");
  auto* simulate =
      app.add_subcommand("simulate", "run the N-player validation suite");
  auto* verify =
      app.add_subcommand("verify", "check the value-function identity");

  CLI11_PARSE(app, argc, argv);
  args.seed_set = seed_opt->count() > 0;

  try {
    if (solve->parsed()) return CmdSolve(args);
    if (optimize->parsed()) return CmdOptimize(args);
    if (encode->parsed()) return CmdEncode(args);
    if (simulate->parsed()) return CmdSimulate(args);
    if (verify->parsed()) return CmdVerify(args);
  } catch (const mfg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const mfg::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
