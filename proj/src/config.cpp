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

#include "mfg/config.hpp"

#include <fstream>
#include <sstream>

#include "mfg/tree.hpp"

namespace mfg {
namespace {

std::string Trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> Split(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

ConfigFile ConfigFile::ParseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseString(ss.str(), path);
}

ConfigFile ConfigFile::ParseString(const std::string& text,
                                   const std::string& origin) {
  ConfigFile cfg;
  cfg.raw_ = text;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": malformed section header '" + line + "'");
      }
      section = Trim(line.substr(1, line.size() - 2));
      cfg.sections_[section];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    }
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.sections_[section][key] = Entry{Split(value), lineno};
  }
  return cfg;
}

bool ConfigFile::Has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

void ConfigFile::Missing(const std::string& section,
                         const std::string& key) const {
  throw ConfigError(origin_ + ": missing required field '" + section + "." +
                    key + "'");
}

const std::vector<std::string>& ConfigFile::Tokens(
    const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) Missing(section, key);
  auto k = s->second.find(key);
  if (k == s->second.end()) Missing(section, key);
  return k->second.tokens;
}

std::string ConfigFile::GetString(const std::string& section,
                                  const std::string& key,
                                  const std::string& fallback) const {
  if (!Has(section, key)) return fallback;
  const auto& t = Tokens(section, key);
  return t.empty() ? "" : t[0];
}

std::string ConfigFile::RequireString(const std::string& section,
                                      const std::string& key) const {
  const auto& t = Tokens(section, key);
  if (t.empty()) Missing(section, key);
  return t[0];
}

double ConfigFile::RequireDouble(const std::string& section,
                                 const std::string& key) const {
  const auto& t = Tokens(section, key);
  if (t.empty()) Missing(section, key);
  try {
    return std::stod(t[0]);
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": field '" + section + "." + key +
                      "' is not a number: '" + t[0] + "'");
  }
}

double ConfigFile::GetDouble(const std::string& section,
                             const std::string& key, double fallback) const {
  if (!Has(section, key)) return fallback;
  return RequireDouble(section, key);
}

int ConfigFile::GetInt(const std::string& section, const std::string& key,
                       int fallback) const {
  if (!Has(section, key)) return fallback;
  double v = RequireDouble(section, key);
  return static_cast<int>(v);
}

std::uint64_t ConfigFile::GetU64(const std::string& section,
                                 const std::string& key,
                                 std::uint64_t fallback) const {
  if (!Has(section, key)) return fallback;
  const auto& t = Tokens(section, key);
  try {
    return std::stoull(t.at(0));
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": field '" + section + "." + key +
                      "' is not an unsigned integer");
  }
}

std::vector<double> ConfigFile::GetDoubles(const std::string& section,
                                           const std::string& key,
                                           std::vector<double> fallback) const {
  if (!Has(section, key)) return fallback;
  std::vector<double> out;
  for (const std::string& t : Tokens(section, key)) {
    try {
      out.push_back(std::stod(t));
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": field '" + section + "." + key +
                        "' has a non-numeric token '" + t + "'");
    }
  }
  return out;
}

std::vector<int> ConfigFile::GetInts(const std::string& section,
                                     const std::string& key,
                                     std::vector<int> fallback) const {
  if (!Has(section, key)) return fallback;
  std::vector<int> out;
  for (double v : GetDoubles(section, key, {})) {
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string ConfigFile::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : raw_) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return std::string(buf);
}

// ---------------------------------------------------------------------------

RevelationTree RunConfig::MakeTree() const {
  if (tree_kind == "no_reveal") {
    return NoReveal(model.p0, model.horizon);
  }
  if (tree_kind == "full_reveal") {
    return FullReveal(model.p0, model.horizon, tree_reveal_time);
  }
  if (tree_kind == "file") {
    std::ifstream in(tree_file);
    if (!in) throw ConfigError("cannot open tree file '" + tree_file + "'");
    nlohmann::json j;
    in >> j;
    RevelationTree t = TreeFromJson(j);
    TreeValidation v = Validate(t);
    if (!v.ok) throw ConfigError("tree file invalid: " + v.Summary());
    return t;
  }
  throw ConfigError("tree.kind must be no_reveal, full_reveal or file, got '" +
                    tree_kind + "'");
}

RunConfig LoadRunConfig(const ConfigFile& cfg) {
  RunConfig rc;
  rc.config_hash = cfg.Hash();

  int types = cfg.GetInt("model", "types", 0);
  if (types < 2) throw ConfigError("model.types must be >= 2");
  rc.model.num_types = types;
  if (!cfg.Has("model", "horizon")) {
    throw ConfigError("missing required field 'model.horizon'");
  }
  rc.model.horizon = cfg.RequireDouble("model", "horizon");
  std::vector<double> p0 = cfg.GetDoubles("model", "p0", {});
  if (static_cast<int>(p0.size()) != types) {
    throw ConfigError("model.p0 needs one weight per type");
  }
  try {
    rc.model.p0 = Belief::Make(p0);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model.p0: ") + e.what());
  }
  rc.model.u0_min = cfg.RequireDouble("model", "u0_min");
  rc.model.u0_max = cfg.RequireDouble("model", "u0_max");
  rc.model.kernel_sigma = cfg.GetDouble("model", "kernel_sigma", 0.3);
  auto parse_family = [&](const std::string& key, auto parser) {
    try {
      return parser(cfg.Tokens("model", key));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("model." + key + ": " + e.what());
    }
  };
  for (int i = 1; i <= types; ++i) {
    std::string suffix = "_" + std::to_string(i);
    rc.model.a.push_back(parse_family("a" + suffix, ScalarField::Parse));
    rc.model.f.push_back(parse_family("f" + suffix, CouplingProfile::Parse));
    rc.model.g.push_back(parse_family("g" + suffix, CouplingProfile::Parse));
    rc.model.l0.push_back(parse_family("l0" + suffix, MajorCost::Parse));
  }
  rc.model.m0 = parse_family("m0", InitialDensity::Parse);
  try {
    rc.model.Validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  double x_max = cfg.GetDouble("grid", "x_max", 6.0);
  int nx = cfg.GetInt("grid", "nx", 201);
  int nt = cfg.GetInt("grid", "nt", 400);
  double cfl = cfg.GetDouble("grid", "cfl", 1.0);
  try {
    rc.grid = Grid1D::Make(x_max, nx, rc.model.horizon, nt, cfl);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  rc.tree_kind = cfg.GetString("tree", "kind", "no_reveal");
  rc.tree_reveal_time = cfg.GetDouble("tree", "reveal_time", 0.0);
  rc.tree_file = cfg.GetString("tree", "file", "");

  rc.solver.tol_fp = cfg.GetDouble("solver", "tol_fp", 1e-5);
  rc.solver.max_iters = cfg.GetInt("solver", "max_iters", 600);
  rc.solver.tau_mass = cfg.GetDouble("solver", "tau_mass", 1e-6);
  rc.solver.dphi_ceiling = cfg.GetDouble("solver", "dphi_ceiling", 100.0);
  rc.solver.phi_ceiling = cfg.GetDouble("solver", "phi_ceiling", 1e8);

  rc.topology.times = cfg.GetDoubles("optimizer", "times", {0.0});
  rc.topology.branching = cfg.GetInt("optimizer", "branching", types);
  rc.optimizer.starts = cfg.GetInt("optimizer", "starts", 4);
  rc.optimizer.max_evals = cfg.GetInt("optimizer", "max_evals", 60);
  rc.optimizer.tol_opt = cfg.GetDouble("optimizer", "tol_opt", 1e-4);
  rc.optimizer.w_min = cfg.GetDouble("optimizer", "w_min", 1e-3);
  rc.optimizer.nm_step = cfg.GetDouble("optimizer", "nm_step", 0.8);
  rc.optimizer.solver = rc.solver;
  rc.optimizer.solver.tol_fp =
      cfg.GetDouble("optimizer", "tol_fp", rc.solver.tol_fp);

  rc.encoder_n = cfg.GetInt("encoder", "n", 6);
  rc.encoder_nt_snap = cfg.GetInt("encoder", "nt_snap", 0);

  rc.sim.num_players = cfg.GetInt("sim", "players", 64);
  rc.sim.n_mc = cfg.GetInt("sim", "n_mc", 100);
  rc.sim.nt_sim = cfg.GetInt("sim", "nt_sim", 0);
  rc.sim.batches = cfg.GetInt("sim", "batches", 10);
  rc.sim.test_players = cfg.GetInts("sim", "test_players", {0, 1, 2, 3});
  rc.sim.shifts = cfg.GetDoubles(
      "sim", "shifts", {-0.5, -0.25, -0.1, -0.05, 0.05, 0.1, 0.25, 0.5});
  rc.sim_n_list = cfg.GetInts("sim", "n_list", {8, 32, 128, 512});

  rc.seed = cfg.GetU64("run", "seed", 0);
  rc.sim.seed = rc.seed;
  rc.optimizer.seed = rc.seed + 1;
  return rc;
}

}  // namespace mfg
