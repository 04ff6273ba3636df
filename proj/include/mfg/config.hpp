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

#ifndef MFG_CONFIG_HPP_
#define MFG_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/optimizer.hpp"
#include "mfg/sim.hpp"
#include "mfg/solver.hpp"

namespace mfg {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Sectioned key/value text configuration ("[section]" headers, "key = value"
// entries, '#' comments, values tokenized on whitespace).
class ConfigFile {
 public:
  static ConfigFile ParseFile(const std::string& path);
  static ConfigFile ParseString(const std::string& text,
                                const std::string& origin = "<string>");

  bool Has(const std::string& section, const std::string& key) const;
  const std::vector<std::string>& Tokens(const std::string& section,
                                         const std::string& key) const;
  std::string GetString(const std::string& section, const std::string& key,
                        const std::string& fallback) const;
  std::string RequireString(const std::string& section,
                            const std::string& key) const;
  double GetDouble(const std::string& section, const std::string& key,
                   double fallback) const;
  double RequireDouble(const std::string& section,
                       const std::string& key) const;
  int GetInt(const std::string& section, const std::string& key,
             int fallback) const;
  std::uint64_t GetU64(const std::string& section, const std::string& key,
                       std::uint64_t fallback) const;
  std::vector<double> GetDoubles(const std::string& section,
                                 const std::string& key,
                                 std::vector<double> fallback) const;
  std::vector<int> GetInts(const std::string& section, const std::string& key,
                           std::vector<int> fallback) const;

  const std::string& raw() const { return raw_; }
  // FNV-1a hash of the raw configuration text, as 16 hex digits.
  std::string Hash() const;

 private:
  [[noreturn]] void Missing(const std::string& section,
                            const std::string& key) const;
  struct Entry {
    std::vector<std::string> tokens;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::string raw_;
  std::string origin_;
};

// Fully-typed run configuration assembled from the config file.
struct RunConfig {
  ModelSpec model;
  Grid1D grid;
  // Tree selection: "no_reveal", "full_reveal" (at tree.reveal_time) or
  // "file" (JSON document at tree.file).
  std::string tree_kind;
  double tree_reveal_time = 0.0;
  std::string tree_file;
  SolverParams solver;
  TreeTopology topology;
  OptimizerParams optimizer;
  int encoder_n = 6;
  int encoder_nt_snap = 0;  // 0: use sim nt_sim
  SimOptions sim;
  std::vector<int> sim_n_list;
  std::uint64_t seed = 0;
  std::string config_hash;

  RevelationTree MakeTree() const;
};

RunConfig LoadRunConfig(const ConfigFile& cfg);

}  // namespace mfg

#endif  // MFG_CONFIG_HPP_
