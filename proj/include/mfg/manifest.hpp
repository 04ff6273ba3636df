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

#ifndef MFG_MANIFEST_HPP_
#define MFG_MANIFEST_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace mfg {

inline constexpr const char* kCoreVersion = "0.1.0";

// Run-level bookkeeping: config hash, seeds, tolerances, produced files and
// wall-clock timings.  Every produced file carries the config hash in its
// header ("# config_hash=..." for CSV, a "config_hash" field for JSON).
class RunManifest {
 public:
  RunManifest(std::string out_dir, std::string config_hash,
              std::uint64_t seed);

  const std::string& out_dir() const { return out_dir_; }
  const std::string& config_hash() const { return config_hash_; }

  // Writes a CSV with the hash comment line, a header row and %.17g cells.
  std::string WriteCsv(const std::string& name,
                       const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows);
  // Same, with a leading string column.
  std::string WriteCsvTagged(const std::string& name,
                             const std::vector<std::string>& header,
                             const std::vector<std::string>& tags,
                             const std::vector<std::vector<double>>& rows);
  std::string WriteJson(const std::string& name, nlohmann::json j);

  void RecordTolerance(const std::string& key, double value);
  void RecordTiming(const std::string& phase, double ms);
  void RecordNote(const std::string& key, const nlohmann::json& value);

  // Writes the manifest itself ("manifest_<phase>.json") and returns the
  // path.  Checks that every recorded file exists.
  std::string Finish(const std::string& phase);

 private:
  std::string out_dir_;
  std::string config_hash_;
  std::uint64_t seed_;
  std::vector<std::string> files_;
  nlohmann::json tolerances_;
  nlohmann::json timings_;
  nlohmann::json notes_;
};

std::string FormatDouble(double v);

}  // namespace mfg

#endif  // MFG_MANIFEST_HPP_
