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

#include "mfg/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace mfg {

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

RunManifest::RunManifest(std::string out_dir, std::string config_hash,
                         std::uint64_t seed)
    : out_dir_(std::move(out_dir)),
      config_hash_(std::move(config_hash)),
      seed_(seed) {
  std::filesystem::create_directories(out_dir_);
  tolerances_ = nlohmann::json::object();
  timings_ = nlohmann::json::object();
  notes_ = nlohmann::json::object();
}

std::string RunManifest::WriteCsv(
    const std::string& name, const std::vector<std::string>& header,
    const std::vector<std::vector<double>>& rows) {
  return WriteCsvTagged(name, header, {}, rows);
}

std::string RunManifest::WriteCsvTagged(
    const std::string& name, const std::vector<std::string>& header,
    const std::vector<std::string>& tags,
    const std::vector<std::vector<double>>& rows) {
  std::string path = out_dir_ + "/" + name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# config_hash=" << config_hash_ << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool first = true;
    if (!tags.empty()) {
      out << tags[r];
      first = false;
    }
    for (double v : rows[r]) {
      if (!first) out << ",";
      out << FormatDouble(v);
      first = false;
    }
    out << "\n";
  }
  out.close();
  files_.push_back(name);
  return path;
}

std::string RunManifest::WriteJson(const std::string& name, nlohmann::json j) {
  j["config_hash"] = config_hash_;
  std::string path = out_dir_ + "/" + name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  out.close();
  files_.push_back(name);
  return path;
}

void RunManifest::RecordTolerance(const std::string& key, double value) {
  tolerances_[key] = value;
}

void RunManifest::RecordTiming(const std::string& phase, double ms) {
  timings_[phase] = ms;
}

void RunManifest::RecordNote(const std::string& key,
                             const nlohmann::json& value) {
  notes_[key] = value;
}

std::string RunManifest::Finish(const std::string& phase) {
  for (const std::string& f : files_) {
    if (!std::filesystem::exists(out_dir_ + "/" + f)) {
      throw std::runtime_error("manifest lists missing file " + f);
    }
  }
  nlohmann::json j;
  j["config_hash"] = config_hash_;
  j["core_version"] = kCoreVersion;
  j["seed"] = seed_;
  j["files"] = files_;
  j["tolerances"] = tolerances_;
  j["notes"] = notes_;
  j["timings_ms"] = timings_;  // excluded from determinism comparisons
  std::string name = "manifest_" + phase + ".json";
  std::string path = out_dir_ + "/" + name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  return path;
}

}  // namespace mfg
