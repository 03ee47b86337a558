#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwpam/harness.hpp"

namespace gwpam::cli {

// Commands: sample, potential, spectrum, chi, fk, evolve, corpus, t1-trend,
// t2-order, f-max, scan, diagnostics. Returns the files written under out_dir.
std::vector<std::string> run_command(const std::string& command, const nlohmann::json& config,
                                     const std::string& out_dir);

// Input files named by the config (graph, potential).
std::vector<std::string> input_files(const nlohmann::json& config);

// Runs the command and writes its manifest (default <out_dir>/manifest.json).
RunManifest run_with_manifest(const std::string& command, const nlohmann::json& config, const std::string& out_dir,
                              const std::string& manifest_path = "");

struct ReplayReport {
  bool identical = false;
  bool inputs_unchanged = true;
  std::vector<std::string> mismatches;
};

// Re-runs a manifest into out_dir and compares output digests.
ReplayReport replay(const std::string& manifest_path, const std::string& out_dir);

int main_entry(int argc, char** argv);

}  // namespace gwpam::cli
