#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "cli.hpp"

using namespace gwpam;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("gwpam_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args) {
  std::vector<char*> argv;
  static std::string prog = "gwpam";
  argv.push_back(prog.data());
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(Cli, SampleThenReplay) {
  fs::path dir = scratch("sample");
  ASSERT_EQ(run({"--seed", "42", "--out-dir", dir.string(), "sample", "--law", "2:0.5,3:0.5", "--depth", "6"}), 0);
  ASSERT_TRUE(fs::exists(dir / "tree.json"));
  ASSERT_TRUE(fs::exists(dir / "manifest.json"));
  cli::ReplayReport rep = cli::replay((dir / "manifest.json").string(), (dir / "again").string());
  EXPECT_TRUE(rep.identical);
  fs::remove_all(dir);
}

TEST(Cli, PipelineWithTreeAlias) {
  fs::path dir = scratch("pipeline");
  const std::string tree = (dir / "tree.json").string();
  ASSERT_EQ(run({"--out-dir", dir.string(), "sample", "--law", "3:1", "--depth", "3"}), 0);
  fs::path pd = dir / "pot";
  ASSERT_EQ(run({"--seed", "7", "--out-dir", pd.string(), "potential", "--tree", tree, "--rho", "2"}), 0);
  const std::string pot = (pd / "potential.json").string();
  fs::path ed = dir / "evolve";
  ASSERT_EQ(run({"--out-dir", ed.string(), "evolve", "--tree", tree, "--potential", pot, "--window", "ball:2", "--t",
                 "1.5"}),
            0);
  std::ifstream in(ed / "evolve.json");
  nlohmann::json j;
  in >> j;
  EXPECT_GT(j.at("total_mass").get<double>(), 0.0);
  fs::remove_all(dir);
}

TEST(Cli, ReplayDetectsChangedOutput) {
  fs::path dir = scratch("tamper");
  nlohmann::json cfg = FMaxConfig{}.to_json();
  RunManifest m = cli::run_with_manifest("f-max", cfg, dir.string());
  ASSERT_FALSE(m.outputs.empty());
  // corrupt the recorded digest and replay
  m.outputs[0].sha256 = std::string(64, '0');
  m.write((dir / "manifest.json").string());
  cli::ReplayReport rep = cli::replay((dir / "manifest.json").string(), (dir / "again").string());
  EXPECT_FALSE(rep.identical);
  EXPECT_EQ(rep.mismatches.size(), 1u);
  fs::remove_all(dir);
}

TEST(Cli, UnknownCommandThrows) {
  EXPECT_THROW(cli::run_command("nope", nlohmann::json::object(), "x"), std::invalid_argument);
}
