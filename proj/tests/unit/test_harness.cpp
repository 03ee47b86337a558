#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "gwpam/harness.hpp"

using namespace gwpam;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("gwpam_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(RFrak, Values) {
  const double t = std::exp(std::exp(2.0));
  EXPECT_NEAR(r_frak(t, 1.0), t / 2.0, 1e-9 * t);
  EXPECT_NEAR(r_frak(t, 2.0), 2.0 * r_frak(t, 1.0), 1e-9 * t);
  double prev = 0.0;
  for (double s = 16.0; s < 1e6; s *= 1.7) {
    EXPECT_GT(r_frak(s, 1.0), prev);
    prev = r_frak(s, 1.0);
  }
  EXPECT_THROW(r_frak(2.0, 1.0), std::invalid_argument);
}

TEST(UStar, ArithmeticAndGrowth) {
  // theta r_t = e makes the log term exactly rho
  const double t0 = 50.0;
  EXPECT_NEAR(u_star_log(t0, 1.0, std::exp(1.0) / r_frak(t0, 1.0), 0.0), 0.0, 1e-12);
  EXPECT_LT(u_star_log(100.0, 1.0, 1.0, 0.3), u_star_log(1000.0, 1.0, 1.0, 0.3));
  const double t = 1e4;
  EXPECT_NEAR(u_star_log(t, 2.0, 0.5, 0.4), 2.0 * std::log(0.5 * r_frak(t, 2.0)) - 2.0 - 0.4, 1e-12);
}

TEST(FMaximizer, CZeroRatioAndGridMaximum) {
  FMaximizer m = f_maximizer(0.0, 1e6, 1.0, 1.0);
  EXPECT_GE(m.ratio, 0.9);
  EXPECT_LE(m.ratio, 1.1);
  for (double f : {0.5, 0.9, 1.1, 2.0})
    EXPECT_GE(m.F_value, F_ct(f * m.r_star, 0.0, 1e6, 1.0, 1.0) - 1e-12);
  // root of the stationarity display
  const double r = m.r_star;
  EXPECT_NEAR(r * std::log(std::log(r)) + r / std::log(r), 1e6, 1e-6 * 1e6);
}

TEST(FMaximizer, UpperBandAtLargeT) {
  const double t = 1e8;
  FMaximizer m = f_maximizer(0.0, t, 1.0, 1.0);
  EXPECT_LE(m.F_value, std::log(r_frak(t, 1.0)) - 1.0 + 0.2);
}

TEST(DegreeProduct, RegularTreeExact) {
  RootedGraph g = sample_gw_tree(OffspringLaw::deterministic(3), 6, 1);
  for (int L : {1, 3, 5}) {
    DegreeProductReport r = degree_product_diagnostic(g, L);
    EXPECT_NEAR(r.min_log_product, -L * std::log(3.0), 1e-12);
    EXPECT_NEAR(r.max_log_product, -L * std::log(3.0), 1e-12);
    EXPECT_EQ(r.count, static_cast<std::size_t>(3 * std::pow(2, L - 1)));
  }
}

TEST(DegreeProduct, LevelOneAndAutomaticDelta) {
  OffspringLaw law = OffspringLaw::parse("2:0.5,4:0.5");
  RootedGraph g = sample_gw_tree(law, 8, 3);
  DegreeProductReport one = degree_product_diagnostic(g, 1);
  for (double v : {one.min_log_product, one.max_log_product})
    EXPECT_TRUE(std::abs(v + std::log(2.0)) < 1e-12 || std::abs(v + std::log(4.0)) < 1e-12);
  DegreeProductReport r = degree_product_diagnostic(g, 7);
  EXPECT_NEAR(r.delta_L, 1.0 / std::log(std::log(7.0)), 1e-12);
  EXPECT_NEAR(r.log_threshold, -r.delta_L * 7.0 * std::log(std::log(7.0)), 1e-12);
  EXPECT_LE(r.passing, r.count);
  EXPECT_NEAR(r.frequency, static_cast<double>(r.passing) / r.count, 1e-15);
}

TEST(Scanner, ConstantHighFieldHitsEveryInteriorVertex) {
  const int d = 3, ell = 5, R = 1;
  RootedGraph g = canonical_tree(TreeKind::regular, d, ell + 1);
  RootedGraph pattern = ball(canonical_tree(TreeKind::regular, d, R + 2), 0, R + 1).induced();
  PotentialField xi = PotentialField::constant(g.size(), 1e6, 1.0);
  std::vector<double> q(pattern.size(), -std::log(2.0 * pattern.size()));
  ScanReport rep = scan_high_balls(g, xi, pattern, q, ell);
  std::size_t interior = 0;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (g.depth(static_cast<Vertex>(v)) + R + 1 <= ell) ++interior;
  EXPECT_EQ(rep.hits.size(), interior);
  for (const auto& h : rep.hits) EXPECT_TRUE(verify_scan_hit(g, xi, pattern, q, rep.threshold, h));
  EXPECT_EQ(rep.min_depth, 0);
}

TEST(Scanner, ZeroFieldNoHits) {
  RootedGraph g = canonical_tree(TreeKind::regular, 3, 6);
  RootedGraph pattern = ball(canonical_tree(TreeKind::regular, 3, 3), 0, 2).induced();
  // four constrained vertices at -1.45 keep L(q) < 1 and the bar positive
  std::vector<double> q(pattern.size(), -30.0);
  for (std::size_t v = 0; v < pattern.size(); ++v)
    if (pattern.depth(static_cast<Vertex>(v)) <= 1) q[v] = -1.45;
  ScanReport rep = scan_high_balls(g, PotentialField::constant(g.size(), 0.0, 1.0), pattern, q, 5);
  ASSERT_GT(rep.threshold - 1.45, 0.0);
  EXPECT_TRUE(rep.hits.empty());
  EXPECT_EQ(rep.min_depth, -1);
}

TEST(Scanner, PlantedBallRecovered) {
  ScanConfig cfg;
  cfg.law = "3:1";
  cfg.ell = 7;
  cfg.planted_depth = 3;
  ScanReport rep;
  scan_experiment(cfg, &rep);
  ASSERT_FALSE(rep.hits.empty());
  bool at_depth = false;
  for (const auto& h : rep.hits) at_depth = at_depth || h.depth == 3;
  EXPECT_TRUE(at_depth);
}

TEST(Scanner, RejectsForgedWitness) {
  const int d = 3, ell = 5;
  RootedGraph g = canonical_tree(TreeKind::regular, d, ell + 1);
  RootedGraph pattern = ball(canonical_tree(TreeKind::regular, d, 3), 0, 2).induced();
  PotentialField xi = PotentialField::constant(g.size(), 1e6, 1.0);
  std::vector<double> q(pattern.size(), -std::log(2.0 * pattern.size()));
  ScanReport rep = scan_high_balls(g, xi, pattern, q, ell);
  ASSERT_FALSE(rep.hits.empty());
  ScanHit forged = rep.hits.front();
  std::swap(forged.witness[1].second, forged.witness.back().second);
  EXPECT_FALSE(verify_scan_hit(g, xi, pattern, q, rep.threshold, forged));
}

TEST(Table, CsvAndJson) {
  Table t;
  t.columns = {"a", "b", "c"};
  t.add({1, 0.1, true});
  t.add({2, std::nan(""), false});
  EXPECT_EQ(t.to_csv(), "a,b,c\n1,0.1,1\n2,nan,0\n");
  nlohmann::json j = t.to_json();
  EXPECT_EQ(j["columns"].size(), 3u);
  EXPECT_EQ(j["rows"][0]["a"], 1);
  fs::path dir = scratch("table");
  auto files = t.write(dir.string(), "demo");
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(slurp((dir / "demo.csv").string()), t.to_csv());
  fs::remove_all(dir);
}

TEST(Trend, ControlModeFlat) {
  AsymptoticsConfig cfg;
  cfg.control = true;
  cfg.radius = 5;
  cfg.times = {3.0, 6.0};
  TrendReport rep = theorem1_trend(cfg);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& r : rep.rows) EXPECT_LE(r.proxy, 1e-12);
}

TEST(Trend, DeterministicAndSandwiched) {
  AsymptoticsConfig cfg;
  cfg.radius = 6;
  cfg.times = {3.0, 6.0, 12.0};
  cfg.chi_radii = {2, 3};
  cfg.replicates = 2;
  TrendReport a = theorem1_trend(cfg), b = theorem1_trend(cfg);
  EXPECT_EQ(a.table().to_csv(), b.table().to_csv());
  for (const auto& r : a.rows) {
    EXPECT_TRUE(std::isfinite(r.residual));
    EXPECT_TRUE(r.sandwich_pass);
    EXPECT_LE(r.proxy, r.max_potential + 1e-12);
    EXPECT_GE(r.proxy, r.lower_sandwich - 1e-9);
  }
}

TEST(Ordering, Thresholds) {
  EXPECT_NEAR(ordering_threshold(3), 1.0 / (2.0 * std::log(4.0)), 1e-12);
  EXPECT_NEAR(ordering_threshold(3), 0.3607, 1e-4);
  EXPECT_NEAR(ordering_threshold(2), 1.0 / std::log(3.0), 1e-12);
  EXPECT_NEAR(ordering_threshold(2), 0.9102, 1e-4);
}

TEST(Ordering, DeterministicLawRowsEqual) {
  OrderingConfig cfg;
  cfg.law = "3:1";
  cfg.rho_grid = {1.0};
  cfg.samples = 2;
  cfg.r = 3;
  cfg.sandwich_r = 3;
  Table t = theorem2_experiment(cfg);
  ASSERT_EQ(t.rows.size(), 1u);
  const double chi = t.rows[0][1].get<double>();
  EXPECT_NEAR(t.rows[0][2].get<double>(), chi, 1e-6);
  EXPECT_NEAR(t.rows[0][3].get<double>(), chi, 1e-6);
}

TEST(Manifest, DigestsAndRoundTrip) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  RunManifest m;
  m.command = "f-max";
  m.config = FMaxConfig{}.to_json();
  m.seed = 3;
  m.version = library_version();
  m.outputs = {{"f_max.csv", sha256_hex("x")}};
  fs::path dir = scratch("manifest");
  m.write((dir / "manifest.json").string());
  RunManifest back = RunManifest::read((dir / "manifest.json").string());
  EXPECT_EQ(back.command, m.command);
  EXPECT_EQ(back.config, m.config);
  EXPECT_EQ(back.outputs[0].sha256, m.outputs[0].sha256);
  fs::remove_all(dir);
}

TEST(Configs, JsonRoundTrip) {
  AsymptoticsConfig a;
  a.times = {1.0, 3.0};
  a.estimator = "mc";
  EXPECT_EQ(AsymptoticsConfig::from_json(a.to_json()).to_json(), a.to_json());
  ScanConfig s;
  s.planted_depth = 2;
  EXPECT_EQ(ScanConfig::from_json(s.to_json()).to_json(), s.to_json());
  DiagnosticsConfig d;
  d.L_grid = {2, 3};
  EXPECT_EQ(DiagnosticsConfig::from_json(d.to_json()).to_json(), d.to_json());
  OrderingConfig o;
  EXPECT_EQ(OrderingConfig::from_json(o.to_json()).to_json(), o.to_json());
}
