#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwpam/graph.hpp"
#include "gwpam/potential.hpp"
#include "gwpam/variational.hpp"

namespace gwpam {

// rho t / log log t, for t > e.
double r_frak(double t, double rho);

// rho log(theta r_t) - rho - chi_tilde.
double u_star_log(double t, double rho, double theta, double chi_tilde);

// F_{c,t}(r) = rho log(theta r) - (r / t) [log log(theta r) - c].
double F_ct(double r, double c, double t, double rho, double theta);

struct FMaximizer {
  double r_star = 0.0;
  double F_value = 0.0;
  double r_frak = 0.0;
  double ratio = 0.0;  // r_star / r_frak
  int bisections = 0;
};

// Root of rho t = r log log r - c r + r / log r by bracketed bisection.
FMaximizer f_maximizer(double c, double t, double rho, double theta);

struct ScanHit {
  Vertex z = 0;
  int depth = 0;
  // (pattern vertex, graph vertex) for every vertex of the pattern
  std::vector<std::pair<Vertex, Vertex>> witness;
};

struct ScanReport {
  int ell = 0;
  int R = 0;
  double threshold = 0.0;  // rho log log |B_ell|
  double L_q = 0.0;
  std::size_t scanned = 0;
  std::vector<ScanHit> hits;
  int min_depth = -1;  // -1 without hits

  nlohmann::json to_json() const;
};

// All z in B_ell with B_{R+1}(z) inside B_ell whose ball is isomorphic to the
// pattern (rooted at z) through a map phi with xi(phi(v)) >= rho log log |B_ell| + q(v)
// for every pattern vertex v at depth <= R. g must be a tree sampled to depth >= ell.
ScanReport scan_high_balls(const RootedGraph& g, const PotentialField& xi, const RootedGraph& pattern,
                           const std::vector<double>& q_profile, int ell);

// rho log log |B_ell|, or 0 while |B_ell| <= e.
double scan_threshold(const RootedGraph& g, int ell, double rho);

// Independent check of a witness: bijection onto B_{R+1}(z), adjacency and
// potential constraints.
bool verify_scan_hit(const RootedGraph& g, const PotentialField& xi, const RootedGraph& pattern,
                     const std::vector<double>& q_profile, double threshold, const ScanHit& hit);

struct DegreeProductReport {
  int L = 0;
  double delta_L = 0.0;
  double log_threshold = 0.0;  // -delta_L L log log L
  std::size_t count = 0;
  std::size_t passing = 0;
  double min_log_product = 0.0;
  double max_log_product = 0.0;
  double frequency = 0.0;  // passing / count

  nlohmann::json to_json() const;
};

// For each generation-L vertex z, log prod_{i=1..L} 1/deg(v_i) along the root
// path, against the threshold (log L)^{-delta_L L}. delta_L <= 0 selects
// 1 / log log L. g must extend past depth L.
DegreeProductReport degree_product_diagnostic(const RootedGraph& g, int L, double delta_L = 0.0);

// Tabular output: CSV with a mirrored JSON document.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;  // numbers, strings or booleans

  void add(std::vector<nlohmann::json> row);
  std::string to_csv() const;
  nlohmann::json to_json() const;
  // Writes <dir>/<stem>.csv and <dir>/<stem>.json; returns both paths.
  std::vector<std::string> write(const std::string& dir, const std::string& stem) const;
};

struct AsymptoticsConfig {
  double rho = 2.0;
  std::string law = "3:1";
  std::vector<double> times{10.0, 20.0, 40.0};
  int radius = 18;       // Dirichlet window B_radius(root)
  double margin = 3.0;   // desired radius / r_t, reported
  double A = 1.0;
  double alpha = 0.5;
  int replicates = 1;
  std::uint64_t seed = 1;
  std::string estimator = "exact";  // exact | mc
  std::size_t mc_samples = 100000;
  bool control = false;             // xi = 0, no prediction
  std::vector<int> chi_radii{3, 4, 5};
  double boundary_cap = 0.05;       // flag rows whose truncation gap exceeds this

  nlohmann::json to_json() const;
  static AsymptoticsConfig from_json(const nlohmann::json& j);
};

struct TrendRow {
  int replicate = 0;
  double t = 0.0;
  double proxy = 0.0;  // (1/t) log U(t)
  double predicted = 0.0;
  double residual = 0.0;
  double se = 0.0;
  double truncation_gap = 0.0;  // proxy on B_radius minus proxy on B_{radius-1}
  double band = 0.0;            // truncation gap + chi gap + 3 se + 1
  bool in_band = false;
  double max_potential = 0.0;   // over the window
  double max_potential_bound = 0.0;  // a_L + 2 rho log R / (theta R)
  bool below_bound = false;
  double lower_sandwich = 0.0;  // (1/t) log(e^{t lambda} phi(root)^2)
  bool sandwich_pass = false;
  bool boundary_flag = false;
};

struct TrendReport {
  AsymptoticsConfig config;
  double theta = 0.0;
  double chi_tilde = 0.0;
  double chi_gap = 0.0;
  std::vector<TrendRow> rows;  // replicate-major, times ascending
  // per replicate: |residual| at the last time below |residual| at the first
  std::vector<bool> residual_shrinks;
  // per replicate: distance to the band is nonincreasing along the time grid
  std::vector<bool> trending;

  Table table() const;
  Table summary() const;
};

TrendReport theorem1_trend(const AsymptoticsConfig& config);

struct OrderingConfig {
  std::string law = "3:0.5,4:0.5";
  std::vector<double> rho_grid{0.5, 1.0, 2.0};
  int samples = 20;
  int r = 5;
  int sandwich_r = 4;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  static OrderingConfig from_json(const nlohmann::json& j);
};

// rho >= 1 / ((d_min - 1) log(d_min + 1)).
double ordering_threshold(int d_min);

Table theorem2_experiment(const OrderingConfig& config, std::vector<OrderingReport>* reports = nullptr);

struct FMaxConfig {
  std::vector<double> c_grid{0.0, 1.0};
  std::vector<double> t_grid{1e6, 1e8};
  double rho = 1.0;
  double theta = 1.0;

  nlohmann::json to_json() const;
  static FMaxConfig from_json(const nlohmann::json& j);
};

Table f_max_experiment(const FMaxConfig& config);

struct ScanConfig {
  std::string law = "3:0.5,4:0.5";
  double rho = 1.0;
  int ell = 8;
  int R = 1;
  int pattern_degree = 3;   // pattern = B_{R+1} of T_d
  double q_shift = 0.5;     // q = rho log p - q_shift with p the chi minimiser of the pattern ball
  int planted_depth = -1;   // >= 0 boosts the potential on a ball at this depth
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  static ScanConfig from_json(const nlohmann::json& j);
};

Table scan_experiment(const ScanConfig& config, ScanReport* report = nullptr);

struct DiagnosticsConfig {
  std::string law = "3:0.5,4:0.5";
  double rho = 1.0;
  int r = 6;
  double A = 1.0;
  std::vector<int> L_grid{4, 6, 8};
  int replicates = 10;
  std::uint64_t seed = 1;
  DiagnosticsParams params;

  nlohmann::json to_json() const;
  static DiagnosticsConfig from_json(const nlohmann::json& j);
};

// Potential diagnostics and degree-product frequencies over seeded samples.
Table diagnostics_experiment(const DiagnosticsConfig& config);

struct OutputRecord {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<OutputRecord> inputs;
  std::vector<OutputRecord> outputs;
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  void write(const std::string& path) const;
  static RunManifest read(const std::string& path);
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

// Relative path of each file with its digest.
std::vector<OutputRecord> hash_outputs(const std::string& dir, const std::vector<std::string>& files);

std::string library_version();

// Fixed formatting used for all CSV numbers.
std::string format_number(double x);

}  // namespace gwpam
