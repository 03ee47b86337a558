#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwpam/graph.hpp"

namespace gwpam {

// Per-vertex potential xi >= 0 with its double-exponential parameter rho.
class PotentialField {
 public:
  PotentialField(std::vector<double> values, double rho, std::optional<std::uint64_t> seed = std::nullopt);

  static PotentialField constant(std::size_t n, double value, double rho);

  const std::vector<double>& values() const { return values_; }
  double operator[](Vertex x) const { return values_[static_cast<std::size_t>(x)]; }
  std::size_t size() const { return values_.size(); }
  double rho() const { return rho_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  double max_over(const std::vector<Vertex>& vertices) const;

 private:
  std::vector<double> values_;
  double rho_;
  std::optional<std::uint64_t> seed_;
};

// Inverse transform for P(xi > u) = exp(-e^{u/rho}).
double double_exponential_quantile(double uniform, double rho);

PotentialField sample_potential(const RootedGraph& g, double rho, std::uint64_t seed);

// rho * log log r, defined for r > e.
double a_scale(double r, double rho);

// Maximum of L i.i.d. draws sampled from its exact distribution, with L given
// through log L so astronomically large balls can be handled.
double sample_max_potential(double log_count, double rho, Rng& rng);

struct IslandComponent {
  std::vector<Vertex> vertices;  // sorted
  int pi_count = 0;
  int diameter = 0;
};

struct IslandSystem {
  int r = 0;
  double A = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  std::size_t L_r = 0;
  double a_L = 0.0;
  int S_r = 0;
  double a_threshold = 0.0;
  std::vector<Vertex> ball;  // B_r(root), sorted
  std::vector<Vertex> Pi;    // sorted
  std::vector<Vertex> D;     // sorted
  std::vector<IslandComponent> components;
  std::size_t C_max = 0;

  bool in_ball(Vertex v) const;
  bool in_Pi(Vertex v) const;
  bool in_D(Vertex v) const;
  // Index of the component containing v, or -1.
  int component_of(Vertex v) const;

  std::vector<int> component_index;  // per graph vertex, -1 outside D
};

// S_r = ceil((log r)^alpha), zero for r <= 1.
int island_separation(int r, double alpha);

IslandSystem build_islands(const RootedGraph& g, const PotentialField& xi, int r, double A, double alpha);

struct DiagnosticsParams {
  double delta_degree = 1.0;  // degree check: max degree in B_{2r} below delta_degree * r
  int M_A = 4;                // cap on Pi-vertices per island
  double theta = 0.0;         // growth rate; required for the volume and max-potential checks
  double beta = 0.25;
  double eps = 0.0625;
  double delta = 0.5;
  double C = 1.0;
  int path_samples = 200;
  std::uint64_t seed = 1;
};

struct DiagnosticsReport {
  int max_degree_2r = 0;
  bool degree_pass = false;
  double log_volume_over_r = 0.0;
  double theta = 0.0;
  int max_island_pi_count = 0;
  bool island_pass = false;
  double max_potential = 0.0;
  double a_L = 0.0;
  double max_potential_deviation = 0.0;
  double max_potential_band = 0.0;
  bool max_potential_pass = false;
  int intermediate_paths_checked = 0;
  int intermediate_violations = 0;
  int high_paths_checked = 0;
  int high_violations = 0;

  nlohmann::json to_json() const;
};

// Empirical checks of the almost-sure potential bounds on one sample.
DiagnosticsReport diagnostics_suite(const RootedGraph& g, const PotentialField& xi, int r, double A,
                                    const DiagnosticsParams& params);

struct MaxPotentialTrials {
  int trials = 0;
  int violations = 0;
  double log_volume = 0.0;
  double a_L = 0.0;
  double band = 0.0;
  std::vector<double> deviations;
};

// Band check for the maximum of xi over the ball of radius r in the d-regular tree, using
// exact order-statistic sampling of the ball maximum.
MaxPotentialTrials max_potential_band_trials(int d, int r, double rho, int trials, std::uint64_t seed);

nlohmann::json to_json(const PotentialField& xi);
PotentialField potential_from_json(const nlohmann::json& j);
void write_potential(const PotentialField& xi, const std::string& path);
PotentialField read_potential(const std::string& path);

}  // namespace gwpam
