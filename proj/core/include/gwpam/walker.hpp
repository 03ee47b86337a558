#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwpam/graph.hpp"
#include "gwpam/potential.hpp"
#include "gwpam/rng.hpp"
#include "gwpam/spectral.hpp"

namespace gwpam {

// Jump skeleton of the walk on [0, horizon]: vertices[k] is occupied on
// [jump_times[k], jump_times[k+1]).
struct PathRecord {
  std::vector<Vertex> vertices;
  std::vector<double> jump_times;  // jump_times[0] = 0
  double horizon = 0.0;

  std::size_t jumps() const { return vertices.empty() ? 0 : vertices.size() - 1; }
  bool valid(const RootedGraph& g) const;
};

PathRecord simulate_walk(const RootedGraph& g, Vertex start, double t, Rng& rng);
PathRecord simulate_walk(const RootedGraph& g, Vertex start, double t, std::uint64_t seed);

// Running mean and variance, mergeable in a fixed order.
struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const Welford& other);
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;

  nlohmann::json to_json() const;
};

struct FkOptions {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 1;
  bool auto_scale = false;        // double n until se / estimate <= target_rel_se
  double target_rel_se = 0.05;
  std::size_t cap = 1u << 24;
};

// E_y[exp(int_0^t xi(X_s) ds) 1{no exit from the window before t}].
McEstimate fk_total_mass_mc(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                            const FkOptions& opts = {});
McEstimate fk_total_mass_mc(const RootedGraph& g, const PotentialField& xi, Vertex y, double t,
                            const FkOptions& opts = {});

// prod_{i<l} 1 / (gamma - (xi(pi_i) - 1)).
double path_evaluation_exact(const PotentialField& xi, const std::vector<Vertex>& pi, double gamma);

struct PathEvaluation {
  double mc_estimate = 0.0;
  double std_error = 0.0;
  double exact_product = 1.0;
  std::size_t n = 0;
  bool pass = false;  // within 3 standard errors
};

// Conditional Monte Carlo with the skeleton fixed to pi and i.i.d. Exp(1) holding times.
PathEvaluation path_evaluation_check(const RootedGraph& g, const PotentialField& xi, const std::vector<Vertex>& pi,
                                     double gamma, std::size_t n_samples, std::uint64_t seed);

enum class SegmentKind { check, hat, bar };

struct PathSegment {
  SegmentKind kind = SegmentKind::check;
  std::vector<Vertex> vertices;
  int M_eps = 0;

  std::size_t length() const { return vertices.empty() ? 0 : vertices.size() - 1; }
};

struct PathDecomposition {
  std::vector<PathSegment> segments;
  int m = 0;
  int s = 0;
  int k_eps = 0;
  double lambda_islands = kMinusInfinity;

  std::vector<Vertex> concatenate() const;
  int hat_length() const;
};

// M^{r,eps}: steps i < |pi| with xi(pi_i) <= (1 - eps) a_L.
int moderate_count(const std::vector<Vertex>& pi, const PotentialField& xi, double a_L, double eps);

// Splits pi into check / hat / bar segments relative to Pi and D. The optional
// component eigenvalues (indexed like islands.components) give lambda_{r,A}(pi).
PathDecomposition decompose_path(const std::vector<Vertex>& pi, const IslandSystem& islands, const PotentialField& xi,
                                 double eps, std::span<const double> component_lambdas = {});

struct PathKey {
  int m = 0;
  std::vector<std::vector<Vertex>> checks;
  std::vector<Vertex> bar;

  bool operator==(const PathKey& other) const = default;
  auto operator<=>(const PathKey& other) const = default;
  std::string to_string() const;
};

PathKey equivalence_key(const PathDecomposition& dec);

struct ExcursionBound {
  double lhs_mc = 0.0;
  double lhs_se = 0.0;
  double lhs_exact = 0.0;
  double rhs = 0.0;
  double q_A = 0.0;
  double c = 0.0;
  int M_eps = 0;
  bool pass = false;
};

// Mass of an exterior excursion: pi avoids Pi before its endpoint and gamma > a_L - A.
ExcursionBound excursion_mass_bound_check(const RootedGraph& g, const PotentialField& xi, const IslandSystem& islands,
                                          const std::vector<Vertex>& pi, double gamma, double eps, double rho,
                                          std::size_t n_samples, std::uint64_t seed);

struct ClassMassBound {
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  int m = 0;
  int s = 0;
  int k_eps = 0;
  double lambda = kMinusInfinity;
  std::size_t C_rA = 0;
  std::size_t n = 0;
  std::size_t matches = 0;
  bool pass = false;
};

// Mass of the equivalence class of pi up to time t, estimated by simulation
// (walks leaving B_r count as zero).
ClassMassBound class_mass_bound_check(const RootedGraph& g, const PotentialField& xi, const IslandSystem& islands,
                                      std::span<const double> component_lambdas, const std::vector<Vertex>& pi,
                                      double gamma, double eps, double rho, double t, int d_min,
                                      std::size_t n_samples, std::uint64_t seed);

// q_A = 1 / (1 + A) and c = log(2 / (q_A eps rho)).
double excursion_q(double A);
double excursion_c(double A, double eps, double rho);

}  // namespace gwpam
