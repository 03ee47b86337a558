#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwpam/graph.hpp"
#include "gwpam/spectral.hpp"

namespace gwpam {

// I_E(p) with degrees of g, each undirected edge counted once.
double I_E(const RootedGraph& g, std::span<const double> p);
// -sum p log p with 0 log 0 = 0.
double J_V(std::span<const double> p);

class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> p, double tol = 1e-12);

  const std::vector<double>& values() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::vector<std::size_t> support() const;

 private:
  std::vector<double> p_;
};

struct PotentialProfile {
  std::vector<double> q;  // -infinity allowed
  double rho = 1.0;

  double L_value() const;
  bool feasible(double tol = 1e-12) const { return L_value() <= 1.0 + tol; }
  // q = rho log p, so L = sum p.
  static PotentialProfile from_probability(std::span<const double> p, double rho);
};

// Generic form of I + rho J on a finite vertex set, in phi = sqrt(p / w):
//   I = sum_edges (phi_a - phi_b)^2 + sum_x leak(x) phi_x^2.
// A Dirichlet window has w = deg and leak = number of neighbours outside.
struct ChiProblem {
  std::vector<double> weight;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> leak;
  std::vector<Vertex> vertices;  // graph vertex of each local index

  std::size_t size() const { return weight.size(); }
  double energy(std::span<const double> p) const;
  double objective(std::span<const double> p, double rho) const;

  static ChiProblem from_graph(const RootedGraph& g);
  static ChiProblem from_window(const DirichletWindow& window);
  // Unnormalised Dirichlet form: w = 1, so I = sum (sqrt p_x - sqrt p_y)^2 + leaks.
  static ChiProblem unnormalised(const DirichletWindow& window);
};

struct ChiTrace {
  int iterations = 0;
  int restarts = 0;
  double gap = 0.0;           // |value - (I + rho J)| for the dual, final step size change for direct
  double stationarity = 0.0;  // projected gradient norm or fixed-point residual
  bool converged = false;
  std::string method;
};

struct ChiResult {
  double value = 1.0;
  std::vector<double> p;
  std::vector<double> q;  // rho log p
  ChiTrace trace;

  nlohmann::json to_json() const;
};

struct ChiOptions {
  int restarts = 16;        // Dirichlet random starts
  double tol = 1e-10;       // projected gradient norm
  int max_iter = 20000;
  int screen_iters = 60;
  int keep = 8;             // starts continued after screening
  std::size_t point_start_cap = 4000;
  std::uint64_t seed = 1;
  std::vector<std::vector<double>> initial;  // user-supplied p, indexed like the returned p
};

ChiResult chi_direct(const ChiProblem& problem, double rho, const ChiOptions& opts = {});
ChiResult chi_direct(const RootedGraph& g, double rho, const ChiOptions& opts = {});
// chi-hat on a window; p is indexed by graph vertex and vanishes off the window.
ChiResult chi_direct(const DirichletWindow& window, double rho, const ChiOptions& opts = {});
// chi-bar on a window (unnormalised I).
ChiResult chi_unnormalised(const DirichletWindow& window, double rho, const ChiOptions& opts = {});

struct DualOptions {
  double eta = 0.5;
  double tol = 1e-12;
  int max_iter = 20000;
  std::size_t point_start_cap = 16;
  double floor = 1e-300;
  SpectralOptions spectral{150};
};

// Alternates q -> principal eigenpair -> p = deg phi^2 -> q = rho log p.
ChiResult chi_dual_fixed_point(const DirichletWindow& window, double rho, const DualOptions& opts = {});
ChiResult chi_dual_fixed_point(const RootedGraph& g, double rho, const DualOptions& opts = {});

// Better of the direct and dual values on a window.
ChiResult chi_window(const DirichletWindow& window, double rho, const ChiOptions& direct = {},
                     const DualOptions& dual = {});

// Infimum of I + rho J over p with p(x) = b.
ChiResult chi_boundary_result(const ChiProblem& problem, int x_local, double b, double rho,
                              const ChiOptions& opts = {});
double chi_boundary(const ChiProblem& problem, int x_local, double b, double rho, const ChiOptions& opts = {});
double chi_boundary(const RootedGraph& g, Vertex x, double b, double rho, const ChiOptions& opts = {});

struct GlueTwoReport {
  double chi_glued = 0.0;
  double chi1 = 0.0;
  double chi2 = 0.0;
  double min_pieces = 0.0;
  double tol = 0.0;
  bool pass = false;
};

GlueTwoReport glue_two_check(const RootedGraph& g1, Vertex x1, const RootedGraph& g2, Vertex x2, double rho,
                             const ChiOptions& opts = {}, double tol = 1e-6);

struct GlueStarOptions {
  int a_grid = 40;   // steps per unit for the masses a_i
  int b_grid = 40;   // steps per unit for the boundary values b_i
  int starts = 8;    // coarse candidates refined by compass search
  double tol = 1e-3;
  ChiOptions chi;
};

struct GlueStarReport {
  double lhs = 0.0;  // chi of the glued graph
  double rhs = 0.0;  // nested optimisation of the decomposed form
  double gap = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  bool pass = false;
};

// Pieces use the degrees they have inside the glued graph.
GlueStarReport glue_star_identity(const std::vector<StarPiece>& pieces, double rho, const GlueStarOptions& opts = {});

struct PropagationReport {
  bool hypothesis_met = false;
  double rho_threshold = 0.0;  // C / log(k+1)
  double min_sub_glued = 0.0;  // min_j chi of the star with piece j left out
  double min_pieces = 0.0;     // min_j chi of piece j
  double chi_glued = 0.0;
  double M = 0.0;
  double C = 0.0;
  bool conclusion = false;
  bool pass = false;  // true when the hypothesis fails (nothing asserted)
  std::string note;
};

// pieces holds the k+1 marked graphs.
PropagationReport propagation_check(const std::vector<StarPiece>& pieces, double C, double M, double rho,
                                    const ChiOptions& opts = {}, double tol = 1e-6);

struct ChiTildeEstimate {
  int d = 0;
  double rho = 0.0;
  std::vector<int> radii;
  std::vector<double> values;
  double estimate = 1.0;
  double gap = 0.0;  // difference of the last two values
  bool monotone = true;

  nlohmann::json to_json() const;
};

// chi-hat of B_r in the boundary-completed regular tree, for each radius.
ChiTildeEstimate chi_tilde_estimate(int d, double rho, const std::vector<int>& radii, const ChiOptions& direct = {},
                                    const DualOptions& dual = {});

struct ScalingCheck {
  double lhs = 0.0;  // chi-hat(rho)
  double rhs = 0.0;  // chi-bar(d rho) / d
  double gap = 0.0;
  bool pass = false;
};

ScalingCheck scaling_identity_check(int d, double rho, int r, const ChiOptions& opts = {}, double tol = 1e-6);

struct OrderingReport {
  int d_min = 0;
  double rho = 0.0;
  int r = 0;
  double threshold = 0.0;
  bool above_threshold = false;
  double chi_minimal = 0.0;
  std::vector<double> chi_samples;
  double chi_half = 0.0;      // half-tree at the sandwich radius
  double chi_regular = 0.0;   // regular tree at the sandwich radius
  int sandwich_r = 0;
  double slack = 0.05;
  bool ordering_pass = true;  // only asserted above threshold
  bool sandwich_pass = false;

  nlohmann::json to_json() const;
};

// chi-hat of the boundary-completed T_dmin ball against boundary-completed GW
// balls at the same radius, plus the half-tree sandwich.
OrderingReport minimal_tree_ordering(const OffspringLaw& law, double rho, int samples, int r, std::uint64_t seed,
                                     int sandwich_r, const ChiOptions& direct = {}, const DualOptions& dual = {},
                                     double tol = 1e-6, double slack = 0.05);

// Window of B_r(root) in the boundary completion of the ball of g; the window
// refers to `completed`, which the caller keeps alive.
DirichletWindow completed_ball_window(const RootedGraph& g, int r, int d, RootedGraph& completed);

struct RestrictionRow {
  int r = 0;
  double mass = 0.0;  // p(B_r)
  double I_gap = 0.0;  // I(p_r) - I(p)
  double J_gap = 0.0;
  double I_bound = 0.0;
  double J_bound = 0.0;
  double value = 0.0;  // I(p_r) + rho J(p_r)
  bool pass = false;
};

// Normalised restriction of p to B_r(root) against the printed error bounds.
std::vector<RestrictionRow> restriction_check(const RootedGraph& g, std::span<const double> p, double rho,
                                              const std::vector<int>& radii, double tol = 1e-12);

}  // namespace gwpam
