#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gwpam/graph.hpp"
#include "gwpam/potential.hpp"

namespace gwpam {

// Finite vertex set Lambda with killing on exit. Degrees always come from the
// full graph.
class DirichletWindow {
 public:
  DirichletWindow(const RootedGraph& graph, std::vector<Vertex> vertices);

  static DirichletWindow whole(const RootedGraph& graph);
  static DirichletWindow ball(const RootedGraph& graph, Vertex center, int r);
  // Parses "all" or "ball:r" (ball around the root).
  static DirichletWindow parse(const RootedGraph& graph, const std::string& spec);

  const RootedGraph& graph() const { return *graph_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool contains(Vertex v) const { return local_index(v) >= 0; }
  // Position of v in vertices(), or -1.
  int local_index(Vertex v) const;
  bool connected() const;

 private:
  const RootedGraph* graph_;
  std::vector<Vertex> vertices_;  // sorted
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

// Matrix M of Delta + q restricted to the window, rows indexed by window
// position. q is indexed by graph vertex; -infinity entries delete the vertex
// (its row and column are dropped; `kept` lists surviving window positions).
struct Hamiltonian {
  SparseMatrix M;
  SparseMatrix S;  // D^{1/2} M D^{-1/2}, symmetric
  Eigen::VectorXd degree;
  std::vector<int> kept;

  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(M); }
};

Hamiltonian hamiltonian_matrix(const DirichletWindow& window, std::span<const double> q);

struct SpectralOptions {
  std::size_t dense_threshold = 2000;
  double tolerance = 1e-12;
  int max_restarts = 400;
  int krylov_dim = 60;
};

struct Eigenpair {
  double value = kMinusInfinity;
  Eigen::VectorXd phi;  // window positions; weighted norm 1, nonnegative
  int iterations = 0;
  double residual = 0.0;
};

Eigenpair principal_eigenpair(const DirichletWindow& window, std::span<const double> q,
                              const SpectralOptions& opts = {});

// Top eigenpair of a symmetric sparse matrix by restarted Lanczos.
Eigenpair lanczos_top(const SparseMatrix& S, const SpectralOptions& opts, const Eigen::VectorXd* start = nullptr);

struct EigenSystem {
  Eigen::VectorXd values;  // descending
  Eigen::MatrixXd phi;     // columns are eigenfunctions on window positions
  Eigen::VectorXd degree;
};

EigenSystem full_spectrum(const DirichletWindow& window, std::span<const double> q, std::size_t max_size = 2000);

struct SpectralBoundsCheck {
  double lower = 0.0;         // max_Gamma q - 1
  double lambda_gamma = 0.0;  // principal eigenvalue on Gamma
  double lambda = 0.0;        // principal eigenvalue on Lambda
  double upper = 0.0;         // max_Lambda q
  Vertex argmax = -1;
  bool pass = false;
};

// Checks max_Gamma q - 1 <= lambda_Gamma <= lambda_Lambda <= max_Lambda q. With
// no Gamma supplied, Gamma is the argmax singleton.
SpectralBoundsCheck spectral_bounds_check(const DirichletWindow& window, std::span<const double> q,
                                          const std::vector<Vertex>* gamma = nullptr, double tol = 1e-10);

// u(x,t) = sum_k e^{t lambda_k} phi_k(y) phi_k(x) deg(x) on window positions.
Eigen::VectorXd evolve_spectral(const EigenSystem& sys, int y_local, double t);
Eigen::VectorXd evolve_spectral(const DirichletWindow& window, std::span<const double> q, Vertex y, double t);

struct ResolventBound {
  Eigen::VectorXd u;  // E_x[exp(int_0^tau (xi - gamma))] on window positions
  double lambda = 0.0;
  double rhs = 0.0;
  double max_lhs = 0.0;
  bool pass = false;
};

ResolventBound resolvent_exit_bound(const DirichletWindow& window, const PotentialField& xi, double gamma);

struct SolutionSandwich {
  double lower = 0.0;
  double mid = 0.0;
  double upper = 0.0;
  bool pass = false;
};

SolutionSandwich solution_sandwich_check(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                                         double tol = 1e-10);

struct IslandScan {
  std::vector<double> lambdas;  // per component
  double max_lambda = kMinusInfinity;
  double reference = 0.0;  // a_L - chi_tilde + eps
  double margin = 0.0;     // a_L - max_lambda
  bool below_reference = true;
};

IslandScan island_eigenvalue_scan(const RootedGraph& g, const IslandSystem& islands, const PotentialField& xi,
                                  double chi_tilde, double eps);

}  // namespace gwpam
