#include "gwpam/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace gwpam {

DirichletWindow::DirichletWindow(const RootedGraph& graph, std::vector<Vertex> vertices)
    : graph_(&graph), vertices_(std::move(vertices)) {
  std::sort(vertices_.begin(), vertices_.end());
  vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
  if (vertices_.empty()) throw std::invalid_argument("window: empty vertex set");
  if (vertices_.front() < 0 || static_cast<std::size_t>(vertices_.back()) >= graph.size())
    throw std::invalid_argument("window: vertex out of range");
}

DirichletWindow DirichletWindow::whole(const RootedGraph& graph) {
  std::vector<Vertex> all(graph.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Vertex>(i);
  return DirichletWindow(graph, std::move(all));
}

DirichletWindow DirichletWindow::ball(const RootedGraph& graph, Vertex center, int r) {
  if (center == graph.root()) {
    std::vector<Vertex> verts;
    for (std::size_t v = 0; v < graph.size(); ++v)
      if (graph.depth(static_cast<Vertex>(v)) <= r) verts.push_back(static_cast<Vertex>(v));
    return DirichletWindow(graph, std::move(verts));
  }
  BallView view(graph, center, r);
  return DirichletWindow(graph, view.vertices());
}

DirichletWindow DirichletWindow::parse(const RootedGraph& graph, const std::string& spec) {
  if (spec == "all" || spec.empty()) return whole(graph);
  if (spec.rfind("ball:", 0) == 0) {
    int r = std::stoi(spec.substr(5));
    if (r < 0) throw std::invalid_argument("window: negative ball radius");
    return ball(graph, graph.root(), r);
  }
  throw std::invalid_argument("window: expected 'all' or 'ball:r', got '" + spec + "'");
}

int DirichletWindow::local_index(Vertex v) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
  if (it == vertices_.end() || *it != v) return -1;
  return static_cast<int>(it - vertices_.begin());
}

bool DirichletWindow::connected() const {
  std::vector<char> seen(vertices_.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (Vertex y : graph_->neighbors(vertices_[i])) {
      int j = local_index(y);
      if (j < 0 || seen[j]) continue;
      seen[j] = 1;
      ++count;
      stack.push_back(j);
    }
  }
  return count == vertices_.size();
}

Hamiltonian hamiltonian_matrix(const DirichletWindow& window, std::span<const double> q) {
  const RootedGraph& g = window.graph();
  if (q.size() != g.size()) throw std::invalid_argument("hamiltonian: q must be indexed by graph vertex");
  const auto& verts = window.vertices();
  Hamiltonian h;
  std::vector<int> position(verts.size(), -1);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    double qi = q[static_cast<std::size_t>(verts[i])];
    if (std::isnan(qi) || qi == std::numeric_limits<double>::infinity())
      throw std::invalid_argument("hamiltonian: q must be finite or -infinity");
    if (qi == kMinusInfinity) continue;
    position[i] = static_cast<int>(h.kept.size());
    h.kept.push_back(static_cast<int>(i));
  }
  const auto m = static_cast<Eigen::Index>(h.kept.size());
  h.degree.resize(m);
  std::vector<Eigen::Triplet<double>> tm, ts;
  for (Eigen::Index a = 0; a < m; ++a) {
    Vertex x = verts[h.kept[a]];
    const double dx = std::max(1, g.degree(x));
    h.degree[a] = dx;
    const double qx = q[static_cast<std::size_t>(x)];
    // an isolated vertex (one-vertex graph) has no Laplacian part
    const double diag = g.degree(x) > 0 ? qx - 1.0 : qx;
    tm.emplace_back(a, a, diag);
    ts.emplace_back(a, a, diag);
    for (Vertex y : g.neighbors(x)) {
      int j = window.local_index(y);
      if (j < 0 || position[j] < 0) continue;
      const double dy = g.degree(y);
      tm.emplace_back(a, position[j], 1.0 / dx);
      ts.emplace_back(a, position[j], 1.0 / std::sqrt(dx * dy));
    }
  }
  h.M.resize(m, m);
  h.S.resize(m, m);
  h.M.setFromTriplets(tm.begin(), tm.end());
  h.S.setFromTriplets(ts.begin(), ts.end());
  return h;
}

namespace {

void make_nonnegative(Eigen::VectorXd& phi) {
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = std::abs(phi[i]);
}

Eigenpair lift(const Hamiltonian& h, std::size_t window_size, const Eigen::VectorXd& psi, double value) {
  Eigenpair out;
  out.value = value;
  out.phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(window_size));
  for (std::size_t a = 0; a < h.kept.size(); ++a)
    out.phi[h.kept[a]] = psi[static_cast<Eigen::Index>(a)] / std::sqrt(h.degree[static_cast<Eigen::Index>(a)]);
  make_nonnegative(out.phi);
  return out;
}

}  // namespace

Eigenpair principal_eigenpair(const DirichletWindow& window, std::span<const double> q, const SpectralOptions& opts) {
  Hamiltonian h = hamiltonian_matrix(window, q);
  if (h.kept.empty()) {
    Eigenpair out;
    out.phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(window.size()));
    return out;
  }
  if (h.kept.size() <= opts.dense_threshold) {
    Eigen::MatrixXd dense(h.S);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) throw std::runtime_error("principal_eigenpair: dense eigensolver failed");
    const Eigen::Index top = dense.rows() - 1;
    Eigenpair out = lift(h, window.size(), solver.eigenvectors().col(top), solver.eigenvalues()[top]);
    out.iterations = 1;
    return out;
  }
  Eigen::VectorXd start = h.degree.cwiseSqrt();
  Eigenpair inner = lanczos_top(h.S, opts, &start);
  Eigenpair out = lift(h, window.size(), inner.phi, inner.value);
  out.iterations = inner.iterations;
  out.residual = inner.residual;
  return out;
}

EigenSystem full_spectrum(const DirichletWindow& window, std::span<const double> q, std::size_t max_size) {
  if (window.size() > max_size)
    throw std::invalid_argument("full_spectrum: window of size " + std::to_string(window.size()) +
                                " exceeds the dense bound " + std::to_string(max_size));
  Hamiltonian h = hamiltonian_matrix(window, q);
  const auto m = static_cast<Eigen::Index>(h.kept.size());
  const auto n = static_cast<Eigen::Index>(window.size());
  EigenSystem sys;
  sys.degree.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    sys.degree[i] = std::max(1, window.graph().degree(window.vertices()[static_cast<std::size_t>(i)]));
  sys.values.resize(m);
  sys.phi = Eigen::MatrixXd::Zero(n, m);
  if (m == 0) return sys;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver{Eigen::MatrixXd(h.S)};
  if (solver.info() != Eigen::Success) throw std::runtime_error("full_spectrum: eigensolver failed");
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index src = m - 1 - k;
    sys.values[k] = solver.eigenvalues()[src];
    Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < m; ++a)
      col[h.kept[static_cast<std::size_t>(a)]] = solver.eigenvectors()(a, src) / std::sqrt(h.degree[a]);
    const double scale = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col[i]) > 1e-10 * scale) {
        if (col[i] < 0) col = -col;
        break;
      }
    }
    sys.phi.col(k) = col;
  }
  return sys;
}

SpectralBoundsCheck spectral_bounds_check(const DirichletWindow& window, std::span<const double> q,
                                          const std::vector<Vertex>* gamma, double tol) {
  SpectralBoundsCheck out;
  out.upper = kMinusInfinity;
  for (Vertex v : window.vertices()) {
    double qv = q[static_cast<std::size_t>(v)];
    if (qv > out.upper) {
      out.upper = qv;
      out.argmax = v;
    }
  }
  std::vector<Vertex> g_set = gamma ? *gamma : std::vector<Vertex>{out.argmax};
  for (Vertex v : g_set)
    if (!window.contains(v)) throw std::invalid_argument("spectral_bounds_check: Gamma must be inside Lambda");
  DirichletWindow gw(window.graph(), g_set);
  double gmax = kMinusInfinity;
  for (Vertex v : gw.vertices()) gmax = std::max(gmax, q[static_cast<std::size_t>(v)]);
  out.lower = gmax - 1.0;
  out.lambda_gamma = principal_eigenpair(gw, q).value;
  out.lambda = principal_eigenpair(window, q).value;
  auto le = [tol](double a, double b) { return a <= b + tol * std::max(1.0, std::abs(b)); };
  out.pass = le(out.lower, out.lambda_gamma) && le(out.lambda_gamma, out.lambda) && le(out.lambda, out.upper);
  return out;
}

Eigen::VectorXd evolve_spectral(const EigenSystem& sys, int y_local, double t) {
  if (t < 0) throw std::invalid_argument("evolve_spectral: t must be nonnegative");
  const Eigen::Index m = sys.values.size();
  Eigen::VectorXd coeff(m);
  for (Eigen::Index k = 0; k < m; ++k) coeff[k] = std::exp(t * sys.values[k]) * sys.phi(y_local, k);
  Eigen::VectorXd u = sys.phi * coeff;
  return u.cwiseProduct(sys.degree);
}

Eigen::VectorXd evolve_spectral(const DirichletWindow& window, std::span<const double> q, Vertex y, double t) {
  int yl = window.local_index(y);
  if (yl < 0) throw std::invalid_argument("evolve_spectral: y outside the window");
  return evolve_spectral(full_spectrum(window, q), yl, t);
}

ResolventBound resolvent_exit_bound(const DirichletWindow& window, const PotentialField& xi, double gamma) {
  ResolventBound out;
  Hamiltonian h = hamiltonian_matrix(window, xi.values());
  out.lambda = principal_eigenpair(window, xi.values()).value;
  if (!(gamma > out.lambda))
    throw std::invalid_argument("resolvent_exit_bound: gamma must exceed the principal eigenvalue");
  const auto m = static_cast<Eigen::Index>(h.kept.size());
  const RootedGraph& g = window.graph();
  Eigen::VectorXd rhs(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    Vertex x = window.vertices()[static_cast<std::size_t>(h.kept[static_cast<std::size_t>(a)])];
    int outside = 0;
    for (Vertex y : g.neighbors(x))
      if (!window.contains(y)) ++outside;
    // symmetrized system (gamma - S) w = D^{1/2} b with b = outside/deg
    rhs[a] = std::sqrt(h.degree[a]) * outside / h.degree[a];
  }
  SparseMatrix A(m, m);
  A.setIdentity();
  A *= gamma;
  A -= h.S;
  Eigen::SparseMatrix<double> Acol(A);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Acol);
  if (solver.info() != Eigen::Success) throw std::runtime_error("resolvent_exit_bound: factorization failed");
  Eigen::VectorXd w = solver.solve(rhs);
  out.u = w.cwiseQuotient(h.degree.cwiseSqrt());
  out.rhs = 1.0 + static_cast<double>(window.size()) / (gamma - out.lambda);
  out.max_lhs = m > 0 ? out.u.maxCoeff() : 0.0;
  out.pass = out.max_lhs <= out.rhs * (1.0 + 1e-12);
  return out;
}

SolutionSandwich solution_sandwich_check(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                                         double tol) {
  int yl = window.local_index(y);
  if (yl < 0) throw std::invalid_argument("solution_sandwich_check: y outside the window");
  EigenSystem sys = full_spectrum(window, xi.values());
  Eigen::VectorXd u = evolve_spectral(sys, yl, t);
  SolutionSandwich out;
  const double phi1 = sys.values.size() > 0 ? std::abs(sys.phi(yl, 0)) : 0.0;
  out.lower = sys.values.size() > 0 ? std::exp(t * sys.values[0]) * phi1 * phi1 : 0.0;
  out.mid = u[yl];
  out.upper = u.sum();
  out.pass = out.lower <= out.mid * (1.0 + tol) && out.mid <= out.upper * (1.0 + tol);
  return out;
}

IslandScan island_eigenvalue_scan(const RootedGraph& g, const IslandSystem& islands, const PotentialField& xi,
                                  double chi_tilde, double eps) {
  IslandScan out;
  for (const auto& comp : islands.components) {
    DirichletWindow w(g, comp.vertices);
    double lam = principal_eigenpair(w, xi.values()).value;
    out.lambdas.push_back(lam);
    out.max_lambda = std::max(out.max_lambda, lam);
  }
  out.reference = islands.a_L - chi_tilde + eps;
  out.margin = islands.a_L - out.max_lambda;
  out.below_reference = out.max_lambda <= out.reference;
  return out;
}

}  // namespace gwpam
