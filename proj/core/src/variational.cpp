#include "gwpam/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gwpam/rng.hpp"

namespace gwpam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

std::vector<double> log_profile(std::span<const double> p, double rho) {
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[i] > 0.0 ? rho * std::log(p[i]) : kMinusInfinity;
  return q;
}

// Constraint set: sum_free w phi^2 = free_mass, phi_fixed pinned.
struct Constraint {
  int fixed = -1;
  double fixed_phi = 0.0;
  double free_mass = 1.0;
};

struct Descent {
  std::vector<double> phi;
  std::vector<double> G;  // projected gradient in the w-metric
  double F = kInf;
  double step = 1.0;
  int iterations = 0;
  int flat = 0;
  bool done = false;
  bool converged = false;
};

class Solver {
 public:
  Solver(const ChiProblem& problem, double rho, Constraint c) : P_(problem), rho_(rho), c_(c) {
    const std::size_t n = P_.size();
    start_.assign(n + 1, 0);
    for (auto [a, b] : P_.edges) {
      ++start_[static_cast<std::size_t>(a) + 1];
      ++start_[static_cast<std::size_t>(b) + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    nbr_.resize(start_.back());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (auto [a, b] : P_.edges) {
      nbr_[static_cast<std::size_t>(fill[a]++)] = b;
      nbr_[static_cast<std::size_t>(fill[b]++)] = a;
    }
  }

  double F(const std::vector<double>& phi) const {
    double s = 0.0;
    for (auto [a, b] : P_.edges) {
      const double d = phi[a] - phi[b];
      s += d * d;
    }
    for (std::size_t x = 0; x < phi.size(); ++x) {
      const double pw = P_.weight[x] * phi[x] * phi[x];
      s += P_.leak[x] * phi[x] * phi[x] - rho_ * plogp(pw);
    }
    return s;
  }

  void gradient(const std::vector<double>& phi, std::vector<double>& G) const {
    const std::size_t n = phi.size();
    G.assign(n, 0.0);
    double num = 0.0, den = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      double lap = 0.0;
      for (std::size_t k = start_[x]; k < start_[x + 1]; ++k) lap += phi[x] - phi[static_cast<std::size_t>(nbr_[k])];
      double g = 2.0 * (lap + P_.leak[x] * phi[x]);
      const double pw = P_.weight[x] * phi[x] * phi[x];
      if (pw > 0.0) g -= 2.0 * rho_ * P_.weight[x] * phi[x] * (std::log(pw) + 1.0);
      G[x] = g / P_.weight[x];
      if (static_cast<int>(x) != c_.fixed) {
        num += P_.weight[x] * G[x] * phi[x];
        den += P_.weight[x] * phi[x] * phi[x];
      }
    }
    const double coef = den > 0.0 ? num / den : 0.0;
    for (std::size_t x = 0; x < n; ++x) G[x] = static_cast<int>(x) == c_.fixed ? 0.0 : G[x] - coef * phi[x];
  }

  double wnorm2(const std::vector<double>& v) const {
    double s = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x) s += P_.weight[x] * v[x] * v[x];
    return s;
  }

  // Projects onto the constraint set; false if the free part vanished.
  bool retract(std::vector<double>& phi) const {
    double s = 0.0;
    for (std::size_t x = 0; x < phi.size(); ++x) {
      phi[x] = std::abs(phi[x]);
      if (static_cast<int>(x) != c_.fixed) s += P_.weight[x] * phi[x] * phi[x];
    }
    if (c_.fixed >= 0) phi[static_cast<std::size_t>(c_.fixed)] = c_.fixed_phi;
    if (c_.free_mass <= 0.0) {
      for (std::size_t x = 0; x < phi.size(); ++x)
        if (static_cast<int>(x) != c_.fixed) phi[x] = 0.0;
      return true;
    }
    if (s <= 0.0 || !std::isfinite(s)) return false;
    const double scale = std::sqrt(c_.free_mass / s);
    for (std::size_t x = 0; x < phi.size(); ++x)
      if (static_cast<int>(x) != c_.fixed) phi[x] *= scale;
    return true;
  }

  std::vector<double> phi_from_p(std::span<const double> p) const {
    std::vector<double> phi(p.size());
    for (std::size_t x = 0; x < p.size(); ++x) phi[x] = std::sqrt(std::max(p[x], 0.0) / P_.weight[x]);
    return phi;
  }

  std::vector<double> p_from_phi(const std::vector<double>& phi) const {
    std::vector<double> p(phi.size());
    for (std::size_t x = 0; x < phi.size(); ++x) p[x] = P_.weight[x] * phi[x] * phi[x];
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (c_.fixed < 0) {
      for (double& v : p) v /= total;
    } else {
      const double b = 1.0 - c_.free_mass;
      const double free = total - p[static_cast<std::size_t>(c_.fixed)];
      for (std::size_t x = 0; x < p.size(); ++x)
        p[x] = static_cast<int>(x) == c_.fixed ? b : (free > 0.0 ? p[x] * c_.free_mass / free : 0.0);
    }
    return p;
  }

  Descent start(std::vector<double> phi) const {
    Descent d;
    if (!retract(phi)) phi = phi_from_p(uniform_p());
    retract(phi);
    d.phi = std::move(phi);
    d.F = F(d.phi);
    gradient(d.phi, d.G);
    d.step = 1.0;
    return d;
  }

  void run(Descent& d, int iterations, double tol) const {
    std::vector<double> cand, Gc;
    for (int it = 0; it < iterations && !d.done; ++it) {
      const double g2 = wnorm2(d.G);
      if (std::sqrt(g2) <= tol) {
        d.done = d.converged = true;
        break;
      }
      double s = d.step;
      bool accepted = false;
      double Fc = kInf;
      for (int bt = 0; bt < 60; ++bt) {
        cand = d.phi;
        for (std::size_t x = 0; x < cand.size(); ++x) cand[x] -= s * d.G[x];
        if (retract(cand)) {
          Fc = F(cand);
          if (Fc <= d.F - 1e-4 * s * g2) {
            accepted = true;
            break;
          }
        }
        s *= 0.5;
      }
      ++d.iterations;
      if (!accepted) {
        // no descent at machine precision
        d.done = true;
        d.converged = std::sqrt(g2) <= std::sqrt(tol);
        break;
      }
      gradient(cand, Gc);
      double sy = 0.0, ss = 0.0;
      for (std::size_t x = 0; x < cand.size(); ++x) {
        const double dp = cand[x] - d.phi[x];
        ss += P_.weight[x] * dp * dp;
        sy += P_.weight[x] * dp * (Gc[x] - d.G[x]);
      }
      const double decrease = d.F - Fc;
      d.phi.swap(cand);
      d.G.swap(Gc);
      d.F = Fc;
      d.step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e6) : std::min(4.0 * s, 1e6);
      d.flat = decrease <= 1e-16 * std::max(1.0, std::abs(d.F)) ? d.flat + 1 : 0;
      if (d.flat >= 20) {
        d.done = true;
        d.converged = std::sqrt(wnorm2(d.G)) <= std::sqrt(tol);
      }
    }
  }

  std::vector<double> uniform_p() const {
    std::vector<double> p(P_.size(), 0.0);
    double s = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x)
      if (static_cast<int>(x) != c_.fixed) s += P_.weight[x];
    for (std::size_t x = 0; x < p.size(); ++x)
      if (static_cast<int>(x) != c_.fixed) p[x] = P_.weight[x] / s;
    return p;
  }

  std::vector<double> softened_point(std::size_t x) const {
    std::vector<double> p(P_.size(), 0.0);
    double nw = 0.0;
    for (std::size_t k = start_[x]; k < start_[x + 1]; ++k) nw += P_.weight[static_cast<std::size_t>(nbr_[k])];
    if (nw == 0.0) {
      p[x] = 1.0;
      return p;
    }
    p[x] = 0.7;
    for (std::size_t k = start_[x]; k < start_[x + 1]; ++k) {
      auto y = static_cast<std::size_t>(nbr_[k]);
      p[y] += 0.3 * P_.weight[y] / nw;
    }
    return p;
  }

  const ChiProblem& problem() const { return P_; }
  const Constraint& constraint() const { return c_; }

 private:
  const ChiProblem& P_;
  double rho_;
  Constraint c_;
  std::vector<std::size_t> start_;
  std::vector<int> nbr_;
};

struct Candidate {
  double value = kInf;
  double entropy = 0.0;
  std::vector<double> p;
  double stationarity = 0.0;
  bool converged = false;
};

bool better(const Candidate& a, const Candidate& b) {
  if (!std::isfinite(b.value)) return std::isfinite(a.value) || b.p.empty();
  const double tie = 1e-12 * std::max(1.0, std::abs(b.value));
  if (a.value < b.value - tie) return true;
  if (a.value > b.value + tie) return false;
  if (a.entropy > b.entropy + 1e-12) return true;
  if (a.entropy < b.entropy - 1e-12) return false;
  return a.p < b.p;
}

ChiResult solve(const ChiProblem& P, double rho, Constraint c, const ChiOptions& opts) {
  const std::size_t n = P.size();
  Solver solver(P, rho, c);
  std::vector<std::vector<double>> starts;
  starts.push_back(solver.uniform_p());
  const std::size_t points = std::min(n, opts.point_start_cap);
  for (std::size_t x = 0; x < points; ++x)
    if (static_cast<int>(x) != c.fixed) starts.push_back(solver.softened_point(x));
  Rng rng(derive_seed(opts.seed, 0x6368));
  std::exponential_distribution<double> expo(1.0);
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> p(n);
    for (double& v : p) v = expo(rng);
    starts.push_back(std::move(p));
  }
  for (const auto& p : opts.initial) {
    if (p.size() != n) throw std::invalid_argument("chi_direct: initial p has wrong size");
    starts.push_back(p);
  }

  std::vector<Descent> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    runs[i] = solver.start(solver.phi_from_p(starts[i]));
    solver.run(runs[i], opts.screen_iters, opts.tol);
  });
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return runs[a].F < runs[b].F; });
  const std::size_t keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(1, opts.keep)));
  // user-supplied starts are always carried to convergence
  std::vector<std::size_t> finals(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  for (std::size_t i = starts.size() - opts.initial.size(); i < starts.size(); ++i)
    if (std::find(finals.begin(), finals.end(), i) == finals.end()) finals.push_back(i);
  parallel_for(finals.size(), [&](std::size_t k) {
    Descent& d = runs[finals[k]];
    solver.run(d, opts.max_iter, opts.tol);
  });

  int total_iterations = 0;
  for (const auto& d : runs) total_iterations += d.iterations;

  auto make = [&](std::vector<double> p, double stationarity, bool converged) {
    Candidate cand;
    cand.value = P.objective(p, rho);
    cand.entropy = J_V(p);
    cand.p = std::move(p);
    cand.stationarity = stationarity;
    cand.converged = converged;
    return cand;
  };

  Candidate best;
  for (std::size_t i : finals) {
    const Descent& d = runs[i];
    auto cand = make(solver.p_from_phi(d.phi), std::sqrt(solver.wnorm2(d.G)), d.converged);
    if (better(cand, best)) best = std::move(cand);
  }
  // exact point masses (and the user starts as given) bound the result
  if (c.fixed < 0) {
    for (std::size_t x = 0; x < n; ++x) {
      std::vector<double> p(n, 0.0);
      p[x] = 1.0;
      auto cand = make(std::move(p), 0.0, true);
      if (better(cand, best)) best = std::move(cand);
    }
    for (const auto& p0 : opts.initial) {
      std::vector<double> p = p0;
      const double s = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& v : p) v /= s;
      auto cand = make(std::move(p), kInf, false);
      if (better(cand, best)) best = std::move(cand);
    }
  } else {
    const double b = 1.0 - c.free_mass;
    for (std::size_t x = 0; x < n; ++x) {
      if (static_cast<int>(x) == c.fixed) continue;
      std::vector<double> p(n, 0.0);
      p[static_cast<std::size_t>(c.fixed)] = b;
      p[x] = c.free_mass;
      auto cand = make(std::move(p), 0.0, true);
      if (better(cand, best)) best = std::move(cand);
    }
  }

  ChiResult out;
  out.value = best.value;
  out.p = best.p;
  out.q = log_profile(out.p, rho);
  out.trace.iterations = total_iterations;
  out.trace.restarts = static_cast<int>(starts.size());
  out.trace.stationarity = best.stationarity;
  out.trace.converged = best.converged || best.stationarity == 0.0;
  out.trace.gap = 0.0;
  out.trace.method = "direct";
  return out;
}

std::vector<double> to_global(const std::vector<Vertex>& vertices, std::size_t n, const std::vector<double>& local,
                              double fill) {
  std::vector<double> out(n, fill);
  for (std::size_t i = 0; i < vertices.size(); ++i) out[static_cast<std::size_t>(vertices[i])] = local[i];
  return out;
}

std::vector<std::vector<double>> to_local(const std::vector<Vertex>& vertices,
                                          const std::vector<std::vector<double>>& global) {
  std::vector<std::vector<double>> out;
  for (const auto& g : global) {
    std::vector<double> l(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) l[i] = g.at(static_cast<std::size_t>(vertices[i]));
    out.push_back(std::move(l));
  }
  return out;
}

ChiResult globalise(const ChiProblem& P, std::size_t n, ChiResult r, double rho) {
  r.p = to_global(P.vertices, n, r.p, 0.0);
  r.q = log_profile(r.p, rho);
  return r;
}

}  // namespace

double I_E(const RootedGraph& g, std::span<const double> p) {
  if (p.size() != g.size()) throw std::invalid_argument("I_E: p has wrong size");
  double s = 0.0;
  for (auto [x, y] : g.edges()) {
    const double d = std::sqrt(p[static_cast<std::size_t>(x)] / g.degree(x)) -
                     std::sqrt(p[static_cast<std::size_t>(y)] / g.degree(y));
    s += d * d;
  }
  return s;
}

double J_V(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s -= plogp(v);
  return s;
}

ProbabilityVector::ProbabilityVector(std::vector<double> p, double tol) : p_(std::move(p)) {
  double s = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("ProbabilityVector: entries must be finite and >= 0");
    s += v;
  }
  if (std::abs(s - 1.0) > tol) throw std::invalid_argument("ProbabilityVector: entries must sum to 1");
}

std::vector<std::size_t> ProbabilityVector::support() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p_.size(); ++i)
    if (p_[i] > 0.0) out.push_back(i);
  return out;
}

double PotentialProfile::L_value() const {
  double s = 0.0;
  for (double v : q)
    if (v != kMinusInfinity) s += std::exp(v / rho);
  return s;
}

PotentialProfile PotentialProfile::from_probability(std::span<const double> p, double rho) {
  return PotentialProfile{log_profile(p, rho), rho};
}

double ChiProblem::energy(std::span<const double> p) const {
  if (p.size() != size()) throw std::invalid_argument("ChiProblem: p has wrong size");
  auto phi = [&](int x) { return std::sqrt(std::max(p[static_cast<std::size_t>(x)], 0.0) / weight[static_cast<std::size_t>(x)]); };
  double s = 0.0;
  for (auto [a, b] : edges) {
    const double d = phi(a) - phi(b);
    s += d * d;
  }
  for (std::size_t x = 0; x < size(); ++x) s += leak[x] * std::max(p[x], 0.0) / weight[x];
  return s;
}

double ChiProblem::objective(std::span<const double> p, double rho) const { return energy(p) + rho * J_V(p); }

ChiProblem ChiProblem::from_graph(const RootedGraph& g) {
  ChiProblem P;
  const std::size_t n = g.size();
  P.weight.resize(n);
  P.leak.assign(n, 0.0);
  P.vertices.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    const int d = g.degree(static_cast<Vertex>(x));
    // an isolated vertex carries unit weight
    P.weight[x] = d > 0 ? d : 1.0;
    P.vertices[x] = static_cast<Vertex>(x);
  }
  for (auto [x, y] : g.edges()) P.edges.emplace_back(x, y);
  return P;
}

ChiProblem ChiProblem::from_window(const DirichletWindow& window) {
  const RootedGraph& g = window.graph();
  ChiProblem P;
  P.vertices = window.vertices();
  const std::size_t n = P.vertices.size();
  P.weight.resize(n);
  P.leak.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex x = P.vertices[i];
    const int d = g.degree(x);
    P.weight[i] = d > 0 ? d : 1.0;
    for (Vertex y : g.neighbors(x)) {
      const int j = window.local_index(y);
      if (j < 0)
        P.leak[i] += 1.0;
      else if (static_cast<std::size_t>(j) > i)
        P.edges.emplace_back(static_cast<int>(i), j);
    }
  }
  return P;
}

ChiProblem ChiProblem::unnormalised(const DirichletWindow& window) {
  ChiProblem P = from_window(window);
  std::fill(P.weight.begin(), P.weight.end(), 1.0);
  return P;
}

nlohmann::json ChiResult::to_json() const {
  nlohmann::json qj = nlohmann::json::array();
  for (double v : q) qj.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("-inf"));
  return {{"value", value},
          {"p", p},
          {"q", qj},
          {"trace",
           {{"method", trace.method},
            {"iterations", trace.iterations},
            {"restarts", trace.restarts},
            {"gap", trace.gap},
            {"stationarity", trace.stationarity},
            {"converged", trace.converged}}}};
}

ChiResult chi_direct(const ChiProblem& problem, double rho, const ChiOptions& opts) {
  if (!(rho > 0.0)) throw std::invalid_argument("chi_direct: rho must be positive");
  if (problem.size() == 0) throw std::invalid_argument("chi_direct: empty problem");
  return solve(problem, rho, Constraint{}, opts);
}

ChiResult chi_direct(const RootedGraph& g, double rho, const ChiOptions& opts) {
  return chi_direct(ChiProblem::from_graph(g), rho, opts);
}

ChiResult chi_direct(const DirichletWindow& window, double rho, const ChiOptions& opts) {
  ChiProblem P = ChiProblem::from_window(window);
  ChiOptions local = opts;
  local.initial = to_local(P.vertices, opts.initial);
  return globalise(P, window.graph().size(), chi_direct(P, rho, local), rho);
}

ChiResult chi_unnormalised(const DirichletWindow& window, double rho, const ChiOptions& opts) {
  ChiProblem P = ChiProblem::unnormalised(window);
  ChiOptions local = opts;
  local.initial = to_local(P.vertices, opts.initial);
  return globalise(P, window.graph().size(), chi_direct(P, rho, local), rho);
}

namespace {

struct DualRun {
  double lambda = kMinusInfinity;
  std::vector<double> p;  // window positions
  int iterations = 0;
  double residual = kInf;
  bool converged = false;
};

DualRun dual_iterate(const DirichletWindow& window, const Eigen::VectorXd& degree, double rho,
                     std::vector<double> p0, const DualOptions& opts) {
  const std::size_t n = window.size();
  const std::size_t N = window.graph().size();
  const auto& verts = window.vertices();
  std::vector<double> q_global(N, 0.0);
  std::vector<double> q(n);
  auto normalise = [&](std::vector<double>& qq) {
    double m = *std::max_element(qq.begin(), qq.end());
    double s = 0.0;
    for (double v : qq) s += std::exp((v - m) / rho);
    const double shift = m + rho * std::log(s);
    for (double& v : qq) v -= shift;
  };
  for (std::size_t i = 0; i < n; ++i) q[i] = rho * std::log(std::max(p0[i], opts.floor));
  normalise(q);

  DualRun run;
  std::vector<double> p(n), p_prev(n, -1.0);
  double lambda_prev = kMinusInfinity;
  for (int it = 0; it < opts.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) q_global[static_cast<std::size_t>(verts[i])] = q[i];
    Eigenpair e = principal_eigenpair(window, q_global, opts.spectral);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = degree[static_cast<Eigen::Index>(i)] * e.phi[static_cast<Eigen::Index>(i)] *
             e.phi[static_cast<Eigen::Index>(i)];
      s += p[i];
    }
    for (double& v : p) v /= s;
    double dp = 0.0;
    for (std::size_t i = 0; i < n; ++i) dp = std::max(dp, std::abs(p[i] - p_prev[i]));
    run.iterations = it + 1;
    run.lambda = e.value;
    run.residual = dp;
    if (dp <= opts.tol && std::abs(e.value - lambda_prev) <= opts.tol * std::max(1.0, std::abs(e.value))) {
      run.converged = true;
      break;
    }
    lambda_prev = e.value;
    p_prev = p;
    for (std::size_t i = 0; i < n; ++i)
      q[i] = (1.0 - opts.eta) * q[i] + opts.eta * rho * std::log(std::max(p[i], opts.floor));
    normalise(q);
  }
  // evaluate at the stationary profile of the final p
  for (std::size_t i = 0; i < n; ++i)
    q_global[static_cast<std::size_t>(verts[i])] = rho * std::log(std::max(p[i], opts.floor));
  Eigenpair e = principal_eigenpair(window, q_global, opts.spectral);
  run.lambda = e.value;
  run.p.resize(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    run.p[i] = degree[static_cast<Eigen::Index>(i)] * e.phi[static_cast<Eigen::Index>(i)] *
               e.phi[static_cast<Eigen::Index>(i)];
    s += run.p[i];
  }
  for (double& v : run.p) v /= s;
  return run;
}

}  // namespace

ChiResult chi_dual_fixed_point(const DirichletWindow& window, double rho, const DualOptions& opts) {
  if (!(rho > 0.0)) throw std::invalid_argument("chi_dual_fixed_point: rho must be positive");
  if (!window.connected()) throw std::invalid_argument("chi_dual_fixed_point: window must be connected");
  if (!(opts.eta > 0.0 && opts.eta <= 1.0)) throw std::invalid_argument("chi_dual_fixed_point: eta must be in (0,1]");
  const std::size_t n = window.size();
  const RootedGraph& g = window.graph();
  Eigen::VectorXd degree(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const int d = g.degree(window.vertices()[i]);
    degree[static_cast<Eigen::Index>(i)] = d > 0 ? d : 1.0;
  }
  std::vector<std::vector<double>> starts;
  {
    std::vector<double> p(n);
    const double s = degree.sum();
    for (std::size_t i = 0; i < n; ++i) p[i] = degree[static_cast<Eigen::Index>(i)] / s;
    starts.push_back(p);
    const std::size_t points = n > 1 ? std::min(n, opts.point_start_cap) : 0;
    for (std::size_t x = 0; x < points; ++x) {
      std::vector<double> pp(n);
      for (std::size_t i = 0; i < n; ++i) pp[i] = 0.1 * p[i] + (i == x ? 0.9 : 0.0);
      starts.push_back(std::move(pp));
    }
  }
  std::vector<DualRun> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { runs[i] = dual_iterate(window, degree, rho, starts[i], opts); });

  ChiProblem P = ChiProblem::from_window(window);
  std::size_t best = 0;
  int total = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    total += runs[i].iterations;
    if (runs[i].lambda > runs[best].lambda + 1e-14 * std::max(1.0, std::abs(runs[best].lambda)) ||
        (std::abs(runs[i].lambda - runs[best].lambda) <= 1e-14 * std::max(1.0, std::abs(runs[best].lambda)) &&
         J_V(runs[i].p) > J_V(runs[best].p) + 1e-12))
      best = i;
  }
  const DualRun& r = runs[best];
  ChiResult out;
  out.value = -r.lambda;
  out.p = to_global(P.vertices, g.size(), r.p, 0.0);
  out.q = log_profile(out.p, rho);
  out.trace.method = "dual";
  out.trace.iterations = total;
  out.trace.restarts = static_cast<int>(starts.size());
  out.trace.stationarity = r.residual;
  out.trace.gap = std::abs(out.value - P.objective(r.p, rho));
  out.trace.converged = r.converged && out.trace.gap <= 1e-8;
  return out;
}

ChiResult chi_dual_fixed_point(const RootedGraph& g, double rho, const DualOptions& opts) {
  return chi_dual_fixed_point(DirichletWindow::whole(g), rho, opts);
}

ChiResult chi_window(const DirichletWindow& window, double rho, const ChiOptions& direct, const DualOptions& dual) {
  ChiResult a = chi_direct(window, rho, direct);
  ChiResult b = chi_dual_fixed_point(window, rho, dual);
  // the dual value is attained at its returned p only up to its gap
  if (b.value + b.trace.gap < a.value - 1e-13) {
    ChiProblem P = ChiProblem::from_window(window);
    std::vector<double> local(P.size());
    for (std::size_t i = 0; i < P.size(); ++i) local[i] = b.p[static_cast<std::size_t>(P.vertices[i])];
    b.value = P.objective(local, rho);
    if (b.value < a.value) return b;
  }
  return a;
}

ChiResult chi_boundary_result(const ChiProblem& problem, int x_local, double b, double rho, const ChiOptions& opts) {
  if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("chi_boundary: b must lie in [0,1]");
  if (!(rho > 0.0)) throw std::invalid_argument("chi_boundary: rho must be positive");
  const std::size_t n = problem.size();
  if (x_local < 0 || static_cast<std::size_t>(x_local) >= n) throw std::out_of_range("chi_boundary: vertex out of range");
  ChiResult out;
  out.trace.method = "boundary";
  if (b == 1.0 || n == 1) {
    if (b < 1.0) {
      out.value = kInf;
      out.trace.converged = true;
      return out;
    }
    out.p.assign(n, 0.0);
    out.p[static_cast<std::size_t>(x_local)] = 1.0;
    out.value = problem.objective(out.p, rho);
    out.q = log_profile(out.p, rho);
    out.trace.converged = true;
    return out;
  }
  Constraint c;
  c.fixed = x_local;
  c.fixed_phi = std::sqrt(b / problem.weight[static_cast<std::size_t>(x_local)]);
  c.free_mass = 1.0 - b;
  ChiOptions local = opts;
  local.initial.clear();
  out = solve(problem, rho, c, local);
  out.trace.method = "boundary";
  return out;
}

double chi_boundary(const ChiProblem& problem, int x_local, double b, double rho, const ChiOptions& opts) {
  return chi_boundary_result(problem, x_local, b, rho, opts).value;
}

double chi_boundary(const RootedGraph& g, Vertex x, double b, double rho, const ChiOptions& opts) {
  return chi_boundary(ChiProblem::from_graph(g), x, b, rho, opts);
}

}  // namespace gwpam
