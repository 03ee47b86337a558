#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include "gwpam/rng.hpp"
#include "gwpam/variational.hpp"

namespace gwpam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

// Golden-section minimum of f on [lo, hi].
std::pair<double, double> golden(const std::function<double(double)>& f, double lo, double hi, int steps) {
  double a = lo, b = hi;
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < steps; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  std::pair<double, double> best{lo, f(lo)};
  for (double x : {hi, c, d}) {
    const double v = f(x);
    if (v < best.second) best = {x, v};
  }
  return best;
}

// One glued piece: h(b) = chi^{(y,b)} with Gbar degrees.
struct PieceFunction {
  ChiProblem problem;
  int y = 0;
  double w = 1.0;
  double rho = 1.0;
  ChiOptions opts;
  std::vector<double> nodes;  // sorted b values
  std::vector<double> grid;   // h at the nodes
  mutable std::map<double, double> cache;

  double operator()(double b) const {
    b = std::clamp(b, 0.0, 1.0);
    if (auto it = cache.find(b); it != cache.end()) return it->second;
    const double v = chi_boundary(problem, y, b, rho, opts);
    cache.emplace(b, v);
    return v;
  }
};

// min over b of a h(b) + (sqrt(a b / w) - sqrt(a0 / k))^2
double inner_term(const PieceFunction& h, double a, double a0, double k, bool exact, double* b_out) {
  const double hub = std::sqrt(std::max(a0, 0.0) / k);
  if (a <= 0.0) {
    if (b_out) *b_out = 0.0;
    return hub * hub;
  }
  auto term = [&](double b, double hv) {
    if (!std::isfinite(hv)) return kInf;
    const double d = std::sqrt(a * b / h.w) - hub;
    return a * hv + d * d;
  };
  const std::size_t B = h.nodes.size() - 1;
  std::size_t jbest = 0;
  double vbest = kInf;
  for (std::size_t j = 0; j <= B; ++j) {
    const double v = term(h.nodes[j], h.grid[j]);
    if (v < vbest) {
      vbest = v;
      jbest = j;
    }
  }
  double bbest = h.nodes[jbest];
  if (exact && std::isfinite(vbest)) {
    const double lo = h.nodes[jbest > 0 ? jbest - 1 : 0], hi = h.nodes[std::min(jbest + 1, B)];
    auto [bx, vx] = golden([&](double b) { return term(b, h(b)); }, lo, hi, 30);
    if (vx < vbest) {
      vbest = vx;
      bbest = bx;
    }
  }
  if (b_out) *b_out = bbest;
  return vbest;
}

double star_rhs(const std::vector<PieceFunction>& pieces, const std::vector<double>& a, double rho, bool exact,
                std::vector<double>* b_out) {
  const double k = static_cast<double>(pieces.size());
  double sum_a = 0.0;
  for (double v : a) {
    if (v < 0.0) return kInf;
    sum_a += v;
  }
  if (sum_a > 1.0 + 1e-15) return kInf;
  const double a0 = std::max(0.0, 1.0 - sum_a);
  double total = a0 > 0.0 ? -rho * a0 * std::log(a0) : 0.0;
  if (b_out) b_out->assign(pieces.size(), 0.0);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    double b = 0.0;
    const double t = inner_term(pieces[i], a[i], a0, k, exact, &b);
    if (!std::isfinite(t)) return kInf;
    total += t;
    if (a[i] > 0.0) total -= rho * a[i] * std::log(a[i]);
    if (b_out) (*b_out)[i] = b;
  }
  return total;
}

void simplex_grid(std::size_t k, int steps, std::vector<double>& cur, int remaining,
                  const std::function<void(const std::vector<double>&)>& visit) {
  if (cur.size() == k) {
    visit(cur);
    return;
  }
  for (int s = 0; s <= remaining; ++s) {
    cur.push_back(static_cast<double>(s) / steps);
    simplex_grid(k, steps, cur, remaining - s, visit);
    cur.pop_back();
  }
}

}  // namespace

GlueTwoReport glue_two_check(const RootedGraph& g1, Vertex x1, const RootedGraph& g2, Vertex x2, double rho,
                             const ChiOptions& opts, double tol) {
  GlueTwoReport rep;
  rep.tol = tol;
  rep.chi1 = chi_direct(g1, rho, opts).value;
  rep.chi2 = chi_direct(g2, rho, opts).value;
  rep.chi_glued = chi_direct(glue_two(g1, x1, g2, x2), rho, opts).value;
  rep.min_pieces = std::min(rep.chi1, rep.chi2);
  rep.pass = rep.chi_glued >= rep.min_pieces - tol;
  return rep;
}

GlueStarReport glue_star_identity(const std::vector<StarPiece>& pieces, double rho, const GlueStarOptions& opts) {
  if (pieces.empty()) throw std::invalid_argument("glue_star_identity: need at least one piece");
  if (opts.a_grid < 1 || opts.b_grid < 1) throw std::invalid_argument("glue_star_identity: grids must be positive");
  GlueStarReport rep;
  rep.lhs = chi_direct(glue_star(pieces), rho, opts.chi).value;

  std::vector<PieceFunction> fns(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    PieceFunction& h = fns[i];
    h.problem = ChiProblem::from_graph(pieces[i].graph);
    h.y = pieces[i].marked;
    h.w = pieces[i].graph.degree(pieces[i].marked) + 1.0;
    h.problem.weight[static_cast<std::size_t>(h.y)] = h.w;
    h.rho = rho;
    h.opts = opts.chi;
    // uniform nodes plus geometric clusters at both ends, where h is steep
    for (int j = 0; j <= opts.b_grid; ++j) h.nodes.push_back(static_cast<double>(j) / opts.b_grid);
    for (double e = 0.5 / opts.b_grid; e > 1e-9; e *= 0.25) {
      h.nodes.push_back(e);
      h.nodes.push_back(1.0 - e);
    }
    std::sort(h.nodes.begin(), h.nodes.end());
    h.nodes.erase(std::unique(h.nodes.begin(), h.nodes.end()), h.nodes.end());
    for (double b : h.nodes) h.grid.push_back(h(b));
  }

  const std::size_t k = pieces.size();
  std::vector<std::pair<double, std::vector<double>>> coarse;
  std::vector<double> cur;
  simplex_grid(k, opts.a_grid, cur, opts.a_grid, [&](const std::vector<double>& a) {
    coarse.emplace_back(star_rhs(fns, a, rho, false, nullptr), a);
  });
  std::stable_sort(coarse.begin(), coarse.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  coarse.resize(std::min<std::size_t>(coarse.size(), static_cast<std::size_t>(std::max(1, opts.starts))));
  // compass search on a with exact inner minimisation, from each coarse candidate
  std::vector<double> best_a = coarse.front().second;
  double best = kInf;
  for (const auto& start : coarse) {
    std::vector<double> at = start.second;
    double val = star_rhs(fns, at, rho, true, nullptr);
    double step = 1.0 / opts.a_grid;
    while (step > 1e-7) {
      bool improved = false;
      for (std::size_t i = 0; i < k; ++i) {
        for (double sign : {1.0, -1.0}) {
          std::vector<double> a = at;
          a[i] = std::clamp(a[i] + sign * step, 0.0, 1.0);
          const double v = star_rhs(fns, a, rho, true, nullptr);
          if (v < val - 1e-15) {
            val = v;
            at = a;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (val < best) {
      best = val;
      best_a = at;
    }
  }
  rep.rhs = star_rhs(fns, best_a, rho, true, &rep.b);
  rep.a = best_a;
  rep.gap = std::abs(rep.lhs - rep.rhs);
  rep.pass = rep.gap <= opts.tol;
  return rep;
}

PropagationReport propagation_check(const std::vector<StarPiece>& pieces, double C, double M, double rho,
                                    const ChiOptions& opts, double tol) {
  if (pieces.size() < 2) throw std::invalid_argument("propagation_check: need k+1 >= 2 pieces");
  PropagationReport rep;
  const std::size_t k = pieces.size() - 1;
  rep.C = C;
  rep.M = M;
  rep.rho_threshold = C / std::log(static_cast<double>(k) + 1.0);
  rep.min_sub_glued = kInf;
  rep.min_pieces = kInf;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    std::vector<StarPiece> rest;
    for (std::size_t i = 0; i < pieces.size(); ++i)
      if (i != j) rest.push_back(pieces[i]);
    rep.min_sub_glued = std::min(rep.min_sub_glued, chi_direct(glue_star(rest), rho, opts).value);
    rep.min_pieces = std::min(rep.min_pieces, chi_direct(pieces[j].graph, rho, opts).value);
  }
  rep.chi_glued = chi_direct(glue_star(pieces), rho, opts).value;
  rep.hypothesis_met = rho >= rep.rho_threshold && rep.min_sub_glued >= M - tol && rep.min_pieces >= M - C - tol;
  rep.conclusion = rep.chi_glued >= M - tol;
  rep.pass = !rep.hypothesis_met || rep.conclusion;
  if (!rep.hypothesis_met) {
    rep.note = "hypothesis not met";
  } else {
    rep.note = rep.conclusion ? "conclusion holds" : "conclusion violated";
  }
  return rep;
}

DirichletWindow completed_ball_window(const RootedGraph& g, int r, int d, RootedGraph& completed) {
  BallView view = ball(g, g.root(), r);
  std::vector<Vertex> map;
  completed = attach_boundary_completion(view, d, 1, &map);
  return DirichletWindow(completed, map);
}

nlohmann::json ChiTildeEstimate::to_json() const {
  return {{"d", d}, {"rho", rho}, {"radii", radii}, {"values", values},
          {"estimate", estimate}, {"gap", gap}, {"monotone", monotone}};
}

ChiTildeEstimate chi_tilde_estimate(int d, double rho, const std::vector<int>& radii, const ChiOptions& direct,
                                    const DualOptions& dual) {
  if (d < 2) throw std::invalid_argument("chi_tilde_estimate: d must be at least 2");
  if (radii.empty()) throw std::invalid_argument("chi_tilde_estimate: no radii");
  ChiTildeEstimate est;
  est.d = d;
  est.rho = rho;
  est.radii = radii;
  std::sort(est.radii.begin(), est.radii.end());
  for (int r : est.radii) {
    RootedGraph tree = canonical_tree(TreeKind::regular, d, r);
    RootedGraph completed;
    DirichletWindow window = completed_ball_window(tree, r, d, completed);
    est.values.push_back(chi_window(window, rho, direct, dual).value);
  }
  for (std::size_t i = 1; i < est.values.size(); ++i)
    if (est.values[i] > est.values[i - 1] + 1e-8) est.monotone = false;
  est.estimate = est.values.back();
  est.gap = est.values.size() > 1 ? std::abs(est.values[est.values.size() - 2] - est.values.back()) : 0.0;
  return est;
}

ScalingCheck scaling_identity_check(int d, double rho, int r, const ChiOptions& opts, double tol) {
  RootedGraph tree = canonical_tree(TreeKind::regular, d, r);
  RootedGraph completed;
  DirichletWindow window = completed_ball_window(tree, r, d, completed);
  ScalingCheck out;
  out.lhs = chi_direct(window, rho, opts).value;
  out.rhs = chi_unnormalised(window, d * rho, opts).value / d;
  out.gap = std::abs(out.lhs - out.rhs);
  out.pass = out.gap <= tol;
  return out;
}

nlohmann::json OrderingReport::to_json() const {
  return {{"d_min", d_min},
          {"rho", rho},
          {"r", r},
          {"threshold", threshold},
          {"above_threshold", above_threshold},
          {"chi_minimal", chi_minimal},
          {"chi_samples", chi_samples},
          {"chi_half", chi_half},
          {"chi_regular", chi_regular},
          {"sandwich_r", sandwich_r},
          {"slack", slack},
          {"ordering_pass", ordering_pass},
          {"sandwich_pass", sandwich_pass}};
}

OrderingReport minimal_tree_ordering(const OffspringLaw& law, double rho, int samples, int r, std::uint64_t seed,
                                     int sandwich_r, const ChiOptions& direct, const DualOptions& dual, double tol,
                                     double slack) {
  OrderingReport rep;
  const int d = law.d_min();
  rep.d_min = d;
  rep.rho = rho;
  rep.r = r;
  rep.slack = slack;
  rep.sandwich_r = sandwich_r;
  rep.threshold = 1.0 / ((d - 1) * std::log(d + 1.0));
  rep.above_threshold = rho >= rep.threshold;

  auto completed_chi = [&](const RootedGraph& g) {
    RootedGraph completed;
    DirichletWindow window = completed_ball_window(g, r, d, completed);
    return chi_window(window, rho, direct, dual).value;
  };
  rep.chi_minimal = completed_chi(canonical_tree(TreeKind::regular, d, r));
  rep.chi_samples.resize(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(rep.chi_samples.size(), [&](std::size_t i) {
    rep.chi_samples[i] = completed_chi(sample_gw_tree(law, r, derive_seed(seed, i)));
  });
  if (rep.above_threshold)
    for (double v : rep.chi_samples)
      if (rep.chi_minimal > v + tol) rep.ordering_pass = false;

  if (sandwich_r > 0) {
    RootedGraph half = canonical_tree(TreeKind::half, d, sandwich_r + 1);
    RootedGraph regular = canonical_tree(TreeKind::regular, d, sandwich_r + 1);
    rep.chi_half = chi_window(DirichletWindow::ball(half, half.root(), sandwich_r), rho, direct, dual).value;
    rep.chi_regular = chi_window(DirichletWindow::ball(regular, regular.root(), sandwich_r), rho, direct, dual).value;
    rep.sandwich_pass = rep.chi_half <= rep.chi_regular + slack &&
                        rep.chi_regular <= rep.chi_half + 1.0 / (d - 1) + slack;
  } else {
    rep.sandwich_pass = true;
  }
  return rep;
}

std::vector<RestrictionRow> restriction_check(const RootedGraph& g, std::span<const double> p, double rho,
                                              const std::vector<int>& radii, double tol) {
  if (p.size() != g.size()) throw std::invalid_argument("restriction_check: p has wrong size");
  const double I_full = I_E(g, p);
  const double J_full = J_V(p);
  int dmin = std::numeric_limits<int>::max();
  for (std::size_t x = 0; x < g.size(); ++x) dmin = std::min(dmin, g.degree(static_cast<Vertex>(x)));
  std::vector<RestrictionRow> rows;
  for (int r : radii) {
    RestrictionRow row;
    row.r = r;
    double mass = 0.0, outside_prev = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
      const int depth = g.depth(static_cast<Vertex>(x));
      if (depth <= r) mass += p[x];
      if (depth > r - 1) outside_prev += p[x];
    }
    row.mass = mass;
    if (mass <= 0.0) throw std::invalid_argument("restriction_check: p has no mass in the ball");
    std::vector<double> pr(g.size(), 0.0);
    for (std::size_t x = 0; x < g.size(); ++x)
      if (g.depth(static_cast<Vertex>(x)) <= r) pr[x] = p[x] / mass;
    const double I_r = I_E(g, pr);
    const double J_r = J_V(pr);
    row.I_gap = I_r - I_full;
    row.J_gap = J_r - J_full;
    row.J_bound = J_full / mass * (1.0 - mass);
    row.I_bound = I_full / mass * (1.0 - mass) + outside_prev / (std::max(dmin, 1) * mass);
    row.value = I_r + rho * J_r;
    row.pass = row.I_gap <= row.I_bound + tol && row.J_gap <= row.J_bound + tol;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gwpam
