#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gwpam/walker.hpp"

namespace gwpam {

namespace {

std::vector<Vertex> slice(const std::vector<Vertex>& pi, std::size_t from, std::size_t to) {
  return {pi.begin() + static_cast<std::ptrdiff_t>(from), pi.begin() + static_cast<std::ptrdiff_t>(to) + 1};
}

}  // namespace

int moderate_count(const std::vector<Vertex>& pi, const PotentialField& xi, double a_L, double eps) {
  int count = 0;
  for (std::size_t i = 0; i + 1 < pi.size(); ++i)
    if (xi[pi[i]] <= (1.0 - eps) * a_L) ++count;
  return count;
}

std::vector<Vertex> PathDecomposition::concatenate() const {
  std::vector<Vertex> out;
  for (const auto& seg : segments) {
    if (seg.vertices.empty()) continue;
    if (out.empty()) {
      out = seg.vertices;
    } else {
      if (out.back() != seg.vertices.front()) throw std::logic_error("decomposition: segments do not chain");
      out.insert(out.end(), seg.vertices.begin() + 1, seg.vertices.end());
    }
  }
  return out;
}

int PathDecomposition::hat_length() const {
  int total = 0;
  for (const auto& seg : segments)
    if (seg.kind == SegmentKind::hat) total += static_cast<int>(seg.length());
  return total;
}

PathDecomposition decompose_path(const std::vector<Vertex>& pi, const IslandSystem& islands, const PotentialField& xi,
                                 double eps, std::span<const double> component_lambdas) {
  if (pi.empty()) throw std::invalid_argument("decompose_path: empty path");
  for (Vertex v : pi)
    if (!islands.in_ball(v)) throw std::invalid_argument("decompose_path: path leaves B_r");
  if (!component_lambdas.empty() && component_lambdas.size() != islands.components.size())
    throw std::invalid_argument("decompose_path: one eigenvalue per island component required");

  PathDecomposition dec;
  const std::size_t last = pi.size() - 1;
  auto add = [&](SegmentKind kind, std::size_t from, std::size_t to) {
    PathSegment seg;
    seg.kind = kind;
    seg.vertices = slice(pi, from, to);
    seg.M_eps = moderate_count(seg.vertices, xi, islands.a_L, eps);
    dec.segments.push_back(std::move(seg));
  };

  std::size_t pos = 0;
  for (;;) {
    std::size_t j = pos;
    while (j <= last && !islands.in_Pi(pi[j])) ++j;
    if (j > last) {
      add(SegmentKind::bar, pos, last);
      break;
    }
    add(SegmentKind::check, pos, j);
    ++dec.m;
    std::size_t k = j;
    while (k <= last && islands.in_D(pi[k])) ++k;
    if (k > last) {
      add(SegmentKind::hat, j, last);
      add(SegmentKind::bar, last, last);
      break;
    }
    add(SegmentKind::hat, j, k);
    pos = k;
  }

  for (const auto& seg : dec.segments) {
    if (seg.kind == SegmentKind::hat) continue;
    dec.s += static_cast<int>(seg.length());
    dec.k_eps += seg.M_eps;
  }
  if (!component_lambdas.empty()) {
    for (Vertex v : pi) {
      if (!islands.in_Pi(v)) continue;
      const int c = islands.component_of(v);
      if (c >= 0) dec.lambda_islands = std::max(dec.lambda_islands, component_lambdas[static_cast<std::size_t>(c)]);
    }
  }
  return dec;
}

std::string PathKey::to_string() const {
  std::ostringstream os;
  os << "m=" << m;
  for (const auto& c : checks) {
    os << " check(";
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << ")";
  }
  os << " bar(";
  for (std::size_t i = 0; i < bar.size(); ++i) os << (i ? "," : "") << bar[i];
  os << ")";
  return os.str();
}

PathKey equivalence_key(const PathDecomposition& dec) {
  PathKey key;
  key.m = dec.m;
  for (const auto& seg : dec.segments) {
    if (seg.kind == SegmentKind::check) key.checks.push_back(seg.vertices);
    if (seg.kind == SegmentKind::bar) key.bar = seg.vertices;
  }
  return key;
}

double excursion_q(double A) {
  if (!(A > 0.0)) throw std::invalid_argument("excursion bounds: A must be positive");
  return 1.0 / (1.0 + A);
}

double excursion_c(double A, double eps, double rho) {
  if (!(eps > 0.0 && rho > 0.0)) throw std::invalid_argument("excursion bounds: eps and rho must be positive");
  return std::log(2.0 / (excursion_q(A) * eps * rho));
}

namespace {

// e^{c - log log log L} per moderate step.
double moderate_factor(const IslandSystem& islands, double eps, double rho) {
  const double lll = std::log(std::log(std::log(static_cast<double>(islands.L_r))));
  return std::exp(excursion_c(islands.A, eps, rho) - lll);
}

void require_r0(const IslandSystem& islands, double eps) {
  if (static_cast<double>(islands.L_r) <= std::exp(std::exp(1.0)))
    throw std::invalid_argument("excursion bounds: ball too small (need log log L_r > 1)");
  // each moderate step must fit the per-step factor, which needs eps a_L / 2 >= A - 1
  if (eps * islands.a_L / 2.0 < islands.A - 1.0)
    throw std::invalid_argument("excursion bounds: r below r0 (eps a_L / 2 < A - 1)");
}

}  // namespace

ExcursionBound excursion_mass_bound_check(const RootedGraph& g, const PotentialField& xi, const IslandSystem& islands,
                                          const std::vector<Vertex>& pi, double gamma, double eps, double rho,
                                          std::size_t n_samples, std::uint64_t seed) {
  if (pi.empty()) throw std::invalid_argument("excursion_mass_bound_check: empty path");
  if (!(gamma > islands.a_L - islands.A))
    throw std::invalid_argument("excursion_mass_bound_check: need gamma > a_L - A");
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (!islands.in_ball(pi[i])) throw std::invalid_argument("excursion_mass_bound_check: path leaves B_r");
    if (i + 1 < pi.size() && islands.in_Pi(pi[i]))
      throw std::invalid_argument("excursion_mass_bound_check: path meets Pi before its endpoint");
  }
  require_r0(islands, eps);
  ExcursionBound out;
  out.q_A = excursion_q(islands.A);
  out.c = excursion_c(islands.A, eps, rho);
  out.M_eps = moderate_count(pi, xi, islands.a_L, eps);
  PathEvaluation ev = path_evaluation_check(g, xi, pi, gamma, n_samples, seed);
  out.lhs_exact = ev.exact_product;
  out.lhs_mc = ev.mc_estimate;
  out.lhs_se = ev.std_error;
  const double ell = static_cast<double>(pi.size() - 1);
  out.rhs = std::pow(out.q_A, ell) * std::pow(moderate_factor(islands, eps, rho), out.M_eps);
  out.pass = out.lhs_mc - 3.0 * out.lhs_se <= out.rhs * (1.0 + 1e-12) && out.lhs_exact <= out.rhs * (1.0 + 1e-12);
  return out;
}

ClassMassBound class_mass_bound_check(const RootedGraph& g, const PotentialField& xi, const IslandSystem& islands,
                                      std::span<const double> component_lambdas, const std::vector<Vertex>& pi,
                                      double gamma, double eps, double rho, double t, int d_min,
                                      std::size_t n_samples, std::uint64_t seed) {
  if (d_min < 1) throw std::invalid_argument("class_mass_bound_check: d_min must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("class_mass_bound_check: t must be nonnegative");
  PathDecomposition dec = decompose_path(pi, islands, xi, eps, component_lambdas);
  if (component_lambdas.empty() && dec.m > 0)
    throw std::invalid_argument("class_mass_bound_check: island eigenvalues required when the path meets Pi");
  if (!(gamma > std::max(dec.lambda_islands, islands.a_L - islands.A)))
    throw std::invalid_argument("class_mass_bound_check: need gamma > lambda(pi) and gamma > a_L - A");
  require_r0(islands, eps);
  const PathKey key = equivalence_key(dec);

  ClassMassBound out;
  out.m = dec.m;
  out.s = dec.s;
  out.k_eps = dec.k_eps;
  out.lambda = dec.lambda_islands;
  out.C_rA = islands.C_max;
  const double q = excursion_q(islands.A);
  const double C = static_cast<double>(islands.C_max);
  // (.)^0 = 1 when m = 0
  double rhs = dec.m > 0 ? std::sqrt(C) : 1.0;
  if (dec.m > 0) rhs *= std::pow(1.0 + C / (gamma - dec.lambda_islands), dec.m);
  rhs *= std::pow(q / d_min, dec.s);
  rhs *= std::pow(moderate_factor(islands, eps, rho), dec.k_eps);
  out.rhs = rhs;

  std::vector<Welford> blocks;
  const std::size_t block = 1024;
  const std::size_t nb = (n_samples + block - 1) / block;
  blocks.resize(nb);
  std::vector<std::size_t> hits(nb, 0);
  parallel_for(nb, [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    const std::size_t end = std::min(n_samples, (b + 1) * block);
    for (std::size_t i = b * block; i < end; ++i) {
      PathRecord rec = simulate_walk(g, pi.front(), t, rng);
      bool inside = true;
      for (Vertex v : rec.vertices)
        if (!islands.in_ball(v)) {
          inside = false;
          break;
        }
      double value = 0.0;
      if (inside && equivalence_key(decompose_path(rec.vertices, islands, xi, eps)) == key) {
        double integral = 0.0;
        for (std::size_t k = 0; k < rec.vertices.size(); ++k) {
          const double until = k + 1 < rec.vertices.size() ? rec.jump_times[k + 1] : t;
          integral += (xi[rec.vertices[k]] - gamma) * (until - rec.jump_times[k]);
        }
        value = std::exp(integral);
        ++hits[b];
      }
      blocks[b].add(value);
    }
  });
  Welford total;
  for (std::size_t b = 0; b < nb; ++b) {
    total.merge(blocks[b]);
    out.matches += hits[b];
  }
  out.lhs = total.mean;
  out.lhs_se = total.std_error();
  out.n = total.n;
  out.pass = out.lhs - 3.0 * out.lhs_se <= out.rhs * (1.0 + 1e-12);
  return out;
}

}  // namespace gwpam
