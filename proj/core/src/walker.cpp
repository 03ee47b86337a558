#include "gwpam/walker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwpam {

namespace {

constexpr std::size_t kBlock = 1024;

// Replica blocks with their own streams; results merge in block order so the
// estimate depends only on (seed, n).
template <class Sample>
void extend_blocks(std::vector<Welford>& blocks, std::size_t n_old, std::size_t n_new, std::uint64_t seed,
                   const Sample& sample) {
  const std::size_t nb = (n_new + kBlock - 1) / kBlock;
  const std::size_t first = n_old / kBlock;
  blocks.resize(nb);
  parallel_for(nb - first, [&](std::size_t k) {
    const std::size_t b = first + k;
    Rng rng(derive_seed(seed, b));
    Welford w;
    const std::size_t end = std::min(n_new, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) w.add(sample(rng));
    blocks[b] = w;
  });
}

Welford merged(const std::vector<Welford>& blocks) {
  Welford total;
  for (const auto& w : blocks) total.merge(w);
  return total;
}

template <class Sample>
McEstimate run_mc(const FkOptions& opts, const Sample& sample) {
  if (opts.n_samples == 0) throw std::invalid_argument("Monte Carlo: need at least one sample");
  std::vector<Welford> blocks;
  std::size_t n = opts.n_samples;
  extend_blocks(blocks, 0, n, opts.seed, sample);
  Welford total = merged(blocks);
  while (opts.auto_scale && total.mean > 0.0 && total.std_error() > opts.target_rel_se * total.mean &&
         n < opts.cap) {
    const std::size_t next = std::min(opts.cap, 2 * n);
    extend_blocks(blocks, n, next, opts.seed, sample);
    n = next;
    total = merged(blocks);
  }
  return McEstimate{total.mean, total.std_error(), total.n};
}

McEstimate fk_impl(const RootedGraph& g, const std::vector<char>& inside, const PotentialField& xi, Vertex y, double t,
                   const FkOptions& opts) {
  if (xi.size() != g.size()) throw std::invalid_argument("fk_total_mass_mc: potential size does not match graph");
  if (!(t >= 0.0)) throw std::invalid_argument("fk_total_mass_mc: t must be nonnegative");
  if (!inside[static_cast<std::size_t>(y)]) throw std::invalid_argument("fk_total_mass_mc: start outside the window");
  auto sample = [&](Rng& rng) {
    std::exponential_distribution<double> hold(1.0);
    Vertex x = y;
    double now = 0.0, integral = 0.0;
    for (;;) {
      const double h = hold(rng);
      if (now + h >= t) return std::exp(integral + xi[x] * (t - now));
      integral += xi[x] * h;
      now += h;
      auto nb = g.neighbors(x);
      if (nb.empty()) return std::exp(integral + xi[x] * (t - now));
      std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
      x = nb[pick(rng)];
      if (!inside[static_cast<std::size_t>(x)]) return 0.0;
    }
  };
  return run_mc(opts, sample);
}

}  // namespace

bool PathRecord::valid(const RootedGraph& g) const {
  if (vertices.empty() || vertices.size() != jump_times.size() || jump_times.front() != 0.0) return false;
  for (std::size_t k = 1; k < vertices.size(); ++k) {
    if (!g.adjacent(vertices[k - 1], vertices[k])) return false;
    if (!(jump_times[k] > jump_times[k - 1])) return false;
  }
  return jump_times.back() <= horizon;
}

PathRecord simulate_walk(const RootedGraph& g, Vertex start, double t, Rng& rng) {
  if (start < 0 || static_cast<std::size_t>(start) >= g.size()) throw std::out_of_range("simulate_walk: bad start");
  if (!(t >= 0.0)) throw std::invalid_argument("simulate_walk: t must be nonnegative");
  PathRecord rec;
  rec.horizon = t;
  rec.vertices.push_back(start);
  rec.jump_times.push_back(0.0);
  std::exponential_distribution<double> hold(1.0);
  Vertex x = start;
  double now = 0.0;
  for (;;) {
    now += hold(rng);
    if (now > t) break;
    auto nb = g.neighbors(x);
    if (nb.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
    x = nb[pick(rng)];
    rec.vertices.push_back(x);
    rec.jump_times.push_back(now);
  }
  return rec;
}

PathRecord simulate_walk(const RootedGraph& g, Vertex start, double t, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_walk(g, start, t, rng);
}

void Welford::add(double x) {
  ++n;
  const double delta = x - mean;
  mean += delta / static_cast<double>(n);
  m2 += delta * (x - mean);
}

void Welford::merge(const Welford& other) {
  if (other.n == 0) return;
  if (n == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n), nb = static_cast<double>(other.n);
  const double delta = other.mean - mean;
  const double total = na + nb;
  mean += delta * nb / total;
  m2 += other.m2 + delta * delta * na * nb / total;
  n += other.n;
}

nlohmann::json McEstimate::to_json() const { return {{"estimate", estimate}, {"se", std_error}, {"n", n}}; }

McEstimate fk_total_mass_mc(const DirichletWindow& window, const PotentialField& xi, Vertex y, double t,
                            const FkOptions& opts) {
  const RootedGraph& g = window.graph();
  std::vector<char> inside(g.size(), 0);
  for (Vertex v : window.vertices()) inside[static_cast<std::size_t>(v)] = 1;
  return fk_impl(g, inside, xi, y, t, opts);
}

McEstimate fk_total_mass_mc(const RootedGraph& g, const PotentialField& xi, Vertex y, double t,
                            const FkOptions& opts) {
  std::vector<char> inside(g.size(), 1);
  return fk_impl(g, inside, xi, y, t, opts);
}

double path_evaluation_exact(const PotentialField& xi, const std::vector<Vertex>& pi, double gamma) {
  double prod = 1.0;
  for (std::size_t i = 0; i + 1 < pi.size(); ++i) {
    const double denom = gamma - (xi[pi[i]] - 1.0);
    if (!(denom > 0.0)) throw std::invalid_argument("path evaluation: gamma must exceed xi - 1 along the path");
    prod /= denom;
  }
  return prod;
}

PathEvaluation path_evaluation_check(const RootedGraph& g, const PotentialField& xi, const std::vector<Vertex>& pi,
                                     double gamma, std::size_t n_samples, std::uint64_t seed) {
  if (pi.empty()) throw std::invalid_argument("path_evaluation_check: empty path");
  for (std::size_t i = 1; i < pi.size(); ++i)
    if (!g.adjacent(pi[i - 1], pi[i])) throw std::invalid_argument("path_evaluation_check: path is not a walk in g");
  PathEvaluation out;
  out.exact_product = path_evaluation_exact(xi, pi, gamma);
  FkOptions opts;
  opts.n_samples = n_samples;
  opts.seed = seed;
  auto sample = [&](Rng& rng) {
    std::exponential_distribution<double> hold(1.0);
    double exponent = 0.0;
    for (std::size_t i = 0; i + 1 < pi.size(); ++i) exponent += (xi[pi[i]] - gamma) * hold(rng);
    return std::exp(exponent);
  };
  McEstimate mc = run_mc(opts, sample);
  out.mc_estimate = mc.estimate;
  out.std_error = mc.std_error;
  out.n = mc.n;
  const double diff = std::abs(out.mc_estimate - out.exact_product);
  out.pass = diff <= 3.0 * out.std_error + 1e-12 * out.exact_product;
  return out;
}

}  // namespace gwpam
