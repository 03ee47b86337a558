#include "gwpam/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace gwpam {

PotentialField::PotentialField(std::vector<double> values, double rho, std::optional<std::uint64_t> seed)
    : values_(std::move(values)), rho_(rho), seed_(seed) {
  if (!(rho > 0.0)) throw std::invalid_argument("potential: rho must be positive");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("potential: values must be finite and >= 0");
}

PotentialField PotentialField::constant(std::size_t n, double value, double rho) {
  return PotentialField(std::vector<double>(n, value), rho);
}

double PotentialField::max_over(const std::vector<Vertex>& vertices) const {
  double m = -std::numeric_limits<double>::infinity();
  for (Vertex v : vertices) m = std::max(m, values_[static_cast<std::size_t>(v)]);
  return m;
}

double double_exponential_quantile(double uniform, double rho) {
  return std::max(0.0, rho * std::log(std::log(1.0 / uniform)));
}

PotentialField sample_potential(const RootedGraph& g, double rho, std::uint64_t seed) {
  if (!(rho > 0.0)) throw std::invalid_argument("sample_potential: rho must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> values(g.size());
  for (double& v : values) {
    double u;
    do u = unif(rng);
    while (u <= 0.0);
    v = double_exponential_quantile(u, rho);
  }
  return PotentialField(std::move(values), rho, seed);
}

double a_scale(double r, double rho) {
  if (!(r > std::exp(1.0))) throw std::invalid_argument("a_scale: r must exceed e");
  if (!(rho > 0.0)) throw std::invalid_argument("a_scale: rho must be positive");
  return rho * std::log(std::log(r));
}

double sample_max_potential(double log_count, double rho, Rng& rng) {
  // F(M)^L = U with F(u) = 1 - exp(-e^{u/rho}), solved in log space.
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u;
  do u = unif(rng);
  while (u <= 0.0);
  double log_u_over_l = std::log(u) * std::exp(-log_count);
  double tail;
  if (log_u_over_l > -1e-300)
    tail = std::log(-std::log(u)) - log_count;  // log(1 - U^{1/L}) to leading order
  else
    tail = std::log(-std::expm1(log_u_over_l));
  return std::max(0.0, rho * std::log(-tail));
}

int island_separation(int r, double alpha) {
  if (r <= 1) return 0;
  return static_cast<int>(std::ceil(std::pow(std::log(static_cast<double>(r)), alpha) - 1e-12));
}

bool IslandSystem::in_ball(Vertex v) const { return std::binary_search(ball.begin(), ball.end(), v); }
bool IslandSystem::in_Pi(Vertex v) const { return std::binary_search(Pi.begin(), Pi.end(), v); }
bool IslandSystem::in_D(Vertex v) const { return component_of(v) >= 0; }

int IslandSystem::component_of(Vertex v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= component_index.size()) return -1;
  return component_index[static_cast<std::size_t>(v)];
}

namespace {

int tree_or_graph_diameter(const RootedGraph& g, const std::vector<Vertex>& comp, const std::vector<int>& index,
                           int comp_id) {
  int best = 0;
  std::vector<int> dist(g.size(), -1);
  std::vector<Vertex> touched;
  for (Vertex s : comp) {
    for (Vertex t : touched) dist[t] = -1;
    touched.clear();
    std::vector<Vertex> queue{s};
    dist[s] = 0;
    touched.push_back(s);
    for (std::size_t h = 0; h < queue.size(); ++h) {
      Vertex x = queue[h];
      best = std::max(best, dist[x]);
      for (Vertex y : g.neighbors(x)) {
        if (index[y] != comp_id || dist[y] >= 0) continue;
        dist[y] = dist[x] + 1;
        touched.push_back(y);
        queue.push_back(y);
      }
    }
  }
  return best;
}

}  // namespace

IslandSystem build_islands(const RootedGraph& g, const PotentialField& xi, int r, double A, double alpha) {
  if (xi.size() != g.size()) throw std::invalid_argument("build_islands: potential size differs from graph");
  if (r < 0) throw std::invalid_argument("build_islands: negative radius");
  if (!(A > 0.0)) throw std::invalid_argument("build_islands: A must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("build_islands: alpha must lie in (0,1)");
  if (r > g.max_depth() && g.size() > 1) throw std::invalid_argument("build_islands: ball B_r exceeds the graph");

  IslandSystem sys;
  sys.r = r;
  sys.A = A;
  sys.alpha = alpha;
  sys.rho = xi.rho();
  for (std::size_t v = 0; v < g.size(); ++v)
    if (g.depth(static_cast<Vertex>(v)) <= r) sys.ball.push_back(static_cast<Vertex>(v));
  sys.L_r = sys.ball.size();
  sys.a_L = a_scale(static_cast<double>(sys.L_r), xi.rho());
  sys.S_r = island_separation(r, alpha);
  sys.a_threshold = sys.a_L - 2.0 * A;
  for (Vertex v : sys.ball)
    if (xi[v] > sys.a_threshold) sys.Pi.push_back(v);

  std::vector<int> dist(g.size(), -1);
  std::vector<Vertex> queue(sys.Pi.begin(), sys.Pi.end());
  for (Vertex v : queue) dist[v] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    Vertex x = queue[h];
    if (dist[x] == sys.S_r) continue;
    for (Vertex y : g.neighbors(x)) {
      if (dist[y] >= 0) continue;
      dist[y] = dist[x] + 1;
      queue.push_back(y);
    }
  }
  for (Vertex v : sys.ball)
    if (dist[v] >= 0) sys.D.push_back(v);

  sys.component_index.assign(g.size(), -1);
  std::vector<char> in_d(g.size(), 0);
  for (Vertex v : sys.D) in_d[v] = 1;
  for (Vertex s : sys.D) {
    if (sys.component_index[s] >= 0) continue;
    int id = static_cast<int>(sys.components.size());
    IslandComponent comp;
    std::vector<Vertex> stack{s};
    sys.component_index[s] = id;
    while (!stack.empty()) {
      Vertex x = stack.back();
      stack.pop_back();
      comp.vertices.push_back(x);
      for (Vertex y : g.neighbors(x)) {
        if (!in_d[y] || sys.component_index[y] >= 0) continue;
        sys.component_index[y] = id;
        stack.push_back(y);
      }
    }
    std::sort(comp.vertices.begin(), comp.vertices.end());
    for (Vertex v : comp.vertices)
      if (xi[v] > sys.a_threshold) ++comp.pi_count;
    comp.diameter = tree_or_graph_diameter(g, comp.vertices, sys.component_index, id);
    sys.C_max = std::max(sys.C_max, comp.vertices.size());
    sys.components.push_back(std::move(comp));
  }
  return sys;
}

nlohmann::json DiagnosticsReport::to_json() const {
  return {{"max_degree_2r", max_degree_2r},
          {"degree_pass", degree_pass},
          {"log_volume_over_r", log_volume_over_r},
          {"theta", theta},
          {"max_island_pi_count", max_island_pi_count},
          {"island_pass", island_pass},
          {"max_potential", max_potential},
          {"a_L", a_L},
          {"max_potential_deviation", max_potential_deviation},
          {"max_potential_band", max_potential_band},
          {"max_potential_pass", max_potential_pass},
          {"intermediate_paths_checked", intermediate_paths_checked},
          {"intermediate_violations", intermediate_violations},
          {"high_paths_checked", high_paths_checked},
          {"high_violations", high_violations}};
}

namespace {

// Non-backtracking walk of the requested number of vertices; stops early at a
// dead end. On a tree this is a self-avoiding path.
std::vector<Vertex> random_self_avoiding_path(const RootedGraph& g, Vertex start, int length, Rng& rng) {
  std::vector<Vertex> path{start};
  std::vector<char> used(g.size(), 0);
  used[start] = 1;
  while (static_cast<int>(path.size()) < length) {
    std::vector<Vertex> options;
    for (Vertex y : g.neighbors(path.back()))
      if (!used[y]) options.push_back(y);
    if (options.empty()) break;
    Vertex next = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    used[next] = 1;
    path.push_back(next);
  }
  return path;
}

}  // namespace

DiagnosticsReport diagnostics_suite(const RootedGraph& g, const PotentialField& xi, int r, double A,
                                    const DiagnosticsParams& params) {
  if (r < 2) throw std::invalid_argument("diagnostics: r must be at least 2");
  DiagnosticsReport rep;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (g.depth(static_cast<Vertex>(v)) <= 2 * r) rep.max_degree_2r = std::max(rep.max_degree_2r, g.degree(static_cast<Vertex>(v)));
  rep.degree_pass = rep.max_degree_2r < params.delta_degree * r;

  IslandSystem sys = build_islands(g, xi, r, A, 0.5);
  const double L = static_cast<double>(sys.L_r);
  rep.log_volume_over_r = std::log(L) / r;
  rep.theta = params.theta;
  for (const auto& c : sys.components) rep.max_island_pi_count = std::max(rep.max_island_pi_count, c.pi_count);
  rep.island_pass = rep.max_island_pi_count <= params.M_A;

  rep.max_potential = xi.max_over(sys.ball);
  rep.a_L = sys.a_L;
  rep.max_potential_deviation = std::abs(rep.max_potential - rep.a_L);
  if (params.theta > 0.0) {
    rep.max_potential_band = 2.0 * xi.rho() * std::log(static_cast<double>(r)) / (params.theta * r);
    rep.max_potential_pass = rep.max_potential_deviation <= rep.max_potential_band;
  }

  Rng rng(params.seed);
  const double logL = std::log(L);
  const int min_len_mid = static_cast<int>(std::ceil(std::pow(logL, params.beta)));
  const int min_len_high = static_cast<int>(std::ceil(params.C * std::pow(logL, params.delta)));
  const double mid_level = (1.0 - params.eps) * sys.a_L;
  std::uniform_int_distribution<std::size_t> pick(0, sys.ball.size() - 1);
  for (int s = 0; s < params.path_samples; ++s) {
    Vertex start = sys.ball[pick(rng)];
    int len = std::max(min_len_mid, min_len_high) + std::uniform_int_distribution<int>(0, 2 * r)(rng);
    auto path = random_self_avoiding_path(g, start, len, rng);
    const auto supp = static_cast<double>(path.size());
    int n_mid = 0, n_high = 0;
    for (Vertex v : path) {
      if (xi[v] > mid_level) ++n_mid;
      if (xi[v] > sys.a_threshold) ++n_high;
    }
    if (supp >= min_len_mid) {
      ++rep.intermediate_paths_checked;
      if (n_mid > supp / std::pow(logL, params.eps)) ++rep.intermediate_violations;
    }
    if (supp >= min_len_high) {
      ++rep.high_paths_checked;
      if (n_high > supp / std::pow(logL, params.delta)) ++rep.high_violations;
    }
  }
  return rep;
}

MaxPotentialTrials max_potential_band_trials(int d, int r, double rho, int trials, std::uint64_t seed) {
  if (d < 3) throw std::invalid_argument("max_potential_band_trials: d must be at least 3");
  if (r < 2) throw std::invalid_argument("max_potential_band_trials: r must be at least 2");
  MaxPotentialTrials out;
  out.trials = trials;
  // |B_r| = 1 + d((d-1)^r - 1)/(d-2), evaluated in log space.
  const double log_dm1 = std::log(static_cast<double>(d - 1));
  const double log_ratio = std::log(static_cast<double>(d)) - std::log(static_cast<double>(d - 2));
  double log_geom = r * log_dm1 + std::log1p(-std::exp(-r * log_dm1));
  double log_body = log_ratio + log_geom;
  out.log_volume = log_body + std::log1p(std::exp(-log_body));
  out.a_L = rho * std::log(out.log_volume);
  const double theta = log_dm1;
  out.band = 2.0 * rho * std::log(static_cast<double>(r)) / (theta * r);
  Rng rng(seed);
  for (int i = 0; i < trials; ++i) {
    double m = sample_max_potential(out.log_volume, rho, rng);
    double dev = std::abs(m - out.a_L);
    out.deviations.push_back(dev);
    if (dev > out.band) ++out.violations;
  }
  return out;
}

nlohmann::json to_json(const PotentialField& xi) {
  nlohmann::json j;
  j["values"] = xi.values();
  j["rho"] = xi.rho();
  if (xi.seed())
    j["seed"] = *xi.seed();
  else
    j["seed"] = nullptr;
  return j;
}

PotentialField potential_from_json(const nlohmann::json& j) {
  std::optional<std::uint64_t> seed;
  if (j.contains("seed") && !j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
  return PotentialField(j.at("values").get<std::vector<double>>(), j.at("rho").get<double>(), seed);
}

void write_potential(const PotentialField& xi, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json(xi).dump() << '\n';
}

PotentialField read_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return potential_from_json(nlohmann::json::parse(in));
}

}  // namespace gwpam
