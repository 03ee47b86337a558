#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gwpam/evolver.hpp"
#include "gwpam/harness.hpp"
#include "gwpam/spectral.hpp"
#include "gwpam/walker.hpp"

namespace gwpam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T>
void get_if(const nlohmann::json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

}  // namespace

nlohmann::json AsymptoticsConfig::to_json() const {
  return {{"rho", rho},
          {"law", law},
          {"times", times},
          {"radius", radius},
          {"margin", margin},
          {"A", A},
          {"alpha", alpha},
          {"replicates", replicates},
          {"seed", seed},
          {"estimator", estimator},
          {"mc_samples", mc_samples},
          {"control", control},
          {"chi_radii", chi_radii},
          {"boundary_cap", boundary_cap}};
}

AsymptoticsConfig AsymptoticsConfig::from_json(const nlohmann::json& j) {
  AsymptoticsConfig c;
  get_if(j, "rho", c.rho);
  get_if(j, "law", c.law);
  get_if(j, "times", c.times);
  get_if(j, "radius", c.radius);
  get_if(j, "margin", c.margin);
  get_if(j, "A", c.A);
  get_if(j, "alpha", c.alpha);
  get_if(j, "replicates", c.replicates);
  get_if(j, "seed", c.seed);
  get_if(j, "estimator", c.estimator);
  get_if(j, "mc_samples", c.mc_samples);
  get_if(j, "control", c.control);
  get_if(j, "chi_radii", c.chi_radii);
  get_if(j, "boundary_cap", c.boundary_cap);
  return c;
}

namespace {

std::vector<TrendRow> trend_replicate(const AsymptoticsConfig& cfg, const OffspringLaw& law, double theta,
                                      double chi_tilde, double chi_gap, int rep) {
  const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
  // one generation beyond the window so window degrees are the tree degrees
  RootedGraph g = sample_gw_tree(law, cfg.radius + 1, derive_seed(seed, 0));
  PotentialField xi = cfg.control ? PotentialField::constant(g.size(), 0.0, cfg.rho)
                                  : sample_potential(g, cfg.rho, derive_seed(seed, 1));
  DirichletWindow window = DirichletWindow::ball(g, g.root(), cfg.radius);
  DirichletWindow inner = DirichletWindow::ball(g, g.root(), cfg.radius - 1);

  const auto outer_logs = log_total_mass_curve(window, xi, g.root(), cfg.times);
  const auto inner_logs = log_total_mass_curve(inner, xi, g.root(), cfg.times);
  const double max_xi = xi.max_over(window.vertices());
  const double L = static_cast<double>(window.size());
  const double R = static_cast<double>(cfg.radius);
  const double bound = std::log(L) > 1.0 && R > 1.0
                           ? a_scale(L, cfg.rho) + 2.0 * cfg.rho * std::log(R) / (theta * R)
                           : max_xi;
  Eigenpair top = principal_eigenpair(window, xi.values());
  const double phi_root = std::abs(top.phi[window.local_index(g.root())]);

  std::vector<TrendRow> rows;
  for (std::size_t k = 0; k < cfg.times.size(); ++k) {
    const double t = cfg.times[k];
    TrendRow row;
    row.replicate = rep;
    row.t = t;
    if (cfg.estimator == "mc") {
      FkOptions opts;
      opts.n_samples = cfg.mc_samples;
      opts.seed = derive_seed(seed, 2 + k);
      McEstimate mc = fk_total_mass_mc(window, xi, g.root(), t, opts);
      row.proxy = std::log(mc.estimate) / t;
      row.se = mc.estimate > 0.0 ? mc.std_error / mc.estimate / t : kNaN;
    } else {
      row.proxy = outer_logs[k] / t;
    }
    row.truncation_gap = (outer_logs[k] - inner_logs[k]) / t;
    row.predicted = cfg.control ? kNaN : u_star_log(t, cfg.rho, theta, chi_tilde);
    row.residual = row.proxy - row.predicted;
    row.band = row.truncation_gap + chi_gap + 3.0 * row.se + 1.0;
    row.in_band = std::abs(row.residual) <= row.band;
    row.max_potential = max_xi;
    row.max_potential_bound = bound;
    row.below_bound = row.proxy <= bound;
    row.lower_sandwich = top.value + 2.0 * std::log(phi_root) / t;
    const double slack = 1e-9 * std::max(1.0, std::abs(row.proxy)) + 3.0 * row.se;
    row.sandwich_pass = row.lower_sandwich <= row.proxy + slack && row.proxy <= max_xi + slack;
    row.boundary_flag = row.truncation_gap > cfg.boundary_cap;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TrendReport theorem1_trend(const AsymptoticsConfig& config) {
  if (config.times.empty()) throw std::invalid_argument("theorem1_trend: empty time grid");
  for (std::size_t i = 0; i < config.times.size(); ++i)
    if (!(config.times[i] > std::exp(1.0)) || (i && config.times[i] <= config.times[i - 1]))
      throw std::invalid_argument("theorem1_trend: times must increase and exceed e");
  if (config.radius < 2) throw std::invalid_argument("theorem1_trend: radius must be at least 2");
  if (config.replicates < 1) throw std::invalid_argument("theorem1_trend: need a replicate");
  if (config.estimator != "exact" && config.estimator != "mc")
    throw std::invalid_argument("theorem1_trend: estimator must be exact or mc");
  const OffspringLaw law = OffspringLaw::parse(config.law);
  TrendReport out;
  out.config = config;
  out.theta = law.theta();
  if (!config.control) {
    ChiTildeEstimate est = chi_tilde_estimate(law.d_min(), config.rho, config.chi_radii);
    out.chi_tilde = est.estimate;
    out.chi_gap = std::abs(est.gap);
  }
  std::vector<std::vector<TrendRow>> per(static_cast<std::size_t>(config.replicates));
  parallel_for(per.size(), [&](std::size_t rep) {
    per[rep] = trend_replicate(config, law, out.theta, out.chi_tilde, out.chi_gap, static_cast<int>(rep));
  });
  for (const auto& rows : per) {
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    out.residual_shrinks.push_back(std::abs(rows.back().residual) < std::abs(rows.front().residual));
    bool trending = true;
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
      const double dist = std::max(0.0, std::abs(row.residual) - row.band);
      if (dist > previous) trending = false;
      previous = dist;
    }
    out.trending.push_back(trending);
  }
  return out;
}

Table TrendReport::table() const {
  Table t;
  t.columns = {"replicate",      "t",        "lyapunov_proxy", "predicted",     "residual",
               "se",             "truncation_gap", "band",     "in_band",       "max_potential",
               "max_potential_bound", "below_bound", "lower_sandwich", "sandwich_pass", "boundary_flag",
               "r_frak",         "radius_over_r_frak"};
  for (const auto& r : rows) {
    const double rt = r_frak(r.t, config.rho);
    t.add({r.replicate, r.t, r.proxy, r.predicted, r.residual, r.se, r.truncation_gap, r.band, r.in_band,
           r.max_potential, r.max_potential_bound, r.below_bound, r.lower_sandwich, r.sandwich_pass, r.boundary_flag,
           rt, config.radius / rt});
  }
  return t;
}

Table TrendReport::summary() const {
  Table t;
  t.columns = {"replicate", "residual_first", "residual_last", "residual_shrinks", "trending", "chi_tilde", "chi_gap",
               "theta"};
  const std::size_t per = config.times.size();
  for (std::size_t rep = 0; rep < residual_shrinks.size(); ++rep) {
    const auto& first = rows[rep * per];
    const auto& last = rows[rep * per + per - 1];
    t.add({static_cast<int>(rep), first.residual, last.residual, static_cast<bool>(residual_shrinks[rep]),
           static_cast<bool>(trending[rep]), chi_tilde, chi_gap, theta});
  }
  return t;
}

nlohmann::json OrderingConfig::to_json() const {
  return {{"law", law}, {"rho_grid", rho_grid}, {"samples", samples}, {"r", r}, {"sandwich_r", sandwich_r},
          {"seed", seed}};
}

OrderingConfig OrderingConfig::from_json(const nlohmann::json& j) {
  OrderingConfig c;
  get_if(j, "law", c.law);
  get_if(j, "rho_grid", c.rho_grid);
  get_if(j, "samples", c.samples);
  get_if(j, "r", c.r);
  get_if(j, "sandwich_r", c.sandwich_r);
  get_if(j, "seed", c.seed);
  return c;
}

double ordering_threshold(int d_min) {
  if (d_min < 2) throw std::invalid_argument("ordering_threshold: d_min must be at least 2");
  return 1.0 / ((d_min - 1) * std::log(d_min + 1.0));
}

Table theorem2_experiment(const OrderingConfig& config, std::vector<OrderingReport>* reports) {
  const OffspringLaw law = OffspringLaw::parse(config.law);
  std::vector<OrderingReport> rows(config.rho_grid.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    rows[i] = minimal_tree_ordering(law, config.rho_grid[i], config.samples, config.r,
                                    derive_seed(config.seed, i), config.sandwich_r);
  });
  Table t;
  t.columns = {"rho", "chi_Tdmin", "min", "max", "threshold", "above_threshold", "ordering_pass", "chi_half",
               "chi_regular", "sandwich_pass"};
  for (const auto& r : rows) {
    const auto [lo, hi] = std::minmax_element(r.chi_samples.begin(), r.chi_samples.end());
    t.add({r.rho, r.chi_minimal, r.chi_samples.empty() ? kNaN : *lo, r.chi_samples.empty() ? kNaN : *hi, r.threshold,
           r.above_threshold, r.ordering_pass, r.chi_half, r.chi_regular, r.sandwich_pass});
  }
  if (reports) *reports = std::move(rows);
  return t;
}

nlohmann::json FMaxConfig::to_json() const {
  return {{"c_grid", c_grid}, {"t_grid", t_grid}, {"rho", rho}, {"theta", theta}};
}

FMaxConfig FMaxConfig::from_json(const nlohmann::json& j) {
  FMaxConfig c;
  get_if(j, "c_grid", c.c_grid);
  get_if(j, "t_grid", c.t_grid);
  get_if(j, "rho", c.rho);
  get_if(j, "theta", c.theta);
  return c;
}

Table f_max_experiment(const FMaxConfig& config) {
  Table t;
  t.columns = {"c", "t", "rho", "theta", "r_star", "r_frak", "ratio", "ratio_in_band", "F_value", "F_bound",
               "is_grid_max"};
  for (double c : config.c_grid) {
    for (double time : config.t_grid) {
      FMaximizer m = f_maximizer(c, time, config.rho, config.theta);
      bool grid_max = true;
      for (double k : {0.5, 0.9, 1.1, 2.0})
        if (F_ct(k * m.r_star, c, time, config.rho, config.theta) > m.F_value) grid_max = false;
      t.add({c, time, config.rho, config.theta, m.r_star, m.r_frak, m.ratio, m.ratio >= 0.9 && m.ratio <= 1.1,
             m.F_value, u_star_log(time, config.rho, config.theta, 0.0), grid_max});
    }
  }
  return t;
}

nlohmann::json ScanConfig::to_json() const {
  return {{"law", law},
          {"rho", rho},
          {"ell", ell},
          {"R", R},
          {"pattern_degree", pattern_degree},
          {"q_shift", q_shift},
          {"planted_depth", planted_depth},
          {"seed", seed}};
}

ScanConfig ScanConfig::from_json(const nlohmann::json& j) {
  ScanConfig c;
  get_if(j, "law", c.law);
  get_if(j, "rho", c.rho);
  get_if(j, "ell", c.ell);
  get_if(j, "R", c.R);
  get_if(j, "pattern_degree", c.pattern_degree);
  get_if(j, "q_shift", c.q_shift);
  get_if(j, "planted_depth", c.planted_depth);
  get_if(j, "seed", c.seed);
  return c;
}

Table scan_experiment(const ScanConfig& config, ScanReport* report) {
  if (!(config.q_shift > 0.0)) throw std::invalid_argument("scan_experiment: q_shift must be positive");
  const OffspringLaw law = OffspringLaw::parse(config.law);
  RootedGraph g = sample_gw_tree(law, config.ell, derive_seed(config.seed, 0));
  PotentialField xi = sample_potential(g, config.rho, derive_seed(config.seed, 1));
  RootedGraph pattern = canonical_tree(TreeKind::regular, config.pattern_degree, config.R + 1);

  // q = rho log p - shift from the minimiser on the radius-R ball of the pattern
  DirichletWindow pw = DirichletWindow::ball(pattern, pattern.root(), config.R);
  ChiResult chi = chi_window(pw, config.rho);
  std::vector<double> q(pattern.size(), 0.0);
  for (Vertex v = 0; v < static_cast<Vertex>(pattern.size()); ++v) {
    if (pattern.depth(v) > config.R) continue;
    const double p = chi.p[static_cast<std::size_t>(v)];
    q[static_cast<std::size_t>(v)] = p > 0.0 ? config.rho * std::log(p) - config.q_shift : kMinusInfinity;
  }

  Vertex planted = -1;
  if (config.planted_depth >= 0) {
    PotentialField flat = PotentialField::constant(g.size(), 1e300, config.rho);
    ScanReport shapes = scan_high_balls(g, flat, pattern, q, config.ell);
    auto it = std::find_if(shapes.hits.begin(), shapes.hits.end(),
                           [&](const ScanHit& h) { return h.depth == config.planted_depth; });
    if (it == shapes.hits.end()) throw std::runtime_error("scan_experiment: no ball of the pattern shape at that depth");
    planted = it->z;
    std::vector<double> values = xi.values();
    const double threshold = scan_threshold(g, config.ell, config.rho);
    for (auto [pv, gv] : it->witness) {
      if (pattern.depth(pv) > config.R) continue;
      const double need = threshold + std::max(q[static_cast<std::size_t>(pv)], 0.0) + 1.0;
      values[static_cast<std::size_t>(gv)] = std::max(values[static_cast<std::size_t>(gv)], need);
    }
    xi = PotentialField(std::move(values), config.rho);
  }

  ScanReport rep = scan_high_balls(g, xi, pattern, q, config.ell);
  Table t;
  t.columns = {"z", "depth", "planted", "witness_size", "threshold", "min_depth"};
  for (const auto& h : rep.hits)
    t.add({h.z, h.depth, h.z == planted, h.witness.size(), rep.threshold, rep.min_depth});
  if (report) *report = std::move(rep);
  return t;
}

nlohmann::json DiagnosticsConfig::to_json() const {
  return {{"law", law},
          {"rho", rho},
          {"r", r},
          {"A", A},
          {"L_grid", L_grid},
          {"replicates", replicates},
          {"seed", seed},
          {"delta_degree", params.delta_degree},
          {"M_A", params.M_A},
          {"theta", params.theta},
          {"beta", params.beta},
          {"eps", params.eps},
          {"delta", params.delta},
          {"C", params.C},
          {"path_samples", params.path_samples}};
}

DiagnosticsConfig DiagnosticsConfig::from_json(const nlohmann::json& j) {
  DiagnosticsConfig c;
  get_if(j, "law", c.law);
  get_if(j, "rho", c.rho);
  get_if(j, "r", c.r);
  get_if(j, "A", c.A);
  get_if(j, "L_grid", c.L_grid);
  get_if(j, "replicates", c.replicates);
  get_if(j, "seed", c.seed);
  get_if(j, "delta_degree", c.params.delta_degree);
  get_if(j, "M_A", c.params.M_A);
  get_if(j, "theta", c.params.theta);
  get_if(j, "beta", c.params.beta);
  get_if(j, "eps", c.params.eps);
  get_if(j, "delta", c.params.delta);
  get_if(j, "C", c.params.C);
  get_if(j, "path_samples", c.params.path_samples);
  return c;
}

Table diagnostics_experiment(const DiagnosticsConfig& config) {
  const OffspringLaw law = OffspringLaw::parse(config.law);
  int depth = 2 * config.r;
  for (int L : config.L_grid) depth = std::max(depth, L + 1);
  DiagnosticsParams params = config.params;
  if (params.theta <= 0.0) params.theta = law.theta();

  struct Row {
    DiagnosticsReport diag;
    std::vector<DegreeProductReport> products;
  };
  std::vector<Row> rows(static_cast<std::size_t>(config.replicates));
  parallel_for(rows.size(), [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(config.seed, i);
    RootedGraph g = sample_gw_tree(law, depth, derive_seed(seed, 0));
    PotentialField xi = sample_potential(g, config.rho, derive_seed(seed, 1));
    DiagnosticsParams p = params;
    p.seed = derive_seed(seed, 2);
    rows[i].diag = diagnostics_suite(g, xi, config.r, config.A, p);
    for (int L : config.L_grid) rows[i].products.push_back(degree_product_diagnostic(g, L));
  });

  Table t;
  t.columns = {"replicate",          "max_degree_2r",       "degree_pass",     "log_volume_over_r", "theta",
               "max_island_pi_count", "island_pass",        "max_potential",   "a_L",
               "max_potential_deviation", "max_potential_band", "max_potential_pass", "intermediate_violations",
               "high_violations"};
  for (int L : config.L_grid) {
    t.columns.push_back("degree_product_min_log_L" + std::to_string(L));
    t.columns.push_back("degree_product_frequency_L" + std::to_string(L));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& d = rows[i].diag;
    std::vector<nlohmann::json> row{static_cast<int>(i),
                                    d.max_degree_2r,
                                    d.degree_pass,
                                    d.log_volume_over_r,
                                    d.theta,
                                    d.max_island_pi_count,
                                    d.island_pass,
                                    d.max_potential,
                                    d.a_L,
                                    d.max_potential_deviation,
                                    d.max_potential_band,
                                    d.max_potential_pass,
                                    d.intermediate_violations,
                                    d.high_violations};
    for (const auto& p : rows[i].products) {
      row.push_back(p.min_log_product);
      row.push_back(p.frequency);
    }
    t.add(std::move(row));
  }
  return t;
}

}  // namespace gwpam
