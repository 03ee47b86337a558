#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "gwpam/evolver.hpp"
#include "gwpam/graph.hpp"
#include "gwpam/potential.hpp"
#include "gwpam/spectral.hpp"
#include "gwpam/variational.hpp"
#include "gwpam/walker.hpp"

namespace gwpam::cli {

namespace fs = std::filesystem;

namespace {

std::string write_json(const std::string& dir, const std::string& name, const nlohmann::json& j) {
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  return path;
}

std::vector<std::string> append(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> cmd_sample(const nlohmann::json& c, const std::string& dir) {
  const std::string kind = c.value("kind", std::string("gw"));
  const int depth = c.at("depth").get<int>();
  RootedGraph g;
  if (kind == "gw") {
    g = sample_gw_tree(OffspringLaw::parse(c.at("law").get<std::string>()), depth, c.at("seed").get<std::uint64_t>());
  } else if (kind == "regular" || kind == "half") {
    g = canonical_tree(kind == "regular" ? TreeKind::regular : TreeKind::half, c.at("d").get<int>(), depth);
  } else {
    throw std::invalid_argument("sample: kind must be gw, regular or half");
  }
  return {write_json(dir, "tree.json", to_json(g))};
}

std::vector<std::string> cmd_potential(const nlohmann::json& c, const std::string& dir) {
  RootedGraph g = read_graph(c.at("graph").get<std::string>());
  PotentialField xi = sample_potential(g, c.at("rho").get<double>(), c.at("seed").get<std::uint64_t>());
  return {write_json(dir, "potential.json", to_json(xi))};
}

std::vector<std::string> cmd_spectrum(const nlohmann::json& c, const std::string& dir) {
  RootedGraph g = read_graph(c.at("graph").get<std::string>());
  PotentialField xi = read_potential(c.at("potential").get<std::string>());
  DirichletWindow w = DirichletWindow::parse(g, c.value("window", std::string("all")));
  const int k = c.value("k", 5);
  nlohmann::json out{{"window_size", w.size()}};
  Eigenpair top = principal_eigenpair(w, xi.values());
  std::vector<double> phi(top.phi.data(), top.phi.data() + top.phi.size());
  out["principal"] = {{"lambda", top.value}, {"phi", phi}, {"residual", top.residual}};
  if (w.size() <= 2000) {
    EigenSystem sys = full_spectrum(w, xi.values());
    std::vector<double> values;
    for (Eigen::Index i = 0; i < sys.values.size() && i < k; ++i) values.push_back(sys.values[i]);
    out["top_eigenvalues"] = values;
  }
  SpectralBoundsCheck b = spectral_bounds_check(w, xi.values());
  out["bounds"] = {{"lower", b.lower}, {"lambda", b.lambda}, {"upper", b.upper}, {"pass", b.pass}};
  return {write_json(dir, "spectrum.json", out)};
}

std::vector<std::string> cmd_chi(const nlohmann::json& c, const std::string& dir) {
  RootedGraph g = read_graph(c.at("graph").get<std::string>());
  DirichletWindow w = DirichletWindow::parse(g, c.value("window", std::string("all")));
  const double rho = c.at("rho").get<double>();
  const std::string method = c.value("method", std::string("best"));
  ChiOptions opts;
  opts.seed = c.value("seed", std::uint64_t{1});
  ChiResult r;
  if (method == "direct")
    r = chi_direct(w, rho, opts);
  else if (method == "dual")
    r = chi_dual_fixed_point(w, rho);
  else if (method == "best")
    r = chi_window(w, rho, opts);
  else
    throw std::invalid_argument("chi: method must be direct, dual or best");
  return {write_json(dir, "chi.json", r.to_json())};
}

std::vector<std::string> cmd_fk(const nlohmann::json& c, const std::string& dir) {
  RootedGraph g = read_graph(c.at("graph").get<std::string>());
  PotentialField xi = read_potential(c.at("potential").get<std::string>());
  DirichletWindow w = DirichletWindow::parse(g, c.value("window", std::string("all")));
  FkOptions opts;
  opts.n_samples = c.value("n", std::size_t{100000});
  opts.seed = c.at("seed").get<std::uint64_t>();
  opts.auto_scale = c.value("auto_scale", false);
  const Vertex y = c.value("y", 0);
  const double t = c.at("t").get<double>();
  McEstimate mc = fk_total_mass_mc(w, xi, y, t, opts);
  nlohmann::json out = mc.to_json();
  out["t"] = t;
  out["y"] = y;
  return {write_json(dir, "fk.json", out)};
}

std::vector<std::string> cmd_evolve(const nlohmann::json& c, const std::string& dir) {
  RootedGraph g = read_graph(c.at("graph").get<std::string>());
  PotentialField xi = read_potential(c.at("potential").get<std::string>());
  DirichletWindow w = DirichletWindow::parse(g, c.value("window", std::string("all")));
  EvolutionResult r = evolve(w, xi, c.value("y", 0), c.at("t").get<double>(),
                             parse_evolve_method(c.value("method", std::string("expm_action"))));
  return {write_json(dir, "evolve.json", r.to_json(w))};
}

std::vector<std::string> cmd_corpus(const nlohmann::json& c, const std::string& dir) {
  nlohmann::json graphs = nlohmann::json::array();
  for (const auto& g : connected_graph_corpus(c.value("max_n", 6))) graphs.push_back(to_json(g));
  return {write_json(dir, c.value("name", std::string("corpus.json")), graphs)};
}

}  // namespace

std::vector<std::string> run_command(const std::string& command, const nlohmann::json& config,
                                     const std::string& out_dir) {
  if (command == "sample") return cmd_sample(config, out_dir);
  if (command == "potential") return cmd_potential(config, out_dir);
  if (command == "spectrum") return cmd_spectrum(config, out_dir);
  if (command == "chi") return cmd_chi(config, out_dir);
  if (command == "fk") return cmd_fk(config, out_dir);
  if (command == "evolve") return cmd_evolve(config, out_dir);
  if (command == "corpus") return cmd_corpus(config, out_dir);
  if (command == "t1-trend") {
    TrendReport rep = theorem1_trend(AsymptoticsConfig::from_json(config));
    return append(rep.table().write(out_dir, "t1_trend"), rep.summary().write(out_dir, "t1_trend_summary"));
  }
  if (command == "t2-order") return theorem2_experiment(OrderingConfig::from_json(config)).write(out_dir, "t2_order");
  if (command == "f-max") return f_max_experiment(FMaxConfig::from_json(config)).write(out_dir, "f_max");
  if (command == "scan") {
    ScanReport rep;
    auto files = scan_experiment(ScanConfig::from_json(config), &rep).write(out_dir, "scan");
    files.push_back(write_json(out_dir, "scan_report.json", rep.to_json()));
    return files;
  }
  if (command == "diagnostics")
    return diagnostics_experiment(DiagnosticsConfig::from_json(config)).write(out_dir, "diagnostics");
  throw std::invalid_argument("unknown command: " + command);
}

std::vector<std::string> input_files(const nlohmann::json& config) {
  std::vector<std::string> out;
  for (const char* key : {"graph", "potential"})
    if (config.contains(key)) out.push_back(config.at(key).get<std::string>());
  return out;
}

RunManifest run_with_manifest(const std::string& command, const nlohmann::json& config, const std::string& out_dir,
                              const std::string& manifest_path) {
  RunManifest m;
  m.command = command;
  m.config = config;
  m.seed = config.value("seed", std::uint64_t{0});
  m.version = library_version();
  for (const auto& in : input_files(config)) m.inputs.push_back({in, sha256_file(in)});
  const auto start = std::chrono::steady_clock::now();
  auto files = run_command(command, config, out_dir);
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m.outputs = hash_outputs(out_dir, files);
  m.write(manifest_path.empty() ? (fs::path(out_dir) / "manifest.json").string() : manifest_path);
  return m;
}

ReplayReport replay(const std::string& manifest_path, const std::string& out_dir) {
  RunManifest m = RunManifest::read(manifest_path);
  ReplayReport rep;
  for (const auto& in : m.inputs)
    if (!fs::exists(in.path) || sha256_file(in.path) != in.sha256) {
      rep.inputs_unchanged = false;
      rep.mismatches.push_back("input " + in.path);
    }
  auto files = run_command(m.command, m.config, out_dir);
  auto produced = hash_outputs(out_dir, files);
  rep.identical = produced.size() == m.outputs.size();
  for (const auto& expected : m.outputs) {
    auto it = std::find_if(produced.begin(), produced.end(),
                           [&](const OutputRecord& r) { return r.path == expected.path; });
    if (it == produced.end() || it->sha256 != expected.sha256) {
      rep.identical = false;
      rep.mismatches.push_back(expected.path);
    }
  }
  return rep;
}

namespace {

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Parabolic Anderson model laboratory on Galton-Watson trees"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string manifest;
  app.add_option("--seed", seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  app.add_option("--manifest", manifest, "Manifest path (default <out-dir>/manifest.json)");
  app.fallthrough();

  std::string command;
  nlohmann::json config;
  auto sub = [&](const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    s->callback([&command, name] { command = name; });
    return s;
  };

  // sample
  std::string law = "2:0.5,3:0.5", kind = "gw";
  int depth = 6, d = 3;
  auto* s_sample = sub("sample", "Sample a Galton-Watson tree or build a canonical tree");
  s_sample->add_option("--law", law, "Offspring law, e.g. 2:0.5,3:0.5")->capture_default_str();
  s_sample->add_option("--depth", depth)->capture_default_str();
  s_sample->add_option("--kind", kind, "gw | regular | half")->capture_default_str();
  s_sample->add_option("--d", d, "Degree for canonical trees")->capture_default_str();

  // potential
  std::string graph, potential, window = "all";
  double rho = 1.0;
  auto* s_pot = sub("potential", "Sample a double-exponential potential on a graph");
  s_pot->add_option("--graph,--tree", graph)->required();
  s_pot->add_option("--rho", rho)->capture_default_str();

  // spectrum
  int k = 5;
  auto* s_spec = sub("spectrum", "Spectrum of the Anderson Hamiltonian on a window");
  s_spec->add_option("--graph,--tree", graph)->required();
  s_spec->add_option("--potential", potential)->required();
  s_spec->add_option("--window", window, "all | ball:r")->capture_default_str();
  s_spec->add_option("--k", k, "Number of top eigenvalues")->capture_default_str();

  // chi
  std::string method = "best";
  auto* s_chi = sub("chi", "Solve the variational problem on a graph or window");
  s_chi->add_option("--graph,--tree", graph)->required();
  s_chi->add_option("--rho", rho)->capture_default_str();
  s_chi->add_option("--window", window)->capture_default_str();
  s_chi->add_option("--method", method, "direct | dual | best")->capture_default_str();

  // fk
  double t = 1.0;
  std::size_t n = 100000;
  int y = 0;
  bool auto_scale = false;
  auto* s_fk = sub("fk", "Feynman-Kac Monte Carlo estimate of the total mass");
  s_fk->add_option("--graph,--tree", graph)->required();
  s_fk->add_option("--potential", potential)->required();
  s_fk->add_option("--window", window)->capture_default_str();
  s_fk->add_option("--t", t)->capture_default_str();
  s_fk->add_option("--n", n)->capture_default_str();
  s_fk->add_option("--y", y)->capture_default_str();
  s_fk->add_flag("--auto-scale", auto_scale, "Double n until the relative error target is met");

  // evolve
  std::string evolve_method = "expm_action";
  auto* s_evo = sub("evolve", "Exact finite-volume evolution");
  s_evo->add_option("--graph,--tree", graph)->required();
  s_evo->add_option("--potential", potential)->required();
  s_evo->add_option("--window", window)->capture_default_str();
  s_evo->add_option("--t", t)->capture_default_str();
  s_evo->add_option("--y", y)->capture_default_str();
  s_evo->add_option("--method", evolve_method, "expm_action | ode_rk | spectral")->capture_default_str();

  // corpus
  int max_n = 6;
  std::string corpus_name = "corpus.json";
  auto* s_corpus = sub("corpus", "Connected graphs up to isomorphism");
  s_corpus->add_option("--max-n", max_n)->capture_default_str();
  s_corpus->add_option("--name", corpus_name)->capture_default_str();

  // experiments
  auto* s_exp = app.add_subcommand("experiment", "Experiment harnesses");
  s_exp->require_subcommand(1);
  AsymptoticsConfig t1;
  auto* e_t1 = s_exp->add_subcommand("t1-trend", "Total-mass trend against the predicted growth");
  e_t1->callback([&] { command = "t1-trend"; });
  e_t1->add_option("--rho", t1.rho)->capture_default_str();
  e_t1->add_option("--law", t1.law)->capture_default_str();
  e_t1->add_option("--times", t1.times)->delimiter(',');
  e_t1->add_option("--radius", t1.radius)->capture_default_str();
  e_t1->add_option("--replicates", t1.replicates)->capture_default_str();
  e_t1->add_option("--estimator", t1.estimator, "exact | mc")->capture_default_str();
  e_t1->add_option("--mc-samples", t1.mc_samples)->capture_default_str();
  e_t1->add_flag("--control", t1.control, "Zero potential, no prediction");
  e_t1->add_option("--chi-radii", t1.chi_radii)->delimiter(',');
  e_t1->add_option("--boundary-cap", t1.boundary_cap)->capture_default_str();

  OrderingConfig t2;
  auto* e_t2 = s_exp->add_subcommand("t2-order", "Minimal-tree ordering across a rho grid");
  e_t2->callback([&] { command = "t2-order"; });
  e_t2->add_option("--law", t2.law)->capture_default_str();
  e_t2->add_option("--rho-grid", t2.rho_grid)->delimiter(',');
  e_t2->add_option("--samples", t2.samples)->capture_default_str();
  e_t2->add_option("--r", t2.r)->capture_default_str();
  e_t2->add_option("--sandwich-r", t2.sandwich_r)->capture_default_str();

  FMaxConfig fm;
  auto* e_fm = s_exp->add_subcommand("f-max", "Maximiser of F_{c,t} against r_t");
  e_fm->callback([&] { command = "f-max"; });
  e_fm->add_option("--c-grid", fm.c_grid)->delimiter(',');
  e_fm->add_option("--t-grid", fm.t_grid)->delimiter(',');
  e_fm->add_option("--rho", fm.rho)->capture_default_str();
  e_fm->add_option("--theta", fm.theta)->capture_default_str();

  ScanConfig sc;
  auto* e_sc = s_exp->add_subcommand("scan", "Scan for balls with high exceedances");
  e_sc->callback([&] { command = "scan"; });
  e_sc->add_option("--law", sc.law)->capture_default_str();
  e_sc->add_option("--rho", sc.rho)->capture_default_str();
  e_sc->add_option("--ell", sc.ell)->capture_default_str();
  e_sc->add_option("--R", sc.R)->capture_default_str();
  e_sc->add_option("--pattern-degree", sc.pattern_degree)->capture_default_str();
  e_sc->add_option("--q-shift", sc.q_shift)->capture_default_str();
  e_sc->add_option("--planted-depth", sc.planted_depth)->capture_default_str();

  DiagnosticsConfig dg;
  auto* e_dg = s_exp->add_subcommand("diagnostics", "Potential and degree-product diagnostics");
  e_dg->callback([&] { command = "diagnostics"; });
  e_dg->add_option("--law", dg.law)->capture_default_str();
  e_dg->add_option("--rho", dg.rho)->capture_default_str();
  e_dg->add_option("--r", dg.r)->capture_default_str();
  e_dg->add_option("--A", dg.A)->capture_default_str();
  e_dg->add_option("--L-grid", dg.L_grid)->delimiter(',');
  e_dg->add_option("--replicates", dg.replicates)->capture_default_str();

  std::string replay_manifest;
  auto* s_replay = sub("replay", "Re-run a manifest and compare outputs byte for byte");
  s_replay->add_option("manifest", replay_manifest)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (command == "replay") {
      ReplayReport rep = replay(replay_manifest, out_dir);
      std::cout << (rep.identical ? "identical" : "DIFFERENT") << '\n';
      for (const auto& m : rep.mismatches) std::cout << "mismatch: " << m << '\n';
      return rep.identical && rep.inputs_unchanged ? 0 : 1;
    }
    if (command == "sample")
      config = {{"law", law}, {"depth", depth}, {"kind", kind}, {"d", d}, {"seed", seed}};
    else if (command == "potential")
      config = {{"graph", absolute(graph)}, {"rho", rho}, {"seed", seed}};
    else if (command == "spectrum")
      config = {{"graph", absolute(graph)}, {"potential", absolute(potential)}, {"window", window}, {"k", k}};
    else if (command == "chi")
      config = {{"graph", absolute(graph)}, {"rho", rho}, {"window", window}, {"method", method}, {"seed", seed}};
    else if (command == "fk")
      config = {{"graph", absolute(graph)}, {"potential", absolute(potential)}, {"window", window}, {"t", t},
                {"n", n},  {"y", y}, {"seed", seed}, {"auto_scale", auto_scale}};
    else if (command == "evolve")
      config = {{"graph", absolute(graph)}, {"potential", absolute(potential)}, {"window", window}, {"t", t},
                {"y", y}, {"method", evolve_method}};
    else if (command == "corpus")
      config = {{"max_n", max_n}, {"name", corpus_name}};
    else if (command == "t1-trend") {
      t1.seed = seed;
      config = t1.to_json();
    } else if (command == "t2-order") {
      t2.seed = seed;
      config = t2.to_json();
    } else if (command == "f-max") {
      config = fm.to_json();
    } else if (command == "scan") {
      sc.seed = seed;
      config = sc.to_json();
    } else if (command == "diagnostics") {
      dg.seed = seed;
      config = dg.to_json();
    }
    RunManifest m = run_with_manifest(command, config, out_dir, manifest);
    for (const auto& o : m.outputs) std::cout << (fs::path(out_dir) / o.path).string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gwpam::cli
