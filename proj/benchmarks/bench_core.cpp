#include <cmath>

#include <benchmark/benchmark.h>

#include "gwpam/evolver.hpp"
#include "gwpam/graph.hpp"
#include "gwpam/harness.hpp"
#include "gwpam/potential.hpp"
#include "gwpam/spectral.hpp"
#include "gwpam/variational.hpp"
#include "gwpam/walker.hpp"

using namespace gwpam;

static void BM_SampleTree(benchmark::State& state) {
  const OffspringLaw law = OffspringLaw::parse("2:0.5,3:0.5");
  const int depth = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_gw_tree(law, depth, seed++).size());
}
BENCHMARK(BM_SampleTree)->Arg(8)->Arg(12)->Arg(16);

static void BM_PrincipalEigenpair(benchmark::State& state) {
  RootedGraph g = canonical_tree(TreeKind::regular, 3, static_cast<int>(state.range(0)));
  PotentialField xi = sample_potential(g, 2.0, 1);
  DirichletWindow w = DirichletWindow::whole(g);
  for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(w, xi.values()).value);
  state.counters["vertices"] = static_cast<double>(g.size());
}
BENCHMARK(BM_PrincipalEigenpair)->Arg(6)->Arg(9)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_TotalMass(benchmark::State& state) {
  RootedGraph g = canonical_tree(TreeKind::regular, 3, static_cast<int>(state.range(0)));
  PotentialField xi = sample_potential(g, 2.0, 1);
  DirichletWindow w = DirichletWindow::whole(g);
  for (auto _ : state) benchmark::DoNotOptimize(log_total_mass(w, xi, 0, 20.0));
  state.counters["vertices"] = static_cast<double>(g.size());
}
BENCHMARK(BM_TotalMass)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_FkMonteCarlo(benchmark::State& state) {
  RootedGraph g = canonical_tree(TreeKind::regular, 3, 6);
  PotentialField xi = sample_potential(g, 1.0, 1);
  FkOptions o;
  o.n_samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fk_total_mass_mc(g, xi, 0, 5.0, o).estimate);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FkMonteCarlo)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_ChiDirect(benchmark::State& state) {
  RootedGraph g = canonical_tree(TreeKind::regular, 3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(chi_direct(g, 1.0).value);
}
BENCHMARK(BM_ChiDirect)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_ChiDual(benchmark::State& state) {
  RootedGraph g = canonical_tree(TreeKind::regular, 3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(chi_dual_fixed_point(g, 1.0).value);
}
BENCHMARK(BM_ChiDual)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_Isomorphism(benchmark::State& state) {
  RootedGraph g = sample_gw_tree(OffspringLaw::parse("2:0.5,3:0.5"), 10, 3);
  Rng rng(1);
  std::vector<Vertex> map;
  RootedGraph h = relabel_randomly(g, rng, &map);
  BallView a = ball(g, 0, 10), b = ball(h, 0, 10);
  for (auto _ : state) benchmark::DoNotOptimize(rooted_ball_isomorphic(a, b).isomorphic);
}
BENCHMARK(BM_Isomorphism)->Unit(benchmark::kMicrosecond);

static void BM_ScanHighBalls(benchmark::State& state) {
  RootedGraph g = sample_gw_tree(OffspringLaw::parse("3:0.5,4:0.5"), 9, 2);
  PotentialField xi = sample_potential(g, 1.0, 3);
  RootedGraph pattern = ball(canonical_tree(TreeKind::regular, 3, 3), 0, 2).induced();
  std::vector<double> q(pattern.size(), -std::log(2.0 * static_cast<double>(pattern.size())));
  for (auto _ : state) benchmark::DoNotOptimize(scan_high_balls(g, xi, pattern, q, 8).hits.size());
}
BENCHMARK(BM_ScanHighBalls)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
