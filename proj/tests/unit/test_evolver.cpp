#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gwpam/evolver.hpp"
#include "oracles.hpp"

using namespace gwpam;

namespace {

const RootedGraph& k2() {
  static const RootedGraph g = RootedGraph::from_edges(2, {{0, 1}}, 0);
  return g;
}

constexpr EvolveMethod kMethods[] = {EvolveMethod::expm_action, EvolveMethod::ode_rk, EvolveMethod::spectral};

std::vector<int> as_int(const std::vector<Vertex>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Evolve, InitialDelta) {
  RootedGraph g = canonical_tree(TreeKind::regular, 3, 2);
  PotentialField xi = sample_potential(g, 1.0, 1);
  for (EvolveMethod m : kMethods) {
    EvolutionResult r = evolve(DirichletWindow::whole(g), xi, 3, 0.0, m);
    for (std::size_t k = 0; k < r.u.size(); ++k) EXPECT_NEAR(r.u[k], k == 3 ? 1.0 : 0.0, 1e-14) << to_string(m);
  }
}

TEST(Evolve, ZeroPotentialConservesMass) {
  std::mt19937_64 rng(2);
  RootedGraph g = oracle::random_tree(25, rng);
  PotentialField xi = PotentialField::constant(g.size(), 0.0, 1.0);
  for (double t : {0.5, 3.0, 12.0}) EXPECT_NEAR(total_mass(DirichletWindow::whole(g), xi, 0, t), 1.0, 1e-10);
}

TEST(Evolve, ConstantPotential) {
  std::mt19937_64 rng(3);
  RootedGraph g = oracle::random_tree(20, rng);
  PotentialField xi = PotentialField::constant(g.size(), 0.7, 1.0);
  DirichletWindow w = DirichletWindow::whole(g);
  for (double t : {1.0, 5.0}) EXPECT_NEAR(log_total_mass(w, xi, 0, t), 0.7 * t, 1e-10);
  for (const GrowthPoint& p : growth_curve(w, xi, 0, {1.0, 2.0, 4.0})) EXPECT_NEAR(p.rate, 0.7, 1e-10);
}

TEST(Evolve, K2ClosedForm) {
  PotentialField xi({0.0, 0.0}, 1.0);
  for (EvolveMethod m : kMethods)
    for (double t : {0.3, 2.0}) {
      EvolutionResult r = evolve(DirichletWindow::whole(k2()), xi, 0, t, m);
      EXPECT_NEAR(r.u[0], (1.0 + std::exp(-2.0 * t)) / 2.0, 1e-10) << to_string(m);
    }
}

TEST(Evolve, MethodsAgreeWithDenseExponential) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> time(0.1, 10.0);
  for (int i = 0; i < 20; ++i) {
    RootedGraph g = oracle::random_tree(5 + rng() % 60, rng);
    DirichletWindow w = DirichletWindow::ball(g, 0, 3);
    if (w.size() > 50) continue;
    PotentialField xi = sample_potential(g, 1.0, rng());
    const double t = time(rng);
    Eigen::MatrixXd M = oracle::dense_hamiltonian(oracle::adjacency_of(g), as_int(w.vertices()), xi.values());
    Eigen::VectorXd ref = oracle::kernel_row(M, t, 0);
    const double scale = ref.cwiseAbs().maxCoeff();
    for (EvolveMethod m : kMethods) {
      EvolutionResult r = evolve(w, xi, 0, t, m);
      for (Eigen::Index k = 0; k < ref.size(); ++k)
        EXPECT_NEAR(r.u[static_cast<std::size_t>(k)], ref[k], 1e-8 * scale) << to_string(m);
    }
    Eigen::VectorXd ones = (t * M).exp() * Eigen::VectorXd::Ones(M.rows());
    EXPECT_NEAR(total_mass(w, xi, 0, t), ones[0], 1e-8 * ones[0]);
  }
}

TEST(Evolve, CurveMatchesPointwise) {
  std::mt19937_64 rng(5);
  RootedGraph g = oracle::random_tree(30, rng);
  PotentialField xi = sample_potential(g, 1.0, 6);
  DirichletWindow w = DirichletWindow::whole(g);
  std::vector<double> times{0.5, 2.0, 7.0, 20.0};
  std::vector<double> curve = log_total_mass_curve(w, xi, 0, times);
  for (std::size_t k = 0; k < times.size(); ++k)
    EXPECT_NEAR(curve[k], log_total_mass(w, xi, 0, times[k]), 1e-9 * std::max(1.0, std::abs(curve[k])));
}

TEST(Evolve, LongTimeSlopeNearPrincipal) {
  std::mt19937_64 rng(6);
  RootedGraph g = oracle::random_tree(30, rng);
  PotentialField xi = sample_potential(g, 1.0, 7);
  DirichletWindow w = DirichletWindow::whole(g);
  const double lambda = principal_eigenpair(w, xi.values()).value;
  EXPECT_NEAR(log_total_mass(w, xi, 0, 50.0) / 50.0, lambda, 0.1);
  // approach from above or below is monotone in t and bounded by max xi
  std::vector<GrowthPoint> pts = growth_curve(w, xi, 0, {5.0, 10.0, 20.0, 40.0});
  const double mx = *std::max_element(xi.values().begin(), xi.values().end());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_LE(pts[k].rate, mx + 1e-12);
    if (k > 0) EXPECT_LE(std::abs(pts[k].rate - lambda), std::abs(pts[k - 1].rate - lambda) + 1e-12);
  }
}

TEST(Evolve, LargePotentialNoOverflow) {
  RootedGraph g = canonical_tree(TreeKind::regular, 3, 4);
  PotentialField xi = PotentialField::constant(g.size(), 30.0, 1.0);
  const double lm = log_total_mass(DirichletWindow::whole(g), xi, 0, 100.0);
  EXPECT_NEAR(lm, 3000.0, 1e-6);
}

TEST(Evolve, MethodNames) {
  for (EvolveMethod m : kMethods) EXPECT_EQ(parse_evolve_method(to_string(m)), m);
  EXPECT_THROW(parse_evolve_method("euler"), std::invalid_argument);
}
