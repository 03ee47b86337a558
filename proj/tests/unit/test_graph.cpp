#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "gwpam/graph.hpp"
#include "gwpam/walker.hpp"
#include "oracles.hpp"

using namespace gwpam;

TEST(OffspringLaw, ParsesAndSummarises) {
  OffspringLaw law = OffspringLaw::parse("2:0.5,3:0.5");
  EXPECT_EQ(law.d_min(), 2);
  EXPECT_EQ(law.d_max(), 3);
  EXPECT_DOUBLE_EQ(law.mean(), 2.5);
  EXPECT_DOUBLE_EQ(law.theta(), std::log(2.5));
  EXPECT_FALSE(law.is_deterministic());
  EXPECT_TRUE(OffspringLaw::parse("3:1").is_deterministic());
  EXPECT_THROW(OffspringLaw::parse("2:0.5,3:0.4"), std::invalid_argument);
  EXPECT_THROW(OffspringLaw::parse("garbage"), std::invalid_argument);
}

TEST(SampleGwTree, DeterministicLawLevels) {
  RootedGraph g = sample_gw_tree(OffspringLaw::deterministic(3), 2, 7);
  EXPECT_EQ(g.size(), 10u);
  EXPECT_EQ(ball(g, g.root(), 0).size(), 1u);
  EXPECT_EQ(ball(g, g.root(), 1).size(), 4u);
  EXPECT_EQ(ball(g, g.root(), 2).size(), 10u);
}

TEST(SampleGwTree, DepthZeroIsSingleVertex) {
  RootedGraph g = sample_gw_tree(OffspringLaw::parse("2:0.5,3:0.5"), 0, 1);
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(SampleGwTree, DegreesInSupportAwayFromBoundary) {
  OffspringLaw law = OffspringLaw::parse("2:0.3,3:0.3,5:0.4");
  const std::set<int> support(law.support().begin(), law.support().end());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RootedGraph g = sample_gw_tree(law, 5, seed);
    EXPECT_TRUE(g.is_tree());
    for (std::size_t v = 0; v < g.size(); ++v) {
      const auto x = static_cast<Vertex>(v);
      if (g.depth(x) < 5) EXPECT_TRUE(support.count(g.degree(x))) << "vertex " << v;
    }
  }
}

TEST(SampleGwTree, SameSeedSameTree) {
  OffspringLaw law = OffspringLaw::parse("2:0.5,3:0.5");
  EXPECT_EQ(sample_gw_tree(law, 6, 42).edges(), sample_gw_tree(law, 6, 42).edges());
}

TEST(SampleGwTree, VolumeGrowthMatchesConstruction) {
  // root has D children, later vertices D - 1, so E|B_r| = 1 + E[D] (m^r - 1) / (m - 1) with m = E[D - 1]
  OffspringLaw law = OffspringLaw::parse("2:0.5,3:0.5");
  const double mean_d = 2.5, m = 1.5;
  const double expected = 1.0 + mean_d * (std::pow(m, 6) - 1.0) / (m - 1.0);
  Welford w;
  for (std::uint64_t s = 0; s < 1000; ++s) w.add(static_cast<double>(sample_gw_tree(law, 6, derive_seed(11, s)).size()));
  EXPECT_NEAR(w.mean, expected, 4.0 * w.std_error());
}

TEST(CanonicalTree, Sizes) {
  RootedGraph half = canonical_tree(TreeKind::half, 3, 1);
  EXPECT_EQ(half.size(), 3u);
  EXPECT_EQ(half.degree(half.root()), 2);
  EXPECT_EQ(canonical_tree(TreeKind::regular, 3, 2).size(), 10u);
  for (int r = 0; r <= 5; ++r) {
    RootedGraph path = canonical_tree(TreeKind::regular, 2, r);
    EXPECT_EQ(path.size(), static_cast<std::size_t>(2 * r + 1));
    EXPECT_LE(path.max_degree(), 2);
  }
}

TEST(GlueTwo, TwoSingletonsMakeK2) {
  RootedGraph one = RootedGraph::from_edges(1, {}, 0);
  RootedGraph k2 = glue_two(one, 0, one, 0);
  EXPECT_EQ(k2.size(), 2u);
  EXPECT_EQ(k2.edge_count(), 1u);
}

TEST(GlueTwo, CountsAndDegreeChanges) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    RootedGraph a = oracle::random_tree(1 + rng() % 12, rng);
    RootedGraph b = oracle::random_tree(1 + rng() % 12, rng);
    const auto x1 = static_cast<Vertex>(rng() % a.size());
    const auto x2 = static_cast<Vertex>(rng() % b.size());
    GluedGraph gl = glue_two_mapped(a, x1, b, x2);
    EXPECT_EQ(gl.graph.size(), a.size() + b.size());
    EXPECT_EQ(gl.graph.edge_count(), a.edge_count() + b.edge_count() + 1);
    int changed = 0;
    for (std::size_t v = 0; v < a.size(); ++v) {
      const int diff = gl.graph.degree(gl.map1[v]) - a.degree(static_cast<Vertex>(v));
      EXPECT_TRUE(diff == 0 || diff == 1);
      changed += diff;
    }
    for (std::size_t v = 0; v < b.size(); ++v) {
      const int diff = gl.graph.degree(gl.map2[v]) - b.degree(static_cast<Vertex>(v));
      EXPECT_TRUE(diff == 0 || diff == 1);
      changed += diff;
    }
    EXPECT_EQ(changed, 2);
    EXPECT_TRUE(gl.graph.adjacent(gl.map1[static_cast<std::size_t>(x1)], gl.map2[static_cast<std::size_t>(x2)]));
  }
}

TEST(GlueTwo, HalfTreesGiveRegularBall) {
  // two depth-r half-trees joined at their roots: the ball of T_d around the root edge
  const int d = 3, r = 3;
  RootedGraph half = canonical_tree(TreeKind::half, d, r);
  RootedGraph glued = glue_two(half, 0, half, 0);
  EXPECT_EQ(glued.size(), 2 * half.size());
  EXPECT_EQ(glued.degree(0), d);
  for (std::size_t v = 0; v < glued.size(); ++v) {
    const int deg = glued.degree(static_cast<Vertex>(v));
    EXPECT_TRUE(deg == d || deg == 1);
  }
}

TEST(GlueStar, Shapes) {
  RootedGraph one = RootedGraph::from_edges(1, {}, 0);
  RootedGraph k2 = glue_star({{one, 0}});
  EXPECT_EQ(k2.size(), 2u);
  RootedGraph star = glue_star({{one, 0}, {one, 0}, {one, 0}});
  EXPECT_EQ(star.size(), 4u);
  EXPECT_EQ(star.degree(0), 3);
  RootedGraph path3 = RootedGraph::from_edges(3, {{0, 1}, {1, 2}}, 0);
  StarGraph sg = glue_star_mapped({{path3, 1}, {path3, 0}});
  EXPECT_EQ(sg.graph.degree(sg.piece_maps[0][1]), 3);
  EXPECT_EQ(sg.graph.degree(sg.piece_maps[1][0]), 2);
}

TEST(BoundaryCompletion, SingleVertexD2) {
  RootedGraph one = RootedGraph::from_edges(1, {}, 0);
  BallView v = ball(one, 0, 0);
  RootedGraph done = attach_boundary_completion(v, 2, 2);
  EXPECT_EQ(done.degree(0), 1);
  EXPECT_EQ(done.size(), 4u);  // the vertex plus one 3-vertex half-tree copy
}

TEST(BoundaryCompletion, AddsTwoEdgesPerBoundaryVertex) {
  RootedGraph g = sample_gw_tree(OffspringLaw::parse("2:0.5,3:0.5"), 4, 5);
  BallView v = ball(g, g.root(), 3);
  std::vector<Vertex> map;
  RootedGraph done = attach_boundary_completion(v, 3, 1, &map);
  const std::size_t b = v.boundary().size();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.distances()[i] == 3) EXPECT_EQ(done.degree(map[i]), 3);
  // each copy is a root plus 2 children at depth 1
  EXPECT_EQ(done.size(), v.size() + b * 2 * 3);
  EXPECT_EQ(done.edge_count(), v.size() - 1 + b * 2 * 3);
}

TEST(BoundaryCompletion, ReproducesLargerRegularBall) {
  const int d = 3;
  RootedGraph t = canonical_tree(TreeKind::regular, d, 2);
  RootedGraph done = attach_boundary_completion(ball(t, 0, 2), d, 2);
  RootedGraph bigger = canonical_tree(TreeKind::regular, d, 4);
  EXPECT_EQ(canonical_code(ball(done, 0, 4)), canonical_code(ball(bigger, 0, 4)));
}

TEST(Ball, SmallCases) {
  RootedGraph path = RootedGraph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 0);
  EXPECT_EQ(ball(path, 0, 0).size(), 1u);
  EXPECT_EQ(ball(path, 0, 2).size(), 3u);
  EXPECT_EQ(ball(canonical_tree(TreeKind::regular, 3, 4), 0, 2).size(), 10u);
}

TEST(Ball, NestedInRadius) {
  RootedGraph g = sample_gw_tree(OffspringLaw::parse("2:0.5,3:0.5"), 7, 9);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto c = static_cast<Vertex>(rng() % g.size());
    for (int r = 0; r < 5; ++r) {
      BallView small = ball(g, c, r), big = ball(g, c, r + 1);
      for (Vertex v : small.vertices()) EXPECT_TRUE(big.contains(v));
    }
  }
}

TEST(Isomorphism, RegularBalls) {
  RootedGraph t3 = canonical_tree(TreeKind::regular, 3, 3);
  RootedGraph t4 = canonical_tree(TreeKind::regular, 4, 3);
  EXPECT_TRUE(rooted_ball_isomorphic(ball(t3, 0, 2), ball(t3, 0, 2)).isomorphic);
  EXPECT_FALSE(rooted_ball_isomorphic(ball(t3, 0, 2), ball(t4, 0, 2)).isomorphic);
}

TEST(Isomorphism, InvariantUnderRelabeling) {
  Rng rng(4);
  for (std::uint64_t s = 1; s <= 25; ++s) {
    RootedGraph g = sample_gw_tree(OffspringLaw::parse("2:0.4,3:0.4,4:0.2"), 4, s);
    std::vector<Vertex> map;
    RootedGraph h = relabel_randomly(g, rng, &map);
    BallView a = ball(g, 0, 4), b = ball(h, 0, 4);
    IsomorphismResult res = rooted_ball_isomorphic(a, b);
    ASSERT_TRUE(res.isomorphic);
    EXPECT_EQ(canonical_code(a), canonical_code(b));
    EXPECT_EQ(res.witness.size(), a.size());
    for (const auto& [x, y] : res.witness)
      for (const auto& [x2, y2] : res.witness)
        EXPECT_EQ(g.adjacent(x, x2), h.adjacent(y, y2));
    EXPECT_TRUE(rooted_ball_isomorphic(b, a).isomorphic);
  }
}

TEST(Isomorphism, AgreesWithBruteForce) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 300; ++i) {
    RootedGraph a = oracle::random_tree(1 + rng() % 7, rng);
    RootedGraph b = oracle::random_tree(a.size(), rng);
    const bool brute = oracle::isomorphic_rooted(oracle::adjacency_of(a), 0, -1, oracle::adjacency_of(b), 0, -1);
    const int R = std::max(a.max_depth(), b.max_depth());
    EXPECT_EQ(rooted_ball_isomorphic(ball(a, 0, R), ball(b, 0, R)).isomorphic, brute);
  }
}

TEST(GraphIo, JsonRoundTrip) {
  RootedGraph g = sample_gw_tree(OffspringLaw::parse("2:0.5,3:0.5"), 4, 3);
  RootedGraph h = graph_from_json(to_json(g));
  EXPECT_EQ(g.edges(), h.edges());
  const auto path = std::filesystem::temp_directory_path() / "gwpam_graph_io.json";
  write_graph(g, path.string());
  EXPECT_EQ(read_graph(path.string()).edges(), g.edges());
  std::filesystem::remove(path);
}

TEST(GraphValidation, RejectsBadInput) {
  EXPECT_THROW(RootedGraph::from_edges(3, {{0, 1}}, 0), std::invalid_argument);          // disconnected
  EXPECT_THROW(RootedGraph::from_edges(2, {{0, 0}, {0, 1}}, 0), std::invalid_argument);  // loop
  EXPECT_THROW(RootedGraph::from_edges(2, {{0, 1}, {1, 0}}, 0), std::invalid_argument);  // duplicate
}

TEST(Corpus, CountsMatchKnownSequence) {
  // connected graphs on n unlabeled vertices: 1, 1, 2, 6, 21, 112
  std::vector<RootedGraph> corpus = connected_graph_corpus(6);
  std::vector<int> by_n(7, 0);
  for (const auto& g : corpus) ++by_n[g.size()];
  EXPECT_EQ(by_n, (std::vector<int>{0, 1, 1, 2, 6, 21, 112}));
}

TEST(Corpus, ShippedFileMatches) {
  nlohmann::json shipped;
  std::ifstream in(std::string(GWPAM_DATA_DIR) + "/connected_graphs_le6.json");
  ASSERT_TRUE(in.good());
  in >> shipped;
  std::vector<RootedGraph> corpus = connected_graph_corpus(6);
  ASSERT_EQ(shipped.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) EXPECT_EQ(graph_from_json(shipped[i]).edges(), corpus[i].edges());
}
