#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gwpam/rng.hpp"

namespace gwpam {

using Vertex = std::int32_t;

// Offspring law D of the Galton-Watson tree, finite support.
class OffspringLaw {
 public:
  OffspringLaw(std::vector<int> support, std::vector<double> probabilities);

  static OffspringLaw deterministic(int d);
  // Parses "2:0.5,3:0.5".
  static OffspringLaw parse(std::string_view text);

  const std::vector<int>& support() const { return support_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  int d_min() const { return d_min_; }
  int d_max() const { return d_max_; }
  double mean() const { return mean_; }
  double theta() const;
  bool is_deterministic() const { return support_.size() == 1; }

  int sample(Rng& rng) const;
  std::string to_string() const;

 private:
  std::vector<int> support_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  int d_min_ = 0;
  int d_max_ = 0;
  double mean_ = 0.0;
};

// Finite connected graph with a distinguished root. Vertices are numbered in
// BFS order from the root; neighbor lists are sorted. The only vertex allowed
// to have degree zero is the root of the one-vertex graph.
class RootedGraph {
 public:
  RootedGraph();

  // Validates symmetry, loops, duplicates and connectivity, then relabels in
  // BFS order. old_to_new (if given) receives the relabeling.
  static RootedGraph from_adjacency(std::vector<std::vector<Vertex>> adjacency, Vertex root,
                                    std::vector<Vertex>* old_to_new = nullptr);
  static RootedGraph from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges,
                                Vertex root, std::vector<Vertex>* old_to_new = nullptr);

  std::size_t size() const { return offsets_.size() - 1; }
  std::size_t edge_count() const { return targets_.size() / 2; }
  Vertex root() const { return 0; }

  std::span<const Vertex> neighbors(Vertex x) const {
    return {targets_.data() + offsets_[x], targets_.data() + offsets_[x + 1]};
  }
  int degree(Vertex x) const { return static_cast<int>(offsets_[x + 1] - offsets_[x]); }
  // Graph distance from the root.
  int depth(Vertex x) const { return depth_[x]; }
  int max_depth() const;
  int min_degree() const;
  int max_degree() const;
  bool is_tree() const { return edge_count() + 1 == size(); }
  bool adjacent(Vertex x, Vertex y) const;

  std::vector<std::pair<Vertex, Vertex>> edges() const;
  std::vector<std::vector<Vertex>> adjacency() const;

  const nlohmann::json& meta() const { return meta_; }
  void set_meta(nlohmann::json meta) { meta_ = std::move(meta); }

 private:
  std::vector<std::int64_t> offsets_;
  std::vector<Vertex> targets_;
  std::vector<int> depth_;
  nlohmann::json meta_ = nlohmann::json::object();
};

// Breadth-first ball B_r(center).
class BallView {
 public:
  BallView(const RootedGraph& graph, Vertex center, int radius);

  const RootedGraph& graph() const { return *graph_; }
  Vertex center() const { return center_; }
  int radius() const { return radius_; }
  // Vertices in BFS order from the center (center first).
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<int>& distances() const { return distances_; }
  const std::vector<Vertex>& boundary() const { return boundary_; }
  std::size_t size() const { return vertices_.size(); }
  bool contains(Vertex v) const;
  // Distance from the center, or -1 outside the ball.
  int distance(Vertex v) const;
  bool is_tree() const;
  // Induced subgraph rooted at the center; local_to_global maps result vertices
  // back to the parent graph.
  RootedGraph induced(std::vector<Vertex>* local_to_global = nullptr) const;

 private:
  const RootedGraph* graph_;
  Vertex center_;
  int radius_;
  std::vector<Vertex> vertices_;
  std::vector<int> distances_;
  std::vector<Vertex> boundary_;
  std::vector<std::pair<Vertex, int>> sorted_;
};

BallView ball(const RootedGraph& g, Vertex center, int r);

enum class TreeKind { regular, half };

RootedGraph sample_gw_tree(const OffspringLaw& law, int depth, std::uint64_t seed);
RootedGraph canonical_tree(TreeKind kind, int d, int depth);

struct GluedGraph {
  RootedGraph graph;
  std::vector<Vertex> map1;  // vertex of g1 -> vertex of result
  std::vector<Vertex> map2;  // vertex of g2 -> vertex of result
};

GluedGraph glue_two_mapped(const RootedGraph& g1, Vertex x1, const RootedGraph& g2, Vertex x2);
RootedGraph glue_two(const RootedGraph& g1, Vertex x1, const RootedGraph& g2, Vertex x2);

struct StarPiece {
  RootedGraph graph;
  Vertex marked = 0;
};

struct StarGraph {
  RootedGraph graph;  // rooted at the hub, so the hub is vertex 0
  std::vector<std::vector<Vertex>> piece_maps;
};

StarGraph glue_star_mapped(const std::vector<StarPiece>& pieces);
RootedGraph glue_star(const std::vector<StarPiece>& pieces);

// Attaches d-1 copies of the half-tree (truncated at copy_depth) to every
// boundary vertex of a tree ball.
RootedGraph attach_boundary_completion(const BallView& ball, int d, int copy_depth = 2,
                                       std::vector<Vertex>* ball_to_result = nullptr);

struct IsomorphismResult {
  bool isomorphic = false;
  // witness[i] = (vertex of a, vertex of b); centers are paired first.
  std::vector<std::pair<Vertex, Vertex>> witness;
};

// Rooted-tree isomorphism of two balls (as trees hanging from their centers).
IsomorphismResult rooted_ball_isomorphic(const BallView& a, const BallView& b);

// AHU canonical code of a ball as a nested-parentheses string.
std::string canonical_code(const BallView& view);

// Permutes vertex labels (keeping the same root) and returns the BFS-relabelled
// graph plus the mapping.
RootedGraph relabel_randomly(const RootedGraph& g, Rng& rng, std::vector<Vertex>* old_to_new);

nlohmann::json to_json(const RootedGraph& g);
RootedGraph graph_from_json(const nlohmann::json& j);
void write_graph(const RootedGraph& g, const std::string& path);
RootedGraph read_graph(const std::string& path);

// All connected simple graphs on 1..max_n vertices up to isomorphism, in a
// deterministic order.
std::vector<RootedGraph> connected_graph_corpus(int max_n);

}  // namespace gwpam
