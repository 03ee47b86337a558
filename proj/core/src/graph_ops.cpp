#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "gwpam/graph.hpp"

namespace gwpam {

namespace {

template <typename ChildCount>
RootedGraph grow_tree(int depth, ChildCount&& children_of, nlohmann::json meta) {
  if (depth < 0) throw std::invalid_argument("tree: depth must be nonnegative");
  std::vector<std::vector<Vertex>> adj(1);
  std::vector<int> level{0};
  for (std::size_t head = 0; head < adj.size(); ++head) {
    if (level[head] == depth) continue;
    int k = children_of(head == 0);
    for (int c = 0; c < k; ++c) {
      auto child = static_cast<Vertex>(adj.size());
      adj.emplace_back();
      level.push_back(level[head] + 1);
      adj[head].push_back(child);
      adj[child].push_back(static_cast<Vertex>(head));
    }
  }
  RootedGraph g = RootedGraph::from_adjacency(std::move(adj), 0);
  g.set_meta(std::move(meta));
  return g;
}

void append_half_tree(std::vector<std::vector<Vertex>>& adj, Vertex attach, int d, int depth) {
  auto copy_root = static_cast<Vertex>(adj.size());
  adj.emplace_back();
  adj[attach].push_back(copy_root);
  adj[copy_root].push_back(attach);
  std::vector<std::pair<Vertex, int>> frontier{{copy_root, 0}};
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    auto [v, lvl] = frontier[head];
    if (lvl == depth) continue;
    for (int c = 0; c < d - 1; ++c) {
      auto child = static_cast<Vertex>(adj.size());
      adj.emplace_back();
      adj[v].push_back(child);
      adj[child].push_back(v);
      frontier.emplace_back(child, lvl + 1);
    }
  }
}

// Children of v inside a tree ball: neighbors one step further from the center.
std::vector<Vertex> ball_children(const BallView& view, Vertex v, int dv) {
  std::vector<Vertex> out;
  for (Vertex y : view.graph().neighbors(v))
    if (view.distance(y) == dv + 1) out.push_back(y);
  return out;
}

struct AhuCodes {
  std::map<std::vector<int>, int> dictionary;

  std::map<Vertex, int> encode(const BallView& view) {
    std::map<Vertex, int> code;
    const auto& verts = view.vertices();
    const auto& dist = view.distances();
    for (std::size_t i = verts.size(); i-- > 0;) {
      std::vector<int> child_codes;
      for (Vertex c : ball_children(view, verts[i], dist[i])) child_codes.push_back(code.at(c));
      std::sort(child_codes.begin(), child_codes.end());
      auto [it, inserted] = dictionary.emplace(std::move(child_codes), static_cast<int>(dictionary.size()));
      code[verts[i]] = it->second;
    }
    return code;
  }
};

}  // namespace

RootedGraph sample_gw_tree(const OffspringLaw& law, int depth, std::uint64_t seed) {
  Rng rng(seed);
  nlohmann::json meta = {{"kind", "gw"}, {"law", law.to_string()}, {"depth", depth}, {"seed", seed}};
  return grow_tree(
      depth, [&](bool is_root) { return is_root ? law.sample(rng) : law.sample(rng) - 1; }, std::move(meta));
}

RootedGraph canonical_tree(TreeKind kind, int d, int depth) {
  if (d < 2) throw std::invalid_argument("canonical tree: d must be at least 2");
  nlohmann::json meta = {{"kind", kind == TreeKind::regular ? "regular" : "half"}, {"d", d}, {"depth", depth}};
  int root_children = kind == TreeKind::regular ? d : d - 1;
  return grow_tree(
      depth, [&](bool is_root) { return is_root ? root_children : d - 1; }, std::move(meta));
}

GluedGraph glue_two_mapped(const RootedGraph& g1, Vertex x1, const RootedGraph& g2, Vertex x2) {
  const auto n1 = static_cast<Vertex>(g1.size());
  const auto n2 = static_cast<Vertex>(g2.size());
  if (x1 < 0 || x1 >= n1 || x2 < 0 || x2 >= n2) throw std::invalid_argument("glue_two: marked vertex out of range");
  std::vector<std::vector<Vertex>> adj = g1.adjacency();
  for (Vertex v = 0; v < n2; ++v) {
    std::vector<Vertex> nb;
    for (Vertex y : g2.neighbors(v)) nb.push_back(y + n1);
    adj.push_back(std::move(nb));
  }
  adj[x1].push_back(x2 + n1);
  adj[x2 + n1].push_back(x1);
  std::vector<Vertex> relabel;
  GluedGraph out{RootedGraph::from_adjacency(std::move(adj), 0, &relabel), {}, {}};
  out.map1.assign(relabel.begin(), relabel.begin() + n1);
  out.map2.assign(relabel.begin() + n1, relabel.end());
  return out;
}

RootedGraph glue_two(const RootedGraph& g1, Vertex x1, const RootedGraph& g2, Vertex x2) {
  return glue_two_mapped(g1, x1, g2, x2).graph;
}

StarGraph glue_star_mapped(const std::vector<StarPiece>& pieces) {
  if (pieces.empty()) throw std::invalid_argument("glue_star: need at least one piece");
  std::vector<std::vector<Vertex>> adj(1);
  std::vector<Vertex> offsets;
  for (const auto& piece : pieces) {
    if (piece.marked < 0 || static_cast<std::size_t>(piece.marked) >= piece.graph.size())
      throw std::invalid_argument("glue_star: marked vertex out of range");
    auto off = static_cast<Vertex>(adj.size());
    offsets.push_back(off);
    for (std::size_t v = 0; v < piece.graph.size(); ++v) {
      std::vector<Vertex> nb;
      for (Vertex y : piece.graph.neighbors(static_cast<Vertex>(v))) nb.push_back(y + off);
      adj.push_back(std::move(nb));
    }
    adj[0].push_back(piece.marked + off);
    adj[piece.marked + off].push_back(0);
  }
  std::vector<Vertex> relabel;
  StarGraph out{RootedGraph::from_adjacency(std::move(adj), 0, &relabel), {}};
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto begin = relabel.begin() + offsets[i];
    out.piece_maps.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(pieces[i].graph.size()));
  }
  return out;
}

RootedGraph glue_star(const std::vector<StarPiece>& pieces) { return glue_star_mapped(pieces).graph; }

RootedGraph attach_boundary_completion(const BallView& view, int d, int copy_depth,
                                       std::vector<Vertex>* ball_to_result) {
  if (d < 2) throw std::invalid_argument("boundary completion: d must be at least 2");
  if (copy_depth < 0) throw std::invalid_argument("boundary completion: copy depth must be nonnegative");
  if (!view.is_tree()) throw std::invalid_argument("boundary completion: ball is not a tree");
  const auto& verts = view.vertices();
  std::map<Vertex, Vertex> local;
  for (std::size_t i = 0; i < verts.size(); ++i) local[verts[i]] = static_cast<Vertex>(i);
  std::vector<std::vector<Vertex>> adj(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (Vertex y : view.graph().neighbors(verts[i]))
      if (auto it = local.find(y); it != local.end()) adj[i].push_back(it->second);
  for (Vertex b : view.boundary())
    for (int c = 0; c < d - 1; ++c) append_half_tree(adj, local.at(b), d, copy_depth);
  std::vector<Vertex> relabel;
  RootedGraph g = RootedGraph::from_adjacency(std::move(adj), 0, &relabel);
  g.set_meta({{"kind", "boundary_completion"}, {"d", d}, {"radius", view.radius()}, {"copy_depth", copy_depth}});
  if (ball_to_result) ball_to_result->assign(relabel.begin(), relabel.begin() + static_cast<std::ptrdiff_t>(verts.size()));
  return g;
}

IsomorphismResult rooted_ball_isomorphic(const BallView& a, const BallView& b) {
  if (!a.is_tree() || !b.is_tree()) throw std::invalid_argument("rooted_ball_isomorphic: input ball is not a tree");
  IsomorphismResult result;
  if (a.size() != b.size()) return result;
  AhuCodes ahu;
  auto ca = ahu.encode(a);
  auto cb = ahu.encode(b);
  if (ca.at(a.center()) != cb.at(b.center())) return result;
  result.isomorphic = true;
  std::vector<std::tuple<Vertex, Vertex, int>> stack{{a.center(), b.center(), 0}};
  while (!stack.empty()) {
    auto [va, vb, dv] = stack.back();
    stack.pop_back();
    result.witness.emplace_back(va, vb);
    auto kids_a = ball_children(a, va, dv);
    auto kids_b = ball_children(b, vb, dv);
    auto by_code_a = [&](Vertex x, Vertex y) { return std::make_pair(ca.at(x), x) < std::make_pair(ca.at(y), y); };
    auto by_code_b = [&](Vertex x, Vertex y) { return std::make_pair(cb.at(x), x) < std::make_pair(cb.at(y), y); };
    std::sort(kids_a.begin(), kids_a.end(), by_code_a);
    std::sort(kids_b.begin(), kids_b.end(), by_code_b);
    for (std::size_t i = 0; i < kids_a.size(); ++i) stack.emplace_back(kids_a[i], kids_b[i], dv + 1);
  }
  return result;
}

std::string canonical_code(const BallView& view) {
  if (!view.is_tree()) throw std::invalid_argument("canonical_code: ball is not a tree");
  std::map<Vertex, std::string> code;
  const auto& verts = view.vertices();
  const auto& dist = view.distances();
  for (std::size_t i = verts.size(); i-- > 0;) {
    std::vector<std::string> kids;
    for (Vertex c : ball_children(view, verts[i], dist[i])) kids.push_back(std::move(code.at(c)));
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    for (auto& k : kids) s += k;
    s += ")";
    code[verts[i]] = std::move(s);
  }
  return code.at(view.center());
}

RootedGraph relabel_randomly(const RootedGraph& g, Rng& rng, std::vector<Vertex>* old_to_new) {
  const std::size_t n = g.size();
  std::vector<Vertex> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Vertex>> adj(n);
  for (std::size_t x = 0; x < n; ++x)
    for (Vertex y : g.neighbors(static_cast<Vertex>(x))) adj[perm[x]].push_back(perm[y]);
  std::vector<Vertex> relabel;
  RootedGraph out = RootedGraph::from_adjacency(std::move(adj), perm[g.root()], &relabel);
  if (old_to_new) {
    old_to_new->assign(n, -1);
    for (std::size_t x = 0; x < n; ++x) (*old_to_new)[x] = relabel[perm[x]];
  }
  out.set_meta(g.meta());
  return out;
}

}  // namespace gwpam
