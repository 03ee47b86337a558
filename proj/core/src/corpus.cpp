#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>

#include "gwpam/graph.hpp"

namespace gwpam {

namespace {

using EdgeList = std::vector<std::pair<int, int>>;

bool connected(int n, std::uint32_t mask, const EdgeList& all) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = n;
  for (std::size_t e = 0; e < all.size(); ++e) {
    if (!(mask >> e & 1U)) continue;
    int a = find(all[e].first), b = find(all[e].second);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace

std::vector<RootedGraph> connected_graph_corpus(int max_n) {
  if (max_n < 1 || max_n > 7) throw std::invalid_argument("graph corpus: max_n must be in [1, 7]");
  std::vector<RootedGraph> out;
  out.emplace_back();
  for (int n = 2; n <= max_n; ++n) {
    EdgeList all;
    std::vector<std::vector<int>> edge_index(n, std::vector<int>(n, -1));
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        edge_index[a][b] = edge_index[b][a] = static_cast<int>(all.size());
        all.emplace_back(a, b);
      }
    std::vector<std::vector<int>> perms;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));

    std::set<std::uint32_t> canonical;
    const std::uint32_t limit = 1U << all.size();
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
      if (static_cast<int>(__builtin_popcount(mask)) < n - 1) continue;
      if (!connected(n, mask, all)) continue;
      std::uint32_t best = mask;
      for (const auto& p : perms) {
        std::uint32_t image = 0;
        for (std::size_t e = 0; e < all.size(); ++e)
          if (mask >> e & 1U) image |= 1U << edge_index[p[all[e].first]][p[all[e].second]];
        best = std::min(best, image);
        if (image < mask) break;
      }
      if (best == mask) canonical.insert(mask);
    }
    for (std::uint32_t mask : canonical) {
      std::vector<std::pair<Vertex, Vertex>> edges;
      for (std::size_t e = 0; e < all.size(); ++e)
        if (mask >> e & 1U) edges.emplace_back(all[e].first, all[e].second);
      RootedGraph g = RootedGraph::from_edges(static_cast<std::size_t>(n), edges, 0);
      g.set_meta({{"kind", "corpus"}, {"n", n}, {"edge_mask", mask}});
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace gwpam
