#include "gwpam/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace gwpam {

OffspringLaw::OffspringLaw(std::vector<int> support, std::vector<double> probabilities)
    : support_(std::move(support)), probabilities_(std::move(probabilities)) {
  if (support_.empty() || support_.size() != probabilities_.size())
    throw std::invalid_argument("offspring law: support and probabilities must be nonempty and aligned");
  std::vector<std::size_t> order(support_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return support_[a] < support_[b]; });
  std::vector<int> s;
  std::vector<double> p;
  for (std::size_t i : order) {
    if (probabilities_[i] < 0.0 || !std::isfinite(probabilities_[i]))
      throw std::invalid_argument("offspring law: probabilities must be finite and nonnegative");
    if (probabilities_[i] == 0.0) continue;
    if (!s.empty() && s.back() == support_[i])
      throw std::invalid_argument("offspring law: duplicate support value");
    s.push_back(support_[i]);
    p.push_back(probabilities_[i]);
  }
  double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (s.empty() || std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("offspring law: probabilities must sum to 1");
  for (double& v : p) v /= total;
  support_ = std::move(s);
  probabilities_ = std::move(p);
  d_min_ = support_.front();
  d_max_ = support_.back();
  mean_ = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    mean_ += support_[i] * probabilities_[i];
    acc += probabilities_[i];
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
  if (d_min_ < 2) throw std::invalid_argument("offspring law: d_min must be at least 2");
  if (mean_ <= 2.0) throw std::invalid_argument("offspring law: mean must exceed 2");
}

OffspringLaw OffspringLaw::deterministic(int d) { return OffspringLaw({d}, {1.0}); }

OffspringLaw OffspringLaw::parse(std::string_view text) {
  std::vector<int> support;
  std::vector<double> probs;
  std::string s(text);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        support.push_back(std::stoi(item));
        probs.push_back(1.0);
      } else {
        support.push_back(std::stoi(item.substr(0, colon)));
        probs.push_back(std::stod(item.substr(colon + 1)));
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("offspring law: cannot parse '" + s + "'");
    }
  }
  return OffspringLaw(std::move(support), std::move(probs));
}

double OffspringLaw::theta() const { return std::log(mean_); }

int OffspringLaw::sample(Rng& rng) const {
  if (support_.size() == 1) return support_[0];
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return support_[static_cast<std::size_t>(it - cumulative_.begin())];
}

std::string OffspringLaw::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (i) os << ',';
    os << support_[i] << ':' << probabilities_[i];
  }
  return os.str();
}

RootedGraph::RootedGraph() : offsets_{0, 0}, depth_{0} {}

RootedGraph RootedGraph::from_adjacency(std::vector<std::vector<Vertex>> adjacency, Vertex root,
                                        std::vector<Vertex>* old_to_new) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw std::invalid_argument("graph: empty vertex set");
  if (root < 0 || static_cast<std::size_t>(root) >= n) throw std::invalid_argument("graph: root out of range");
  for (std::size_t x = 0; x < n; ++x) {
    auto& nb = adjacency[x];
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw std::invalid_argument("graph: duplicate neighbor at vertex " + std::to_string(x));
    for (Vertex y : nb) {
      if (y < 0 || static_cast<std::size_t>(y) >= n)
        throw std::invalid_argument("graph: neighbor out of range at vertex " + std::to_string(x));
      if (static_cast<std::size_t>(y) == x) throw std::invalid_argument("graph: self-loop at vertex " + std::to_string(x));
    }
  }
  for (std::size_t x = 0; x < n; ++x)
    for (Vertex y : adjacency[x])
      if (!std::binary_search(adjacency[y].begin(), adjacency[y].end(), static_cast<Vertex>(x)))
        throw std::invalid_argument("graph: adjacency not symmetric between " + std::to_string(x) + " and " +
                                    std::to_string(y));

  std::vector<Vertex> order;
  order.reserve(n);
  std::vector<Vertex> relabel(n, -1);
  std::vector<int> dist(n, -1);
  order.push_back(root);
  relabel[root] = 0;
  dist[root] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    Vertex x = order[head];
    for (Vertex y : adjacency[x]) {
      if (relabel[y] >= 0) continue;
      relabel[y] = static_cast<Vertex>(order.size());
      dist[y] = dist[x] + 1;
      order.push_back(y);
    }
  }
  if (order.size() != n) throw std::invalid_argument("graph: not connected from the root");

  RootedGraph g;
  g.offsets_.assign(n + 1, 0);
  g.depth_.assign(n, 0);
  g.targets_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    Vertex old = order[i];
    std::vector<Vertex> nb;
    nb.reserve(adjacency[old].size());
    for (Vertex y : adjacency[old]) nb.push_back(relabel[y]);
    std::sort(nb.begin(), nb.end());
    g.targets_.insert(g.targets_.end(), nb.begin(), nb.end());
    g.offsets_[i + 1] = static_cast<std::int64_t>(g.targets_.size());
    g.depth_[i] = dist[old];
  }
  if (n > 1)
    for (std::size_t i = 0; i < n; ++i)
      if (g.degree(static_cast<Vertex>(i)) == 0) throw std::invalid_argument("graph: isolated vertex");
  if (old_to_new) *old_to_new = std::move(relabel);
  return g;
}

RootedGraph RootedGraph::from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges, Vertex root,
                                    std::vector<Vertex>* old_to_new) {
  std::vector<std::vector<Vertex>> adj(n);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n)
      throw std::invalid_argument("graph: edge endpoint out of range");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return from_adjacency(std::move(adj), root, old_to_new);
}

int RootedGraph::max_depth() const { return *std::max_element(depth_.begin(), depth_.end()); }

int RootedGraph::min_degree() const {
  int m = degree(0);
  for (std::size_t x = 1; x < size(); ++x) m = std::min(m, degree(static_cast<Vertex>(x)));
  return m;
}

int RootedGraph::max_degree() const {
  int m = degree(0);
  for (std::size_t x = 1; x < size(); ++x) m = std::max(m, degree(static_cast<Vertex>(x)));
  return m;
}

bool RootedGraph::adjacent(Vertex x, Vertex y) const {
  auto nb = neighbors(x);
  return std::binary_search(nb.begin(), nb.end(), y);
}

std::vector<std::pair<Vertex, Vertex>> RootedGraph::edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  out.reserve(edge_count());
  for (std::size_t x = 0; x < size(); ++x)
    for (Vertex y : neighbors(static_cast<Vertex>(x)))
      if (static_cast<Vertex>(x) < y) out.emplace_back(static_cast<Vertex>(x), y);
  return out;
}

std::vector<std::vector<Vertex>> RootedGraph::adjacency() const {
  std::vector<std::vector<Vertex>> out(size());
  for (std::size_t x = 0; x < size(); ++x) {
    auto nb = neighbors(static_cast<Vertex>(x));
    out[x].assign(nb.begin(), nb.end());
  }
  return out;
}

BallView::BallView(const RootedGraph& graph, Vertex center, int radius)
    : graph_(&graph), center_(center), radius_(radius) {
  if (center < 0 || static_cast<std::size_t>(center) >= graph.size())
    throw std::invalid_argument("ball: center out of range");
  if (radius < 0) throw std::invalid_argument("ball: negative radius");
  std::unordered_map<Vertex, int> seen;
  vertices_.push_back(center);
  distances_.push_back(0);
  seen[center] = 0;
  for (std::size_t head = 0; head < vertices_.size(); ++head) {
    Vertex x = vertices_[head];
    int dx = distances_[head];
    if (dx == radius) continue;
    for (Vertex y : graph.neighbors(x)) {
      if (seen.count(y)) continue;
      seen[y] = dx + 1;
      vertices_.push_back(y);
      distances_.push_back(dx + 1);
    }
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (distances_[i] == radius) boundary_.push_back(vertices_[i]);
    sorted_.emplace_back(vertices_[i], distances_[i]);
  }
  std::sort(sorted_.begin(), sorted_.end());
}

bool BallView::contains(Vertex v) const { return distance(v) >= 0; }

int BallView::distance(Vertex v) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(v, -1));
  if (it == sorted_.end() || it->first != v) return -1;
  return it->second;
}

bool BallView::is_tree() const {
  std::size_t twice_edges = 0;
  for (Vertex v : vertices_)
    for (Vertex y : graph_->neighbors(v))
      if (contains(y)) ++twice_edges;
  return twice_edges / 2 + 1 == vertices_.size();
}

RootedGraph BallView::induced(std::vector<Vertex>* local_to_global) const {
  const std::size_t n = vertices_.size();
  std::unordered_map<Vertex, Vertex> index;
  for (std::size_t i = 0; i < n; ++i) index[vertices_[i]] = static_cast<Vertex>(i);
  std::vector<std::vector<Vertex>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (Vertex y : graph_->neighbors(vertices_[i]))
      if (auto it = index.find(y); it != index.end()) adj[i].push_back(it->second);
  std::vector<Vertex> relabel;
  RootedGraph g = RootedGraph::from_adjacency(std::move(adj), 0, &relabel);
  if (local_to_global) {
    local_to_global->assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) (*local_to_global)[relabel[i]] = vertices_[i];
  }
  return g;
}

BallView ball(const RootedGraph& g, Vertex center, int r) { return BallView(g, center, r); }

}  // namespace gwpam
