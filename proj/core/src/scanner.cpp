#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "gwpam/harness.hpp"

namespace gwpam {

namespace {

struct Matcher {
  const RootedGraph& g;
  const PotentialField& xi;
  const RootedGraph& pattern;
  const std::vector<double>& q;
  double threshold;
  int R;
  std::unordered_map<std::uint64_t, bool> memo;

  static std::uint64_t key(Vertex pv, Vertex gv) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(pv)) << 32) | static_cast<std::uint32_t>(gv);
  }

  std::vector<Vertex> children(const RootedGraph& h, Vertex v, Vertex parent) const {
    std::vector<Vertex> out;
    for (Vertex w : h.neighbors(v))
      if (w != parent) out.push_back(w);
    return out;
  }

  bool local_ok(Vertex pv, Vertex gv, int d) const {
    if (d > R) return true;
    if (pattern.degree(pv) != g.degree(gv)) return false;
    return xi[gv] >= threshold + q[static_cast<std::size_t>(pv)];
  }

  // Kuhn's augmenting paths; match[j] = row matched to column j.
  static bool augment(int i, const std::vector<std::vector<char>>& ok, std::vector<int>& match,
                      std::vector<char>& seen) {
    for (std::size_t j = 0; j < match.size(); ++j) {
      if (!ok[static_cast<std::size_t>(i)][j] || seen[j]) continue;
      seen[j] = 1;
      if (match[j] < 0 || augment(match[j], ok, match, seen)) {
        match[j] = i;
        return true;
      }
    }
    return false;
  }

  std::optional<std::vector<int>> perfect_matching(const std::vector<std::vector<char>>& ok) const {
    const std::size_t n = ok.size();
    std::vector<int> match(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<char> seen(n, 0);
      if (!augment(static_cast<int>(i), ok, match, seen)) return std::nullopt;
    }
    return match;
  }

  std::vector<std::vector<char>> compatibility(const std::vector<Vertex>& pc, const std::vector<Vertex>& gc, Vertex pv,
                                               Vertex gv, int d) {
    std::vector<std::vector<char>> ok(pc.size(), std::vector<char>(gc.size(), 0));
    for (std::size_t i = 0; i < pc.size(); ++i)
      for (std::size_t j = 0; j < gc.size(); ++j) ok[i][j] = feasible(pc[i], gc[j], pv, gv, d + 1);
    return ok;
  }

  bool feasible(Vertex pv, Vertex gv, Vertex pparent, Vertex gparent, int d) {
    if (!local_ok(pv, gv, d)) return false;
    if (d > R) return true;
    auto it = memo.find(key(pv, gv));
    if (it != memo.end()) return it->second;
    auto pc = children(pattern, pv, pparent);
    auto gc = children(g, gv, gparent);
    bool result = pc.size() == gc.size() && perfect_matching(compatibility(pc, gc, pv, gv, d)).has_value();
    memo.emplace(key(pv, gv), result);
    return result;
  }

  void assign(Vertex pv, Vertex gv, Vertex pparent, Vertex gparent, int d,
              std::vector<std::pair<Vertex, Vertex>>& out) {
    out.emplace_back(pv, gv);
    if (d > R) return;
    auto pc = children(pattern, pv, pparent);
    auto gc = children(g, gv, gparent);
    auto match = perfect_matching(compatibility(pc, gc, pv, gv, d));
    if (!match) throw std::logic_error("scan_high_balls: witness reconstruction failed");
    for (std::size_t j = 0; j < gc.size(); ++j)
      assign(pc[static_cast<std::size_t>((*match)[j])], gc[j], pv, gv, d + 1, out);
  }
};

double profile_mass(const RootedGraph& pattern, const std::vector<double>& q, double rho, int R) {
  double L = 0.0;
  for (Vertex v = 0; v < static_cast<Vertex>(pattern.size()); ++v)
    if (pattern.depth(v) <= R) L += std::exp(q[static_cast<std::size_t>(v)] / rho);
  return L;
}

}  // namespace

double scan_threshold(const RootedGraph& g, int ell, double rho) {
  std::size_t volume = 0;
  for (Vertex v = 0; v < static_cast<Vertex>(g.size()); ++v)
    if (g.depth(v) <= ell) ++volume;
  return std::log(static_cast<double>(volume)) > 1.0 ? a_scale(static_cast<double>(volume), rho) : 0.0;
}

nlohmann::json ScanReport::to_json() const {
  nlohmann::json hits_json = nlohmann::json::array();
  for (const auto& h : hits) hits_json.push_back({{"z", h.z}, {"depth", h.depth}, {"witness", h.witness}});
  return {{"ell", ell},         {"R", R},           {"threshold", threshold}, {"L_q", L_q},
          {"scanned", scanned}, {"hits", hits_json}, {"min_depth", min_depth}};
}

bool verify_scan_hit(const RootedGraph& g, const PotentialField& xi, const RootedGraph& pattern,
                     const std::vector<double>& q_profile, double threshold, const ScanHit& hit) {
  const int R = pattern.max_depth() - 1;
  if (hit.witness.size() != pattern.size()) return false;
  BallView view(g, hit.z, R + 1);
  if (view.size() != pattern.size()) return false;
  std::vector<Vertex> phi(pattern.size(), -1);
  std::vector<Vertex> images;
  for (auto [pv, gv] : hit.witness) {
    if (pv < 0 || static_cast<std::size_t>(pv) >= pattern.size() || phi[static_cast<std::size_t>(pv)] >= 0)
      return false;
    phi[static_cast<std::size_t>(pv)] = gv;
    images.push_back(gv);
  }
  std::sort(images.begin(), images.end());
  if (std::adjacent_find(images.begin(), images.end()) != images.end()) return false;
  if (phi[0] != hit.z) return false;
  for (Vertex v = 0; v < static_cast<Vertex>(pattern.size()); ++v) {
    const Vertex w = phi[static_cast<std::size_t>(v)];
    if (view.distance(w) != pattern.depth(v)) return false;
    if (pattern.depth(v) <= R) {
      if (g.degree(w) != pattern.degree(v)) return false;
      if (!(xi[w] >= threshold + q_profile[static_cast<std::size_t>(v)])) return false;
    }
  }
  for (auto [a, b] : pattern.edges())
    if (!g.adjacent(phi[static_cast<std::size_t>(a)], phi[static_cast<std::size_t>(b)])) return false;
  return true;
}

ScanReport scan_high_balls(const RootedGraph& g, const PotentialField& xi, const RootedGraph& pattern,
                           const std::vector<double>& q_profile, int ell) {
  if (!g.is_tree() || !pattern.is_tree()) throw std::invalid_argument("scan_high_balls: trees required");
  if (xi.size() != g.size()) throw std::invalid_argument("scan_high_balls: potential size does not match graph");
  if (q_profile.size() != pattern.size()) throw std::invalid_argument("scan_high_balls: one q value per pattern vertex");
  const int R = pattern.max_depth() - 1;
  if (R < 0) throw std::invalid_argument("scan_high_balls: pattern needs radius at least 1");
  if (g.max_depth() < ell) throw std::invalid_argument("scan_high_balls: graph shallower than ell");

  ScanReport out;
  out.ell = ell;
  out.R = R;
  out.L_q = profile_mass(pattern, q_profile, xi.rho(), R);
  if (!(out.L_q < 1.0)) throw std::invalid_argument("scan_high_balls: profile must satisfy L(q) < 1");
  out.threshold = scan_threshold(g, ell, xi.rho());

  std::vector<Vertex> centres;
  for (Vertex z = 0; z < static_cast<Vertex>(g.size()); ++z)
    if (g.depth(z) + R + 1 <= ell) centres.push_back(z);
  out.scanned = centres.size();

  std::vector<std::optional<ScanHit>> found(centres.size());
  parallel_for(centres.size(), [&](std::size_t i) {
    Matcher m{g, xi, pattern, q_profile, out.threshold, R, {}};
    const Vertex z = centres[i];
    if (!m.feasible(0, z, -1, -1, 0)) return;
    ScanHit hit;
    hit.z = z;
    hit.depth = g.depth(z);
    m.assign(0, z, -1, -1, 0, hit.witness);
    std::sort(hit.witness.begin(), hit.witness.end());
    found[i] = std::move(hit);
  });
  for (auto& h : found) {
    if (!h) continue;
    if (!verify_scan_hit(g, xi, pattern, q_profile, out.threshold, *h))
      throw std::logic_error("scan_high_balls: witness failed verification");
    out.min_depth = out.min_depth < 0 ? h->depth : std::min(out.min_depth, h->depth);
    out.hits.push_back(std::move(*h));
  }
  return out;
}

}  // namespace gwpam
