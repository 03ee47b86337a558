#include <fstream>
#include <stdexcept>

#include "gwpam/graph.hpp"

namespace gwpam {

nlohmann::json to_json(const RootedGraph& g) {
  nlohmann::json j;
  j["n"] = g.size();
  j["root"] = g.root();
  j["adjacency"] = g.adjacency();
  j["meta"] = g.meta();
  return j;
}

RootedGraph graph_from_json(const nlohmann::json& j) {
  auto n = j.at("n").get<std::size_t>();
  auto adjacency = j.at("adjacency").get<std::vector<std::vector<Vertex>>>();
  if (adjacency.size() != n) throw std::invalid_argument("graph json: adjacency length differs from n");
  RootedGraph g = RootedGraph::from_adjacency(std::move(adjacency), j.value("root", 0));
  if (j.contains("meta")) g.set_meta(j.at("meta"));
  return g;
}

void write_graph(const RootedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json(g).dump() << '\n';
}

RootedGraph read_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return graph_from_json(nlohmann::json::parse(in));
}

}  // namespace gwpam
