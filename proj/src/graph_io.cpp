#include "rcrs/graph_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rcrs {

using nlohmann::json;

Graph graph_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("graph JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("graph JSON: top level must be an object");
  if (!j.contains("vertex_count") || !j["vertex_count"].is_number_integer()) {
    throw std::invalid_argument("graph JSON: missing integer field 'vertex_count'");
  }
  if (!j.contains("edges") || !j["edges"].is_array()) {
    throw std::invalid_argument("graph JSON: missing array field 'edges'");
  }
  std::vector<Edge> edges;
  std::size_t i = 0;
  for (const json& e : j["edges"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number()) {
      throw std::invalid_argument("graph JSON: edges[" + std::to_string(i) + "] must be [u, v, x]");
    }
    edges.push_back({e[0].get<VertexId>(), e[1].get<VertexId>(), e[2].get<double>()});
    ++i;
  }
  return Graph(j["vertex_count"].get<int>(), std::move(edges));
}

std::string graph_to_json_text(const Graph& g) {
  json j;
  j["vertex_count"] = g.vertex_count();
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v, e.x});
  j["edges"] = std::move(edges);
  return j.dump() + "\n";
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return graph_from_json_text(ss.str());
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file '" + path + "'");
  out << graph_to_json_text(g);
}

}  // namespace rcrs
