#pragma once

#include <iosfwd>
#include <string>

#include "rcrs/graph.hpp"

namespace rcrs {

// JSON format: {"vertex_count": n, "edges": [[u, v, x], ...]}
Graph graph_from_json_text(const std::string& text);
std::string graph_to_json_text(const Graph& g);

Graph load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);

}  // namespace rcrs
