#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcrs/arrival.hpp"
#include "rcrs/graph.hpp"

namespace rcrs {

struct AcceptedEdge {
  EdgeId edge;
  double time;
  VertexId proposer;  // kNoVertex in edge-arrival mode
};

struct Matching {
  std::vector<AcceptedEdge> accepted;
  std::vector<std::uint8_t> matched;  // per vertex

  void reset(int vertex_count) {
    accepted.clear();
    matched.assign(static_cast<std::size_t>(vertex_count), 0);
  }

  bool is_matched(VertexId v) const { return matched[static_cast<std::size_t>(v)] != 0; }

  void accept(const Graph& g, EdgeId e, double time, VertexId proposer) {
    accepted.push_back({e, time, proposer});
    matched[static_cast<std::size_t>(g.edge(e).u)] = 1;
    matched[static_cast<std::size_t>(g.edge(e).v)] = 1;
  }

  bool contains(EdgeId e) const {
    for (const auto& a : accepted) {
      if (a.edge == e) return true;
    }
    return false;
  }
};

// Checks that no two accepted edges share a vertex, every accepted edge was
// active in s, and its acceptance time equals its arrival time. On failure
// `why` (if given) receives a description.
bool is_valid_matching(const Graph& g, const ArrivalSample& s, const Matching& m, std::string* why = nullptr);

}  // namespace rcrs
