#include "rcrs/matching.hpp"

#include <cmath>

namespace rcrs {

bool is_valid_matching(const Graph& g, const ArrivalSample& s, const Matching& m, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::vector<int> cover(static_cast<std::size_t>(g.vertex_count()), 0);
  for (const AcceptedEdge& a : m.accepted) {
    if (a.edge < 0 || a.edge >= g.edge_count()) return fail("edge id out of range");
    const Edge& e = g.edge(a.edge);
    if (++cover[e.u] > 1 || ++cover[e.v] > 1) {
      return fail("vertex covered twice by edge " + std::to_string(a.edge));
    }
    if (s.mode == ArrivalMode::kVertex) {
      const VertexId v = a.proposer;
      if (v != e.u && v != e.v) return fail("proposer is not an endpoint");
      const VertexId u = e.other(v);
      if (s.choices[v] != u || !vertex_before(s, u, v)) {
        return fail("edge " + std::to_string(a.edge) + " accepted but not active");
      }
      if (a.time != s.times[v]) return fail("acceptance time differs from arrival time");
    } else {
      if (!s.active[a.edge]) return fail("edge " + std::to_string(a.edge) + " accepted but not active");
      if (a.time != s.edge_times[a.edge]) return fail("acceptance time differs from arrival time");
    }
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if ((cover[v] > 0) != m.is_matched(v)) return fail("matched flag inconsistent at vertex " + std::to_string(v));
  }
  return true;
}

}  // namespace rcrs
