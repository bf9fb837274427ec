#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcrs/graph.hpp"
#include "rcrs/rng.hpp"

namespace rcrs {

enum class ArrivalMode { kVertex, kEdge };

// One realization of the arrival process. Vertex mode fills choices,
// choice_edges and times; edge mode fills active and edge_times.
struct ArrivalSample {
  ArrivalMode mode = ArrivalMode::kVertex;
  std::vector<VertexId> choices;     // F_v, kNoVertex for ⊥
  std::vector<EdgeId> choice_edges;  // edge {v, F_v}, kNoEdge for ⊥
  std::vector<double> times;         // Y_v
  std::vector<std::uint8_t> active;  // edge mode
  std::vector<double> edge_times;    // edge mode Y_e
};

// Restricts the arrival time of one vertex (vertex mode) or one edge (edge
// mode): kBefore b gives U[0,b), kAfter b gives U(b,1], kPinned fixes it.
struct TimeConstraint {
  enum class Kind { kBefore, kAfter, kPinned };
  std::int32_t id;
  Kind kind;
  double value;

  static TimeConstraint before(std::int32_t id, double b) { return {id, Kind::kBefore, b}; }
  static TimeConstraint after(std::int32_t id, double b) { return {id, Kind::kAfter, b}; }
  static TimeConstraint pinned(std::int32_t id, double y) { return {id, Kind::kPinned, y}; }

  double apply(double u01) const;
};

struct ActiveEdge {
  EdgeId edge;
  VertexId proposer;  // later endpoint
  double arrival;     // max(Y_u, Y_v)
};

// Strict arrival order with ties broken by id.
inline bool arrives_before(double ya, std::int32_t a, double yb, std::int32_t b) {
  return ya < yb || (ya == yb && a < b);
}

inline bool vertex_before(const ArrivalSample& s, VertexId a, VertexId b) {
  return arrives_before(s.times[a], a, s.times[b], b);
}

// Draws F_v from the categorical {u w.p. x_uv, ⊥ otherwise} using u01.
// Returns the incidence index into g.incident(v), or -1 for ⊥.
int sample_choice_index(const Graph& g, VertexId v, double u01);

ArrivalSample sample_vertex_arrivals(const Graph& g, const Stream& rng,
                                     std::span<const TimeConstraint> constraints = {});

// Same as sample_vertex_arrivals but reuses `out` and skips load checks.
void sample_vertex_arrivals_into(const Graph& g, const Stream& rng,
                                 std::span<const TimeConstraint> constraints, ArrivalSample& out);

ArrivalSample sample_edge_arrivals(const Graph& g, const Stream& rng,
                                   std::span<const TimeConstraint> constraints = {});

void sample_edge_arrivals_into(const Graph& g, const Stream& rng,
                               std::span<const TimeConstraint> constraints, ArrivalSample& out);

std::vector<ActiveEdge> active_edges(const Graph& g, const ArrivalSample& s);

// Vertex ids sorted by (Y_v, v).
std::vector<VertexId> arrival_order(const ArrivalSample& s);

// Active edge ids sorted by (Y_e, e).
std::vector<EdgeId> edge_arrival_order(const ArrivalSample& s);

}  // namespace rcrs
