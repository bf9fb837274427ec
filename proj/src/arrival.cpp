#include "rcrs/arrival.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace rcrs {

double TimeConstraint::apply(double u01) const {
  switch (kind) {
    case Kind::kBefore:
      return value * u01;
    case Kind::kAfter:
      return 1.0 - (1.0 - value) * u01;
    case Kind::kPinned:
      return value;
  }
  return u01;
}

int sample_choice_index(const Graph& g, VertexId v, double u01) {
  const auto inc = g.incident(v);
  double cum = 0.0;
  for (std::size_t i = 0; i < inc.size(); ++i) {
    cum += g.edge(inc[i].edge).x;
    if (u01 < cum) return static_cast<int>(i);
  }
  return -1;
}

namespace {

void check_constraints(std::span<const TimeConstraint> cs, int count) {
  for (const TimeConstraint& c : cs) {
    if (c.id < 0 || c.id >= count) throw std::invalid_argument("time constraint id out of range");
    if (!(c.value >= 0.0 && c.value <= 1.0)) {
      throw std::invalid_argument("time constraint value must lie in [0,1]");
    }
  }
}

void apply_constraints(std::span<const TimeConstraint> cs, std::span<const double> raw,
                       std::vector<double>& times) {
  for (const TimeConstraint& c : cs) times[c.id] = c.apply(raw[c.id]);
}

}  // namespace

void sample_vertex_arrivals_into(const Graph& g, const Stream& rng,
                                 std::span<const TimeConstraint> constraints, ArrivalSample& out) {
  const int n = g.vertex_count();
  out.mode = ArrivalMode::kVertex;
  out.times.resize(n);
  out.choices.resize(n);
  out.choice_edges.resize(n);
  out.active.clear();
  out.edge_times.clear();
  Stream ts = rng.derive(Purpose::kTimes);
  Stream cs = rng.derive(Purpose::kChoices);
  for (VertexId v = 0; v < n; ++v) out.times[v] = ts.uniform();
  if (!constraints.empty()) {
    const std::vector<double> raw = out.times;
    apply_constraints(constraints, raw, out.times);
  }
  for (VertexId v = 0; v < n; ++v) {
    const int idx = sample_choice_index(g, v, cs.uniform());
    if (idx < 0) {
      out.choices[v] = kNoVertex;
      out.choice_edges[v] = kNoEdge;
    } else {
      const Incidence& inc = g.incident(v)[static_cast<std::size_t>(idx)];
      out.choices[v] = inc.neighbor;
      out.choice_edges[v] = inc.edge;
    }
  }
}

ArrivalSample sample_vertex_arrivals(const Graph& g, const Stream& rng,
                                     std::span<const TimeConstraint> constraints) {
  const auto report = validate_fractional_matching(g);
  if (!report.ok) {
    throw std::invalid_argument("vertex " + std::to_string(report.violations.front().vertex) +
                                " has load > 1; cannot sample choices");
  }
  check_constraints(constraints, g.vertex_count());
  ArrivalSample s;
  sample_vertex_arrivals_into(g, rng, constraints, s);
  return s;
}

void sample_edge_arrivals_into(const Graph& g, const Stream& rng,
                               std::span<const TimeConstraint> constraints, ArrivalSample& out) {
  const int m = g.edge_count();
  out.mode = ArrivalMode::kEdge;
  out.choices.clear();
  out.choice_edges.clear();
  out.times.clear();
  out.active.resize(m);
  out.edge_times.resize(m);
  Stream ts = rng.derive(Purpose::kTimes);
  Stream as = rng.derive(Purpose::kActivity);
  for (EdgeId e = 0; e < m; ++e) out.edge_times[e] = ts.uniform();
  if (!constraints.empty()) {
    const std::vector<double> raw = out.edge_times;
    apply_constraints(constraints, raw, out.edge_times);
  }
  for (EdgeId e = 0; e < m; ++e) out.active[e] = as.uniform() < g.edge(e).x ? 1 : 0;
}

ArrivalSample sample_edge_arrivals(const Graph& g, const Stream& rng,
                                   std::span<const TimeConstraint> constraints) {
  check_constraints(constraints, g.edge_count());
  ArrivalSample s;
  sample_edge_arrivals_into(g, rng, constraints, s);
  return s;
}

std::vector<ActiveEdge> active_edges(const Graph& g, const ArrivalSample& s) {
  if (s.mode != ArrivalMode::kVertex) throw std::invalid_argument("active_edges: vertex-mode sample required");
  std::vector<ActiveEdge> out;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const VertexId u = s.choices[v];
    if (u == kNoVertex) continue;
    if (vertex_before(s, u, v)) out.push_back({s.choice_edges[v], v, s.times[v]});
  }
  std::sort(out.begin(), out.end(), [](const ActiveEdge& a, const ActiveEdge& b) {
    return arrives_before(a.arrival, a.proposer, b.arrival, b.proposer);
  });
  return out;
}

std::vector<VertexId> arrival_order(const ArrivalSample& s) {
  std::vector<VertexId> order(s.times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return vertex_before(s, a, b); });
  return order;
}

std::vector<EdgeId> edge_arrival_order(const ArrivalSample& s) {
  std::vector<EdgeId> order;
  for (EdgeId e = 0; e < static_cast<EdgeId>(s.active.size()); ++e) {
    if (s.active[e]) order.push_back(e);
  }
  std::sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    return arrives_before(s.edge_times[a], a, s.edge_times[b], b);
  });
  return order;
}

}  // namespace rcrs
