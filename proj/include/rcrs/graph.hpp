#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcrs/odd_girth.hpp"

namespace rcrs {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;
inline constexpr VertexId kNoVertex = -1;
inline constexpr EdgeId kNoEdge = -1;

inline constexpr double kLoadTolerance = 1e-12;

struct Edge {
  VertexId u;  // u < v after construction
  VertexId v;
  double x;

  VertexId other(VertexId w) const { return w == u ? v : u; }
};

struct Incidence {
  VertexId neighbor;
  EdgeId edge;
};

// Immutable undirected graph with a fractional value x_e per edge.
class Graph {
 public:
  Graph() = default;

  // Throws std::invalid_argument on self-loops, duplicate edges, out of
  // range endpoints or x outside [0,1]. Edge endpoints are canonicalized
  // to (min,max); edge ids follow input order.
  Graph(int vertex_count, std::vector<Edge> edges);

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const Incidence> incident(VertexId v) const {
    const auto b = offsets_[static_cast<std::size_t>(v)];
    const auto e = offsets_[static_cast<std::size_t>(v) + 1];
    return {adjacency_.data() + b, e - b};
  }

  int degree(VertexId v) const { return static_cast<int>(incident(v).size()); }

  // Σ_{e ∈ ∂(v)} x_e
  double load(VertexId v) const { return loads_[static_cast<std::size_t>(v)]; }

  std::optional<EdgeId> find_edge(VertexId a, VertexId b) const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Incidence> adjacency_;
  std::vector<double> loads_;
};

struct LoadViolation {
  VertexId vertex;
  double load;
};

struct FractionalMatchingReport {
  bool ok = true;
  std::vector<LoadViolation> violations;
};

FractionalMatchingReport validate_fractional_matching(const Graph& g);

// Every vertex load equals 1 within kLoadTolerance.
bool is_one_regular(const Graph& g);

// Shortest odd cycle of the support graph (edges with x > 0).
OddGirth odd_girth(const Graph& g);

// Support graph has no cycles.
bool is_forest(const Graph& g);

// Some vertex is an endpoint of every edge with x > 0.
std::optional<VertexId> star_center(const Graph& g);

}  // namespace rcrs
