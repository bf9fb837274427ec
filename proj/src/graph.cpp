#include "rcrs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace rcrs {

Graph::Graph(int vertex_count, std::vector<Edge> edges) : n_(vertex_count), edges_(std::move(edges)) {
  if (n_ < 0) throw std::invalid_argument("vertex_count must be nonnegative");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges_.size() * 2);
  std::vector<std::size_t> deg(static_cast<std::size_t>(n_), 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    Edge& e = edges_[i];
    const std::string where = "edge " + std::to_string(i);
    if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_) {
      throw std::invalid_argument(where + ": endpoint out of range");
    }
    if (e.u == e.v) throw std::invalid_argument(where + ": self-loop");
    if (!(e.x >= 0.0 && e.x <= 1.0)) throw std::invalid_argument(where + ": x must lie in [0,1]");
    if (e.u > e.v) std::swap(e.u, e.v);
    const auto key = (static_cast<std::uint64_t>(e.u) << 32) | static_cast<std::uint32_t>(e.v);
    if (!seen.insert(key).second) throw std::invalid_argument(where + ": duplicate edge");
    ++deg[static_cast<std::size_t>(e.u)];
    ++deg[static_cast<std::size_t>(e.v)];
  }
  offsets_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (int v = 0; v < n_; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
  adjacency_.resize(offsets_.back());
  loads_.assign(static_cast<std::size_t>(n_), 0.0);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    const auto id = static_cast<EdgeId>(i);
    adjacency_[fill[e.u]++] = {e.v, id};
    adjacency_[fill[e.v]++] = {e.u, id};
    loads_[e.u] += e.x;
    loads_[e.v] += e.x;
  }
}

std::optional<EdgeId> Graph::find_edge(VertexId a, VertexId b) const {
  if (a < 0 || b < 0 || a >= n_ || b >= n_) return std::nullopt;
  for (const Incidence& inc : incident(a)) {
    if (inc.neighbor == b) return inc.edge;
  }
  return std::nullopt;
}

FractionalMatchingReport validate_fractional_matching(const Graph& g) {
  FractionalMatchingReport r;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.load(v) > 1.0 + kLoadTolerance) r.violations.push_back({v, g.load(v)});
  }
  r.ok = r.violations.empty();
  return r;
}

bool is_one_regular(const Graph& g) {
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (std::fabs(g.load(v) - 1.0) > kLoadTolerance) return false;
  }
  return true;
}

OddGirth odd_girth(const Graph& g) {
  // BFS from every source on the support graph. An edge (a,b) with
  // dist[a] == dist[b] closes an odd closed walk of length 2·dist+1 through
  // the source; the minimum over all sources is the odd girth.
  const int n = g.vertex_count();
  int best = std::numeric_limits<int>::max();
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::queue<VertexId> q;
  for (VertexId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const VertexId a = q.front();
      q.pop();
      if (2 * dist[a] + 1 >= best) continue;
      for (const Incidence& inc : g.incident(a)) {
        if (g.edge(inc.edge).x <= 0.0) continue;
        const VertexId b = inc.neighbor;
        if (dist[b] < 0) {
          dist[b] = dist[a] + 1;
          q.push(b);
        } else if (dist[b] == dist[a]) {
          best = std::min(best, 2 * dist[a] + 1);
        }
      }
    }
  }
  return best == std::numeric_limits<int>::max() ? OddGirth::infinite() : OddGirth::finite(best);
}

bool is_forest(const Graph& g) {
  std::vector<VertexId> parent(static_cast<std::size_t>(g.vertex_count()));
  for (VertexId v = 0; v < g.vertex_count(); ++v) parent[v] = v;
  auto find = [&](VertexId v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const Edge& e : g.edges()) {
    if (e.x <= 0.0) continue;
    const VertexId a = find(e.u);
    const VertexId b = find(e.v);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

std::optional<VertexId> star_center(const Graph& g) {
  std::optional<VertexId> cand_a;
  std::optional<VertexId> cand_b;
  bool first = true;
  for (const Edge& e : g.edges()) {
    if (e.x <= 0.0) continue;
    if (first) {
      cand_a = e.u;
      cand_b = e.v;
      first = false;
      continue;
    }
    if (cand_a && *cand_a != e.u && *cand_a != e.v) cand_a.reset();
    if (cand_b && *cand_b != e.u && *cand_b != e.v) cand_b.reset();
  }
  return cand_a ? cand_a : cand_b;
}

}  // namespace rcrs
