#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rcrs/arrival.hpp"
#include "rcrs/generators.hpp"

using namespace rcrs;

namespace {
// |p_hat - p| <= 3σ with σ the binomial standard error at p.
bool within_3sigma(long hits, long n, double p) {
  const double sigma = std::sqrt(p * (1 - p) / n);
  return std::fabs(static_cast<double>(hits) / n - p) <= 3 * sigma;
}
}  // namespace

TEST_CASE("forced categorical on a single x=1 edge") {
  auto g = generate({.family = "single_edge"});
  Stream root(1);
  for (int i = 0; i < 100; ++i) {
    auto s = sample_vertex_arrivals(g, root.derive(Purpose::kTrial, i));
    CHECK(s.choices[0] == 1);
    CHECK(s.choices[1] == 0);
    CHECK(s.choice_edges[0] == 0);
  }
}

TEST_CASE("isolated vertex always chooses bottom") {
  Graph g(3, {{0, 1, 0.5}});
  Stream root(2);
  for (int i = 0; i < 100; ++i) {
    auto s = sample_vertex_arrivals(g, root.derive(Purpose::kTrial, i));
    CHECK(s.choices[2] == kNoVertex);
    CHECK(s.choice_edges[2] == kNoEdge);
  }
}

TEST_CASE("star center choice frequencies") {
  auto g = generate({.family = "star", .k = 4, .x = 0.25});
  Stream root(3);
  const long n = 100000;
  std::vector<long> counts(5, 0);
  long bottom = 0;
  for (long i = 0; i < n; ++i) {
    auto s = sample_vertex_arrivals(g, root.derive(Purpose::kTrial, i));
    if (s.choices[0] == kNoVertex) ++bottom; else ++counts[s.choices[0]];
  }
  CHECK(bottom == 0);
  for (int leaf = 1; leaf <= 4; ++leaf) CHECK(within_3sigma(counts[leaf], n, 0.25));
}

TEST_CASE("overloaded vertex cannot be sampled") {
  Graph tri(3, {{0, 1, 0.6}, {1, 2, 0.6}, {0, 2, 0.6}});
  CHECK_THROWS_AS(sample_vertex_arrivals(tri, Stream(1)), std::invalid_argument);
}

TEST_CASE("active_edges follows the definition") {
  Graph g(2, {{0, 1, 1.0}});
  ArrivalSample s;
  s.mode = ArrivalMode::kVertex;
  s.choices = {kNoVertex, 0};
  s.choice_edges = {kNoEdge, 0};
  s.times = {0.2, 0.7};
  auto a = active_edges(g, s);
  REQUIRE(a.size() == 1);
  CHECK(a[0].edge == 0);
  CHECK(a[0].proposer == 1);
  CHECK(a[0].arrival == 0.7);

  s.times = {0.9, 0.7};
  CHECK(active_edges(g, s).empty());
}

TEST_CASE("edge activity probability equals x_e") {
  auto g = generate({.family = "double_star", .n = 2});
  Stream root(4);
  const long n = 100000;
  std::vector<long> active(g.edge_count(), 0);
  for (long i = 0; i < n; ++i) {
    auto s = sample_vertex_arrivals(g, root.derive(Purpose::kTrial, i));
    auto a = active_edges(g, s);
    std::vector<int> per_proposer(g.vertex_count(), 0);
    for (const auto& ae : a) {
      ++active[ae.edge];
      ++per_proposer[ae.proposer];
    }
    for (int c : per_proposer) REQUIRE(c <= 1);
  }
  for (EdgeId e = 0; e < g.edge_count(); ++e) CHECK(within_3sigma(active[e], n, g.edge(e).x));
}

TEST_CASE("active-edge arrival time has density 2y") {
  auto g = generate({.family = "single_edge"});
  Stream root(5);
  std::vector<double> ys;
  for (long i = 0; i < 100000; ++i) {
    auto s = sample_vertex_arrivals(g, root.derive(Purpose::kTrial, i));
    auto a = active_edges(g, s);
    REQUIRE(a.size() == 1);
    ys.push_back(a[0].arrival);
  }
  std::sort(ys.begin(), ys.end());
  double ks = 0.0;
  const double n = static_cast<double>(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double f = ys[i] * ys[i];
    ks = std::max({ks, std::fabs((i + 1) / n - f), std::fabs(i / n - f)});
  }
  CHECK(ks < 0.01);
}

TEST_CASE("given the arrival order, the active edge at v is spread over arrived neighbors by x") {
  // K_4 with x = 1/3: condition on vertex 3 arriving second.
  auto g = generate({.family = "complete", .n = 4});
  Stream root(6);
  long cond = 0, to_first = 0, none = 0;
  for (long i = 0; i < 200000; ++i) {
    auto s = sample_vertex_arrivals(g, root.derive(Purpose::kTrial, i));
    auto order = arrival_order(s);
    if (order[1] != 3) continue;
    ++cond;
    bool found = false;
    for (const auto& ae : active_edges(g, s)) {
      if (ae.proposer == 3) {
        found = true;
        CHECK(g.edge(ae.edge).other(3) == order[0]);
        ++to_first;
      }
    }
    if (!found) ++none;
  }
  CHECK(cond > 40000);
  CHECK(within_3sigma(to_first, cond, 1.0 / 3.0));
  CHECK(within_3sigma(none, cond, 2.0 / 3.0));
}

TEST_CASE("edge arrivals") {
  Graph g(4, {{0, 1, 1.0}, {1, 2, 0.0}, {2, 3, 0.5}});
  Stream root(7);
  long half = 0;
  const long n = 100000;
  for (long i = 0; i < n; ++i) {
    auto s = sample_edge_arrivals(g, root.derive(Purpose::kTrial, i));
    CHECK(s.mode == ArrivalMode::kEdge);
    CHECK(s.active[0] == 1);
    CHECK(s.active[1] == 0);
    half += s.active[2];
    for (double y : s.edge_times) REQUIRE((y >= 0.0 && y <= 1.0));
  }
  CHECK(within_3sigma(half, n, 0.5));
}

TEST_CASE("time constraints restrict one coordinate and leave the rest untouched") {
  auto g = generate({.family = "complete_bipartite", .n = 3});
  Stream root(8);
  for (int i = 0; i < 1000; ++i) {
    Stream st = root.derive(Purpose::kTrial, i);
    auto free = sample_vertex_arrivals(g, st);
    std::vector<TimeConstraint> cs = {TimeConstraint::before(0, 0.3), TimeConstraint::after(3, 0.3),
                                      TimeConstraint::pinned(4, 0.5)};
    auto s = sample_vertex_arrivals(g, st, cs);
    CHECK(s.times[0] < 0.3);
    CHECK(s.times[3] > 0.3);
    CHECK(s.times[3] <= 1.0);
    CHECK(s.times[4] == 0.5);
    for (VertexId v : {1, 2, 5}) CHECK(s.times[v] == free.times[v]);
    CHECK(s.choices == free.choices);
  }
  CHECK_THROWS_AS(sample_vertex_arrivals(g, Stream(1), std::vector{TimeConstraint::before(9, 0.1)}),
                  std::invalid_argument);
}

TEST_CASE("samples are deterministic given the stream") {
  auto g = generate({.family = "complete", .n = 6});
  auto a = sample_vertex_arrivals(g, Stream(42).derive(Purpose::kTrial, 17));
  auto b = sample_vertex_arrivals(g, Stream(42).derive(Purpose::kTrial, 17));
  CHECK(a.times == b.times);
  CHECK(a.choices == b.choices);
  auto c = sample_vertex_arrivals(g, Stream(42).derive(Purpose::kTrial, 18));
  CHECK(a.times != c.times);
}

TEST_CASE("ties are broken by id") {
  ArrivalSample s;
  s.times = {0.5, 0.5, 0.1};
  auto order = arrival_order(s);
  CHECK(order == std::vector<VertexId>{2, 0, 1});
  CHECK(vertex_before(s, 0, 1));
  CHECK_FALSE(vertex_before(s, 1, 0));
}
