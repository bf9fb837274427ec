#include <cmath>

#include "doctest.h"
#include "rcrs/generators.hpp"
#include "rcrs/recursive_rcrs.hpp"

using namespace rcrs;

namespace {
const OddGirth kInf = OddGirth::infinite();

RecursiveParams params(int T, double delta, std::int64_t Q, DiscretizationGuard g = DiscretizationGuard::kOff) {
  return RecursiveParams{.phases = T, .delta = delta, .samples = Q, .guard = g};
}
}  // namespace

TEST_CASE("required_samples") {
  CHECK(required_samples(0.2, 0.1, 10, 10) == 14856);
  CHECK(required_samples_bound(0.2, 0.1, 10, 10) == doctest::Approx(1500 * std::log(20000.0)).epsilon(1e-14));
  const double d = required_samples_bound(0.3, 0.05, 20, 24) - required_samples_bound(0.3, 0.05, 20, 12);
  CHECK(d == doctest::Approx(3 / (0.3 * 0.0025) * std::log(4.0)).epsilon(1e-12));
  CHECK(required_samples(1.0, 0.999, 1, 1) == 3);
  CHECK_THROWS_AS(required_samples(0.5, 0.0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(required_samples(0.5, 1.0, 1, 1), std::invalid_argument);
}

TEST_CASE("phase_index uses half-open intervals (t_j, t_{j+1}]") {
  CHECK(phase_index(0.0, 20) == 0);
  CHECK(phase_index(0.05, 20) == 0);
  CHECK(phase_index(std::nextafter(0.05, 1.0), 20) == 1);
  CHECK(phase_index(0.1, 20) == 1);
  CHECK(phase_index(1.0, 20) == 19);
  CHECK(phase_index(1.0 / 3.0, 3) == 0);
  CHECK(phase_index(0.7, 10) == 6);
  for (int T : {1, 3, 7, 20, 100}) {
    for (int j = 1; j <= T; ++j) CHECK(phase_index(static_cast<double>(j) / T, T) == j - 1);
  }
}

TEST_CASE("EstimateTable contract") {
  EstimateTable t(4, 3, 0.1);
  CHECK(t.filled_phases() == 1);
  CHECK(t.at(0, 2) == 1.0);
  CHECK_THROWS_AS(t.at(1, 0), std::out_of_range);
  std::vector<double> v = {0.5, 0.0, 2.0};
  CHECK_THROWS_AS(t.commit(2, v), std::logic_error);
  t.commit(1, v);
  CHECK(t.at(1, 0) == 0.5);
  CHECK(t.at(1, 1) == 0.1);
  CHECK(t.at(1, 2) == 1.0);
  CHECK_THROWS_AS(t.commit(1, v), std::logic_error);
}

TEST_CASE("estimate_safety on a single edge is exactly one") {
  RecursiveVertexRcrs r(generate({.family = "single_edge"}), SelectionFunction::vertex(kInf), params(5, 0.1, 2000));
  auto t = r.make_table();
  CHECK(r.estimate_safety(t, 1, 1, 0, Stream(1)) == 1.0);
  CHECK_THROWS_AS(r.estimate_safety(t, 2, 1, 0, Stream(1)), std::out_of_range);
  auto full = r.build_tables(Stream(2));
  for (int j = 0; j < 5; ++j) {
    CHECK(full.at(j, 0) == 1.0);
    CHECK(full.at(j, 1) == 1.0);
  }
}

TEST_CASE("estimate_safety for a star center in phase 1 matches a direct oracle") {
  // Star, k = 4 leaves, x = 1/4, T = 4; estimate Ŝ_{leaf1 -> center}(1).
  const int T = 4;
  const double delta = 0.1;
  const std::int64_t Q = 20000;
  auto g = generate({.family = "star", .k = 4, .x = 0.25});
  auto c = SelectionFunction::vertex(kInf);
  RecursiveVertexRcrs r(g, c, params(T, delta, Q, DiscretizationGuard::kOn));
  auto t = r.make_table();
  const double est = r.estimate_safety(t, 1, 1, 0, Stream(11));

  // Oracle written directly from the process: the center arrives in [0,1/4),
  // leaf 1 after 1/4, leaves 2..4 uniformly. Every decision before 1/4 uses
  // Ŝ = 1, so an active edge at time y is accepted w.p.
  // min(c(y)(1-δ)·CTy/(CTy+1), 1) if the center is free.
  const double C = c.floor();
  auto accept_p = [&](double y) { return std::min(c(y) * (1 - delta) * (C * T * y) / (C * T * y + 1), 1.0); };
  Stream s(99);
  const long n = 1000000;
  long free_count = 0;
  for (long i = 0; i < n; ++i) {
    const double yu = 0.25 * s.uniform();
    double y[5];
    bool picks_center[5];
    y[1] = 2.0;
    for (int l = 2; l <= 4; ++l) {
      y[l] = s.uniform();
      picks_center[l] = s.uniform() < 0.25;
    }
    const int center_choice = 1 + static_cast<int>(s.below(4));
    std::vector<std::pair<double, int>> ev = {{yu, 0}};
    for (int l = 2; l <= 4; ++l) {
      if (y[l] <= 0.25) ev.emplace_back(y[l], l);
    }
    std::sort(ev.begin(), ev.end());
    bool matched = false;
    for (auto [yy, who] : ev) {
      const bool active = who == 0 ? y[center_choice] < yu : (picks_center[who] && yu < yy);
      if (active && s.uniform() < accept_p(yy)) {
        matched = true;
        break;
      }
    }
    if (!matched) ++free_count;
  }
  const double oracle = static_cast<double>(free_count) / n;
  const double sigma = std::sqrt(oracle * (1 - oracle) / Q + oracle * (1 - oracle) / n);
  CHECK(std::fabs(est - oracle) <= 3 * sigma);
  CHECK(oracle >= 0.5);
}

TEST_CASE("estimates are reproducible from the stream key") {
  RecursiveVertexRcrs r(generate({.family = "complete_bipartite", .n = 3}), SelectionFunction::vertex(kInf),
                        params(5, 0.1, 3000));
  auto a = r.build_tables(Stream(5));
  auto b = r.build_tables(Stream(5));
  for (int j = 0; j < 5; ++j) {
    for (int sl = 0; sl < a.slots(); ++sl) CHECK(a.at(j, sl) == b.at(j, sl));
  }
  auto c = r.build_tables(Stream(6));
  CHECK(c.at(3, 0) != a.at(3, 0));
}

TEST_CASE("vertex scheme output is a valid matching and lazy filling matches prebuilt tables") {
  auto g = generate({.family = "odd_cycle", .g = 5});
  RecursiveVertexRcrs r(g, SelectionFunction::vertex(OddGirth::finite(5)), params(6, 0.1, 2000));
  const Stream root(3);
  auto prebuilt = r.build_tables(root.derive(Purpose::kTables));
  auto lazy = r.make_table();
  for (int i = 0; i < 2000; ++i) {
    auto s = sample_vertex_arrivals(g, root.derive(Purpose::kTrial, i));
    auto coins = draw_coins(g.vertex_count(), root.derive(Purpose::kCoins));
    auto m = r.run(s, prebuilt, coins);
    std::string why;
    REQUIRE_MESSAGE(is_valid_matching(g, s, m, &why), why);
    auto m2 = r.run(s, lazy, root);
    REQUIRE(m2.accepted.size() == m.accepted.size());
    for (std::size_t k = 0; k < m.accepted.size(); ++k) CHECK(m2.accepted[k].edge == m.accepted[k].edge);
  }
  CHECK(lazy.filled_phases() == 6);
  CHECK_THROWS_AS(r.run(sample_edge_arrivals(g, root), prebuilt, draw_coins(5, root)), std::invalid_argument);
  CHECK_THROWS_AS(RecursiveVertexRcrs(g, SelectionFunction::vertex(kInf), params(0, 0.1, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(RecursiveVertexRcrs(g, SelectionFunction::edge(EdgeKind::kRank1), params(4, 0.1, 10)),
                  std::invalid_argument);
}

TEST_CASE("single edge: acceptance given arrival time follows c(y) times the guard") {
  // With no competing edges Ŝ = 1 in every phase, so the acceptance
  // probability at y is exactly c(y)(1-δ)·guard(y).
  auto g = generate({.family = "single_edge"});
  auto c = SelectionFunction::vertex(kInf);
  for (auto guard : {DiscretizationGuard::kOn, DiscretizationGuard::kOff}) {
    const int T = 50;
    RecursiveVertexRcrs r(g, c, params(T, 0.0, 10, guard));
    auto t = r.build_tables(Stream(1));
    const int bins = 10;
    std::vector<long> act(bins), acc(bins);
    std::vector<double> expect(bins);
    const Stream root(8);
    for (long i = 0; i < 200000; ++i) {
      auto s = sample_vertex_arrivals(g, root.derive(Purpose::kTrial, i));
      auto coins = draw_coins(2, root.derive(Purpose::kCoins, i));
      auto m = r.run(s, t, coins);
      const double y = std::max(s.times[0], s.times[1]);
      const int b = std::min(bins - 1, static_cast<int>(y * bins));
      ++act[b];
      acc[b] += m.accepted.size();
      const double cty = c.floor() * T * y;
      expect[b] += c(y) * (guard == DiscretizationGuard::kOn ? cty / (cty + 1) : 1.0);
    }
    for (int b = 0; b < bins; ++b) {
      const double p = static_cast<double>(acc[b]) / act[b];
      const double want = expect[b] / act[b];
      CHECK(std::fabs(p - want) <= 3 * std::sqrt(want * (1 - want) / act[b]) + 1e-9);
    }
  }
}

TEST_CASE("bipartite safety estimates respect the floor c(t_k), and phase 1 respects 1 - 2/T") {
  const int T = 10;
  const std::int64_t Q = 4000;
  RecursiveVertexRcrs r(generate({.family = "complete_bipartite", .n = 3}), SelectionFunction::vertex(kInf),
                        params(T, 0.1, Q));
  auto t = r.build_tables(Stream(21));
  std::vector<double> mean(T, 0.0);
  for (int j = 1; j < T; ++j) {
    const double ck = c_vertex(static_cast<double>(j) / T, kInf);
    for (int sl = 0; sl < t.slots(); ++sl) {
      const double s = t.at(j, sl);
      const double sigma = std::sqrt(s * (1 - s) / Q);
      CHECK(s >= ck - 3 * sigma);
      if (j == 1) CHECK(s >= 1.0 - 2.0 / T - 3 * sigma);
      mean[j] += s / t.slots();
    }
  }
  // Safety only decays: slot-averaged estimates are non-increasing up to noise.
  for (int j = 2; j < T; ++j) CHECK(mean[j] <= mean[j - 1] + 3 * std::sqrt(0.25 / (Q * t.slots())));
}

TEST_CASE("edge scheme family checks") {
  auto rank1 = SelectionFunction::edge(EdgeKind::kRank1);
  auto tree = SelectionFunction::edge(EdgeKind::kEdgeTree);
  CHECK_THROWS_AS(RecursiveEdgeRcrs(generate({.family = "path", .n = 4}), rank1, params(4, 0.1, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(RecursiveEdgeRcrs(generate({.family = "odd_cycle", .g = 5}), tree, params(4, 0.1, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(RecursiveEdgeRcrs(generate({.family = "path", .n = 4}), SelectionFunction::vertex(kInf),
                                    params(4, 0.1, 10)),
                  std::invalid_argument);
  CHECK_NOTHROW(RecursiveEdgeRcrs(generate({.family = "odd_cycle", .g = 5}),
                                  SelectionFunction::edge(EdgeKind::kEdgeGeneral), params(4, 0.1, 10)));
}

namespace {

// Per-edge accepted/active ratio for the recursive edge scheme.
std::vector<double> edge_ratios(const RecursiveEdgeRcrs& r, const EstimateTable& t, long trials, std::uint64_t seed,
                                std::vector<long>* active_out = nullptr) {
  const Graph& g = r.graph();
  std::vector<long> act(g.edge_count()), acc(g.edge_count());
  const Stream root(seed);
  ArrivalSample s;
  Matching m;
  for (long i = 0; i < trials; ++i) {
    const Stream st = root.derive(Purpose::kTrial, i);
    sample_edge_arrivals_into(g, st, {}, s);
    auto coins = draw_coins(g.edge_count(), st.derive(Purpose::kCoins));
    r.run_into(s, t, coins, 1.0, m);
    std::string why;
    REQUIRE(is_valid_matching(g, s, m, &why));
    for (EdgeId e = 0; e < g.edge_count(); ++e) act[e] += s.active[e];
    for (const auto& a : m.accepted) ++acc[a.edge];
  }
  std::vector<double> out;
  for (EdgeId e = 0; e < g.edge_count(); ++e) out.push_back(static_cast<double>(acc[e]) / act[e]);
  if (active_out) *active_out = act;
  return out;
}

}  // namespace

TEST_CASE("recursive rank-1 scheme at T = 40 approaches 1 - 1/e") {
  // Within a phase the true feasibility decays below the phase-start estimate
  // by at most a factor e^{-(1-x)/T}, so the selection rate sits in
  // [(1 - (1-x)/T)·c(y), c(y)]: tolerance is 3σ plus that discretization loss.
  const int T = 40;
  auto g = generate({.family = "star", .k = 4});
  RecursiveEdgeRcrs r(g, SelectionFunction::edge(EdgeKind::kRank1), params(T, 0.0, 20000));
  auto t = r.build_tables(Stream(4));
  std::vector<long> act;
  auto ratios = edge_ratios(r, t, 100000, 5, &act);
  const double target = 1 - std::exp(-1.0);
  for (std::size_t e = 0; e < ratios.size(); ++e) {
    const double sigma = std::sqrt(target * (1 - target) / act[e]);
    CHECK(ratios[e] <= target + 3 * sigma);
    CHECK(ratios[e] >= target * (1 - 0.75 / T) - 3 * sigma);
  }
}

TEST_CASE("recursive tree scheme on a path approaches 1/2") {
  // Feasibility of an edge decays within a phase by at most the acceptance
  // mass of its ≤ 2 neighbouring edges, 2·(1/2)·(1/T) relative to C = 1/4.
  const int T = 40;
  auto g = generate({.family = "path", .n = 6});
  RecursiveEdgeRcrs r(g, SelectionFunction::edge(EdgeKind::kEdgeTree), params(T, 0.0, 20000));
  auto t = r.build_tables(Stream(6));
  std::vector<long> act;
  auto ratios = edge_ratios(r, t, 100000, 7, &act);
  for (std::size_t e = 0; e < ratios.size(); ++e) {
    const double sigma = std::sqrt(0.25 / act[e]);
    CHECK(ratios[e] <= 0.5 + 3 * sigma);
    CHECK(ratios[e] >= 0.5 * (1 - 4.0 / T) - 3 * sigma);
  }
}

TEST_CASE("rank-1 closed form") {
  CHECK_THROWS_AS(Rank1ClosedForm(generate({.family = "star", .k = 4, .x = 0.2})), std::invalid_argument);
  CHECK_THROWS_AS(Rank1ClosedForm(generate({.family = "path", .n = 4})), std::invalid_argument);

  // Two elements with x = {1, 0}: the x=1 element is accepted w.p.
  // ∫₀¹ e^{-y} dy = 1 - 1/e.
  Graph two(3, {{0, 1, 1.0}, {0, 2, 0.0}});
  Rank1ClosedForm r(two);
  const Stream root(12);
  long acc = 0;
  const long n = 200000;
  for (long i = 0; i < n; ++i) {
    const Stream st = root.derive(Purpose::kTrial, i);
    auto s = sample_edge_arrivals(two, st);
    auto m = r.run(s, st);
    REQUIRE(is_valid_matching(two, s, m));
    acc += m.contains(0);
    CHECK_FALSE(m.contains(1));
  }
  const double p = 1 - std::exp(-1.0);
  CHECK(std::fabs(static_cast<double>(acc) / n - p) <= 3 * std::sqrt(p * (1 - p) / n));
}
