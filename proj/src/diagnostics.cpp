#include "rcrs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rcrs/generators.hpp"
#include "rcrs/two_phase.hpp"

namespace rcrs {
namespace {

void check_pair(const Graph& g, VertexId u, VertexId v) {
  if (u == v) throw std::invalid_argument("coupled run: u and v must differ");
  if (!g.find_edge(u, v)) throw std::invalid_argument("coupled run: (u,v) is not an edge");
}

bool same_matching(const Matching& a, const Matching& b) {
  if (a.accepted.size() != b.accepted.size()) return false;
  for (std::size_t i = 0; i < a.accepted.size(); ++i) {
    if (a.accepted[i].edge != b.accepted[i].edge) return false;
  }
  return true;
}

}  // namespace

CoupledRun coupled_run(const RecursiveVertexRcrs& scheme, const EstimateTable& table, ArrivalSample sample,
                       std::vector<double> coins, VertexId u, VertexId v, double t_k) {
  const Graph& g = scheme.graph();
  check_pair(g, u, v);
  CoupledRun r;
  r.u = u;
  r.v = v;
  r.horizon = t_k;
  r.sample = std::move(sample);
  r.coins = std::move(coins);
  scheme.run_into(r.sample, table, r.coins, {.horizon = t_k}, r.usual);
  scheme.run_into(r.sample, table, r.coins, {.horizon = t_k, .excluded = v}, r.parallel);
  r.m_u = r.usual.is_matched(u);
  r.m_u_minus = r.parallel.is_matched(u);
  for (const AcceptedEdge& a : r.parallel.accepted) {
    const Edge& e = g.edge(a.edge);
    if (e.u != u && e.v != u) continue;
    if (a.proposer == u) {
      r.minus_selects = true;
    } else {
      r.minus_selected_by = true;
    }
  }
  return r;
}

CoupledRun coupled_run(const RecursiveVertexRcrs& scheme, const EstimateTable& table, VertexId u, VertexId v,
                       double t_k, const Stream& rng, std::span<const TimeConstraint> constraints) {
  check_pair(scheme.graph(), u, v);
  auto s = sample_vertex_arrivals(scheme.graph(), rng, constraints);
  auto coins = draw_coins(scheme.graph().vertex_count(), rng.derive(Purpose::kCoins));
  return coupled_run(scheme, table, std::move(s), std::move(coins), u, v, t_k);
}

bool edge_survives(const RecursiveVertexRcrs& scheme, const EstimateTable& table, const ArrivalSample& s,
                   std::span<const double> coins, EdgeId e) {
  const Edge& ed = scheme.graph().edge(e);
  const VertexId later = vertex_before(s, ed.u, ed.v) ? ed.v : ed.u;
  const VertexId earlier = ed.other(later);
  if (s.choices[later] != earlier) return false;
  return coins[later] < scheme.acceptance_probability(e, later, s.times[later], table);
}

std::vector<VertexPath> potential_paths(const Graph& g, const ArrivalSample& s, VertexId u, VertexId v) {
  std::vector<VertexPath> out;
  if (u == v) return out;
  std::vector<VertexId> chain;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.vertex_count()), 0);
  seen[u] = 1;
  VertexId cur = s.choices[u];
  while (cur != kNoVertex && cur != v && !seen[cur]) {
    seen[cur] = 1;
    chain.push_back(cur);
    // chain = c1..ck; the candidate is v, ck, …, c1 with k + 1 vertices.
    if (chain.size() % 2 == 1 && (s.choices[v] == cur || s.choices[cur] == v)) {
      VertexPath p{v};
      p.insert(p.end(), chain.rbegin(), chain.rend());
      out.push_back(std::move(p));
    }
    cur = s.choices[cur];
  }
  return out;
}

std::optional<VertexPath> detect_potential_path(const Graph& g, const ArrivalSample& s, VertexId u, VertexId v) {
  auto all = potential_paths(g, s, u, v);
  if (all.empty()) return std::nullopt;
  return all.front();
}

bool check_badly_ordered(const ArrivalSample& s, std::span<const VertexId> path, VertexId u) {
  if (path.empty()) return false;
  for (VertexId w : path) {
    if (!vertex_before(s, w, u)) return false;
  }
  auto increasing_from = [&](std::size_t i) {
    for (; i + 1 < path.size(); ++i) {
      if (!vertex_before(s, path[i], path[i + 1])) return false;
    }
    return true;
  };
  if (increasing_from(0)) return true;
  if (path.size() < 2) return false;
  // Y_{v2} < Y_{v1} < Y_{v3} < …
  if (!vertex_before(s, path[1], path[0])) return false;
  if (path.size() > 2 && !vertex_before(s, path[0], path[2])) return false;
  return increasing_from(2);
}

std::optional<VertexPath> find_flipping_sequence(const RecursiveVertexRcrs& scheme, const EstimateTable& table,
                                                 const ArrivalSample& s, std::span<const double> coins, VertexId u,
                                                 VertexId v) {
  const Graph& g = scheme.graph();
  const VertexId target = s.choices[u];
  if (target == kNoVertex || target == v || !vertex_before(s, v, u)) return std::nullopt;
  VertexPath path{v};
  std::vector<std::uint8_t> on(static_cast<std::size_t>(g.vertex_count()), 0);
  on[v] = 1;
  on[u] = 1;
  std::optional<VertexPath> found;
  // `last` is the later endpoint of the previous path edge (kNoVertex at the start).
  auto dfs = [&](auto&& self, VertexId a, VertexId last) -> void {
    for (const Incidence& inc : g.incident(a)) {
      if (found) return;
      const VertexId b = inc.neighbor;
      if (on[b] || !vertex_before(s, b, u)) continue;
      if (!edge_survives(scheme, table, s, coins, inc.edge)) continue;
      const VertexId arrival = vertex_before(s, a, b) ? b : a;
      if (last != kNoVertex && !vertex_before(s, last, arrival)) continue;
      path.push_back(b);
      on[b] = 1;
      if (path.size() % 2 == 0 && b == target) {
        found = path;
      } else {
        self(self, b, arrival);
      }
      on[b] = 0;
      path.pop_back();
    }
  };
  dfs(dfs, v, kNoVertex);
  return found;
}

FlippingReport analyze_coupled_run(const RecursiveVertexRcrs& scheme, const EstimateTable& table,
                                   const CoupledRun& run) {
  FlippingReport r;
  const auto paths = potential_paths(scheme.graph(), run.sample, run.u, run.v);
  r.potential_paths = static_cast<int>(paths.size());
  if (!paths.empty()) r.potential_path = paths.front();
  for (const auto& p : paths) r.badly_ordered = r.badly_ordered || check_badly_ordered(run.sample, p, run.u);
  r.flipping_path = find_flipping_sequence(scheme, table, run.sample, run.coins, run.u, run.v);
  r.flipping = r.flipping_path.has_value();
  r.indicator_violation = run.m_u_minus && !run.m_u && !r.flipping;
  r.unconditional_violation = run.minus_selected_by && !run.m_u;
  if (r.flipping) {
    const bool listed = std::find(paths.begin(), paths.end(), *r.flipping_path) != paths.end();
    r.implication_violation = !listed || !check_badly_ordered(run.sample, *r.flipping_path, run.u);
  }
  return r;
}

double correlation_gap_bound(OddGirth g, double t_k) {
  if (g.is_infinite()) return 0.0;
  double r = 2.0;
  for (int i = 1; i <= g.value(); ++i) r /= i;
  return r * std::pow(t_k, g.value() - 1);
}

namespace {

struct GapAcc {
  MeanAccumulator diff;
  MeanAccumulator all;
  MeanAccumulator after;   // Y_v > t_k
  MeanAccumulator before;  // Y_v <= t_k
  std::int64_t indicator = 0, unconditional = 0, implication = 0, mismatch = 0, flipping = 0, potential = 0;
  int max_paths = 0;

  void merge(const GapAcc& o) {
    diff.merge(o.diff);
    all.merge(o.all);
    after.merge(o.after);
    before.merge(o.before);
    indicator += o.indicator;
    unconditional += o.unconditional;
    implication += o.implication;
    mismatch += o.mismatch;
    flipping += o.flipping;
    potential += o.potential;
    max_paths = std::max(max_paths, o.max_paths);
  }
};

}  // namespace

GapEstimate correlation_gap(const RecursiveVertexRcrs& scheme, const EstimateTable& table, VertexId u, VertexId v,
                            double t_k, std::int64_t trials, const Stream& rng, unsigned threads) {
  const Graph& g = scheme.graph();
  check_pair(g, u, v);
  if (!(t_k > 0.0 && t_k <= 1.0)) throw std::invalid_argument("correlation_gap: t_k must lie in (0,1]");
  const TimeConstraint cs[] = {TimeConstraint::before(u, t_k)};
  const GapAcc acc = chunked_reduce<GapAcc>(
      trials, 2048,
      [&](std::int64_t begin, std::int64_t end) {
        GapAcc a;
        for (std::int64_t i = begin; i < end; ++i) {
          const CoupledRun run = coupled_run(scheme, table, u, v, t_k, rng.derive(Purpose::kCoupled, i), cs);
          const FlippingReport f = analyze_coupled_run(scheme, table, run);
          const double mu = run.m_u ? 1.0 : 0.0;
          a.diff.add((run.m_u_minus ? 1.0 : 0.0) - mu);
          a.all.add(mu);
          const bool v_late = run.sample.times[v] > t_k;
          (v_late ? a.after : a.before).add(mu);
          if (v_late && !same_matching(run.usual, run.parallel)) ++a.mismatch;
          a.indicator += f.indicator_violation;
          a.unconditional += f.unconditional_violation;
          a.implication += f.implication_violation;
          a.flipping += f.flipping;
          a.potential += f.potential_paths > 0;
          a.max_paths = std::max(a.max_paths, f.potential_paths);
        }
        return a;
      },
      threads);

  GapEstimate e;
  e.t_k = t_k;
  e.trials = trials;
  e.bound = correlation_gap_bound(odd_girth(g), t_k);
  e.gap = acc.diff.mean;
  e.sigma = acc.diff.std_error();
  if (acc.after.n > 0 && acc.before.n > 0) {
    const double q = static_cast<double>(acc.before.n) / static_cast<double>(acc.all.n);
    e.gap_reweighted = acc.after.mean - acc.all.mean;
    e.sigma_reweighted = q * std::sqrt(acc.after.variance() / static_cast<double>(acc.after.n) +
                                       acc.before.variance() / static_cast<double>(acc.before.n));
  }
  e.indicator_violations = acc.indicator;
  e.unconditional_violations = acc.unconditional;
  e.implication_violations = acc.implication;
  e.coupling_mismatches = acc.mismatch;
  e.flipping_events = acc.flipping;
  e.potential_path_samples = acc.potential;
  e.max_potential_paths = acc.max_paths;
  return e;
}

double hardness_curve(double s) { return (std::exp(-s) + s - 1.0) / 2.0; }

namespace {

struct HardnessAcc {
  std::vector<double> sum;          // Σ M(t)/n
  std::vector<std::int64_t> q;      // #trials with Q_t
  std::int64_t q_all = 0;
  MeanAccumulator final_value;
  std::vector<MeanAccumulator> drift;

  HardnessAcc(int n, int buckets)
      : sum(static_cast<std::size_t>(2 * n + 1)), q(static_cast<std::size_t>(2 * n + 1)), drift(buckets) {}

  void merge(const HardnessAcc& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      q[i] += o.q[i];
    }
    q_all += o.q_all;
    final_value.merge(o.final_value);
    for (std::size_t b = 0; b < drift.size(); ++b) drift[b].merge(o.drift[b]);
  }
};

}  // namespace

HardnessReport hardness_trajectory(const HardnessParams& p, const Stream& rng, unsigned threads) {
  if (p.n < 1) throw std::invalid_argument("hardness: n must be >= 1");
  if (p.trials < 1) throw std::invalid_argument("hardness: trials must be >= 1");
  if (p.drift_buckets < 1) throw std::invalid_argument("hardness: drift_buckets must be >= 1");
  const int n = p.n;
  const int rounds = 2 * n;
  const Graph g = generate({.family = "complete_bipartite", .n = n});
  std::optional<TwoPhaseRcrs> two_phase;
  if (p.algorithm == HardnessAlgorithm::kTwoPhase) two_phase.emplace(g, p.t);
  const double slack = 1.0 + std::pow(static_cast<double>(n), -1.0 / 3.0);
  const int q_last = std::min(rounds, static_cast<int>(std::floor(p.q_horizon * n + 1e-9)));

  const HardnessAcc acc = chunked_reduce<HardnessAcc>(
      p.trials, 1,
      [&](std::int64_t begin, std::int64_t end) {
        HardnessAcc a(n, p.drift_buckets);
        ArrivalSample s;
        Matching m;
        std::vector<int> rank(static_cast<std::size_t>(rounds));
        std::vector<int> matched_at(static_cast<std::size_t>(rounds + 1));
        for (std::int64_t i = begin; i < end; ++i) {
          const Stream st = rng.derive(Purpose::kTrial, i);
          sample_vertex_arrivals_into(g, st, {}, s);
          if (two_phase) {
            m = two_phase->run(s, st);
          } else {
            run_greedy_into(g, s, m);
          }
          const auto order = arrival_order(s);
          for (int r = 0; r < rounds; ++r) rank[order[r]] = r;
          std::fill(matched_at.begin(), matched_at.end(), 0);
          for (const AcceptedEdge& e : m.accepted) ++matched_at[rank[e.proposer] + 1];
          int M = 0, left = 0, right = 0;
          bool all_q = true;
          for (int t = 0; t <= rounds; ++t) {
            if (t > 0) {
              M += matched_at[t];
              (order[t - 1] < n ? left : right) += 1;
            }
            a.sum[t] += static_cast<double>(M) / n;
            const double cap = slack * (rounds - t) / 2.0;
            const bool q = (n - left) <= cap && (n - right) <= cap;
            a.q[t] += q;
            if (t <= q_last) all_q = all_q && q;
            if (q && t < rounds) {
              const double drift = slack * (static_cast<double>(t) / rounds - static_cast<double>(M) / n);
              const int b = static_cast<int>(static_cast<std::int64_t>(t) * p.drift_buckets / rounds);
              a.drift[b].add(matched_at[t + 1] - drift);
            }
          }
          a.q_all += all_q;
          a.final_value.add(static_cast<double>(M) / n);
        }
        return a;
      },
      threads);

  HardnessReport r;
  r.n = n;
  r.trials = p.trials;
  const double trials = static_cast<double>(p.trials);
  double q_sum = 0.0;
  for (int t = 0; t <= rounds; ++t) {
    const TrajectoryPoint pt{t, acc.sum[t] / trials, hardness_curve(static_cast<double>(t) / n),
                             static_cast<double>(acc.q[t]) / trials};
    r.sup_distance = std::max(r.sup_distance, std::fabs(pt.mean - pt.curve));
    if (t <= q_last) {
      q_sum += pt.q_frequency;
      if (t == 0 || pt.q_frequency < r.q_min_frequency) {
        r.q_min_frequency = pt.q_frequency;
        r.q_min_t = t;
      }
    }
    r.points.push_back(pt);
  }
  r.final_value = acc.final_value;
  r.q_all_frequency = static_cast<double>(acc.q_all) / trials;
  r.q_mean_frequency = q_sum / (q_last + 1);
  for (int b = 0; b < p.drift_buckets; ++b) {
    const int lo = static_cast<int>((static_cast<std::int64_t>(b) * rounds + p.drift_buckets - 1) / p.drift_buckets);
    const int hi = static_cast<int>((static_cast<std::int64_t>(b + 1) * rounds + p.drift_buckets - 1) / p.drift_buckets);
    r.drift.push_back({lo, hi, acc.drift[b]});
  }
  return r;
}

}  // namespace rcrs
