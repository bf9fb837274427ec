#include "rcrs/recursive_rcrs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rcrs/parallel.hpp"

namespace rcrs {

double required_samples_bound(double C, double delta, int T, int n) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("required_samples: delta must lie in (0,1)");
  if (!(C > 0.0 && C <= 1.0)) throw std::invalid_argument("required_samples: C must lie in (0,1]");
  if (T < 1 || n < 1) throw std::invalid_argument("required_samples: T and n must be >= 1");
  const double nn = static_cast<double>(n);
  return 3.0 / (C * delta * delta) * std::log(2.0 * T * nn * nn / delta);
}

std::int64_t required_samples(double C, double delta, int T, int n) {
  return static_cast<std::int64_t>(std::ceil(required_samples_bound(C, delta, T, n)));
}

int phase_index(double y, int T) {
  if (y <= 0.0) return 0;
  int j = static_cast<int>(std::ceil(y * T)) - 1;
  j = std::clamp(j, 0, T - 1);
  while (j > 0 && y <= static_cast<double>(j) / T) --j;
  while (j < T - 1 && y > static_cast<double>(j + 1) / T) ++j;
  return j;
}

EstimateTable::EstimateTable(int phases, int slots, double floor_clamp)
    : phases_(phases), slots_(slots), floor_(floor_clamp) {
  if (phases < 1) throw std::invalid_argument("EstimateTable: T must be >= 1");
  data_.assign(static_cast<std::size_t>(phases) * static_cast<std::size_t>(slots), 0.0);
  std::fill(data_.begin(), data_.begin() + slots, 1.0);
}

double EstimateTable::at(int j, int slot) const {
  if (j < 0 || j >= filled_) {
    throw std::out_of_range("estimate table: phase " + std::to_string(j) + " not filled");
  }
  return data_[static_cast<std::size_t>(j) * slots_ + slot];
}

std::span<const double> EstimateTable::phase(int j) const {
  if (j < 0 || j >= filled_) {
    throw std::out_of_range("estimate table: phase " + std::to_string(j) + " not filled");
  }
  return {data_.data() + static_cast<std::size_t>(j) * slots_, static_cast<std::size_t>(slots_)};
}

void EstimateTable::commit(int j, std::span<const double> values) {
  if (j != filled_ || j >= phases_) {
    throw std::logic_error("estimate table: phase " + std::to_string(j) + " committed out of order");
  }
  if (static_cast<int>(values.size()) != slots_) throw std::invalid_argument("estimate table: wrong slot count");
  double* row = data_.data() + static_cast<std::size_t>(j) * slots_;
  for (int s = 0; s < slots_; ++s) row[s] = std::clamp(values[s], floor_, 1.0);
  ++filled_;
}

std::vector<double> draw_coins(int count, const Stream& rng) {
  Stream s = rng;
  std::vector<double> c(static_cast<std::size_t>(count));
  for (double& x : c) x = s.uniform();
  return c;
}

namespace {

void check_params(const RecursiveParams& p) {
  if (p.phases < 1) throw std::invalid_argument("recursive RCRS: T must be >= 1");
  if (!(p.delta >= 0.0 && p.delta < 1.0)) throw std::invalid_argument("recursive RCRS: delta must lie in [0,1)");
  if (p.samples < 0) throw std::invalid_argument("recursive RCRS: Q must be positive");
}

RecursiveParams resolve_samples(RecursiveParams p, double C, int n) {
  check_params(p);
  if (p.samples == 0) {
    if (p.delta <= 0.0) throw std::invalid_argument("recursive RCRS: delta = 0 needs an explicit Q");
    p.samples = required_samples(C, p.delta, p.phases, std::max(n, 1));
  }
  return p;
}

double guard_factor(DiscretizationGuard g, double C, int T, double y) {
  if (g == DiscretizationGuard::kOff) return 1.0;
  const double cty = C * T * y;
  return cty / (cty + 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Vertex arrivals

RecursiveVertexRcrs::RecursiveVertexRcrs(Graph g, SelectionFunction c, RecursiveParams p)
    : g_(std::move(g)), c_(std::move(c)) {
  if (c_.is_edge_kind()) throw std::invalid_argument("vertex RCRS needs a vertex-arrival selection function");
  if (!validate_fractional_matching(g_).ok) throw std::invalid_argument("vertex RCRS: x is not a fractional matching");
  p_ = resolve_samples(p, c_.floor(), g_.vertex_count());
}

EstimateTable RecursiveVertexRcrs::make_table() const {
  return EstimateTable(p_.phases, 2 * g_.edge_count(), 0.5 * c_.floor());
}

double RecursiveVertexRcrs::guard(double y) const { return guard_factor(p_.guard, c_.floor(), p_.phases, y); }

double RecursiveVertexRcrs::acceptance_probability(EdgeId e, VertexId proposer, double y,
                                                   const EstimateTable& t) const {
  const int j = phase_index(y, p_.phases);
  const double p = c_(y) / t.at(j, slot(e, proposer)) * (1.0 - p_.delta) * guard(y);
  return std::min(p, 1.0);
}

double RecursiveVertexRcrs::estimate_safety(const EstimateTable& t, int j, VertexId v, VertexId u,
                                            const Stream& rng) const {
  if (j < 1 || j >= p_.phases) throw std::invalid_argument("estimate_safety: phase must lie in [1, T)");
  if (t.filled_phases() < j) {
    throw std::out_of_range("estimate_safety: tables missing for phase " + std::to_string(t.filled_phases()));
  }
  if (!g_.find_edge(u, v)) throw std::invalid_argument("estimate_safety: u and v are not adjacent");
  const int n = g_.vertex_count();
  const double tj = static_cast<double>(j) / p_.phases;
  Stream s = rng;
  std::vector<double> y(n);
  std::vector<int> choice(n);
  std::vector<double> coin(n);
  std::vector<std::uint8_t> matched(n, 0);
  std::vector<VertexId> early;
  early.reserve(n);
  std::int64_t safe = 0;
  for (std::int64_t q = 0; q < p_.samples; ++q) {
    for (VertexId w = 0; w < n; ++w) y[w] = s.uniform();
    y[u] = tj * y[u];
    y[v] = 1.0 - (1.0 - tj) * y[v];
    early.clear();
    for (VertexId w = 0; w < n; ++w) {
      if (y[w] <= tj) early.push_back(w);
    }
    for (VertexId w : early) {
      choice[w] = sample_choice_index(g_, w, s.uniform());
      coin[w] = s.uniform();
      matched[w] = 0;
    }
    std::sort(early.begin(), early.end(),
              [&](VertexId a, VertexId b) { return arrives_before(y[a], a, y[b], b); });
    bool u_matched = false;
    for (VertexId w : early) {
      if (choice[w] < 0) continue;
      const Incidence& inc = g_.incident(w)[static_cast<std::size_t>(choice[w])];
      const VertexId z = inc.neighbor;
      if (!arrives_before(y[z], z, y[w], w) || matched[z]) continue;
      if (coin[w] < acceptance_probability(inc.edge, w, y[w], t)) {
        matched[z] = matched[w] = 1;
        if (z == u || w == u) {
          u_matched = true;
          break;
        }
      }
    }
    if (!u_matched) ++safe;
  }
  const double est = static_cast<double>(safe) / static_cast<double>(p_.samples);
  return std::max(est, t.floor_clamp());
}

void RecursiveVertexRcrs::fill_phase(EstimateTable& t, int j, const Stream& rng) const {
  std::vector<double> values(static_cast<std::size_t>(t.slots()), 1.0);
  parallel_for(t.slots(), [&](std::int64_t sl) {
    const EdgeId e = static_cast<EdgeId>(sl / 2);
    const Edge& ed = g_.edge(e);
    if (ed.x <= 0.0) return;  // never proposed along
    const VertexId v = sl % 2 == 0 ? ed.u : ed.v;
    values[sl] = estimate_safety(t, j, v, ed.other(v), rng.derive(Purpose::kEstimate, j, sl));
  });
  t.commit(j, values);
}

EstimateTable RecursiveVertexRcrs::build_tables(const Stream& rng) const {
  EstimateTable t = make_table();
  for (int j = 1; j < p_.phases; ++j) fill_phase(t, j, rng);
  return t;
}

void RecursiveVertexRcrs::run_into(const ArrivalSample& s, const EstimateTable& t, std::span<const double> coins,
                                   RunOptions opt, Matching& out) const {
  if (s.mode != ArrivalMode::kVertex) throw std::invalid_argument("run_vertex: vertex-mode sample required");
  const int n = g_.vertex_count();
  if (static_cast<int>(coins.size()) < n) throw std::invalid_argument("run_vertex: one coin per vertex required");
  out.reset(n);
  thread_local std::vector<VertexId> order;
  order.clear();
  for (VertexId v = 0; v < n; ++v) {
    if (v != opt.excluded && s.times[v] <= opt.horizon) order.push_back(v);
  }
  std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return vertex_before(s, a, b); });
  for (VertexId v : order) {
    const VertexId u = s.choices[v];
    if (u == kNoVertex || u == opt.excluded || !vertex_before(s, u, v) || out.is_matched(u)) continue;
    const EdgeId e = s.choice_edges[v];
    if (coins[v] < acceptance_probability(e, v, s.times[v], t)) out.accept(g_, e, s.times[v], v);
  }
}

Matching RecursiveVertexRcrs::run(const ArrivalSample& s, const EstimateTable& t, std::span<const double> coins,
                                  RunOptions opt) const {
  Matching m;
  run_into(s, t, coins, opt, m);
  return m;
}

Matching RecursiveVertexRcrs::run(const ArrivalSample& s, EstimateTable& t, const Stream& rng) const {
  if (s.mode != ArrivalMode::kVertex) throw std::invalid_argument("run_vertex: vertex-mode sample required");
  int needed = 0;
  for (VertexId v = 0; v < g_.vertex_count(); ++v) needed = std::max(needed, phase_index(s.times[v], p_.phases));
  const Stream table_rng = rng.derive(Purpose::kTables);
  while (t.filled_phases() <= needed) fill_phase(t, t.filled_phases(), table_rng);
  const auto coins = draw_coins(g_.vertex_count(), rng.derive(Purpose::kCoins));
  return run(s, static_cast<const EstimateTable&>(t), coins);
}

// ---------------------------------------------------------------------------
// Edge arrivals

RecursiveEdgeRcrs::RecursiveEdgeRcrs(Graph g, SelectionFunction c, RecursiveParams p)
    : g_(std::move(g)), c_(std::move(c)) {
  if (!c_.is_edge_kind()) throw std::invalid_argument("edge RCRS needs rank1, edge_general or edge_tree");
  if (!validate_fractional_matching(g_).ok) throw std::invalid_argument("edge RCRS: x is not a fractional matching");
  if (c_.kind() == SelectionKind::kRank1 && !star_center(g_)) {
    throw std::invalid_argument("edge RCRS: rank1 selection function needs a star instance");
  }
  if (c_.kind() == SelectionKind::kEdgeTree && !is_forest(g_)) {
    throw std::invalid_argument("edge RCRS: edge_tree selection function needs a tree instance");
  }
  p_ = resolve_samples(p, c_.floor(), g_.vertex_count());
}

EstimateTable RecursiveEdgeRcrs::make_table() const {
  return EstimateTable(p_.phases, g_.edge_count(), 0.5 * c_.floor());
}

double RecursiveEdgeRcrs::guard(double y) const { return guard_factor(p_.guard, c_.floor(), p_.phases, y); }

double RecursiveEdgeRcrs::acceptance_probability(EdgeId e, double y, const EstimateTable& t) const {
  const int j = phase_index(y, p_.phases);
  return std::min(c_(y) / t.at(j, e) * (1.0 - p_.delta) * guard(y), 1.0);
}

double RecursiveEdgeRcrs::estimate_safety(const EstimateTable& t, int j, EdgeId e, const Stream& rng) const {
  if (j < 1 || j >= p_.phases) throw std::invalid_argument("estimate_safety: phase must lie in [1, T)");
  if (t.filled_phases() < j) {
    throw std::out_of_range("estimate_safety: tables missing for phase " + std::to_string(t.filled_phases()));
  }
  const int m = g_.edge_count();
  const double tj = static_cast<double>(j) / p_.phases;
  const VertexId a = g_.edge(e).u;
  const VertexId b = g_.edge(e).v;
  Stream s = rng;
  std::vector<double> y(m);
  std::vector<double> coin(m);
  std::vector<std::uint8_t> act(m);
  std::vector<std::uint8_t> matched(g_.vertex_count(), 0);
  std::vector<EdgeId> early;
  early.reserve(m);
  std::int64_t safe = 0;
  for (std::int64_t q = 0; q < p_.samples; ++q) {
    for (EdgeId f = 0; f < m; ++f) {
      y[f] = s.uniform();
      act[f] = s.uniform() < g_.edge(f).x ? 1 : 0;
    }
    y[e] = 1.0 - (1.0 - tj) * y[e];
    early.clear();
    for (EdgeId f = 0; f < m; ++f) {
      if (act[f] && y[f] <= tj) early.push_back(f);
    }
    for (EdgeId f : early) {
      coin[f] = s.uniform();
      matched[g_.edge(f).u] = matched[g_.edge(f).v] = 0;
    }
    std::sort(early.begin(), early.end(), [&](EdgeId p, EdgeId r) { return arrives_before(y[p], p, y[r], r); });
    bool blocked = false;
    for (EdgeId f : early) {
      const Edge& ed = g_.edge(f);
      if (matched[ed.u] || matched[ed.v]) continue;
      if (coin[f] < acceptance_probability(f, y[f], t)) {
        matched[ed.u] = matched[ed.v] = 1;
        if (ed.u == a || ed.u == b || ed.v == a || ed.v == b) {
          blocked = true;
          break;
        }
      }
    }
    if (!blocked) ++safe;
  }
  const double est = static_cast<double>(safe) / static_cast<double>(p_.samples);
  return std::max(est, t.floor_clamp());
}

void RecursiveEdgeRcrs::fill_phase(EstimateTable& t, int j, const Stream& rng) const {
  std::vector<double> values(static_cast<std::size_t>(t.slots()), 1.0);
  parallel_for(t.slots(), [&](std::int64_t e) {
    if (g_.edge(static_cast<EdgeId>(e)).x <= 0.0) return;
    values[e] = estimate_safety(t, j, static_cast<EdgeId>(e), rng.derive(Purpose::kEstimate, j, e));
  });
  t.commit(j, values);
}

EstimateTable RecursiveEdgeRcrs::build_tables(const Stream& rng) const {
  EstimateTable t = make_table();
  for (int j = 1; j < p_.phases; ++j) fill_phase(t, j, rng);
  return t;
}

void RecursiveEdgeRcrs::run_into(const ArrivalSample& s, const EstimateTable& t, std::span<const double> coins,
                                 double horizon, Matching& out) const {
  if (s.mode != ArrivalMode::kEdge) throw std::invalid_argument("run_edge: edge-mode sample required");
  const int m = g_.edge_count();
  if (static_cast<int>(coins.size()) < m) throw std::invalid_argument("run_edge: one coin per edge required");
  out.reset(g_.vertex_count());
  thread_local std::vector<EdgeId> order;
  order.clear();
  for (EdgeId e = 0; e < m; ++e) {
    if (s.active[e] && s.edge_times[e] <= horizon) order.push_back(e);
  }
  std::sort(order.begin(), order.end(),
            [&](EdgeId a, EdgeId b) { return arrives_before(s.edge_times[a], a, s.edge_times[b], b); });
  for (EdgeId e : order) {
    const Edge& ed = g_.edge(e);
    if (out.is_matched(ed.u) || out.is_matched(ed.v)) continue;
    if (coins[e] < acceptance_probability(e, s.edge_times[e], t)) out.accept(g_, e, s.edge_times[e], kNoVertex);
  }
}

Matching RecursiveEdgeRcrs::run(const ArrivalSample& s, const EstimateTable& t, std::span<const double> coins,
                                double horizon) const {
  Matching m;
  run_into(s, t, coins, horizon, m);
  return m;
}

Matching RecursiveEdgeRcrs::run(const ArrivalSample& s, EstimateTable& t, const Stream& rng) const {
  if (s.mode != ArrivalMode::kEdge) throw std::invalid_argument("run_edge: edge-mode sample required");
  int needed = 0;
  for (double y : s.edge_times) needed = std::max(needed, phase_index(y, p_.phases));
  const Stream table_rng = rng.derive(Purpose::kTables);
  while (t.filled_phases() <= needed) fill_phase(t, t.filled_phases(), table_rng);
  const auto coins = draw_coins(g_.edge_count(), rng.derive(Purpose::kCoins));
  return run(s, static_cast<const EstimateTable&>(t), coins);
}

// ---------------------------------------------------------------------------
// Rank-1 closed form

Rank1ClosedForm::Rank1ClosedForm(Graph g) : g_(std::move(g)) {
  if (!star_center(g_)) throw std::invalid_argument("rank1-closed: instance is not a star");
  double total = 0.0;
  for (const Edge& e : g_.edges()) total += e.x;
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("rank1-closed: needs sum of x equal to 1, got " + std::to_string(total));
  }
}

void Rank1ClosedForm::run_into(const ArrivalSample& s, std::span<const double> coins, Matching& out) const {
  if (s.mode != ArrivalMode::kEdge) throw std::invalid_argument("rank1-closed: edge-mode sample required");
  if (static_cast<int>(coins.size()) < g_.edge_count()) {
    throw std::invalid_argument("rank1-closed: one coin per edge required");
  }
  out.reset(g_.vertex_count());
  EdgeId best = kNoEdge;
  // Scanning in time order, the first passing element wins; find it directly.
  for (EdgeId e = 0; e < g_.edge_count(); ++e) {
    if (!s.active[e]) continue;
    const double y = s.edge_times[e];
    if (!(coins[e] < std::exp(-y * g_.edge(e).x))) continue;
    if (best == kNoEdge || arrives_before(y, e, s.edge_times[best], best)) best = e;
  }
  if (best != kNoEdge) out.accept(g_, best, s.edge_times[best], kNoVertex);
}

Matching Rank1ClosedForm::run(const ArrivalSample& s, std::span<const double> coins) const {
  Matching m;
  run_into(s, coins, m);
  return m;
}

Matching Rank1ClosedForm::run(const ArrivalSample& s, const Stream& rng) const {
  return run(s, draw_coins(g_.edge_count(), rng.derive(Purpose::kCoins)));
}

}  // namespace rcrs
