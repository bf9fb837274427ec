#include "rcrs/two_phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rcrs/numerics.hpp"

namespace rcrs {

double prune_factor(double x, double t) {
  const double num = 3.0 + 6.0 * t + 4.0 * t * t + 2.0 * t * t * t;
  return num / (num + 2.0 * x * (1.0 - t) * (1.0 + 3.0 * t + t * t));
}

double survival_prob(double x, double t) { return x * prune_factor(x, t); }

double survival_prob_closed_form(double x, double t) {
  // Numerator and denominator share the factor (1-t)^2; at t = 1 take the limit.
  // Extended precision keeps the cancellation near t = 1 below 1e-12.
  if (t == 1.0) return x;
  const long double X = x, T = t;
  const long double t2 = T * T;
  const long double t3 = t2 * T;
  const long double t5 = t3 * t2;
  return static_cast<double>(X * (3.0L + 2.0L * t5 - 5.0L * t2) /
                             (3.0L + 2.0L * t5 * (1.0L - X) + 2.0L * X + 10.0L * t3 * X - 5.0L * t2 * (1.0L + 2.0L * X)));
}

double t0_polynomial(double t) {
  return ((((((4.0 * t + 16.0) * t + 100.0) * t + 180.0) * t + 80.0) * t - 4.0) * t) - 1.0;
}

double find_t0() {
  if (!(t0_polynomial(0.0) < 0.0 && t0_polynomial(1.0) > 0.0)) {
    throw std::logic_error("find_t0: expected a sign change on (0,1)");
  }
  return bisect(t0_polynomial, 0.0, 1.0, 1e-14);
}

double guarantee_poly(double t) {
  const double t2 = t * t;
  return (16.0 + 5.0 * t2 - 10.0 * t2 * t + 4.0 * t2 * t2 * t) / 30.0;
}

TwoValuesReport check_two_values_inequality(double t, int grid) {
  if (grid < 2) throw std::invalid_argument("check_two_values_inequality: grid must be >= 2");
  const double K = 1.0 / 3.0 + t * t * t / 6.0 - t * t / 2.0;
  const double P = 3.0 + 2.0 * std::pow(t, 5) - 5.0 * t * t;
  TwoValuesReport r;
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double x = static_cast<double>(i) / grid;
    const double fx = survival_prob(x, t);
    for (int j = 0; j <= grid; ++j) {
      const double y = static_cast<double>(j) / grid;
      const double fy = survival_prob(y, t);
      const double lhs = fx * (K - (2.0 - 2.0 * x - y) * P / 60.0) + fy * (K - (2.0 - 2.0 * y - x) * P / 60.0);
      const double rhs = (K - P / 30.0) * (x + y);
      const double d = lhs - rhs;
      r.max_violation = std::max(r.max_violation, d);
      if (d > 1e-10) {
        ++r.violating_points;
        if (r.violating.size() < 16) r.violating.emplace_back(x, y);
      }
    }
  }
  return r;
}

TwoPhaseCoins draw_two_phase_coins(int vertex_count, const Stream& rng) {
  Stream s = rng;
  TwoPhaseCoins c;
  c.a.resize(static_cast<std::size_t>(vertex_count));
  c.b.resize(static_cast<std::size_t>(vertex_count));
  for (int v = 0; v < vertex_count; ++v) {
    c.a[v] = s.uniform();
    c.b[v] = s.uniform();
  }
  return c;
}

TwoPhaseRcrs::TwoPhaseRcrs(Graph g, double t) : g_(std::move(g)), t_(t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("two-phase: t must lie in [0,1]");
  if (!validate_fractional_matching(g_).ok) throw std::invalid_argument("two-phase: x is not a fractional matching");
  one_regular_ = is_one_regular(g_);
  for (const Edge& e : g_.edges()) {
    a_.push_back(prune_factor(e.x, t_));
    f_.push_back(survival_prob(e.x, t_));
  }
}

namespace {

void check_vertex_input(const Graph& g, const ArrivalSample& s, const TwoPhaseCoins& c, const char* who) {
  if (s.mode != ArrivalMode::kVertex) throw std::invalid_argument(std::string(who) + ": vertex-mode sample required");
  if (static_cast<int>(c.a.size()) < g.vertex_count() || static_cast<int>(c.b.size()) < g.vertex_count()) {
    throw std::invalid_argument(std::string(who) + ": one coin pair per vertex required");
  }
}

void sorted_order(const ArrivalSample& s, std::vector<VertexId>& order) {
  order.resize(s.times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return vertex_before(s, a, b); });
}

}  // namespace

void TwoPhaseRcrs::run_into(const ArrivalSample& s, const TwoPhaseCoins& coins, Matching& out) const {
  check_vertex_input(g_, s, coins, "two-phase");
  const int n = g_.vertex_count();
  out.reset(n);
  thread_local std::vector<VertexId> order;
  thread_local std::vector<double> arrived_f;  // Σ f_t(x_uw) over neighbors w of u arrived so far
  sorted_order(s, order);
  arrived_f.assign(static_cast<std::size_t>(n), 0.0);
  for (VertexId v : order) {
    const double yv = s.times[v];
    const VertexId u = s.choices[v];
    if (u != kNoVertex && vertex_before(s, u, v) && !out.is_matched(u)) {
      const EdgeId e = s.choice_edges[v];
      const bool A = coins.a[v] < a_[e];
      bool B = true;
      if (yv < t_) {
        const double denom = 2.0 - arrived_f[u];
        if (!(denom >= 1.0 - 1e-9 && denom <= 2.0)) {
          throw std::logic_error("two-phase: b denominator " + std::to_string(denom) + " outside [1,2]");
        }
        B = coins.b[v] < 1.0 / denom;
      }
      if (A && B) out.accept(g_, e, yv, v);
    }
    if (yv < t_) {
      for (const Incidence& inc : g_.incident(v)) arrived_f[inc.neighbor] += f_[inc.edge];
    }
  }
}

Matching TwoPhaseRcrs::run(const ArrivalSample& s, const TwoPhaseCoins& coins) const {
  Matching m;
  run_into(s, coins, m);
  return m;
}

Matching TwoPhaseRcrs::run(const ArrivalSample& s, const Stream& rng) const {
  return run(s, draw_two_phase_coins(g_.vertex_count(), rng.derive(Purpose::kCoins)));
}

Matching run_prune_greedy(const Graph& g, const ArrivalSample& s, const TwoPhaseCoins& coins) {
  check_vertex_input(g, s, coins, "prune-greedy");
  Matching m;
  m.reset(g.vertex_count());
  std::vector<VertexId> order;
  sorted_order(s, order);
  for (VertexId v : order) {
    const VertexId u = s.choices[v];
    if (u == kNoVertex || !vertex_before(s, u, v) || m.is_matched(u)) continue;
    const EdgeId e = s.choice_edges[v];
    if (coins.a[v] < 3.0 / (3.0 + 2.0 * g.edge(e).x)) m.accept(g, e, s.times[v], v);
  }
  return m;
}

Matching run_ocrs(const Graph& g, const ArrivalSample& s, const TwoPhaseCoins& coins) {
  check_vertex_input(g, s, coins, "ocrs");
  Matching m;
  m.reset(g.vertex_count());
  std::vector<VertexId> order;
  sorted_order(s, order);
  std::vector<double> seen(static_cast<std::size_t>(g.vertex_count()), 0.0);
  for (VertexId v : order) {
    const VertexId u = s.choices[v];
    if (u != kNoVertex && vertex_before(s, u, v) && !m.is_matched(u)) {
      const EdgeId e = s.choice_edges[v];
      if (coins.b[v] < 1.0 / (2.0 - seen[u])) m.accept(g, e, s.times[v], v);
    }
    for (const Incidence& inc : g.incident(v)) seen[inc.neighbor] += g.edge(inc.edge).x;
  }
  return m;
}

void run_greedy_into(const Graph& g, const ArrivalSample& s, Matching& out) {
  if (s.mode != ArrivalMode::kVertex) throw std::invalid_argument("greedy: vertex-mode sample required");
  out.reset(g.vertex_count());
  thread_local std::vector<VertexId> order;
  sorted_order(s, order);
  for (VertexId v : order) {
    const VertexId u = s.choices[v];
    if (u == kNoVertex || !vertex_before(s, u, v) || out.is_matched(u)) continue;
    out.accept(g, s.choice_edges[v], s.times[v], v);
  }
}

Matching run_greedy(const Graph& g, const ArrivalSample& s) {
  Matching m;
  run_greedy_into(g, s, m);
  return m;
}

// ---------------------------------------------------------------------------
// Recursion bounds

double poly_eval(const Poly& p, double y) {
  double r = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * y + *it;
  return r;
}

namespace {

// ∫_t^y p(s) ds as a polynomial in y.
Poly integrate_from(const Poly& p, double t) {
  Poly q(p.size() + 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) q[k + 1] = p[k] / static_cast<double>(k + 1);
  q[0] = -poly_eval(q, t);
  return q;
}

void add_scaled(Poly& acc, const Poly& p, double s) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) acc[k] += s * p[k];
}

}  // namespace

RecursionBound::RecursionBound(const Graph& g, double t) : g_(g), t_(t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("recursion_bound: t must lie in [0,1]");
  for (const Edge& e : g_.edges()) f_.push_back(survival_prob(e.x, t_));
}

const Poly& RecursionBound::bound(VertexId u0, VertexId u1, int ell) {
  if (ell < 1 || ell > 4) throw std::invalid_argument("recursion_bound: ell must lie in {1,2,3,4}");
  if (!g_.find_edge(u0, u1)) throw std::invalid_argument("recursion_bound: (u0,u1) is not an edge");
  return bound({}, u0, u1, ell);
}

const Poly& RecursionBound::bound(const std::vector<VertexId>& deleted, VertexId a, VertexId b, int ell) {
  auto key = std::make_tuple(deleted, a, b, ell);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  Poly result = {0.0, 1.0};  // y
  if (ell > 1) {
    std::vector<VertexId> next = deleted;
    next.insert(std::upper_bound(next.begin(), next.end(), a), a);
    for (const Incidence& inc : g_.incident(b)) {
      const VertexId c = inc.neighbor;
      if (c == a || std::binary_search(deleted.begin(), deleted.end(), c)) continue;
      const double f = f_[inc.edge];
      if (f == 0.0) continue;
      Poly inner = bound(next, b, c, ell - 1);  // copied, then extended in place
      add_scaled(inner, bound(next, c, b, ell - 1), 1.0);
      Poly term = integrate_from(inner, t_);
      term[0] += t_ * t_ / 2.0;
      add_scaled(result, term, -f);
    }
  }
  return memo_.emplace(std::move(key), std::move(result)).first->second;
}

double RecursionBound::integral(VertexId u0, VertexId u1, int ell) {
  return poly_eval(integrate_from(bound(u0, u1, ell), t_), 1.0);
}

BoundTable recursion_bound(const Graph& g, double t, VertexId u0, VertexId u1, int ell, BoundDirection dir,
                           int points) {
  const bool upper = ell % 2 == 1;
  if (upper != (dir == BoundDirection::kUpper)) {
    throw std::invalid_argument("recursion_bound: odd ell gives the upper bound, even ell the lower bound");
  }
  if (points < 1) throw std::invalid_argument("recursion_bound: points must be >= 1");
  RecursionBound rb(g, t);
  const Poly& p = rb.bound(u0, u1, ell);
  BoundTable tab;
  for (int i = 1; i <= points; ++i) {
    const double y = t + (1.0 - t) * i / points;
    tab.y.push_back(y);
    tab.value.push_back(poly_eval(p, y));
  }
  return tab;
}

}  // namespace rcrs
