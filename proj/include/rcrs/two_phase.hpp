#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "rcrs/arrival.hpp"
#include "rcrs/graph.hpp"
#include "rcrs/matching.hpp"
#include "rcrs/rng.hpp"

namespace rcrs {

// a_t(x)
double prune_factor(double x, double t);
// f_t(x) = x·a_t(x)
double survival_prob(double x, double t);
double survival_prob_closed_form(double x, double t);

// 4t⁶+16t⁵+100t⁴+180t³+80t²−4t−1
double t0_polynomial(double t);
// Root of t0_polynomial in (0,1), by bisection to 1e-14.
double find_t0();

// (16 + 5t² − 10t³ + 4t⁵)/30
double guarantee_poly(double t);

struct TwoValuesReport {
  double max_violation = 0.0;  // max over grid of lhs - rhs
  long violating_points = 0;   // points with lhs - rhs > 1e-10
  std::vector<std::pair<double, double>> violating;  // first few (x, y)
  bool ok() const { return violating_points == 0; }
};

TwoValuesReport check_two_values_inequality(double t, int grid);

// Uniforms for the A and B bits, one pair per vertex.
struct TwoPhaseCoins {
  std::vector<double> a;
  std::vector<double> b;
};
TwoPhaseCoins draw_two_phase_coins(int vertex_count, const Stream& rng);

class TwoPhaseRcrs {
 public:
  TwoPhaseRcrs(Graph g, double t);

  const Graph& graph() const { return g_; }
  double t() const { return t_; }
  // The guarantee only applies to 1-regular x; otherwise results are
  // observational.
  bool one_regular() const { return one_regular_; }

  Matching run(const ArrivalSample& s, const TwoPhaseCoins& coins) const;
  void run_into(const ArrivalSample& s, const TwoPhaseCoins& coins, Matching& out) const;
  Matching run(const ArrivalSample& s, const Stream& rng) const;

 private:
  Graph g_;
  double t_;
  bool one_regular_;
  std::vector<double> a_;  // per edge
  std::vector<double> f_;  // per edge
};

// Baselines for the endpoints t = 0 and t = 1, written independently.
Matching run_prune_greedy(const Graph& g, const ArrivalSample& s, const TwoPhaseCoins& coins);
Matching run_ocrs(const Graph& g, const ArrivalSample& s, const TwoPhaseCoins& coins);
// Accept every active edge whose passive endpoint is unmatched.
Matching run_greedy(const Graph& g, const ArrivalSample& s);
void run_greedy_into(const Graph& g, const ArrivalSample& s, Matching& out);

enum class BoundDirection { kLower, kUpper };

// Dense polynomial in y, coefficients by ascending degree.
using Poly = std::vector<double>;
double poly_eval(const Poly& p, double y);

// Recursive lower/upper bounds on E[M_{u0→u1}(y0) | Y_{u0}=y0]/f(x_{u0u1})
// for y0 in (t,1]. Evaluated exactly on polynomials and memoized by
// (deleted vertex set, directed pair, ℓ).
class RecursionBound {
 public:
  RecursionBound(const Graph& g, double t);

  // ℓ in {1,2,3,4}; odd ℓ is an upper bound, even ℓ a lower bound.
  const Poly& bound(VertexId u0, VertexId u1, int ell);
  // ∫_t^1 bound dy
  double integral(VertexId u0, VertexId u1, int ell);
  std::size_t memo_size() const { return memo_.size(); }

 private:
  const Poly& bound(const std::vector<VertexId>& deleted, VertexId a, VertexId b, int ell);

  const Graph& g_;
  double t_;
  std::vector<double> f_;
  std::map<std::tuple<std::vector<VertexId>, VertexId, VertexId, int>, Poly> memo_;
};

struct BoundTable {
  std::vector<double> y;
  std::vector<double> value;
};

// Tabulates the ℓ-level bound at points t + (1-t)·i/points, i = 1..points.
// Throws if the parity of ℓ does not match the direction.
BoundTable recursion_bound(const Graph& g, double t, VertexId u0, VertexId u1, int ell, BoundDirection dir,
                           int points = 100);

}  // namespace rcrs
