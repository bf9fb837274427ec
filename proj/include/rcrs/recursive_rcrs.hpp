#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcrs/arrival.hpp"
#include "rcrs/graph.hpp"
#include "rcrs/matching.hpp"
#include "rcrs/rng.hpp"
#include "rcrs/selection.hpp"

namespace rcrs {

// Factor multiplying c(y)/Ŝ in the acceptance probability besides (1-δ).
// kOn applies the factor 1/(1+1/(C·T·y)) to the acceptance probability; kOff drops it.
enum class DiscretizationGuard { kOn, kOff };

struct RecursiveParams {
  int phases = 20;           // T
  double delta = 0.05;       // δ in [0,1); 0 is the idealized mode
  std::int64_t samples = 0;  // Q; 0 means required_samples(C, δ, T, n)
  DiscretizationGuard guard = DiscretizationGuard::kOn;
};

// (3/(Cδ²))·ln(2Tn²/δ)
double required_samples_bound(double C, double delta, int T, int n);
// Smallest integer >= required_samples_bound. Throws unless δ in (0,1).
std::int64_t required_samples(double C, double delta, int T, int n);

// Index j of the phase interval (t_j, t_{j+1}] containing y, t_j = j/T.
// y <= 1/T maps to 0.
int phase_index(double y, int T);

// Ŝ(j) per slot for j = 0..T-1. Phase 0 is all ones; later phases are
// committed once, in order, and values are clamped to [floor_clamp, 1].
class EstimateTable {
 public:
  EstimateTable(int phases, int slots, double floor_clamp);

  int phases() const { return phases_; }
  int slots() const { return slots_; }
  int filled_phases() const { return filled_; }
  double floor_clamp() const { return floor_; }

  // Throws std::out_of_range if phase j has not been committed.
  double at(int j, int slot) const;
  std::span<const double> phase(int j) const;

  // Requires j == filled_phases().
  void commit(int j, std::span<const double> values);

 private:
  int phases_;
  int slots_;
  double floor_;
  int filled_ = 1;
  std::vector<double> data_;
};

struct RunOptions {
  double horizon = 1.0;            // only arrivals with Y <= horizon are processed
  VertexId excluded = kNoVertex;   // run on G minus this vertex
};

// Per-vertex (vertex mode) or per-edge (edge mode) uniforms for the A bits.
std::vector<double> draw_coins(int count, const Stream& rng);

// Recursive RCRS for vertex arrivals.
class RecursiveVertexRcrs {
 public:
  RecursiveVertexRcrs(Graph g, SelectionFunction c, RecursiveParams p);

  const Graph& graph() const { return g_; }
  const SelectionFunction& selection() const { return c_; }
  const RecursiveParams& params() const { return p_; }  // samples resolved

  // Slot of the directed pair proposer -> other endpoint of e.
  int slot(EdgeId e, VertexId proposer) const { return 2 * e + (proposer == g_.edge(e).u ? 0 : 1); }

  EstimateTable make_table() const;

  // min(c(y)/Ŝ_{v→u}(j)·(1-δ)·guard(y), 1) with j = phase_index(y).
  double acceptance_probability(EdgeId e, VertexId proposer, double y, const EstimateTable& t) const;

  // Fraction of Q forced-time runs (Y_u ~ U[0,t_j), Y_v ~ U(t_j,1]) in which
  // u is unmatched at t_j, clamped below at the table floor. Uses phases
  // < j of the table only.
  double estimate_safety(const EstimateTable& t, int j, VertexId v, VertexId u, const Stream& rng) const;

  // Fills phase j for all slots; slot streams are rng.derive(kEstimate, j, slot).
  void fill_phase(EstimateTable& t, int j, const Stream& rng) const;
  EstimateTable build_tables(const Stream& rng) const;

  Matching run(const ArrivalSample& s, const EstimateTable& t, std::span<const double> coins,
               RunOptions opt = {}) const;
  void run_into(const ArrivalSample& s, const EstimateTable& t, std::span<const double> coins, RunOptions opt,
                Matching& out) const;

  // Top-level mode: fills missing phases of t from rng.derive(kTables) on
  // first use and draws coins from rng.derive(kCoins).
  Matching run(const ArrivalSample& s, EstimateTable& t, const Stream& rng) const;

 private:
  double guard(double y) const;

  Graph g_;
  SelectionFunction c_;
  RecursiveParams p_;
};

// Recursive RCRS for edge arrivals (rank-1 / general / tree selection
// functions). Slots are edge ids.
class RecursiveEdgeRcrs {
 public:
  RecursiveEdgeRcrs(Graph g, SelectionFunction c, RecursiveParams p);

  const Graph& graph() const { return g_; }
  const SelectionFunction& selection() const { return c_; }
  const RecursiveParams& params() const { return p_; }

  EstimateTable make_table() const;
  double acceptance_probability(EdgeId e, double y, const EstimateTable& t) const;

  // Fraction of Q runs with Y_e ~ U(t_j,1] in which both endpoints of e are
  // unmatched at t_j.
  double estimate_safety(const EstimateTable& t, int j, EdgeId e, const Stream& rng) const;
  void fill_phase(EstimateTable& t, int j, const Stream& rng) const;
  EstimateTable build_tables(const Stream& rng) const;

  Matching run(const ArrivalSample& s, const EstimateTable& t, std::span<const double> coins,
               double horizon = 1.0) const;
  void run_into(const ArrivalSample& s, const EstimateTable& t, std::span<const double> coins, double horizon,
                Matching& out) const;
  Matching run(const ArrivalSample& s, EstimateTable& t, const Stream& rng) const;

 private:
  double guard(double y) const;

  Graph g_;
  SelectionFunction c_;
  RecursiveParams p_;
};

// Rank-1 closed form on a star with Σx = 1: the first active element at
// time y whose coin passes Bernoulli(e^{-y·x_e}) is accepted.
class Rank1ClosedForm {
 public:
  explicit Rank1ClosedForm(Graph g);
  const Graph& graph() const { return g_; }

  Matching run(const ArrivalSample& s, std::span<const double> coins) const;
  void run_into(const ArrivalSample& s, std::span<const double> coins, Matching& out) const;
  Matching run(const ArrivalSample& s, const Stream& rng) const;

 private:
  Graph g_;
};

}  // namespace rcrs
