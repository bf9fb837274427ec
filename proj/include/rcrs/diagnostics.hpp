#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rcrs/arrival.hpp"
#include "rcrs/graph.hpp"
#include "rcrs/matching.hpp"
#include "rcrs/parallel.hpp"
#include "rcrs/recursive_rcrs.hpp"
#include "rcrs/rng.hpp"
#include "rcrs/stats.hpp"

namespace rcrs {

using VertexPath = std::vector<VertexId>;

// Two executions of the recursive vertex RCRS up to the horizon t_k on the
// same sample and coins: `usual` on G, `parallel` on G minus v (choices
// F_w = v read as ⊥).
struct CoupledRun {
  VertexId u = kNoVertex;
  VertexId v = kNoVertex;
  double horizon = 1.0;
  ArrivalSample sample;
  std::vector<double> coins;
  Matching usual;
  Matching parallel;

  bool m_u = false;                // M_u(t_k)
  bool m_u_minus = false;          // M_u^{-v}(t_k)
  bool minus_selected_by = false;  // Σ_{w≠v} M^{-v}_{w→u}(t_k)
  bool minus_selects = false;      // Σ_{w≠v} M^{-v}_{u→w}(t_k)
};

// Throws std::invalid_argument if u == v or (u,v) is not an edge.
CoupledRun coupled_run(const RecursiveVertexRcrs& scheme, const EstimateTable& table, VertexId u, VertexId v,
                       double t_k, const Stream& rng, std::span<const TimeConstraint> constraints = {});

// Same, on a given sample and coins.
CoupledRun coupled_run(const RecursiveVertexRcrs& scheme, const EstimateTable& table, ArrivalSample sample,
                       std::vector<double> coins, VertexId u, VertexId v, double t_k);

// Edge e survives if its later endpoint w2 chose the earlier one and its
// A bit passed (coin < acceptance probability at Y_{w2}).
bool edge_survives(const RecursiveVertexRcrs& scheme, const EstimateTable& table, const ArrivalSample& s,
                   std::span<const double> coins, EdgeId e);

// All paths v = v1,…,vd (d even, u not on the path) with potential:
// F_u = vd, F_{vi} = v_{i-1} for i >= 3, and F_{v1} = v2 or F_{v2} = v1.
// Found by following the functional chain u → F_u → F_{F_u} → …
// Shortest first.
std::vector<VertexPath> potential_paths(const Graph& g, const ArrivalSample& s, VertexId u, VertexId v);

// First element of potential_paths, if any.
std::optional<VertexPath> detect_potential_path(const Graph& g, const ArrivalSample& s, VertexId u, VertexId v);

// All path times before Y_u, ordered Y_{v1}<…<Y_{vd} or
// Y_{v2}<Y_{v1}<Y_{v3}<…<Y_{vd}.
bool check_badly_ordered(const ArrivalSample& s, std::span<const VertexId> path, VertexId u);

// Depth-first search for a flipping sequence for u via v: an even-vertex
// path from v to F_u of surviving edges with increasing arrival times, all
// vertices before Y_u.
std::optional<VertexPath> find_flipping_sequence(const RecursiveVertexRcrs& scheme, const EstimateTable& table,
                                                 const ArrivalSample& s, std::span<const double> coins, VertexId u,
                                                 VertexId v);

struct FlippingReport {
  std::optional<VertexPath> potential_path;
  int potential_paths = 0;
  bool badly_ordered = false;  // some potential path is badly ordered
  bool flipping = false;
  std::optional<VertexPath> flipping_path;
  // M_u^{-v} − M_u > 1_B
  bool indicator_violation = false;
  // Σ_{w≠v} M^{-v}_{w→u} > M_u
  bool unconditional_violation = false;
  // flipping without the flipping path being a badly ordered potential path
  bool implication_violation = false;
};

FlippingReport analyze_coupled_run(const RecursiveVertexRcrs& scheme, const EstimateTable& table,
                                   const CoupledRun& run);

// (1/t_k)∫_0^{t_k} 2y^{g-1}/(g-1)! dy = 2 t_k^{g-1}/g!, zero for infinite g.
double correlation_gap_bound(OddGirth g, double t_k);

struct GapEstimate {
  double t_k = 0.0;
  std::int64_t trials = 0;
  double bound = 0.0;
  // Common random numbers: mean of M_u^{-v} − M_u given Y_u < t_k.
  double gap = 0.0;
  double sigma = 0.0;
  // Reweighting on Y_v: E[M_u | Y_u<t_k<Y_v] − E[M_u | Y_u<t_k] from the same pool.
  double gap_reweighted = 0.0;
  double sigma_reweighted = 0.0;
  std::int64_t indicator_violations = 0;
  std::int64_t unconditional_violations = 0;
  std::int64_t implication_violations = 0;
  std::int64_t coupling_mismatches = 0;  // Y_v > t_k but the runs differ
  std::int64_t flipping_events = 0;
  std::int64_t potential_path_samples = 0;
  int max_potential_paths = 0;

  bool within_bound(double z = 3.0) const { return gap <= bound + z * sigma; }
  bool invariants_ok() const {
    return indicator_violations == 0 && unconditional_violations == 0 && implication_violations == 0 &&
           coupling_mismatches == 0;
  }
};

// Trials sample Y_u ~ U[0, t_k); trial i uses rng.derive(kCoupled, i).
GapEstimate correlation_gap(const RecursiveVertexRcrs& scheme, const EstimateTable& table, VertexId u, VertexId v,
                            double t_k, std::int64_t trials, const Stream& rng, unsigned threads = worker_count());

// m(s) = (e^{-s} + s - 1)/2
double hardness_curve(double s);

enum class HardnessAlgorithm { kGreedy, kTwoPhase };

struct HardnessParams {
  int n = 500;
  HardnessAlgorithm algorithm = HardnessAlgorithm::kGreedy;
  double t = 0.0;  // two-phase threshold
  std::int64_t trials = 50;
  double q_horizon = 1.9;  // Q_t checked for t <= q_horizon·n
  int drift_buckets = 20;
};

struct TrajectoryPoint {
  int t;
  double mean;        // mean M(t)/n
  double curve;       // m(t/n)
  double q_frequency; // fraction of trials where Q_t holds
};

// ΔM(t) − (1+n^{-1/3})(t/2n − M(t)/n) on rounds where Q_t holds, pooled
// over a range of t.
struct DriftBucket {
  int t_begin;
  int t_end;
  MeanAccumulator excess;
};

struct HardnessReport {
  int n = 0;
  std::int64_t trials = 0;
  std::vector<TrajectoryPoint> points;  // t = 0..2n
  MeanAccumulator final_value;          // M(2n)/n
  double sup_distance = 0.0;            // max_t |mean M(t)/n − m(t/n)|
  double q_all_frequency = 0.0;         // trials with Q_t for every t <= q_horizon·n
  double q_mean_frequency = 0.0;        // Q_t frequency averaged over those t
  double q_min_frequency = 0.0;         // smallest per-t Q_t frequency over those t
  int q_min_t = 0;
  std::vector<DriftBucket> drift;
};

// Vertex arrivals on K_{n,n} with x = 1/n; trial i uses rng.derive(kTrial, i).
HardnessReport hardness_trajectory(const HardnessParams& p, const Stream& rng, unsigned threads = worker_count());

}  // namespace rcrs
