#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcrs/diagnostics.hpp"
#include "rcrs/generators.hpp"
#include "rcrs/graph.hpp"
#include "rcrs/parallel.hpp"
#include "rcrs/recursive_rcrs.hpp"
#include "rcrs/selection.hpp"
#include "rcrs/stats.hpp"
#include "rcrs/two_phase.hpp"

namespace rcrs {

// Schema violation; the message starts with the offending field path,
// e.g. "experiments[0].scheme.t: not allowed for scheme rank1-closed".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SchemeType { kRecursiveVertex, kRecursiveEdge, kRank1Closed, kTwoPhase, kGreedy };

std::string to_string(SchemeType s);
SchemeType parse_scheme_type(const std::string& s);  // throws ConfigError

struct SchemeSpec {
  SchemeType type = SchemeType::kGreedy;
  OddGirth g = OddGirth::infinite();            // recursive-vertex
  EdgeKind edge_kind = EdgeKind::kEdgeGeneral;  // recursive-edge
  RecursiveParams recursive;                    // recursive-*
  double t = 0.0;                               // two-phase
};

// Exact-selection schemes have a target profile c(y).
bool is_exact_selection(SchemeType s);

enum class ExperimentKind { kSelectability, kProfile, kGap, kFlipping, kHardness, kBound };

std::string to_string(ExperimentKind k);

struct AssertSpec {
  std::string type;
  double value = 0.0;
  double tolerance = 0.0;
  double sigma = 3.0;
  std::vector<EdgeId> edges;  // empty: all edges
};

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::kSelectability;
  std::optional<InstanceSpec> instance;
  std::string graph_file;
  SchemeSpec scheme;
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  int bins = 20;
  std::optional<VertexId> u;  // gap, flipping, bound; defaults to edge 0
  std::optional<VertexId> v;
  std::vector<double> t_k{0.5};
  HardnessParams hardness;
  int points = 100;
  std::vector<AssertSpec> asserts;
};

struct SuiteConfig {
  std::string output_dir = ".";
  std::vector<ExperimentConfig> experiments;
};

// Parses one experiment object; `where` prefixes error messages.
ExperimentConfig parse_experiment_text(const std::string& json_text, const std::string& where = "experiment");
SuiteConfig parse_suite_text(const std::string& json_text);
SuiteConfig load_suite(const std::string& path);

// Normalized JSON of a config with every default resolved.
std::string config_to_json(const ExperimentConfig& cfg);

Graph build_instance(const ExperimentConfig& cfg);

struct EdgeStat {
  EdgeId edge;
  VertexId u;
  VertexId v;
  double x;
  std::int64_t active = 0;
  std::int64_t accepted = 0;

  double ratio() const { return active > 0 ? static_cast<double>(accepted) / static_cast<double>(active) : 0.0; }
  double sigma() const { return binomial_sigma(accepted, active); }
  Interval interval() const { return wilson_interval(accepted, active); }
};

// Active proposals binned by arrival time. Sums of the per-event targets
// give the expected rate under the scheme's exact-selection profile.
struct ProfileBin {
  double lo;
  double hi;
  std::int64_t active = 0;
  std::int64_t accepted = 0;
  std::int64_t safe = 0;      // all endpoints but the proposer unmatched at arrival
  double target_sum = 0.0;    // Σ c(y)
  double lower_sum = 0.0;     // Σ lower band at y
  double safe_target_sum = 0.0;

  static constexpr std::int64_t kMinEvents = 100;
  bool underpowered() const { return active < kMinEvents; }
  double rate() const { return active > 0 ? static_cast<double>(accepted) / static_cast<double>(active) : 0.0; }
  double sigma() const { return binomial_sigma(accepted, active); }
  double upper() const { return active > 0 ? target_sum / static_cast<double>(active) : 0.0; }
  double lower() const { return active > 0 ? lower_sum / static_cast<double>(active) : 0.0; }
  bool passes(double z = 3.0) const {
    return underpowered() || (rate() >= lower() - z * sigma() && rate() <= upper() + z * sigma());
  }
  double safe_rate() const { return active > 0 ? static_cast<double>(safe) / static_cast<double>(active) : 0.0; }
  double safe_target() const { return active > 0 ? safe_target_sum / static_cast<double>(active) : 0.0; }
  bool safe_passes(double z = 3.0) const {
    return underpowered() || std::abs(safe_rate() - safe_target()) <= z * binomial_sigma(safe, active);
  }
};

struct SimulationReport {
  std::int64_t trials = 0;
  std::vector<EdgeStat> edges;
  std::vector<ProfileBin> bins;
  bool has_profile = false;  // exact-selection scheme
  bool has_safety = false;   // rank-1 closed form
  double min_ratio = 0.0;
  EdgeId min_edge = kNoEdge;
  std::vector<EdgeId> insufficient;  // x > 0 but never active
};

SimulationReport estimate_selectability(const ExperimentConfig& cfg, unsigned threads = worker_count());
// Same run; throws ConfigError unless the scheme is an exact-selection scheme.
SimulationReport exact_selection_profile(const ExperimentConfig& cfg, unsigned threads = worker_count());

struct BoundReport {
  double t = 0.0;
  VertexId u0 = kNoVertex;
  VertexId u1 = kNoVertex;
  bool one_regular = false;
  BoundTable lower;  // ℓ = 4
  BoundTable upper;  // ℓ = 3
  double value = 0.0;      // a(x)(t²/2 + ∫ℒ(u0→u1) + ∫ℒ(u1→u0))
  double guarantee = 0.0;  // guarantee_poly(t)
};

BoundReport two_phase_bound(const ExperimentConfig& cfg);

// CSV writers. Each output starts with "# rcrs-lab <table> v1".
std::string format_number(double v);
std::string edges_csv(const SimulationReport& r);
std::string profile_csv(const SimulationReport& r);
std::string gap_csv(const std::vector<GapEstimate>& rows);
std::string trajectory_csv(const HardnessReport& r);
std::string drift_csv(const HardnessReport& r);
std::string bound_csv(const BoundReport& r);

struct AssertResult {
  std::string type;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string name;
  std::map<std::string, std::string> csv;  // file suffix ("", "_drift", …) -> content
  std::string json;                        // metadata, includes runtime
  std::vector<AssertResult> asserts;

  bool passed() const {
    for (const auto& a : asserts) {
      if (!a.passed) return false;
    }
    return true;
  }
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = worker_count());

struct SuiteResult {
  std::vector<ExperimentResult> results;
  bool passed() const {
    for (const auto& r : results) {
      if (!r.passed()) return false;
    }
    return true;
  }
};

// Runs every experiment and, if write_files, writes <name><suffix>.csv and
// <name>.json under output_dir. Throws std::runtime_error on unwritable paths.
SuiteResult run_suite(const SuiteConfig& suite, bool write_files = true, unsigned threads = worker_count());

}  // namespace rcrs
