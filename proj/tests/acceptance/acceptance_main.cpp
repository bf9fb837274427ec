// Acceptance run: one PASS/FAIL line per criterion, sub-checks indented.
// Usage: acceptance [report-dir]
//        acceptance --print-suite   (harness experiments as a suite config)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcrs/arrival.hpp"
#include "rcrs/generators.hpp"
#include "rcrs/harness.hpp"
#include "rcrs/selection.hpp"
#include "rcrs/two_phase.hpp"

using namespace rcrs;
using nlohmann::json;

namespace {

// Tolerances.
constexpr double kAlphaExactTol = 1e-12;
constexpr double kAlphaNumericTol = 1e-9;
constexpr double kSelectionSlackTol = 1e-8;
constexpr int kSelectionGrid = 1000;
constexpr double kRank1Tol = 0.005;
constexpr double kTreeTol = 0.01;
constexpr double kDoubleStarTol = 0.02;
constexpr double kSigma = 3.0;
constexpr double kDelta = 0.05;
constexpr double kT0Residual = 1e-12;
constexpr double kPolyTol = 1e-12;
constexpr double kHalfTol = 0.01;
constexpr double kVanishingMin = 0.530;
constexpr double kHardnessFinalTol = 0.01;
constexpr double kHardnessSupTol = 0.02;
constexpr double kQFrequency = 0.99;

struct Check {
  bool ok;
  std::string what;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::vector<Check> checks;
  std::vector<ExperimentConfig> suite;  // harness experiments, re-run for determinism
  std::vector<ExperimentResult> results;
  double seconds = 0.0;
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

ExperimentConfig experiment(const json& j) { return parse_experiment_text(j.dump(), j.value("name", "experiment")); }

void add_results(Criterion& c, const std::vector<ExperimentResult>& results) {
  for (const ExperimentResult& r : results) {
    for (const AssertResult& a : r.asserts) c.checks.push_back({a.passed, r.name + " " + a.type + ": " + a.detail});
  }
  c.results = results;
}

void run_harness(Criterion& c, const std::string& out_dir) {
  if (c.suite.empty()) return;
  SuiteConfig s;
  s.output_dir = out_dir;
  s.experiments = c.suite;
  add_results(c, run_suite(s).results);
}

// Exact values of α_g.
double alpha_exact(int g) {
  const double e2 = std::exp(-2.0);
  switch (g) {
    case 3: return 5.0 / 12 + e2 / 4;
    case 5: return 121.0 / 240 + 7 * e2 / 16;
    case 7: return 10121.0 / 20160 + 31 * e2 / 64;
    default: return (1 + e2) / 2;
  }
}

OddGirth girth_of(int g) { return g == 0 ? OddGirth::infinite() : OddGirth::finite(g); }

void criterion_alpha(Criterion& c) {
  double prev = 0.0;
  for (int g : {3, 5, 7, 0}) {
    const OddGirth og = girth_of(g);
    const double exact = alpha_exact(g);
    const double closed = alpha_closed_form(og);
    const double numeric = alpha_numeric(og);
    c.checks.push_back({std::fabs(closed - exact) <= kAlphaExactTol,
                        "g=" + og.to_string() + ": closed form " + num(closed, 15) + ", |diff| " +
                            num(std::fabs(closed - exact), 3)});
    c.checks.push_back({std::fabs(numeric - exact) <= kAlphaNumericTol,
                        "g=" + og.to_string() + ": numeric |diff| " + num(std::fabs(numeric - exact), 3)});
    if (g != 3) c.checks.push_back({closed > prev, "g=" + og.to_string() + ": increasing"});
    prev = closed;
  }
}

void criterion_selection(Criterion& c) {
  for (int g : {3, 5, 7, 0}) {
    const OddGirth og = girth_of(g);
    const SelectionVerification v = verify_selection_conditions(SelectionFunction::vertex(og), og, kSelectionGrid);
    c.checks.push_back({v.ok() && v.max_abs_slack <= kSelectionSlackTol,
                        "g=" + og.to_string() + ": conditions " + (v.ok() ? "hold" : "violated") +
                            ", equality slack " + num(v.max_abs_slack, 3)});
  }
}

void criterion_rank1(Criterion& c) {
  // 10 bins x 2 identities at 3σ each: about 5% family-wise false alarms.
  const double target = 1 - std::exp(-1.0);
  c.suite.push_back(experiment({
      {"name", "c3_rank1_star4"},
      {"kind", "profile"},
      {"instance", {{"family", "star"}, {"k", 4}}},
      {"scheme", {{"type", "rank1-closed"}}},
      {"trials", 1000000},
      {"seed", 301},
      {"bins", 10},
      {"asserts",
       {{{"type", "ratio_within"}, {"value", target}, {"tolerance", kRank1Tol}},
        {{"type", "profile_pass"}, {"sigma", kSigma}},
        {{"type", "safety_pass"}, {"sigma", kSigma}}}},
  }));
}

void criterion_edge(Criterion& c) {
  const double middle = (1 - std::exp(-2.0)) / 2;
  c.suite.push_back(experiment({
      {"name", "c4_tree"},
      {"instance", {{"family", "random_tree"}, {"k", 15}, {"seed", 7}}},
      {"scheme", {{"type", "recursive-edge"}, {"edge_kind", "tree"}, {"T", 100}, {"delta", 0}, {"Q", 20000}, {"guard", "off"}}},
      {"trials", 1000000},
      {"seed", 401},
      {"asserts", {{{"type", "ratio_within"}, {"value", 0.5}, {"tolerance", kTreeTol}}}},
  }));
  c.suite.push_back(experiment({
      {"name", "c4_double_star"},
      {"instance", {{"family", "double_star"}, {"n", 8}}},
      {"scheme", {{"type", "recursive-edge"}, {"edge_kind", "general"}, {"T", 100}, {"delta", 0}, {"Q", 20000}, {"guard", "off"}}},
      {"trials", 1000000},
      {"seed", 402},
      {"asserts", {{{"type", "ratio_within"}, {"value", middle}, {"tolerance", kDoubleStarTol}, {"edges", {0}}}}},
  }));
}

void criterion_recursive(Criterion& c) {
  const double shrink = (1 - kDelta) * (1 - kDelta);
  struct Case {
    std::string name;
    json instance;
    int g;
  };
  for (const Case& k : {Case{"c5_k66", {{"family", "complete_bipartite"}, {"n", 6}}, 0},
                        Case{"c5_c5", {{"family", "odd_cycle"}, {"g", 5}}, 5}}) {
    c.suite.push_back(experiment({
        {"name", k.name},
        {"kind", "profile"},
        {"instance", k.instance},
        {"scheme", {{"type", "recursive-vertex"}, {"g", k.g == 0 ? json("inf") : json(k.g)}, {"T", 20}, {"delta", kDelta}, {"guard", "off"}}},
        {"trials", 100000},
        {"seed", 501},
        {"bins", 20},
        {"asserts",
         {{{"type", "min_ratio_at_least"}, {"value", shrink * alpha_closed_form(girth_of(k.g))}, {"sigma", kSigma}},
          {{"type", "profile_pass"}, {"sigma", kSigma}}}},
    }));
  }
}

// Independent t0: Newton on the coefficient list in long double.
long double t0_oracle() {
  const long double co[] = {-1, -4, 80, 180, 100, 16, 4};  // ascending
  long double t = 0.12L;
  for (int it = 0; it < 60; ++it) {
    long double p = 0, dp = 0;
    for (int i = 6; i >= 0; --i) {
      dp = dp * t + p;
      p = p * t + co[i];
    }
    t -= p / dp;
  }
  return t;
}

long double guarantee_oracle(long double t) {
  return (16 + 5 * t * t - 10 * t * t * t + 4 * t * t * t * t * t) / 30;
}

void criterion_two_phase(Criterion& c) {
  const double t0 = find_t0();
  const long double t0o = t0_oracle();
  const double tv = (std::numbers::sqrt3 - 1) / 2;
  c.checks.push_back({t0 > 0.118 && t0 < 0.120 && std::fabs(t0_polynomial(t0)) <= kT0Residual,
                      "t0 = " + num(t0, 15) + ", residual " + num(std::fabs(t0_polynomial(t0)), 3)});
  c.checks.push_back({std::fabs(static_cast<long double>(t0) - t0o) <= 1e-12L, "t0 agrees with Newton oracle"});
  const double g0 = guarantee_poly(0.0), gt0 = guarantee_poly(t0), gv = guarantee_poly(tv);
  c.checks.push_back({std::fabs(g0 - 8.0 / 15) <= kPolyTol, "guarantee(0) = " + num(g0, 15)});
  c.checks.push_back({std::fabs(gt0 - static_cast<double>(guarantee_oracle(t0o))) <= kPolyTol &&
                          std::fabs(gt0 - 0.535) < 5e-4,
                      "guarantee(t0) = " + num(gt0, 15)});
  c.checks.push_back({std::fabs(gv - static_cast<double>(guarantee_oracle(tv))) <= kPolyTol &&
                          std::fabs(gv - 0.540) < 5e-4,
                      "guarantee((sqrt3-1)/2) = " + num(gv, 15)});

  auto sim = [&](const std::string& name, json instance, double t, long trials, json asserts) {
    c.suite.push_back(experiment({
        {"name", name},
        {"instance", instance},
        {"scheme", {{"type", "two-phase"}, {"t", t}}},
        {"trials", trials},
        {"seed", 601},
        {"asserts", asserts},
    }));
  };
  const json k31 = {{"family", "complete"}, {"n", 31}};
  sim("c6_k31_t0", k31, t0, 100000, {{{"type", "min_ratio_at_least"}, {"value", gt0}, {"sigma", kSigma}}});
  sim("c6_k88_t1", {{"family", "complete_bipartite"}, {"n", 8}}, 1.0, 1000000,
      {{{"type", "ratio_within"}, {"value", 0.5}, {"tolerance", kHalfTol}}});
  sim("c6_k31_t1", k31, 1.0, 1000000, {{{"type", "ratio_within"}, {"value", 0.5}, {"tolerance", kHalfTol}}});
  sim("c6_k31_tzero", k31, 0.0, 100000, {{{"type", "min_ratio_at_least"}, {"value", 8.0 / 15}, {"sigma", kSigma}}});
  sim("c6_k61_vanishing", {{"family", "complete"}, {"n", 61}}, tv, 2000000,
      {{{"type", "min_ratio_at_least"}, {"value", kVanishingMin}, {"sigma", 0}}});
}

// Phase-1 selections of u0 -> u1 on K_5 with u0 pinned before t, u1 before
// u0 and the other vertices pinned. Returns the hit count.
long ezra_hits(const std::vector<double>& pins, long trials, std::uint64_t seed) {
  const Graph g = generate({.family = "complete", .n = 5});
  const double t = 0.5, y0 = 0.4;
  const TwoPhaseRcrs r(g, t);
  std::vector<TimeConstraint> cs = {TimeConstraint::pinned(0, y0), TimeConstraint::before(1, y0)};
  for (int k = 0; k < 3; ++k) cs.push_back(TimeConstraint::pinned(2 + k, pins[static_cast<std::size_t>(k)]));
  const Stream root(seed);
  long hits = 0;
  for (long i = 0; i < trials; ++i) {
    const Stream st = root.derive(Purpose::kTrial, static_cast<std::uint64_t>(i));
    const ArrivalSample s = sample_vertex_arrivals(g, st, cs);
    const Matching m = r.run(s, st);
    for (const AcceptedEdge& a : m.accepted) hits += a.proposer == 0 && g.edge(a.edge).other(0) == 1;
  }
  return hits;
}

const std::vector<std::vector<double>> kEzraPins = {{0.05, 0.2, 0.35}, {0.3, 0.6, 0.9}, {0.39, 0.01, 0.7}};
constexpr long kEzraTrials = 400000;
constexpr std::uint64_t kEzraSeed = 701;

std::vector<long> ezra_counts() {
  std::vector<long> out;
  for (const auto& pins : kEzraPins) out.push_back(ezra_hits(pins, kEzraTrials, kEzraSeed));
  return out;
}

std::vector<long> g_ezra_first;

void criterion_ezra(Criterion& c) {
  const double target = survival_prob(0.25, 0.5) / 2;
  const double sigma = std::sqrt(target * (1 - target) / kEzraTrials);
  g_ezra_first = ezra_counts();
  for (std::size_t i = 0; i < kEzraPins.size(); ++i) {
    const double freq = static_cast<double>(g_ezra_first[i]) / kEzraTrials;
    c.checks.push_back({std::fabs(freq - target) <= kSigma * sigma,
                        "config " + std::to_string(i) + ": frequency " + num(freq) + " vs f_t(x)/2 = " + num(target) +
                            " (3σ = " + num(kSigma * sigma, 3) + ")"});
  }
}

void criterion_coupling(Criterion& c) {
  struct Case {
    std::string name;
    json instance;
    int g;
  };
  for (const Case& k : {Case{"c8_c5", {{"family", "odd_cycle"}, {"g", 5}}, 5},
                        Case{"c8_k33", {{"family", "complete_bipartite"}, {"n", 3}}, 0},
                        Case{"c8_c4", {{"family", "complete_bipartite"}, {"n", 2}}, 0}}) {
    c.suite.push_back(experiment({
        {"name", k.name},
        {"kind", "gap"},
        {"instance", k.instance},
        {"scheme", {{"type", "recursive-vertex"}, {"g", k.g == 0 ? json("inf") : json(k.g)}, {"T", 20}, {"delta", kDelta}}},
        {"trials", 100000},
        {"seed", 801},
        {"t_k", {0.25, 0.5, 0.9}},
        {"asserts",
         {{{"type", "coupling_invariants"}},
          {{"type", "potential_paths_at_most"}, {"value", 1}},
          {{"type", "gap_within_bound"}, {"sigma", kSigma}}}},
    }));
  }
}

void criterion_hardness(Criterion& c) {
  c.suite.push_back(experiment({
      {"name", "c9_hardness"},
      {"kind", "hardness"},
      {"n", 500},
      {"trials", 50},
      {"seed", 901},
      {"q_horizon", 1.9},
      {"asserts",
       {{{"type", "final_within"}, {"value", hardness_curve(2.0)}, {"tolerance", kHardnessFinalTol}},
        {{"type", "sup_distance_at_most"}, {"value", kHardnessSupTol}},
        {{"type", "q_frequency_at_least"}, {"value", kQFrequency}}}},
  }));
}

void criterion_determinism(Criterion& c, const std::vector<Criterion>& done) {
  for (const Criterion& prev : done) {
    if (prev.suite.empty()) continue;
    SuiteConfig s;
    s.experiments = prev.suite;
    // A different worker count must not change a byte.
    const SuiteResult again = run_suite(s, false, 3);
    for (std::size_t i = 0; i < prev.results.size(); ++i) {
      const bool same = again.results[i].csv == prev.results[i].csv;
      std::size_t bytes = 0;
      for (const auto& [_, text] : prev.results[i].csv) bytes += text.size();
      c.checks.push_back({same, prev.results[i].name + ": " + std::to_string(bytes) + " CSV bytes " +
                                    (same ? "identical" : "DIFFER")});
    }
  }
  const bool same = ezra_counts() == g_ezra_first;
  c.checks.push_back({same, std::string("ezra counts ") + (same ? "identical" : "DIFFER")});
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "acceptance_reports";

  std::vector<Criterion> criteria = {
      {1, "alpha identities", 1.0, {}, {}, {}},
      {2, "selection-function certificate", 10.0, {}, {}, {}},
      {3, "rank-1 closed form", 60.0, {}, {}, {}},
      {4, "edge-arrival framework", 300.0, {}, {}, {}},
      {5, "recursive vertex RCRS", 1800.0, {}, {}, {}},
      {6, "two-phase RCRS", 900.0, {}, {}, {}},
      {7, "phase-1 exactness", 300.0, {}, {}, {}},
      {8, "coupling diagnostics", 600.0, {}, {}, {}},
      {9, "hardness trajectory", 300.0, {}, {}, {}},
      {10, "determinism", 0.0, {}, {}, {}},
  };
  const std::vector<std::function<void(Criterion&)>> build = {
      criterion_alpha, criterion_selection, criterion_rank1,  criterion_edge,     criterion_recursive,
      criterion_two_phase, criterion_ezra,  criterion_coupling, criterion_hardness,
  };

  if (out_dir == "--print-suite") {
    json suite = {{"output_dir", "acceptance_reports"}, {"experiments", json::array()}};
    for (std::size_t i : {2, 3, 4, 5, 7, 8}) {
      build[i](criteria[i]);
      for (const ExperimentConfig& e : criteria[i].suite) suite["experiments"].push_back(json::parse(config_to_json(e)));
    }
    std::cout << suite.dump(2) << "\n";
    return 0;
  }

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Criterion& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    try {
      if (i < build.size()) {
        build[i](c);
        run_harness(c, out_dir);
      } else {
        criterion_determinism(c, std::vector<Criterion>(criteria.begin(), criteria.begin() + 9));
      }
    } catch (const std::exception& e) {
      c.checks.push_back({false, std::string("error: ") + e.what()});
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0) {
      c.checks.push_back({c.seconds <= c.limit_seconds,
                          "runtime " + num(c.seconds, 3) + " s, limit " + num(c.limit_seconds, 4) + " s"});
    }
    bool ok = !c.checks.empty();
    for (const Check& k : c.checks) ok = ok && k.ok;
    all = all && ok;
    std::cout << "criterion " << c.id << ": " << (ok ? "PASS" : "FAIL") << "  " << c.title << "\n";
    for (const Check& k : c.checks) std::cout << "    " << (k.ok ? "ok   " : "FAIL ") << k.what << "\n";
    std::cout.flush();
  }
  return all ? 0 : 1;
}
