#include "rcrs/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rcrs/graph_io.hpp"

namespace rcrs {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Names

std::string to_string(SchemeType s) {
  switch (s) {
    case SchemeType::kRecursiveVertex: return "recursive-vertex";
    case SchemeType::kRecursiveEdge: return "recursive-edge";
    case SchemeType::kRank1Closed: return "rank1-closed";
    case SchemeType::kTwoPhase: return "two-phase";
    case SchemeType::kGreedy: return "greedy";
  }
  return "?";
}

SchemeType parse_scheme_type(const std::string& s) {
  for (auto t : {SchemeType::kRecursiveVertex, SchemeType::kRecursiveEdge, SchemeType::kRank1Closed,
                 SchemeType::kTwoPhase, SchemeType::kGreedy}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown scheme '" + s +
                    "' (expected recursive-vertex, recursive-edge, rank1-closed, two-phase or greedy)");
}

bool is_exact_selection(SchemeType s) {
  return s == SchemeType::kRecursiveVertex || s == SchemeType::kRecursiveEdge || s == SchemeType::kRank1Closed;
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kSelectability: return "selectability";
    case ExperimentKind::kProfile: return "profile";
    case ExperimentKind::kGap: return "gap";
    case ExperimentKind::kFlipping: return "flipping";
    case ExperimentKind::kHardness: return "hardness";
    case ExperimentKind::kBound: return "bound";
  }
  return "?";
}

namespace {

const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::kRank1: return "rank1";
    case EdgeKind::kEdgeGeneral: return "general";
    case EdgeKind::kEdgeTree: return "tree";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Config parsing

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

void allow_only(const json& j, const std::string& where, const std::set<std::string>& keys, const std::string& why) {
  for (const auto& [k, _] : j.items()) {
    if (!keys.count(k)) fail(where + "." + k, why);
  }
}

std::int64_t get_int(const json& j, const std::string& where, std::int64_t min) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < min) fail(where, "must be >= " + std::to_string(min));
  return v;
}

std::uint64_t get_seed(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  fail(where, "expected a nonnegative 64-bit integer");
}

double get_real(const json& j, const std::string& where, double lo, double hi) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!(v >= lo && v <= hi)) fail(where, "must lie in [" + format_number(lo) + ", " + format_number(hi) + "]");
  return v;
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

OddGirth get_girth(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return OddGirth::parse(j.get<std::string>());
    if (j.is_number_integer()) return OddGirth::finite(j.get<int>());
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(where, "expected an odd integer >= 3 or \"inf\"");
}

InstanceSpec parse_instance(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  allow_only(j, where, {"family", "n", "k", "g", "x", "seed"}, "unknown instance field");
  if (!j.contains("family")) fail(where + ".family", "required");
  InstanceSpec s;
  s.family = get_string(j["family"], where + ".family");
  if (j.contains("n")) s.n = static_cast<int>(get_int(j["n"], where + ".n", 1));
  if (j.contains("k")) s.k = static_cast<int>(get_int(j["k"], where + ".k", 1));
  if (j.contains("g")) s.g = static_cast<int>(get_int(j["g"], where + ".g", 3));
  if (j.contains("x")) s.x = get_real(j["x"], where + ".x", 0.0, 1.0);
  if (j.contains("seed")) s.seed = get_seed(j["seed"], where + ".seed");
  try {
    (void)generate(s);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return s;
}

SchemeSpec parse_scheme(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  if (!j.contains("type")) fail(where + ".type", "required");
  SchemeSpec s;
  try {
    s.type = parse_scheme_type(get_string(j["type"], where + ".type"));
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind(where, 0) == 0) throw;
    fail(where + ".type", e.what());
  }
  std::set<std::string> keys{"type"};
  const bool recursive = s.type == SchemeType::kRecursiveVertex || s.type == SchemeType::kRecursiveEdge;
  if (recursive) keys.insert({"T", "delta", "Q", "guard"});
  if (s.type == SchemeType::kRecursiveVertex) keys.insert("g");
  if (s.type == SchemeType::kRecursiveEdge) keys.insert("edge_kind");
  if (s.type == SchemeType::kTwoPhase) keys.insert("t");
  allow_only(j, where, keys, "not allowed for scheme " + to_string(s.type));

  if (j.contains("g")) s.g = get_girth(j["g"], where + ".g");
  if (j.contains("edge_kind")) {
    const std::string k = get_string(j["edge_kind"], where + ".edge_kind");
    if (k == "rank1") {
      s.edge_kind = EdgeKind::kRank1;
    } else if (k == "general") {
      s.edge_kind = EdgeKind::kEdgeGeneral;
    } else if (k == "tree") {
      s.edge_kind = EdgeKind::kEdgeTree;
    } else {
      fail(where + ".edge_kind", "expected rank1, general or tree");
    }
  }
  if (j.contains("T")) s.recursive.phases = static_cast<int>(get_int(j["T"], where + ".T", 1));
  if (j.contains("delta")) {
    s.recursive.delta = get_real(j["delta"], where + ".delta", 0.0, 1.0);
    if (s.recursive.delta >= 1.0) fail(where + ".delta", "must be < 1");
  }
  if (j.contains("Q")) s.recursive.samples = get_int(j["Q"], where + ".Q", 1);
  if (recursive && s.recursive.delta == 0.0 && s.recursive.samples == 0) {
    fail(where + ".Q", "required when delta = 0");
  }
  if (j.contains("guard")) {
    const std::string g = get_string(j["guard"], where + ".guard");
    if (g == "on") {
      s.recursive.guard = DiscretizationGuard::kOn;
    } else if (g == "off") {
      s.recursive.guard = DiscretizationGuard::kOff;
    } else {
      fail(where + ".guard", "expected on or off");
    }
  }
  if (j.contains("t")) s.t = get_real(j["t"], where + ".t", 0.0, 1.0);
  return s;
}

const std::map<std::string, std::set<ExperimentKind>>& assert_kinds() {
  using K = ExperimentKind;
  static const std::map<std::string, std::set<ExperimentKind>> m = {
      {"min_ratio_at_least", {K::kSelectability, K::kProfile}},
      {"ratio_within", {K::kSelectability, K::kProfile}},
      {"profile_pass", {K::kProfile}},
      {"safety_pass", {K::kProfile}},
      {"gap_within_bound", {K::kGap}},
      {"coupling_invariants", {K::kGap, K::kFlipping}},
      {"potential_paths_at_most", {K::kGap, K::kFlipping}},
      {"final_within", {K::kHardness}},
      {"final_at_most", {K::kHardness}},
      {"sup_distance_at_most", {K::kHardness}},
      {"q_frequency_at_least", {K::kHardness}},
      {"drift_pass", {K::kHardness}},
      {"guarantee_at_least", {K::kBound}},
  };
  return m;
}

AssertSpec parse_assert(const json& j, const std::string& where, ExperimentKind kind) {
  if (!j.is_object()) fail(where, "expected an object");
  allow_only(j, where, {"type", "value", "tolerance", "sigma", "edges"}, "unknown assert field");
  if (!j.contains("type")) fail(where + ".type", "required");
  AssertSpec a;
  a.type = get_string(j["type"], where + ".type");
  const auto& kinds = assert_kinds();
  const auto it = kinds.find(a.type);
  if (it == kinds.end()) fail(where + ".type", "unknown assert '" + a.type + "'");
  if (!it->second.count(kind)) fail(where + ".type", "assert '" + a.type + "' does not apply to kind " + to_string(kind));
  const double big = std::numeric_limits<double>::max();
  if (j.contains("value")) a.value = get_real(j["value"], where + ".value", -big, big);
  if (j.contains("tolerance")) a.tolerance = get_real(j["tolerance"], where + ".tolerance", 0.0, big);
  if (j.contains("sigma")) a.sigma = get_real(j["sigma"], where + ".sigma", 0.0, big);
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) fail(where + ".edges", "expected an array of edge ids");
    for (std::size_t i = 0; i < j["edges"].size(); ++i) {
      a.edges.push_back(static_cast<EdgeId>(get_int(j["edges"][i], where + ".edges[" + std::to_string(i) + "]", 0)));
    }
  }
  return a;
}

ExperimentKind parse_kind(const json& j, const std::string& where) {
  const std::string k = get_string(j, where);
  for (auto kind : {ExperimentKind::kSelectability, ExperimentKind::kProfile, ExperimentKind::kGap,
                    ExperimentKind::kFlipping, ExperimentKind::kHardness, ExperimentKind::kBound}) {
    if (to_string(kind) == k) return kind;
  }
  fail(where, "unknown kind '" + k + "' (expected selectability, profile, gap, flipping, hardness or bound)");
}

ExperimentConfig parse_experiment(const json& j, const std::string& where) {
  using K = ExperimentKind;
  if (!j.is_object()) fail(where, "expected an object");
  ExperimentConfig c;
  if (j.contains("kind")) c.kind = parse_kind(j["kind"], where + ".kind");

  std::set<std::string> keys{"name", "kind", "seed", "asserts", "scheme", "trials"};
  switch (c.kind) {
    case K::kSelectability:
    case K::kProfile: keys.insert({"instance", "graph_file", "bins"}); break;
    case K::kGap: keys.insert({"instance", "graph_file", "u", "v", "t_k"}); break;
    case K::kFlipping: keys.insert({"instance", "graph_file", "u", "v", "t_k"}); break;
    case K::kHardness: keys.insert({"n", "q_horizon", "drift_buckets"}); break;
    case K::kBound:
      keys.insert({"instance", "graph_file", "u", "v", "points"});
      keys.erase("trials");
      break;
  }
  allow_only(j, where, keys, "not allowed for kind " + to_string(c.kind));

  if (j.contains("name")) {
    c.name = get_string(j["name"], where + ".name");
    if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) {
      fail(where + ".name", "must be a nonempty file stem without path separators");
    }
  }
  if (j.contains("seed")) c.seed = get_seed(j["seed"], where + ".seed");

  if (c.kind != K::kHardness) {
    const bool has_inst = j.contains("instance"), has_file = j.contains("graph_file");
    if (has_inst == has_file) fail(where + ".instance", "exactly one of instance or graph_file is required");
    if (has_inst) c.instance = parse_instance(j["instance"], where + ".instance");
    if (has_file) c.graph_file = get_string(j["graph_file"], where + ".graph_file");
  }

  if (!j.contains("scheme")) {
    if (c.kind != K::kHardness) fail(where + ".scheme", "required");
  } else {
    c.scheme = parse_scheme(j["scheme"], where + ".scheme");
  }
  const SchemeType st = c.scheme.type;
  if (c.kind == K::kProfile && !is_exact_selection(st)) {
    fail(where + ".scheme.type", "profile needs an exact-selection scheme (recursive-vertex, recursive-edge, rank1-closed)");
  }
  if ((c.kind == K::kGap || c.kind == K::kFlipping) && st != SchemeType::kRecursiveVertex) {
    fail(where + ".scheme.type", "coupling diagnostics need scheme recursive-vertex");
  }
  if (c.kind == K::kHardness && st != SchemeType::kGreedy && st != SchemeType::kTwoPhase) {
    fail(where + ".scheme.type", "hardness supports greedy or two-phase");
  }
  if (c.kind == K::kBound && st != SchemeType::kTwoPhase) fail(where + ".scheme.type", "bound needs scheme two-phase");

  if (c.kind == K::kHardness) c.trials = 50;
  if (j.contains("trials")) c.trials = get_int(j["trials"], where + ".trials", 1);
  if (j.contains("bins")) c.bins = static_cast<int>(get_int(j["bins"], where + ".bins", 1));
  if (j.contains("u")) c.u = static_cast<VertexId>(get_int(j["u"], where + ".u", 0));
  if (j.contains("v")) c.v = static_cast<VertexId>(get_int(j["v"], where + ".v", 0));
  if (c.u.has_value() != c.v.has_value()) fail(where + (c.u ? ".v" : ".u"), "u and v must be given together");
  if (j.contains("t_k")) {
    const json& t = j["t_k"];
    c.t_k.clear();
    if (c.kind == K::kFlipping) {
      c.t_k.push_back(get_real(t, where + ".t_k", 0.0, 1.0));
    } else {
      if (!t.is_array() || t.empty()) fail(where + ".t_k", "expected a nonempty array of times");
      for (std::size_t i = 0; i < t.size(); ++i) c.t_k.push_back(get_real(t[i], where + ".t_k[" + std::to_string(i) + "]", 0.0, 1.0));
    }
    for (std::size_t i = 0; i < c.t_k.size(); ++i) {
      if (c.t_k[i] <= 0.0) fail(where + ".t_k", "times must be > 0");
    }
  } else if (c.kind == K::kFlipping) {
    c.t_k = {1.0};
  }
  if (c.kind == K::kHardness) {
    if (!j.contains("n")) fail(where + ".n", "required");
    c.hardness.n = static_cast<int>(get_int(j["n"], where + ".n", 1));
    c.hardness.trials = c.trials;
    c.hardness.algorithm = st == SchemeType::kTwoPhase ? HardnessAlgorithm::kTwoPhase : HardnessAlgorithm::kGreedy;
    c.hardness.t = c.scheme.t;
    if (j.contains("q_horizon")) c.hardness.q_horizon = get_real(j["q_horizon"], where + ".q_horizon", 0.0, 2.0);
    if (j.contains("drift_buckets")) {
      c.hardness.drift_buckets = static_cast<int>(get_int(j["drift_buckets"], where + ".drift_buckets", 1));
    }
  }
  if (j.contains("points")) c.points = static_cast<int>(get_int(j["points"], where + ".points", 1));

  if (j.contains("asserts")) {
    if (!j["asserts"].is_array()) fail(where + ".asserts", "expected an array");
    for (std::size_t i = 0; i < j["asserts"].size(); ++i) {
      c.asserts.push_back(parse_assert(j["asserts"][i], where + ".asserts[" + std::to_string(i) + "]", c.kind));
    }
  }
  return c;
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(where, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

ExperimentConfig parse_experiment_text(const std::string& json_text, const std::string& where) {
  return parse_experiment(parse_json(json_text, where), where);
}

SuiteConfig parse_suite_text(const std::string& json_text) {
  const json j = parse_json(json_text, "suite");
  if (!j.is_object()) fail("suite", "top level must be an object");
  allow_only(j, "suite", {"output_dir", "experiments"}, "unknown suite field");
  SuiteConfig s;
  if (j.contains("output_dir")) s.output_dir = get_string(j["output_dir"], "output_dir");
  if (!j.contains("experiments")) fail("experiments", "required");
  if (!j["experiments"].is_array()) fail("experiments", "expected an array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < j["experiments"].size(); ++i) {
    const std::string where = "experiments[" + std::to_string(i) + "]";
    s.experiments.push_back(parse_experiment(j["experiments"][i], where));
    if (!names.insert(s.experiments.back().name).second) fail(where + ".name", "duplicate experiment name");
  }
  return s;
}

SuiteConfig load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_suite_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["kind"] = to_string(c.kind);
  j["seed"] = c.seed;
  if (c.instance) {
    json in;
    in["family"] = c.instance->family;
    if (c.instance->n) in["n"] = *c.instance->n;
    if (c.instance->k) in["k"] = *c.instance->k;
    if (c.instance->g) in["g"] = *c.instance->g;
    if (c.instance->x) in["x"] = *c.instance->x;
    if (c.instance->seed) in["seed"] = *c.instance->seed;
    j["instance"] = in;
  }
  if (!c.graph_file.empty()) j["graph_file"] = c.graph_file;
  json s;
  s["type"] = to_string(c.scheme.type);
  switch (c.scheme.type) {
    case SchemeType::kRecursiveVertex:
    case SchemeType::kRecursiveEdge:
      if (c.scheme.type == SchemeType::kRecursiveVertex) {
        s["g"] = c.scheme.g.to_string();
      } else {
        s["edge_kind"] = edge_kind_name(c.scheme.edge_kind);
      }
      s["T"] = c.scheme.recursive.phases;
      s["delta"] = c.scheme.recursive.delta;
      if (c.scheme.recursive.samples > 0) s["Q"] = c.scheme.recursive.samples;  // else derived per instance
      s["guard"] = c.scheme.recursive.guard == DiscretizationGuard::kOn ? "on" : "off";
      break;
    case SchemeType::kTwoPhase: s["t"] = c.scheme.t; break;
    default: break;
  }
  j["scheme"] = s;
  switch (c.kind) {
    case ExperimentKind::kSelectability:
    case ExperimentKind::kProfile:
      j["trials"] = c.trials;
      j["bins"] = c.bins;
      break;
    case ExperimentKind::kGap:
    case ExperimentKind::kFlipping:
      j["trials"] = c.trials;
      if (c.u) {
        j["u"] = *c.u;
        j["v"] = *c.v;
      }
      if (c.kind == ExperimentKind::kFlipping) {
        j["t_k"] = c.t_k.front();
      } else {
        j["t_k"] = c.t_k;
      }
      break;
    case ExperimentKind::kHardness:
      j["trials"] = c.trials;
      j["n"] = c.hardness.n;
      j["q_horizon"] = c.hardness.q_horizon;
      j["drift_buckets"] = c.hardness.drift_buckets;
      break;
    case ExperimentKind::kBound:
      if (c.u) {
        j["u"] = *c.u;
        j["v"] = *c.v;
      }
      j["points"] = c.points;
      break;
  }
  json as = json::array();
  for (const auto& a : c.asserts) {
    json x{{"type", a.type}, {"value", a.value}, {"tolerance", a.tolerance}, {"sigma", a.sigma}};
    if (!a.edges.empty()) x["edges"] = a.edges;
    as.push_back(x);
  }
  j["asserts"] = as;
  return j.dump();
}

Graph build_instance(const ExperimentConfig& cfg) {
  if (cfg.instance) return generate(*cfg.instance);
  if (!cfg.graph_file.empty()) return load_graph(cfg.graph_file);
  throw ConfigError("experiment " + cfg.name + ": no instance");
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

// Per-trial runner plus the profile functions of the scheme.
struct Runner {
  ArrivalMode mode = ArrivalMode::kVertex;
  std::function<void(const ArrivalSample&, const Stream&, Matching&)> run;
  std::function<double(double)> target;             // c(y), empty if none
  std::function<double(double)> lower;              // lower band
  std::function<double(double, double)> safe_target;  // (y, x), rank-1 only
};

struct SchemeState {
  std::optional<RecursiveVertexRcrs> rv;
  std::optional<RecursiveEdgeRcrs> re;
  std::optional<Rank1ClosedForm> r1;
  std::optional<TwoPhaseRcrs> tp;
  std::optional<EstimateTable> table;
};

Runner make_runner(const ExperimentConfig& cfg, const Graph& g, SchemeState& st) {
  const SchemeSpec& s = cfg.scheme;
  const Stream tables = Stream(cfg.seed).derive(Purpose::kTables);
  Runner r;
  switch (s.type) {
    case SchemeType::kRecursiveVertex: {
      st.rv.emplace(g, SelectionFunction::vertex(s.g), s.recursive);
      st.table = st.rv->build_tables(tables);
      const auto* rv = &*st.rv;
      const auto* table = &*st.table;
      r.run = [rv, table, n = g.vertex_count()](const ArrivalSample& a, const Stream& rng, Matching& m) {
        const auto coins = draw_coins(n, rng.derive(Purpose::kCoins));
        rv->run_into(a, *table, coins, {}, m);
      };
      const double C = rv->selection().floor(), T = rv->params().phases, d = rv->params().delta;
      r.target = [rv](double y) { return rv->selection()(y); };
      r.lower = [rv, C, T, d](double y) { return (1 - d) / (1 + d) * (1 - 4 / (C * T * y)) * rv->selection()(y); };
      break;
    }
    case SchemeType::kRecursiveEdge: {
      st.re.emplace(g, SelectionFunction::edge(s.edge_kind), s.recursive);
      st.table = st.re->build_tables(tables);
      const auto* re = &*st.re;
      const auto* table = &*st.table;
      r.mode = ArrivalMode::kEdge;
      r.run = [re, table, m_edges = g.edge_count()](const ArrivalSample& a, const Stream& rng, Matching& m) {
        const auto coins = draw_coins(m_edges, rng.derive(Purpose::kCoins));
        re->run_into(a, *table, coins, 1.0, m);
      };
      const double C = re->selection().floor(), T = re->params().phases, d = re->params().delta;
      r.target = [re](double y) { return re->selection()(y); };
      r.lower = [re, C, T, d](double y) { return (1 - d) / (1 + d) * (1 - 2 / (C * T)) * re->selection()(y); };
      break;
    }
    case SchemeType::kRank1Closed: {
      st.r1.emplace(g);
      const auto* r1 = &*st.r1;
      r.mode = ArrivalMode::kEdge;
      r.run = [r1, m_edges = g.edge_count()](const ArrivalSample& a, const Stream& rng, Matching& m) {
        const auto coins = draw_coins(m_edges, rng.derive(Purpose::kCoins));
        r1->run_into(a, coins, m);
      };
      r.target = [](double y) { return std::exp(-y); };
      r.lower = r.target;
      r.safe_target = [](double y, double x) { return std::exp(-y * (1 - x)); };
      break;
    }
    case SchemeType::kTwoPhase: {
      st.tp.emplace(g, s.t);
      const auto* tp = &*st.tp;
      r.run = [tp](const ArrivalSample& a, const Stream& rng, Matching& m) {
        tp->run_into(a, draw_two_phase_coins(tp->graph().vertex_count(), rng.derive(Purpose::kCoins)), m);
      };
      break;
    }
    case SchemeType::kGreedy: {
      r.run = [&g](const ArrivalSample& a, const Stream&, Matching& m) { run_greedy_into(g, a, m); };
      break;
    }
  }
  return r;
}

struct SimAcc {
  std::vector<std::int64_t> active, accepted;
  std::vector<ProfileBin> bins;

  SimAcc(int edges, int nbins) : active(edges), accepted(edges) {
    for (int b = 0; b < nbins; ++b) bins.push_back({static_cast<double>(b) / nbins, static_cast<double>(b + 1) / nbins});
  }

  void merge(const SimAcc& o) {
    for (std::size_t e = 0; e < active.size(); ++e) {
      active[e] += o.active[e];
      accepted[e] += o.accepted[e];
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
      bins[b].active += o.bins[b].active;
      bins[b].accepted += o.bins[b].accepted;
      bins[b].safe += o.bins[b].safe;
      bins[b].target_sum += o.bins[b].target_sum;
      bins[b].lower_sum += o.bins[b].lower_sum;
      bins[b].safe_target_sum += o.bins[b].safe_target_sum;
    }
  }
};

SimulationReport simulate(const ExperimentConfig& cfg, unsigned threads) {
  if (cfg.trials < 1) throw ConfigError(cfg.name + ".trials: must be >= 1");
  if (cfg.bins < 1) throw ConfigError(cfg.name + ".bins: must be >= 1");
  const Graph g = build_instance(cfg);
  SchemeState state;
  const Runner runner = make_runner(cfg, g, state);
  const Stream root(cfg.seed);
  const int nbins = cfg.bins;
  const int E = g.edge_count();
  const int n = g.vertex_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  SimAcc acc = chunked_reduce<SimAcc>(
      cfg.trials, 4096,
      [&](std::int64_t begin, std::int64_t end) {
        SimAcc a(E, nbins);
        ArrivalSample s;
        Matching m;
        std::vector<double> matched_at(static_cast<std::size_t>(n));
        std::vector<std::uint8_t> took(static_cast<std::size_t>(E));
        auto record = [&](EdgeId e, double y, bool safe) {
          ++a.active[e];
          const bool ok = took[e] != 0;
          a.accepted[e] += ok;
          if (!runner.target) return;
          ProfileBin& b = a.bins[std::min(nbins - 1, static_cast<int>(y * nbins))];
          ++b.active;
          b.accepted += ok;
          b.safe += safe;
          b.target_sum += runner.target(y);
          b.lower_sum += runner.lower(y);
          if (runner.safe_target) b.safe_target_sum += runner.safe_target(y, g.edge(e).x);
        };
        for (std::int64_t i = begin; i < end; ++i) {
          const Stream st = root.derive(Purpose::kTrial, i);
          if (runner.mode == ArrivalMode::kVertex) {
            sample_vertex_arrivals_into(g, st, {}, s);
          } else {
            sample_edge_arrivals_into(g, st, {}, s);
          }
          runner.run(s, st, m);
          std::fill(matched_at.begin(), matched_at.end(), kInf);
          std::fill(took.begin(), took.end(), 0);
          for (const AcceptedEdge& ae : m.accepted) {
            took[ae.edge] = 1;
            matched_at[g.edge(ae.edge).u] = ae.time;
            matched_at[g.edge(ae.edge).v] = ae.time;
          }
          if (runner.mode == ArrivalMode::kVertex) {
            for (VertexId v = 0; v < n; ++v) {
              const VertexId u = s.choices[v];
              if (u == kNoVertex || !vertex_before(s, u, v)) continue;
              const double y = s.times[v];
              record(s.choice_edges[v], y, !(matched_at[u] < y));
            }
          } else {
            for (EdgeId e = 0; e < E; ++e) {
              if (!s.active[e]) continue;
              const double y = s.edge_times[e];
              record(e, y, !(matched_at[g.edge(e).u] < y) && !(matched_at[g.edge(e).v] < y));
            }
          }
        }
        return a;
      },
      threads);

  SimulationReport r;
  r.trials = cfg.trials;
  r.has_profile = static_cast<bool>(runner.target);
  r.has_safety = static_cast<bool>(runner.safe_target);
  r.min_ratio = std::numeric_limits<double>::infinity();
  for (EdgeId e = 0; e < E; ++e) {
    const Edge& ed = g.edge(e);
    r.edges.push_back({e, ed.u, ed.v, ed.x, acc.active[e], acc.accepted[e]});
    if (ed.x <= 0.0) continue;
    if (acc.active[e] == 0) {
      r.insufficient.push_back(e);
      continue;
    }
    if (r.edges.back().ratio() < r.min_ratio) {
      r.min_ratio = r.edges.back().ratio();
      r.min_edge = e;
    }
  }
  if (r.min_edge == kNoEdge) r.min_ratio = 0.0;
  if (r.has_profile) r.bins = std::move(acc.bins);
  return r;
}

}  // namespace

SimulationReport estimate_selectability(const ExperimentConfig& cfg, unsigned threads) {
  return simulate(cfg, threads);
}

SimulationReport exact_selection_profile(const ExperimentConfig& cfg, unsigned threads) {
  if (!is_exact_selection(cfg.scheme.type)) {
    throw ConfigError(cfg.name + ".scheme.type: " + to_string(cfg.scheme.type) + " is not an exact-selection scheme");
  }
  return simulate(cfg, threads);
}

namespace {

std::pair<VertexId, VertexId> pair_of(const ExperimentConfig& cfg, const Graph& g) {
  if (cfg.u) {
    if (!g.find_edge(*cfg.u, *cfg.v)) throw ConfigError(cfg.name + ".u: (u,v) is not an edge of the instance");
    return {*cfg.u, *cfg.v};
  }
  if (g.edge_count() == 0) throw ConfigError(cfg.name + ".instance: graph has no edges");
  return {g.edge(0).u, g.edge(0).v};
}

}  // namespace

BoundReport two_phase_bound(const ExperimentConfig& cfg) {
  const Graph g = build_instance(cfg);
  const auto [u0, u1] = pair_of(cfg, g);
  BoundReport r;
  r.t = cfg.scheme.t;
  r.u0 = u0;
  r.u1 = u1;
  r.one_regular = is_one_regular(g);
  r.lower = recursion_bound(g, r.t, u0, u1, 4, BoundDirection::kLower, cfg.points);
  r.upper = recursion_bound(g, r.t, u0, u1, 3, BoundDirection::kUpper, cfg.points);
  RecursionBound rb(g, r.t);
  const double x = g.edge(*g.find_edge(u0, u1)).x;
  r.value = prune_factor(x, r.t) * (r.t * r.t / 2 + rb.integral(u0, u1, 4) + rb.integral(u1, u0, 4));
  r.guarantee = guarantee_poly(r.t);
  return r;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::string& table, std::initializer_list<const char*> columns) {
    os_ << "# rcrs-lab " << table << " v1\n";
    bool first = true;
    for (const char* c : columns) {
      os_ << (first ? "" : ",") << c;
      first = false;
    }
    os_ << "\n";
  }

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << "\n";
  }

  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
  static std::string cell(I v) {
    return std::to_string(v);
  }

  std::ostringstream os_;
};

}  // namespace

std::string edges_csv(const SimulationReport& r) {
  CsvWriter w("edges", {"edge", "u", "v", "x", "active", "accepted", "ratio", "ratio_lo", "ratio_hi", "sigma",
                        "frequency", "frequency_over_x"});
  const double trials = static_cast<double>(r.trials);
  for (const EdgeStat& e : r.edges) {
    const Interval iv = e.interval();
    const double freq = static_cast<double>(e.accepted) / trials;
    w.row(e.edge, e.u, e.v, e.x, e.active, e.accepted, e.ratio(), iv.lo, iv.hi, e.sigma(), freq,
          e.x > 0 ? freq / e.x : 0.0);
  }
  return w.str();
}

std::string profile_csv(const SimulationReport& r) {
  CsvWriter w("profile", {"bin", "y_lo", "y_hi", "active", "accepted", "rate", "sigma", "band_lo", "band_hi", "status",
                          "safe_rate", "safe_target", "safe_status"});
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    const ProfileBin& p = r.bins[b];
    const std::string status = p.underpowered() ? "underpowered" : (p.passes() ? "pass" : "fail");
    std::string safe_status = "-";
    if (r.has_safety) safe_status = p.underpowered() ? "underpowered" : (p.safe_passes() ? "pass" : "fail");
    w.row(static_cast<int>(b), p.lo, p.hi, p.active, p.accepted, p.rate(), p.sigma(), p.lower(), p.upper(), status,
          p.safe_rate(), r.has_safety ? p.safe_target() : 0.0, safe_status);
  }
  return w.str();
}

std::string gap_csv(const std::vector<GapEstimate>& rows) {
  CsvWriter w("gap", {"t_k", "trials", "gap", "sigma", "gap_reweighted", "sigma_reweighted", "bound",
                      "indicator_violations", "unconditional_violations", "implication_violations",
                      "coupling_mismatches", "flipping_events", "potential_path_samples", "max_potential_paths"});
  for (const GapEstimate& e : rows) {
    w.row(e.t_k, e.trials, e.gap, e.sigma, e.gap_reweighted, e.sigma_reweighted, e.bound, e.indicator_violations,
          e.unconditional_violations, e.implication_violations, e.coupling_mismatches, e.flipping_events,
          e.potential_path_samples, e.max_potential_paths);
  }
  return w.str();
}

std::string trajectory_csv(const HardnessReport& r) {
  CsvWriter w("trajectory", {"t", "mean", "curve", "q_frequency"});
  for (const TrajectoryPoint& p : r.points) w.row(p.t, p.mean, p.curve, p.q_frequency);
  return w.str();
}

std::string drift_csv(const HardnessReport& r) {
  CsvWriter w("drift", {"t_begin", "t_end", "rounds", "mean_excess", "sigma"});
  for (const DriftBucket& b : r.drift) w.row(b.t_begin, b.t_end, b.excess.n, b.excess.mean, b.excess.std_error());
  return w.str();
}

std::string bound_csv(const BoundReport& r) {
  CsvWriter w("bound", {"y", "lower4", "upper3"});
  for (std::size_t i = 0; i < r.lower.y.size(); ++i) w.row(r.lower.y[i], r.lower.value[i], r.upper.value[i]);
  return w.str();
}

// ---------------------------------------------------------------------------
// Experiments and asserts

namespace {

std::string fmt(double v) { return format_number(v); }

AssertResult check_simulation(const AssertSpec& a, const SimulationReport& r) {
  AssertResult out{a.type, true, ""};
  auto scoped = [&](auto&& fn) {
    std::vector<EdgeId> ids = a.edges;
    if (ids.empty()) {
      for (const EdgeStat& e : r.edges) {
        if (e.x > 0.0) ids.push_back(e.edge);
      }
    }
    for (EdgeId id : ids) {
      if (id < 0 || id >= static_cast<EdgeId>(r.edges.size())) {
        out.passed = false;
        out.detail = "edge " + std::to_string(id) + " out of range";
        return;
      }
      const EdgeStat& e = r.edges[id];
      if (e.active == 0) {
        out.passed = false;
        out.detail = "edge " + std::to_string(id) + ": insufficient data (never active)";
        return;
      }
      fn(e);
    }
  };
  if (a.type == "min_ratio_at_least") {
    double worst = std::numeric_limits<double>::infinity();
    EdgeId at = kNoEdge;
    scoped([&](const EdgeStat& e) {
      const double slack = e.ratio() + a.sigma * e.sigma() - a.value;
      if (slack < worst) {
        worst = slack;
        at = e.edge;
      }
    });
    if (out.detail.empty()) {
      out.passed = worst >= 0.0;
      out.detail = "min over edges of ratio + " + fmt(a.sigma) + "σ − " + fmt(a.value) + " = " + fmt(worst) +
                   " (edge " + std::to_string(at) + ", min ratio " + fmt(r.min_ratio) + ")";
    }
  } else if (a.type == "ratio_within") {
    double worst = 0.0;
    EdgeId at = kNoEdge;
    scoped([&](const EdgeStat& e) {
      const double d = std::fabs(e.ratio() - a.value);
      if (at == kNoEdge || d > worst) {
        worst = d;
        at = e.edge;
      }
    });
    if (out.detail.empty()) {
      out.passed = worst <= a.tolerance;
      out.detail = "max |ratio − " + fmt(a.value) + "| = " + fmt(worst) + " (edge " + std::to_string(at) +
                   "), tolerance " + fmt(a.tolerance);
    }
  } else if (a.type == "profile_pass" || a.type == "safety_pass") {
    const bool safety = a.type == "safety_pass";
    if (safety && !r.has_safety) return {a.type, false, "scheme has no safety identity"};
    int fails = 0, powered = 0;
    for (const ProfileBin& b : r.bins) {
      if (b.underpowered()) continue;
      ++powered;
      fails += safety ? !b.safe_passes(a.sigma) : !b.passes(a.sigma);
    }
    out.passed = fails == 0 && powered > 0;
    out.detail = std::to_string(fails) + " of " + std::to_string(powered) + " powered bins outside the band";
  }
  return out;
}

AssertResult check_gap(const AssertSpec& a, const std::vector<GapEstimate>& rows) {
  AssertResult out{a.type, true, ""};
  std::ostringstream d;
  for (const GapEstimate& e : rows) {
    if (a.type == "gap_within_bound") {
      const bool ok = e.within_bound(a.sigma);
      out.passed = out.passed && ok;
      d << "t_k=" << fmt(e.t_k) << ": gap " << fmt(e.gap) << " ≤ " << fmt(e.bound) << " + " << fmt(a.sigma) << "·"
        << fmt(e.sigma) << (ok ? "" : " FAILS") << "; ";
    } else if (a.type == "coupling_invariants") {
      out.passed = out.passed && e.invariants_ok();
      d << "t_k=" << fmt(e.t_k) << ": violations indicator " << e.indicator_violations << ", unconditional "
        << e.unconditional_violations << ", implication " << e.implication_violations << ", coupling "
        << e.coupling_mismatches << "; ";
    } else if (a.type == "potential_paths_at_most") {
      out.passed = out.passed && e.max_potential_paths <= a.value;
      d << "t_k=" << fmt(e.t_k) << ": max potential paths " << e.max_potential_paths << "; ";
    }
  }
  out.detail = d.str();
  return out;
}

AssertResult check_hardness(const AssertSpec& a, const HardnessReport& r) {
  AssertResult out{a.type, true, ""};
  if (a.type == "final_within") {
    const double d = std::fabs(r.final_value.mean - a.value);
    out.passed = d <= a.tolerance;
    out.detail = "mean M(2n)/n = " + fmt(r.final_value.mean) + ", |· − " + fmt(a.value) + "| = " + fmt(d);
  } else if (a.type == "final_at_most") {
    out.passed = r.final_value.mean <= a.value + a.sigma * r.final_value.std_error();
    out.detail = "mean M(2n)/n = " + fmt(r.final_value.mean) + " ± " + fmt(r.final_value.std_error());
  } else if (a.type == "sup_distance_at_most") {
    out.passed = r.sup_distance <= a.value;
    out.detail = "sup_t |mean M(t)/n − m(t/n)| = " + fmt(r.sup_distance);
  } else if (a.type == "q_frequency_at_least") {
    out.passed = r.q_min_frequency >= a.value;
    out.detail = "min over t <= horizon of P[Q_t] = " + fmt(r.q_min_frequency) + " at t = " +
                 std::to_string(r.q_min_t) + ", mean " + fmt(r.q_mean_frequency) + ", all t jointly " +
                 fmt(r.q_all_frequency);
  } else if (a.type == "drift_pass") {
    int fails = 0;
    for (const DriftBucket& b : r.drift) {
      if (b.excess.n > 1 && b.excess.mean > a.sigma * b.excess.std_error()) ++fails;
    }
    out.passed = fails == 0;
    out.detail = std::to_string(fails) + " of " + std::to_string(r.drift.size()) + " drift buckets above bound";
  }
  return out;
}

json sim_summary(const SimulationReport& r) {
  json j;
  j["trials"] = r.trials;
  j["min_ratio"] = r.min_ratio;
  j["min_edge"] = r.min_edge;
  if (r.min_edge != kNoEdge) j["min_sigma"] = r.edges[r.min_edge].sigma();
  j["insufficient_edges"] = r.insufficient;
  if (r.has_profile) {
    int under = 0, fails = 0;
    for (const auto& b : r.bins) {
      under += b.underpowered();
      fails += !b.passes();
    }
    j["underpowered_bins"] = under;
    j["failing_bins"] = fails;
  }
  return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.name = cfg.name;
  json summary;
  switch (cfg.kind) {
    case ExperimentKind::kSelectability:
    case ExperimentKind::kProfile: {
      const SimulationReport r = cfg.kind == ExperimentKind::kProfile ? exact_selection_profile(cfg, threads)
                                                                      : estimate_selectability(cfg, threads);
      if (cfg.kind == ExperimentKind::kProfile) {
        res.csv[""] = profile_csv(r);
        res.csv["_edges"] = edges_csv(r);
      } else {
        res.csv[""] = edges_csv(r);
      }
      summary = sim_summary(r);
      for (const auto& a : cfg.asserts) res.asserts.push_back(check_simulation(a, r));
      break;
    }
    case ExperimentKind::kGap:
    case ExperimentKind::kFlipping: {
      const Graph g = build_instance(cfg);
      const auto [u, v] = pair_of(cfg, g);
      RecursiveVertexRcrs scheme(g, SelectionFunction::vertex(cfg.scheme.g), cfg.scheme.recursive);
      const EstimateTable table = scheme.build_tables(Stream(cfg.seed).derive(Purpose::kTables));
      std::vector<GapEstimate> rows;
      for (std::size_t i = 0; i < cfg.t_k.size(); ++i) {
        rows.push_back(correlation_gap(scheme, table, u, v, cfg.t_k[i], cfg.trials,
                                       Stream(cfg.seed).derive(Purpose::kCoupled, i), threads));
      }
      res.csv[""] = gap_csv(rows);
      summary["u"] = u;
      summary["v"] = v;
      summary["odd_girth"] = odd_girth(g).to_string();
      for (const auto& a : cfg.asserts) res.asserts.push_back(check_gap(a, rows));
      break;
    }
    case ExperimentKind::kHardness: {
      const HardnessReport r = hardness_trajectory(cfg.hardness, Stream(cfg.seed), threads);
      res.csv[""] = trajectory_csv(r);
      res.csv["_drift"] = drift_csv(r);
      summary["final_mean"] = r.final_value.mean;
      summary["final_sigma"] = r.final_value.std_error();
      summary["curve_at_2"] = hardness_curve(2.0);
      summary["sup_distance"] = r.sup_distance;
      summary["q_all_frequency"] = r.q_all_frequency;
      summary["q_mean_frequency"] = r.q_mean_frequency;
      summary["q_min_frequency"] = r.q_min_frequency;
      summary["q_min_t"] = r.q_min_t;
      for (const auto& a : cfg.asserts) res.asserts.push_back(check_hardness(a, r));
      break;
    }
    case ExperimentKind::kBound: {
      const BoundReport r = two_phase_bound(cfg);
      res.csv[""] = bound_csv(r);
      summary["u0"] = r.u0;
      summary["u1"] = r.u1;
      summary["one_regular"] = r.one_regular;
      summary["value"] = r.value;
      summary["guarantee_poly"] = r.guarantee;
      for (const auto& a : cfg.asserts) {
        AssertResult ar{a.type, r.value >= r.guarantee - a.tolerance,
                        "bound value " + fmt(r.value) + " vs guarantee " + fmt(r.guarantee)};
        res.asserts.push_back(ar);
      }
      break;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json meta;
  meta["tool"] = "rcrs-lab";
  meta["format"] = 1;
  meta["config"] = json::parse(config_to_json(cfg));
  meta["summary"] = summary;
  meta["runtime_seconds"] = secs;
  json as = json::array();
  for (const auto& a : res.asserts) as.push_back({{"type", a.type}, {"passed", a.passed}, {"detail", a.detail}});
  meta["asserts"] = as;
  meta["passed"] = res.passed();
  res.json = meta.dump(2);
  return res;
}

SuiteResult run_suite(const SuiteConfig& suite, bool write_files, unsigned threads) {
  namespace fs = std::filesystem;
  SuiteResult out;
  if (write_files) {
    std::error_code ec;
    fs::create_directories(suite.output_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + suite.output_dir + ": " + ec.message());
  }
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path p = fs::path(suite.output_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    if (!f) throw std::runtime_error("write failed: " + p.string());
  };
  for (const ExperimentConfig& cfg : suite.experiments) {
    out.results.push_back(run_experiment(cfg, threads));
    if (!write_files) continue;
    const ExperimentResult& r = out.results.back();
    for (const auto& [suffix, text] : r.csv) write(cfg.name + suffix + ".csv", text);
    write(cfg.name + ".json", r.json + "\n");
  }
  return out;
}

}  // namespace rcrs
