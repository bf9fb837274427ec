// rcrs-lab: command-line front end for the simulation lab.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcrs/generators.hpp"
#include "rcrs/graph_io.hpp"
#include "rcrs/harness.hpp"
#include "rcrs/selection.hpp"

using namespace rcrs;
using nlohmann::json;

namespace {

struct InstanceFlags {
  std::string family;
  std::optional<int> n, k, g;
  std::optional<double> x;
  std::optional<std::uint64_t> seed;
  std::string graph;

  void add(CLI::App* app, bool allow_file) {
    app->add_option("--family", family, "instance family")
        ->check(CLI::IsMember(instance_families()));
    app->add_option("--n", n, "family size parameter n");
    app->add_option("--k", k, "family size parameter k");
    app->add_option("--girth", g, "odd cycle length for odd_cycle / cycle_blowup");
    app->add_option("--x", x, "edge value override");
    app->add_option("--instance-seed", seed, "seed for random_tree");
    if (allow_file) app->add_option("--graph", graph, "graph JSON file instead of a family");
  }

  json to_json() const {
    json j;
    j["family"] = family;
    if (n) j["n"] = *n;
    if (k) j["k"] = *k;
    if (g) j["g"] = *g;
    if (x) j["x"] = *x;
    if (seed) j["seed"] = *seed;
    return j;
  }

  // Adds "instance" or "graph_file" to an experiment object.
  void put(json& exp) const {
    if (!graph.empty()) {
      exp["graph_file"] = graph;
    } else if (!family.empty()) {
      exp["instance"] = to_json();
    }
  }

  Graph build() const {
    if (!graph.empty()) return load_graph(graph);
    if (family.empty()) throw CLI::ValidationError("--family", "an instance family or --graph is required");
    InstanceSpec s{family, n, k, g, x, seed};
    return generate(s);
  }
};

struct SchemeFlags {
  std::string scheme = "recursive-vertex";
  std::optional<std::string> girth;
  std::optional<std::string> edge_kind;
  std::optional<int> T;
  std::optional<double> delta;
  std::optional<std::int64_t> Q;
  std::optional<std::string> guard;
  std::optional<double> t;

  void add(CLI::App* app, const std::string& default_scheme) {
    scheme = default_scheme;
    app->add_option("--scheme", scheme, "recursive-vertex | recursive-edge | rank1-closed | two-phase | greedy")
        ->capture_default_str();
    app->add_option("--g", girth, "odd girth of the selection function (odd integer or inf)");
    app->add_option("--edge-kind", edge_kind, "rank1 | general | tree (recursive-edge)");
    app->add_option("--T", T, "number of phases");
    app->add_option("--delta", delta, "sampling accuracy");
    app->add_option("--Q", Q, "samples per estimate (default: required_samples)");
    app->add_option("--guard", guard, "on | off");
    app->add_option("--t,--t0", t, "two-phase threshold");
  }

  json to_json() const {
    json j;
    j["type"] = scheme;
    if (girth) j["g"] = *girth;
    if (edge_kind) j["edge_kind"] = *edge_kind;
    if (T) j["T"] = *T;
    if (delta) j["delta"] = *delta;
    if (Q) j["Q"] = *Q;
    if (guard) j["guard"] = *guard;
    if (t) j["t"] = *t;
    return j;
  }
};

struct RunFlags {
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> bins;
  std::string out = ".";
  std::string name;

  void add(CLI::App* app, bool bins_flag) {
    app->add_option("--trials", trials, "number of trials");
    app->add_option("--seed", seed, "64-bit seed");
    if (bins_flag) app->add_option("--bins", bins, "arrival-time bins");
    app->add_option("--out", out, "output directory for CSV/JSON reports")->capture_default_str();
    app->add_option("--name", name, "report file stem");
  }

  void put(json& exp) const {
    if (trials) exp["trials"] = *trials;
    if (seed) exp["seed"] = *seed;
    if (bins) exp["bins"] = *bins;
  }
};

int run_single(json exp, const std::string& out) {
  SuiteConfig suite;
  suite.output_dir = out;
  suite.experiments.push_back(parse_experiment_text(exp.dump(), "options"));
  const SuiteResult r = run_suite(suite);
  const ExperimentResult& e = r.results.front();
  const json meta = json::parse(e.json);
  std::cout << meta["summary"].dump(2) << "\n";
  for (const auto& [suffix, _] : e.csv) std::cout << "wrote " << out << "/" << e.name << suffix << ".csv\n";
  std::cout << "wrote " << out << "/" << e.name << ".json\n";
  return 0;
}

int print_suite(const SuiteResult& r) {
  for (const auto& e : r.results) {
    std::cout << e.name << ": " << (e.passed() ? "ok" : "FAILED") << "\n";
    for (const auto& a : e.asserts) {
      std::cout << "  [" << (a.passed ? "pass" : "FAIL") << "] " << a.type << ": " << a.detail << "\n";
    }
  }
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rcrs-lab: random-order contention resolution simulation lab"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write an instance as graph JSON");
  InstanceFlags gen_inst;
  gen_inst.add(gen, false);
  std::string gen_out;
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // validate
  auto* val = app.add_subcommand("validate", "check an instance: fractional matching, odd girth, shape");
  InstanceFlags val_inst;
  val_inst.add(val, true);

  // selection
  auto* sel = app.add_subcommand("selection", "verify the selection-function conditions and print α_g");
  std::string sel_g = "inf";
  int sel_grid = 1000;
  std::string sel_out;
  sel->add_option("--g", sel_g, "odd girth (odd integer or inf)")->capture_default_str();
  sel->add_option("--grid", sel_grid, "grid size")->capture_default_str();
  sel->add_option("--out", sel_out, "write a CSV table of c(y) on the grid");

  // simulate / profile
  auto* sim = app.add_subcommand("simulate", "estimate per-edge selectability");
  InstanceFlags sim_inst;
  SchemeFlags sim_scheme;
  RunFlags sim_run;
  sim_inst.add(sim, true);
  sim_scheme.add(sim, "recursive-vertex");
  sim_run.add(sim, true);

  auto* prof = app.add_subcommand("profile", "binned conditional acceptance against the target c(y)");
  InstanceFlags prof_inst;
  SchemeFlags prof_scheme;
  RunFlags prof_run;
  prof_inst.add(prof, true);
  prof_scheme.add(prof, "recursive-vertex");
  prof_run.add(prof, true);

  // diag
  auto* diag = app.add_subcommand("diag", "coupling diagnostics, hardness trajectory, two-phase bound");
  std::string diag_kind;
  InstanceFlags diag_inst;
  SchemeFlags diag_scheme;
  RunFlags diag_run;
  std::optional<int> diag_u, diag_v, diag_points, diag_buckets;
  std::vector<double> diag_tk;
  std::optional<double> diag_qh;
  diag->add_option("--diag", diag_kind, "flipping | gap | hardness | bound")
      ->required()
      ->check(CLI::IsMember({"flipping", "gap", "hardness", "bound"}));
  diag_inst.add(diag, true);
  diag_scheme.add(diag, "");
  diag_run.add(diag, false);
  diag->add_option("--u", diag_u, "reference vertex u");
  diag->add_option("--v", diag_v, "excluded vertex v");
  diag->add_option("--tk", diag_tk, "horizon(s) t_k");
  diag->add_option("--points", diag_points, "bound table points");
  diag->add_option("--q-horizon", diag_qh, "Q_t checked for t <= q_horizon·n");
  diag->add_option("--drift-buckets", diag_buckets, "drift buckets");

  // suite
  auto* suite = app.add_subcommand("suite", "run a JSON config of experiments");
  std::string suite_path;
  std::optional<std::string> suite_out;
  suite->add_option("config", suite_path, "config file")->required();
  suite->add_option("--out", suite_out, "override output_dir");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const std::string text = graph_to_json_text(gen_inst.build());
      if (gen_out.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream f(gen_out);
        if (!f) throw std::runtime_error("cannot write " + gen_out);
        f << text << "\n";
      }
      return 0;
    }
    if (*val) {
      const Graph g = val_inst.build();
      const auto fm = validate_fractional_matching(g);
      std::cout << "vertices: " << g.vertex_count() << "\nedges: " << g.edge_count()
                << "\nfractional_matching: " << (fm.ok ? "yes" : "no") << "\none_regular: "
                << (is_one_regular(g) ? "yes" : "no") << "\nodd_girth: " << odd_girth(g).to_string()
                << "\nforest: " << (is_forest(g) ? "yes" : "no") << "\nstar_center: ";
      if (auto c = star_center(g)) {
        std::cout << *c << "\n";
      } else {
        std::cout << "none\n";
      }
      for (const auto& v : fm.violations) std::cout << "overloaded vertex " << v.vertex << ": " << v.load << "\n";
      return fm.ok ? 0 : 1;
    }
    if (*sel) {
      const OddGirth g = OddGirth::parse(sel_g);
      const auto c = SelectionFunction::vertex(g);
      const auto r = verify_selection_conditions(c, g, sel_grid);
      std::printf("g = %s\nalpha_closed_form = %.12f\nalpha_numeric = %.12f\nfloor C = c(1) = %.12f\n",
                  g.to_string().c_str(), alpha_closed_form(g), alpha_numeric(g), c.floor());
      std::printf("monotone: %s\nfloor: %s\ninequality: %s\nmin_slack = %.3e\nmax_abs_slack = %.3e\n",
                  r.monotone_ok ? "ok" : "FAIL", r.floor_ok ? "ok" : "FAIL", r.inequality_ok ? "ok" : "FAIL",
                  r.min_slack, r.max_abs_slack);
      if (!sel_out.empty()) {
        std::ofstream f(sel_out);
        if (!f) throw std::runtime_error("cannot write " + sel_out);
        f << "# rcrs-lab selection v1\ny,c\n";
        for (int i = 0; i <= sel_grid; ++i) {
          const double y = static_cast<double>(i) / sel_grid;
          f << format_number(y) << "," << format_number(c(y)) << "\n";
        }
      }
      return r.ok() ? 0 : 1;
    }
    if (*sim || *prof) {
      const bool is_prof = prof->parsed();
      const auto& inst = is_prof ? prof_inst : sim_inst;
      const auto& sch = is_prof ? prof_scheme : sim_scheme;
      const auto& run = is_prof ? prof_run : sim_run;
      json exp;
      exp["kind"] = is_prof ? "profile" : "selectability";
      exp["name"] = run.name.empty() ? (is_prof ? "profile" : "simulate") : run.name;
      inst.put(exp);
      exp["scheme"] = sch.to_json();
      run.put(exp);
      return run_single(exp, run.out);
    }
    if (*diag) {
      json exp;
      exp["kind"] = diag_kind;
      exp["name"] = diag_run.name.empty() ? diag_kind : diag_run.name;
      std::string scheme = diag_scheme.scheme;
      if (scheme.empty()) {
        scheme = diag_kind == "hardness" ? "greedy" : diag_kind == "bound" ? "two-phase" : "recursive-vertex";
      }
      SchemeFlags s = diag_scheme;
      s.scheme = scheme;
      exp["scheme"] = s.to_json();
      if (diag_kind == "hardness") {
        exp["n"] = diag_inst.n.value_or(500);
        if (diag_qh) exp["q_horizon"] = *diag_qh;
        if (diag_buckets) exp["drift_buckets"] = *diag_buckets;
      } else {
        diag_inst.put(exp);
        if (diag_u) exp["u"] = *diag_u;
        if (diag_v) exp["v"] = *diag_v;
        if (diag_points) exp["points"] = *diag_points;
        if (!diag_tk.empty()) {
          if (diag_kind == "flipping") {
            exp["t_k"] = diag_tk.front();
          } else {
            exp["t_k"] = diag_tk;
          }
        }
      }
      diag_run.put(exp);
      return run_single(exp, diag_run.out);
    }
    if (*suite) {
      SuiteConfig cfg = load_suite(suite_path);
      if (suite_out) cfg.output_dir = *suite_out;
      return print_suite(run_suite(cfg));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
