#include "rcrs/generators.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "rcrs/rng.hpp"

namespace rcrs {
namespace {

struct ParamUse {
  bool n = false, k = false, g = false, x = false, seed = false;
};

void check_params(const InstanceSpec& s, ParamUse use) {
  auto reject = [&](const char* name) {
    throw std::invalid_argument("family " + s.family + " does not take parameter '" + name + "'");
  };
  if (s.n && !use.n) reject("n");
  if (s.k && !use.k) reject("k");
  if (s.g && !use.g) reject("g");
  if (s.x && !use.x) reject("x");
  if (s.seed && !use.seed) reject("seed");
}

int require(const std::optional<int>& v, const char* name, const std::string& family, int min) {
  if (!v) throw std::invalid_argument("family " + family + " requires parameter '" + name + "'");
  if (*v < min) {
    throw std::invalid_argument("family " + family + ": parameter '" + name + "' must be >= " +
                                std::to_string(min));
  }
  return *v;
}

int require_odd_girth(const InstanceSpec& s) {
  const int g = require(s.g, "g", s.family, 3);
  if (g % 2 == 0) {
    throw std::invalid_argument("family " + s.family + ": g must be odd, got " + std::to_string(g));
  }
  return g;
}

Graph checked(Graph g, const std::string& family) {
  if (!validate_fractional_matching(g).ok) {
    throw std::invalid_argument("family " + family + ": parameters give vertex load > 1");
  }
  return g;
}

}  // namespace

Graph random_tree(int edges, std::uint64_t seed) {
  if (edges < 1) throw std::invalid_argument("random_tree: edges must be >= 1");
  const int n = edges + 1;
  std::vector<std::pair<VertexId, VertexId>> pairs;
  if (n == 2) {
    pairs.emplace_back(0, 1);
  } else {
    Stream rng = Stream(seed).derive(Purpose::kInstance);
    std::vector<int> prufer(static_cast<std::size_t>(n - 2));
    for (int& p : prufer) p = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    std::vector<int> deg(static_cast<std::size_t>(n), 1);
    for (int p : prufer) ++deg[p];
    std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
    for (int v = 0; v < n; ++v) {
      if (deg[v] == 1) leaves.push(v);
    }
    for (int p : prufer) {
      const int leaf = leaves.top();
      leaves.pop();
      pairs.emplace_back(leaf, p);
      if (--deg[p] == 1) leaves.push(p);
    }
    const int a = leaves.top();
    leaves.pop();
    pairs.emplace_back(a, leaves.top());
  }
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (auto [a, b] : pairs) {
    ++deg[a];
    ++deg[b];
  }
  std::vector<Edge> es;
  for (auto [a, b] : pairs) es.push_back({a, b, 1.0 / std::max(deg[a], deg[b])});
  return Graph(n, std::move(es));
}

Graph generate(const InstanceSpec& s) {
  const std::string& f = s.family;
  std::vector<Edge> es;
  if (f == "single_edge") {
    check_params(s, {.x = true});
    return checked(Graph(2, {{0, 1, s.x.value_or(1.0)}}), f);
  }
  if (f == "star") {
    check_params(s, {.k = true, .x = true});
    const int k = require(s.k, "k", f, 1);
    const double x = s.x.value_or(1.0 / k);
    for (int i = 1; i <= k; ++i) es.push_back({0, i, x});
    return checked(Graph(k + 1, std::move(es)), f);
  }
  if (f == "path") {
    check_params(s, {.n = true, .x = true});
    const int n = require(s.n, "n", f, 2);
    const double x = s.x.value_or(0.5);
    for (int i = 0; i + 1 < n; ++i) es.push_back({i, i + 1, x});
    return checked(Graph(n, std::move(es)), f);
  }
  if (f == "random_tree") {
    check_params(s, {.k = true, .seed = true});
    return random_tree(require(s.k, "k", f, 1), s.seed.value_or(0));
  }
  if (f == "double_star") {
    // u0 = 0, v0 = 1, u_i = 1 + i, v_i = 1 + n + i
    check_params(s, {.n = true});
    const int n = require(s.n, "n", f, 1);
    const double x = 1.0 / (n + 1);
    es.push_back({0, 1, x});
    for (int i = 1; i <= n; ++i) es.push_back({0, 1 + i, x});
    for (int i = 1; i <= n; ++i) es.push_back({1, 1 + n + i, x});
    return checked(Graph(2 * n + 2, std::move(es)), f);
  }
  if (f == "complete_bipartite") {
    check_params(s, {.n = true});
    const int n = require(s.n, "n", f, 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) es.push_back({i, n + j, 1.0 / n});
    }
    return checked(Graph(2 * n, std::move(es)), f);
  }
  if (f == "complete") {
    check_params(s, {.n = true});
    const int n = require(s.n, "n", f, 2);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) es.push_back({i, j, 1.0 / (n - 1)});
    }
    return checked(Graph(n, std::move(es)), f);
  }
  if (f == "odd_cycle") {
    check_params(s, {.g = true});
    const int g = require_odd_girth(s);
    for (int i = 0; i < g; ++i) es.push_back({i, (i + 1) % g, 0.5});
    return checked(Graph(g, std::move(es)), f);
  }
  if (f == "cycle_blowup") {
    // Vertex (i, c) -> i*k + c; all copies of consecutive positions joined.
    check_params(s, {.k = true, .g = true});
    const int g = require_odd_girth(s);
    const int k = require(s.k, "k", f, 1);
    for (int i = 0; i < g; ++i) {
      const int j = (i + 1) % g;
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) es.push_back({i * k + a, j * k + b, 1.0 / (2 * k)});
      }
    }
    return checked(Graph(g * k, std::move(es)), f);
  }
  throw std::invalid_argument("unknown instance family '" + f + "'");
}

std::vector<std::string> instance_families() {
  return {"single_edge", "star",     "path",      "random_tree", "double_star", "complete_bipartite",
          "complete",    "odd_cycle", "cycle_blowup"};
}

std::string describe(const InstanceSpec& s) {
  std::ostringstream os;
  os << s.family << "(";
  bool first = true;
  auto put = [&](const char* name, auto value) {
    if (!first) os << ",";
    first = false;
    os << name << "=" << value;
  };
  if (s.n) put("n", *s.n);
  if (s.k) put("k", *s.k);
  if (s.g) put("g", *s.g);
  if (s.x) put("x", *s.x);
  if (s.seed) put("seed", *s.seed);
  os << ")";
  return os.str();
}

}  // namespace rcrs
