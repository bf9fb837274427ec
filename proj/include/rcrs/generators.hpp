#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcrs/graph.hpp"

namespace rcrs {

// Named instance family plus its parameters. Unused parameters must be left
// unset; generate() rejects parameters the family does not take.
struct InstanceSpec {
  std::string family;
  std::optional<int> n{};
  std::optional<int> k{};
  std::optional<int> g{};
  std::optional<double> x{};
  std::optional<std::uint64_t> seed{};
};

// Families: single_edge(x=1), star(k, x=1/k), path(n), random_tree(k, seed),
// double_star(n), complete_bipartite(n), complete(n), odd_cycle(g),
// cycle_blowup(g, k).
Graph generate(const InstanceSpec& spec);

std::vector<std::string> instance_families();

// Stable text form, e.g. "complete_bipartite(n=6)".
std::string describe(const InstanceSpec& spec);

// Random labeled tree with `edges` edges from a Prüfer sequence;
// x_e = 1/max(deg u, deg v).
Graph random_tree(int edges, std::uint64_t seed);

}  // namespace rcrs
