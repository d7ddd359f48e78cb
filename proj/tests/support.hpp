#ifndef WWL_TESTS_SUPPORT_HPP
#define WWL_TESTS_SUPPORT_HPP

#include <random>
#include <vector>

#include "wwl/graph.hpp"

namespace wwl::fixtures {

/// Erdos-Renyi graph with 1..max_nodes nodes and uniform labels.
inline Graph random_graph(std::mt19937_64& rng, int max_nodes, int n_labels, int cls = 1, int id = 0,
                          double density = 0.3) {
  const int n = std::uniform_int_distribution<int>(1, max_nodes)(rng);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& l : labels) l = std::uniform_int_distribution<int>(0, n_labels - 1)(rng);
  std::vector<Edge> edges;
  std::bernoulli_distribution coin(density);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng)) edges.emplace_back(u, v);
  return Graph(std::move(labels), std::move(edges), cls, id);
}

inline GraphDataset random_dataset(std::uint64_t seed, std::size_t n, int max_nodes, int n_labels) {
  std::mt19937_64 rng(seed);
  GraphDataset ds{"random", {}};
  for (std::size_t i = 0; i < n; ++i)
    ds.graphs.push_back(random_graph(rng, max_nodes, n_labels, i % 2 ? 1 : -1, static_cast<int>(i + 1)));
  return ds;
}

inline Graph permuted(const Graph& g, const std::vector<int>& perm) {
  std::vector<int> labels(g.num_nodes());
  for (std::size_t v = 0; v < g.num_nodes(); ++v) labels[static_cast<std::size_t>(perm[v])] = g.label(v);
  std::vector<Edge> edges;
  for (auto [u, v] : g.edges()) edges.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
  return Graph(std::move(labels), std::move(edges), g.class_label(), g.graph_id());
}

}  // namespace wwl::fixtures

#endif  // WWL_TESTS_SUPPORT_HPP
