#ifndef WWL_SYNTHETIC_HPP
#define WWL_SYNTHETIC_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wwl/graph.hpp"

namespace wwl {

/// True when g contains (not necessarily induced) the motif 1-0(-2)-0: a
/// label-1 node with two label-0 neighbors, one of which has a label-2 neighbor.
inline bool contains_motif(const Graph& g) {
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    if (g.label(u) != 1) continue;
    int zeros = 0;
    bool anchored = false;
    for (int a : g.neighbors(u)) {
      if (g.label(static_cast<std::size_t>(a)) != 0) continue;
      ++zeros;
      for (int c : g.neighbors(static_cast<std::size_t>(a)))
        if (g.label(static_cast<std::size_t>(c)) == 2) anchored = true;
    }
    if (zeros >= 2 && anchored) return true;
  }
  return false;
}

struct MotifTemplate {
  std::vector<int> labels;
  std::vector<Edge> edges;
  int class_label;
};

/// The eight substructures. 1, 2, 5, 6 carry the motif (class +1); 3, 4, 7, 8
/// do not (class -1). 1-4 seed the training groups, 5-8 the test groups.
inline const std::array<MotifTemplate, 8>& motif_templates() {
  static const std::array<MotifTemplate, 8> templates{{
      // 1: motif plus a 0-0 tail
      {{1, 0, 0, 2, 0}, {{0, 1}, {0, 2}, {1, 3}, {2, 4}}, 1},
      // 2: motif with the label-2 node extended by a 1
      {{1, 0, 0, 2, 1, 0}, {{0, 1}, {0, 2}, {1, 3}, {3, 4}, {4, 5}}, 1},
      // 3: the 1 touches a single 0
      {{1, 0, 0, 2, 0}, {{0, 1}, {1, 2}, {2, 3}, {2, 4}}, -1},
      // 4: the 1 sees one 0 and the 2 directly
      {{1, 0, 0, 2, 1, 0}, {{0, 1}, {0, 3}, {1, 2}, {2, 5}, {4, 5}}, -1},
      // 5: motif inside a longer chain
      {{2, 0, 1, 0, 1, 0}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}, 1},
      // 6: motif with a ring through the second 0
      {{1, 0, 0, 2, 0, 1}, {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {4, 5}, {2, 5}}, 1},
      // 7: 0-1-0 without a 2 next to either 0
      {{1, 0, 0, 2, 1, 0}, {{0, 1}, {0, 2}, {1, 4}, {3, 4}, {2, 5}}, -1},
      // 8: 2 attached to a 0 that is not next to the 1
      {{2, 0, 0, 1, 0, 1}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}, -1},
  }};
  return templates;
}

struct NoiseConfig {
  int min_nodes = 1;
  int max_nodes = 3;
  int min_edges = 1;
  int max_edges = 3;
  int num_labels = 3;
};

namespace detail {

inline Graph perturb(const MotifTemplate& t, std::mt19937_64& rng, const NoiseConfig& noise, int graph_id) {
  for (;;) {
    std::vector<int> labels = t.labels;
    std::vector<Edge> edges = t.edges;
    std::uniform_int_distribution<int> n_nodes(noise.min_nodes, noise.max_nodes);
    std::uniform_int_distribution<int> n_edges(noise.min_edges, noise.max_edges);
    std::uniform_int_distribution<int> pick_label(0, noise.num_labels - 1);
    const int add_nodes = n_nodes(rng);
    for (int k = 0; k < add_nodes; ++k) {
      const int anchor = std::uniform_int_distribution<int>(0, static_cast<int>(labels.size()) - 1)(rng);
      labels.push_back(pick_label(rng));
      edges.emplace_back(anchor, static_cast<int>(labels.size()) - 1);
    }
    const int n = static_cast<int>(labels.size());
    const int add_edges = n_edges(rng);
    auto present = [&](int u, int v) {
      for (auto [a, b] : edges)
        if ((a == u && b == v) || (a == v && b == u)) return true;
      return false;
    };
    std::uniform_int_distribution<int> pick_node(0, n - 1);
    for (int k = 0, tries = 0; k < add_edges && tries < 1000; ++tries) {
      const int u = pick_node(rng), v = pick_node(rng);
      if (u == v || present(u, v)) continue;
      edges.emplace_back(u, v);
      ++k;
    }
    Graph g(std::move(labels), std::move(edges), t.class_label, graph_id);
    // noise must not create the motif in a negative graph
    if (t.class_label < 0 && contains_motif(g)) continue;
    return g;
  }
}

}  // namespace detail

struct SyntheticSplit {
  GraphDataset train;
  GraphDataset test;
};

/// Eight groups of `per_group` noisy copies of the templates; groups 1-4 form
/// the training set and 5-8 the test set. Deterministic in `seed`.
inline SyntheticSplit generate_synthetic_dataset(std::uint64_t seed, std::size_t per_group,
                                                 const NoiseConfig& noise = {},
                                                 const std::array<MotifTemplate, 8>& templates = motif_templates()) {
  if (per_group < 1) throw std::invalid_argument("generate_synthetic_dataset: per_group must be >= 1");
  std::mt19937_64 rng(seed);
  SyntheticSplit out{{"SYNTH_train", {}}, {"SYNTH_test", {}}};
  int id = 1;
  for (std::size_t t = 0; t < templates.size(); ++t) {
    auto& dst = t < 4 ? out.train : out.test;
    for (std::size_t k = 0; k < per_group; ++k) dst.graphs.push_back(detail::perturb(templates[t], rng, noise, id++));
  }
  return out;
}

/// Index of the template (0-7) a graph of a generated split came from.
inline std::size_t template_of(std::size_t index_in_split, std::size_t per_group, bool test_split) {
  return index_in_split / per_group + (test_split ? 4 : 0);
}

}  // namespace wwl

#endif  // WWL_SYNTHETIC_HPP
