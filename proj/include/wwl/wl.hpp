#ifndef WWL_WL_HPP
#define WWL_WL_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wwl/graph.hpp"

namespace wwl {

/// The (parent label, sorted neighbor labels) pair hashed by one WL step.
struct WLSignature {
  int parent = 0;
  std::vector<int> neighbors;

  auto operator<=>(const WLSignature&) const = default;

  /// Readable subtree-pattern key, e.g. "(1,[0,0,2])".
  [[nodiscard]] std::string str() const {
    std::string s = "(" + std::to_string(parent) + ",[";
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(neighbors[i]);
    }
    return s + "])";
  }
};

/// Perfect-hash dictionary for one iteration: signature -> contiguous id from 0.
class WLAlphabet {
 public:
  int intern(const WLSignature& sig) {
    auto [it, inserted] = ids_.try_emplace(sig, static_cast<int>(keys_.size()));
    if (inserted) keys_.push_back(sig);
    return it->second;
  }
  [[nodiscard]] std::optional<int> find(const WLSignature& sig) const {
    auto it = ids_.find(sig);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  [[nodiscard]] std::size_t size() const { return keys_.size(); }
  [[nodiscard]] const WLSignature& key(int id) const { return keys_.at(static_cast<std::size_t>(id)); }

 private:
  std::map<WLSignature, int> ids_;
  std::vector<WLSignature> keys_;
};

struct LabelCount {
  int label;
  int count;
  friend bool operator==(const LabelCount&, const LabelCount&) = default;
};

/// Per-iteration label counts of one graph, sorted by label id.
/// Masses are counts divided by the node count.
class LabelHistogram {
 public:
  LabelHistogram() = default;
  LabelHistogram(std::size_t n_nodes, std::vector<std::vector<LabelCount>> counts)
      : n_nodes_(n_nodes), counts_(std::move(counts)) {}

  [[nodiscard]] int iterations() const { return static_cast<int>(counts_.size()); }
  [[nodiscard]] std::size_t num_nodes() const { return n_nodes_; }
  /// Counts at iteration h (1-based).
  [[nodiscard]] const std::vector<LabelCount>& counts(int h) const { return counts_.at(static_cast<std::size_t>(h - 1)); }

  [[nodiscard]] double mass(int h, int label) const {
    const auto& c = counts(h);
    auto it = std::lower_bound(c.begin(), c.end(), label,
                               [](const LabelCount& lc, int l) { return lc.label < l; });
    if (it == c.end() || it->label != label) return 0.0;
    return static_cast<double>(it->count) / static_cast<double>(n_nodes_);
  }

  [[nodiscard]] std::map<int, double> masses(int h) const {
    std::map<int, double> m;
    for (const auto& lc : counts(h)) m[lc.label] = static_cast<double>(lc.count) / static_cast<double>(n_nodes_);
    return m;
  }

 private:
  std::size_t n_nodes_ = 0;
  std::vector<std::vector<LabelCount>> counts_;
};

/// WL color refinement of a collection of graphs with one dictionary per
/// iteration shared by every graph, so equal subtree patterns share an id.
///
/// Iteration 0 holds the initial labels and is not part of the alphabet;
/// embedding rows hold the ids for iterations 1..H.
class WLRefinement {
 public:
  explicit WLRefinement(int iterations) : H_(iterations), alphabets_(static_cast<std::size_t>(iterations)) {
    if (iterations < 1) throw std::invalid_argument("WL refinement needs H >= 1");
  }

  [[nodiscard]] int iterations() const { return H_; }
  [[nodiscard]] std::size_t num_graphs() const { return initial_.size(); }
  [[nodiscard]] std::size_t num_nodes(std::size_t g) const { return initial_.at(g).size(); }
  [[nodiscard]] const WLAlphabet& alphabet(int h) const { return alphabets_.at(static_cast<std::size_t>(h - 1)); }

  [[nodiscard]] std::vector<std::size_t> alphabet_sizes() const {
    std::vector<std::size_t> s;
    for (const auto& a : alphabets_) s.push_back(a.size());
    return s;
  }

  [[nodiscard]] const std::vector<int>& initial_labels(std::size_t g) const { return initial_.at(g); }

  /// Embedding of node v of graph g: ids at iterations 1..H.
  [[nodiscard]] std::span<const int> row(std::size_t g, std::size_t v) const {
    const auto& e = embeddings_.at(g);
    return std::span<const int>(e).subspan(v * static_cast<std::size_t>(H_), static_cast<std::size_t>(H_));
  }

  /// Label of node v at iteration h; h = 0 gives the initial label.
  [[nodiscard]] int label(std::size_t g, std::size_t v, int h) const {
    if (h == 0) return initial_.at(g).at(v);
    return row(g, v)[static_cast<std::size_t>(h - 1)];
  }

  [[nodiscard]] const LabelHistogram& histogram(std::size_t g) const {
    if (g >= histograms_.size()) throw std::out_of_range("graph index out of range");
    return histograms_[g];
  }

  /// Copy of this refinement with `more` appended after the existing graphs.
  /// Existing ids are unchanged; unseen patterns get fresh ids.
  [[nodiscard]] WLRefinement extended(const GraphDataset& more) const {
    WLRefinement r = *this;
    for (const auto& g : more.graphs) r.append(g);
    return r;
  }

  /// Rebuilds a refinement from serialized parts; histograms are recomputed.
  static WLRefinement restore(int H, std::vector<WLAlphabet> alphabets, std::vector<std::vector<int>> initial,
                              std::vector<std::vector<int>> embeddings) {
    WLRefinement r(H);
    if (alphabets.size() != static_cast<std::size_t>(H) || initial.size() != embeddings.size())
      throw std::invalid_argument("WLRefinement::restore: inconsistent parts");
    r.alphabets_ = std::move(alphabets);
    for (std::size_t g = 0; g < initial.size(); ++g) {
      if (embeddings[g].size() != initial[g].size() * static_cast<std::size_t>(H))
        throw std::invalid_argument("WLRefinement::restore: embedding size mismatch");
      r.add_graph(std::move(initial[g]), std::move(embeddings[g]));
    }
    return r;
  }

 private:
  friend WLRefinement refine(const GraphDataset& ds, int H);

  void add_graph(std::vector<int> initial, std::vector<int> emb) {
    const std::size_t n = initial.size();
    const auto H = static_cast<std::size_t>(H_);
    std::vector<std::vector<LabelCount>> counts(H);
    for (std::size_t h = 0; h < H; ++h) {
      std::map<int, int> c;
      for (std::size_t v = 0; v < n; ++v) ++c[emb[v * H + h]];
      for (auto [l, k] : c) counts[h].push_back({l, k});
    }
    initial_.push_back(std::move(initial));
    embeddings_.push_back(std::move(emb));
    histograms_.emplace_back(n, std::move(counts));
  }

  void append(const Graph& g) {
    const std::size_t n = g.num_nodes();
    const auto H = static_cast<std::size_t>(H_);
    std::vector<int> cur = g.node_labels();
    std::vector<int> emb(n * H);
    std::vector<int> next(n);
    WLSignature sig;
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t v = 0; v < n; ++v) {
        sig.parent = cur[v];
        sig.neighbors.clear();
        for (int u : g.neighbors(v)) sig.neighbors.push_back(cur[static_cast<std::size_t>(u)]);
        std::sort(sig.neighbors.begin(), sig.neighbors.end());
        next[v] = alphabets_[h].intern(sig);
        emb[v * H + h] = next[v];
      }
      std::swap(cur, next);
    }
    add_graph(g.node_labels(), std::move(emb));
  }

  int H_;
  std::vector<WLAlphabet> alphabets_;
  std::vector<std::vector<int>> initial_;
  std::vector<std::vector<int>> embeddings_;
  std::vector<LabelHistogram> histograms_;
};

inline WLRefinement refine(const GraphDataset& ds, int H) {
  WLRefinement r(H);
  for (const auto& g : ds.graphs) r.append(g);
  return r;
}

inline const LabelHistogram& histograms(const WLRefinement& r, std::size_t graph_index) {
  return r.histogram(graph_index);
}

/// Fraction of the first h iterations at which two embeddings disagree.
inline double hamming_distance(std::span<const int> u, std::span<const int> v, int h) {
  if (h <= 0) throw std::invalid_argument("hamming_distance: h must be positive");
  const auto n = static_cast<std::size_t>(h);
  if (u.size() < n || v.size() < n) throw std::invalid_argument("hamming_distance: embedding shorter than h");
  int diff = 0;
  for (std::size_t i = 0; i < n; ++i) diff += u[i] != v[i];
  return static_cast<double>(diff) / h;
}

/// Fraction of the first h iterations at which two embeddings agree.
inline double base_kernel(std::span<const int> u, std::span<const int> v, int h) {
  if (h <= 0) throw std::invalid_argument("base_kernel: h must be positive");
  const auto n = static_cast<std::size_t>(h);
  if (u.size() < n || v.size() < n) throw std::invalid_argument("base_kernel: embedding shorter than h");
  int same = 0;
  for (std::size_t i = 0; i < n; ++i) same += u[i] == v[i];
  return static_cast<double>(same) / h;
}

}  // namespace wwl

#endif  // WWL_WL_HPP
