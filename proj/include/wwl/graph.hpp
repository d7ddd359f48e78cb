#ifndef WWL_GRAPH_HPP
#define WWL_GRAPH_HPP

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wwl {

/// Raised for malformed dataset files; the message carries file and line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Edge = std::pair<int, int>;

/// Node-labeled undirected graph with a binary class label.
///
/// Edges are stored once with `first < second`; neighbor lists are symmetric.
class Graph {
 public:
  Graph(std::vector<int> node_labels, std::vector<Edge> edges, int class_label = 1, int graph_id = 0)
      : labels_(std::move(node_labels)), class_label_(class_label), graph_id_(graph_id) {
    if (labels_.empty()) throw std::invalid_argument("graph must have at least one node");
    if (class_label_ != 1 && class_label_ != -1)
      throw std::invalid_argument("class label must be -1 or +1");
    const int n = static_cast<int>(labels_.size());
    std::set<Edge> seen;
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw std::invalid_argument("edge endpoint out of range");
      if (u == v) throw std::invalid_argument("self-loops are not allowed");
      if (u > v) std::swap(u, v);
      if (!seen.insert({u, v}).second) throw std::invalid_argument("duplicate edge");
    }
    edges_.assign(seen.begin(), seen.end());
    adjacency_.resize(labels_.size());
    for (auto [u, v] : edges_) {
      adjacency_[u].push_back(v);
      adjacency_[v].push_back(u);
    }
  }

  [[nodiscard]] std::size_t num_nodes() const { return labels_.size(); }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }
  [[nodiscard]] const std::vector<int>& node_labels() const { return labels_; }
  [[nodiscard]] int label(std::size_t v) const { return labels_[v]; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<int>& neighbors(std::size_t v) const { return adjacency_[v]; }
  [[nodiscard]] int class_label() const { return class_label_; }
  [[nodiscard]] int graph_id() const { return graph_id_; }

  [[nodiscard]] bool has_edge(int u, int v) const {
    const auto& nb = adjacency_[u];
    return std::find(nb.begin(), nb.end(), v) != nb.end();
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.labels_ == b.labels_ && a.edges_ == b.edges_ && a.class_label_ == b.class_label_ &&
           a.graph_id_ == b.graph_id_;
  }

 private:
  std::vector<int> labels_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  int class_label_;
  int graph_id_;
};

struct GraphDataset {
  std::string name;
  std::vector<Graph> graphs;

  [[nodiscard]] std::size_t size() const { return graphs.size(); }
  [[nodiscard]] bool empty() const { return graphs.empty(); }
  [[nodiscard]] const Graph& operator[](std::size_t i) const { return graphs[i]; }

  /// Sorted distinct initial node labels over all graphs.
  [[nodiscard]] std::vector<int> label_alphabet() const {
    std::set<int> s;
    for (const auto& g : graphs) s.insert(g.node_labels().begin(), g.node_labels().end());
    return {s.begin(), s.end()};
  }
  [[nodiscard]] std::size_t label_alphabet_size() const { return label_alphabet().size(); }

  [[nodiscard]] std::vector<int> class_labels() const {
    std::vector<int> y;
    y.reserve(graphs.size());
    for (const auto& g : graphs) y.push_back(g.class_label());
    return y;
  }

  [[nodiscard]] GraphDataset subset(const std::vector<std::size_t>& idx) const {
    GraphDataset out{name, {}};
    out.graphs.reserve(idx.size());
    for (auto i : idx) out.graphs.push_back(graphs.at(i));
    return out;
  }
};

struct DatasetStats {
  std::size_t n_graphs = 0;
  std::map<int, std::size_t> class_counts;
  double avg_nodes = 0.0;
  /// Mean of 2|E|, i.e. edges counted as ordered pairs.
  double avg_directed_edges = 0.0;
  std::size_t n_node_labels = 0;
};

inline DatasetStats compute_stats(const GraphDataset& ds) {
  if (ds.empty()) throw std::invalid_argument("compute_stats: empty dataset");
  DatasetStats st;
  st.n_graphs = ds.size();
  double nodes = 0.0, edges = 0.0;
  for (const auto& g : ds.graphs) {
    ++st.class_counts[g.class_label()];
    nodes += static_cast<double>(g.num_nodes());
    edges += 2.0 * static_cast<double>(g.num_edges());
  }
  st.avg_nodes = nodes / static_cast<double>(st.n_graphs);
  st.avg_directed_edges = edges / static_cast<double>(st.n_graphs);
  st.n_node_labels = ds.label_alphabet_size();
  return st;
}

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError("cannot open " + p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos) lines.pop_back();
  return lines;
}

inline long parse_int(const std::string& tok, const std::filesystem::path& p, std::size_t line) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || tok.find_first_not_of(" \t\r", pos) != std::string::npos)
    throw ParseError(p.string() + ":" + std::to_string(line) + ": expected integer, got '" + tok + "'");
  return v;
}

inline std::vector<long> read_column(const std::filesystem::path& p) {
  auto lines = read_lines(p);
  std::vector<long> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    // multi-column label files keep the first column
    auto tok = lines[i].substr(0, lines[i].find(','));
    out.push_back(parse_int(tok, p, i + 1));
  }
  return out;
}

}  // namespace detail

/// Reads a dataset in the TU-Dortmund flat-file layout (1-based node ids).
///
/// Edges given in both directions are merged. Self-loops are dropped.
/// Class labels are mapped to {-1, +1}: the larger raw value becomes +1.
inline GraphDataset parse_tu_dataset(const std::filesystem::path& dir, const std::string& name) {
  namespace fs = std::filesystem;
  auto file = [&](const char* suffix) {
    fs::path p = dir / (name + suffix);
    if (!fs::exists(p)) throw ParseError("missing file " + p.string());
    return p;
  };
  const auto a_path = file("_A.txt");
  const auto ind_path = file("_graph_indicator.txt");
  const auto gl_path = file("_graph_labels.txt");
  const auto nl_path = file("_node_labels.txt");

  const auto indicator = detail::read_column(ind_path);
  const auto node_labels = detail::read_column(nl_path);
  const auto graph_labels = detail::read_column(gl_path);
  if (node_labels.size() != indicator.size())
    throw ParseError(nl_path.string() + ": " + std::to_string(node_labels.size()) +
                     " labels for " + std::to_string(indicator.size()) + " nodes");

  const std::size_t n_graphs = graph_labels.size();
  std::set<long> raw_classes(graph_labels.begin(), graph_labels.end());
  if (raw_classes.size() > 2) throw ParseError(gl_path.string() + ": more than two class labels");
  const long positive = raw_classes.empty() ? 1 : *raw_classes.rbegin();

  // node id (0-based, global) -> (graph index, local index)
  std::vector<std::pair<std::size_t, int>> where(indicator.size());
  std::vector<std::vector<int>> labels(n_graphs);
  for (std::size_t i = 0; i < indicator.size(); ++i) {
    const long gid = indicator[i];
    if (gid < 1 || static_cast<std::size_t>(gid) > n_graphs)
      throw ParseError(ind_path.string() + ":" + std::to_string(i + 1) + ": graph id " +
                       std::to_string(gid) + " out of range");
    auto& lab = labels[gid - 1];
    where[i] = {static_cast<std::size_t>(gid - 1), static_cast<int>(lab.size())};
    lab.push_back(static_cast<int>(node_labels[i]));
  }

  std::vector<std::set<Edge>> edges(n_graphs);
  const auto a_lines = detail::read_lines(a_path);
  for (std::size_t i = 0; i < a_lines.size(); ++i) {
    const auto& ln = a_lines[i];
    const auto comma = ln.find(',');
    if (comma == std::string::npos)
      throw ParseError(a_path.string() + ":" + std::to_string(i + 1) + ": expected 'u, v'");
    const long u = detail::parse_int(ln.substr(0, comma), a_path, i + 1);
    const long v = detail::parse_int(ln.substr(comma + 1), a_path, i + 1);
    const auto n = static_cast<long>(indicator.size());
    if (u < 1 || v < 1 || u > n || v > n)
      throw ParseError(a_path.string() + ":" + std::to_string(i + 1) + ": node index out of range");
    auto [gu, lu] = where[u - 1];
    auto [gv, lv] = where[v - 1];
    if (gu != gv)
      throw ParseError(a_path.string() + ":" + std::to_string(i + 1) + ": edge joins two graphs");
    if (lu == lv) continue;
    edges[gu].insert({std::min(lu, lv), std::max(lu, lv)});
  }

  GraphDataset ds{name, {}};
  ds.graphs.reserve(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g) {
    if (labels[g].empty())
      throw ParseError(gl_path.string() + ": graph " + std::to_string(g + 1) + " has no nodes");
    ds.graphs.emplace_back(std::move(labels[g]), std::vector<Edge>(edges[g].begin(), edges[g].end()),
                           graph_labels[g] == positive ? 1 : -1, static_cast<int>(g + 1));
  }
  return ds;
}

/// Writes `ds` in TU format under `dir`. Class labels are written as -1/+1.
inline void write_tu_dataset(const GraphDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* suffix) {
    std::ofstream out(dir / (ds.name + suffix));
    if (!out) throw std::runtime_error("cannot write " + (dir / (ds.name + suffix)).string());
    return out;
  };
  auto a = open("_A.txt");
  auto ind = open("_graph_indicator.txt");
  auto gl = open("_graph_labels.txt");
  auto nl = open("_node_labels.txt");
  std::size_t offset = 1;
  for (std::size_t g = 0; g < ds.size(); ++g) {
    const auto& G = ds.graphs[g];
    for (std::size_t v = 0; v < G.num_nodes(); ++v) {
      ind << g + 1 << '\n';
      nl << G.label(v) << '\n';
    }
    for (auto [u, v] : G.edges()) {
      a << offset + u << ", " << offset + v << '\n';
      a << offset + v << ", " << offset + u << '\n';
    }
    gl << G.class_label() << '\n';
    offset += G.num_nodes();
  }
}

/// Loads a TU dataset whose name is the last component of `dir`.
inline GraphDataset load_dataset(const std::filesystem::path& dir) {
  auto clean = dir.lexically_normal();
  auto name = clean.filename().string();
  if (name.empty()) name = clean.parent_path().filename().string();
  return parse_tu_dataset(clean, name);
}

}  // namespace wwl

#endif  // WWL_GRAPH_HPP
