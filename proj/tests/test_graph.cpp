#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wwl/graph.hpp"
#include "wwl/synthetic.hpp"

namespace fs = std::filesystem;
using namespace wwl;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("wwl_test_graph_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// Brute-force scan for the motif: a 1 with two distinct 0-neighbors a, b and a
// 2 adjacent to a or b. Independent of contains_motif's loop structure.
bool motif_by_enumeration(const Graph& g) {
  const int n = static_cast<int>(g.num_nodes());
  for (int u = 0; u < n; ++u)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          if (a == b || u == a || u == b || c == u || c == a || c == b) continue;
          if (g.label(u) != 1 || g.label(a) != 0 || g.label(b) != 0 || g.label(c) != 2) continue;
          if (g.has_edge(u, a) && g.has_edge(u, b) && g.has_edge(a, c)) return true;
        }
  return false;
}

}  // namespace

TEST(Graph, NormalizesEdges) {
  Graph g({0, 1, 2}, {{1, 0}, {2, 1}});
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1}));
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_EQ(g.neighbors(1).size(), 2u);
}

TEST(Graph, RejectsInvalidInput) {
  EXPECT_THROW(Graph({}, {}), std::invalid_argument);
  EXPECT_THROW(Graph({0, 0}, {{0, 0}}), std::invalid_argument);
  EXPECT_THROW(Graph({0, 0}, {{0, 2}}), std::invalid_argument);
  EXPECT_THROW(Graph({0, 0}, {{0, 1}, {1, 0}}), std::invalid_argument);
  EXPECT_THROW(Graph({0}, {}, 0), std::invalid_argument);
}

TEST(Stats, SingleNodeGraph) {
  GraphDataset ds{"one", {Graph({3}, {})}};
  const auto st = compute_stats(ds);
  EXPECT_EQ(st.n_graphs, 1u);
  EXPECT_DOUBLE_EQ(st.avg_nodes, 1.0);
  EXPECT_DOUBLE_EQ(st.avg_directed_edges, 0.0);
  EXPECT_EQ(st.n_node_labels, 1u);
}

TEST(Stats, AverageNodes) {
  GraphDataset ds{"two", {Graph({0, 0}, {{0, 1}}, 1), Graph({0, 1, 1, 0}, {{0, 1}, {1, 2}}, -1)}};
  const auto st = compute_stats(ds);
  EXPECT_DOUBLE_EQ(st.avg_nodes, 3.0);
  EXPECT_DOUBLE_EQ(st.avg_directed_edges, 3.0);
  EXPECT_EQ(st.class_counts.at(1), 1u);
  EXPECT_EQ(st.class_counts.at(-1), 1u);
}

TEST(Stats, EmptyDatasetThrows) { EXPECT_THROW(compute_stats(GraphDataset{}), std::invalid_argument); }

TEST(Parser, Mutag) {
  const auto ds = load_dataset(fs::path(WWL_DATA_DIR) / "MUTAG");
  const auto st = compute_stats(ds);
  EXPECT_EQ(st.n_graphs, 188u);
  EXPECT_EQ(st.class_counts.at(1), 125u);
  EXPECT_EQ(st.class_counts.at(-1), 63u);
  EXPECT_EQ(st.n_node_labels, 7u);
  EXPECT_NEAR(st.avg_nodes, 17.9, 0.1);
  EXPECT_NEAR(st.avg_directed_edges, 39.6, 0.1);
}

TEST(Parser, SingleNodeGraph) {
  auto dir = scratch_dir("single");
  write(dir / "ONE_A.txt", "");
  write(dir / "ONE_graph_indicator.txt", "1\n");
  write(dir / "ONE_graph_labels.txt", "0\n");
  write(dir / "ONE_node_labels.txt", "5\n");
  const auto ds = parse_tu_dataset(dir, "ONE");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].num_nodes(), 1u);
  EXPECT_EQ(ds[0].num_edges(), 0u);
}

TEST(Parser, MergesDirectionsAndMapsClasses) {
  auto dir = scratch_dir("merge");
  write(dir / "X_A.txt", "1, 2\n2, 1\n3, 4\n4, 3\n3, 5\n");
  write(dir / "X_graph_indicator.txt", "1\n1\n2\n2\n2\n");
  write(dir / "X_graph_labels.txt", "0\n1\n");
  write(dir / "X_node_labels.txt", "0\n1\n2\n2\n0\n");
  const auto ds = parse_tu_dataset(dir, "X");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].num_edges(), 1u);
  EXPECT_EQ(ds[1].num_edges(), 2u);
  EXPECT_EQ(ds[0].class_label(), -1);
  EXPECT_EQ(ds[1].class_label(), 1);
  EXPECT_EQ(ds[1].node_labels(), (std::vector<int>{2, 2, 0}));
}

TEST(Parser, Errors) {
  auto dir = scratch_dir("errors");
  EXPECT_THROW(parse_tu_dataset(dir, "NOPE"), ParseError);
  try {
    parse_tu_dataset(dir, "NOPE");
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("NOPE_A.txt"), std::string::npos);
  }

  write(dir / "R_A.txt", "1, 9\n");
  write(dir / "R_graph_indicator.txt", "1\n1\n");
  write(dir / "R_graph_labels.txt", "1\n");
  write(dir / "R_node_labels.txt", "0\n0\n");
  EXPECT_THROW(parse_tu_dataset(dir, "R"), ParseError);

  write(dir / "Z_A.txt", "1, 2\n");
  write(dir / "Z_graph_indicator.txt", "1\n1\n");
  write(dir / "Z_graph_labels.txt", "1\n-1\n");
  write(dir / "Z_node_labels.txt", "0\n0\n");
  EXPECT_THROW(parse_tu_dataset(dir, "Z"), ParseError);  // graph 2 has no nodes

  write(dir / "T_A.txt", "");
  write(dir / "T_graph_indicator.txt", "1\n2\n3\n");
  write(dir / "T_graph_labels.txt", "0\n1\n2\n");
  write(dir / "T_node_labels.txt", "0\n0\n0\n");
  EXPECT_THROW(parse_tu_dataset(dir, "T"), ParseError);

  write(dir / "B_A.txt", "1; 2\n");
  write(dir / "B_graph_indicator.txt", "1\n1\n");
  write(dir / "B_graph_labels.txt", "1\n");
  write(dir / "B_node_labels.txt", "0\n0\n");
  try {
    parse_tu_dataset(dir, "B");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("B_A.txt:1"), std::string::npos);
  }
}

TEST(Parser, RoundTrip) {
  const auto ds = load_dataset(fs::path(WWL_DATA_DIR) / "MUTAG");
  auto dir = scratch_dir("roundtrip");
  write_tu_dataset(ds, dir);
  const auto back = parse_tu_dataset(dir, ds.name);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_TRUE(back[i] == ds[i]) << "graph " << i;
}

TEST(Synthetic, TemplatesMatchTheMotifRule) {
  for (std::size_t t = 0; t < 8; ++t) {
    const auto& tpl = motif_templates()[t];
    Graph g(tpl.labels, tpl.edges, tpl.class_label);
    EXPECT_GE(g.num_nodes(), 5u);
    EXPECT_LE(g.num_nodes(), 7u);
    const bool positive = t == 0 || t == 1 || t == 4 || t == 5;
    EXPECT_EQ(motif_by_enumeration(g), positive) << "template " << t + 1;
    EXPECT_EQ(tpl.class_label, positive ? 1 : -1);
  }
}

TEST(Synthetic, CommittedTemplateFileMatches) {
  // data/synthetic_templates.txt: one line per template, "labels ; u-v ... ; class"
  std::ifstream in(fs::path(WWL_DATA_DIR) / "synthetic_templates.txt");
  ASSERT_TRUE(in);
  std::string line;
  std::size_t t = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ASSERT_LT(t, 8u);
    std::stringstream ss(line);
    std::string labels, edges, cls;
    std::getline(ss, labels, ';');
    std::getline(ss, edges, ';');
    std::getline(ss, cls, ';');
    std::vector<int> l;
    std::stringstream sl(labels);
    for (int x; sl >> x;) l.push_back(x);
    std::vector<Edge> e;
    std::stringstream se(edges);
    for (std::string tok; se >> tok;) {
      const auto dash = tok.find('-');
      e.emplace_back(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
    }
    const auto& tpl = motif_templates()[t];
    EXPECT_EQ(l, tpl.labels) << "template " << t + 1;
    EXPECT_EQ(e, tpl.edges) << "template " << t + 1;
    EXPECT_EQ(std::stoi(cls), tpl.class_label);
    ++t;
  }
  EXPECT_EQ(t, 8u);
}

TEST(Synthetic, ShapeAndBalance) {
  const auto s = generate_synthetic_dataset(3, 20);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.test.size(), 80u);
  for (const auto* ds : {&s.train, &s.test}) {
    int pos = 0;
    for (const auto& g : ds->graphs) pos += g.class_label() == 1;
    EXPECT_EQ(pos, 40);
  }
}

TEST(Synthetic, MotifPresenceByGroup) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = generate_synthetic_dataset(seed, 20);
    for (bool test_split : {false, true}) {
      const auto& ds = test_split ? s.test : s.train;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto t = template_of(i, 20, test_split);
        const bool positive = t == 0 || t == 1 || t == 4 || t == 5;
        EXPECT_EQ(motif_by_enumeration(ds[i]), positive);
        EXPECT_EQ(contains_motif(ds[i]), positive);
        EXPECT_EQ(ds[i].class_label(), positive ? 1 : -1);
      }
    }
  }
}

TEST(Synthetic, NoiseWithinBounds) {
  const auto s = generate_synthetic_dataset(5, 30);
  for (bool test_split : {false, true}) {
    const auto& ds = test_split ? s.test : s.train;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto& tpl = motif_templates()[template_of(i, 30, test_split)];
      const auto extra_nodes = ds[i].num_nodes() - tpl.labels.size();
      EXPECT_GE(extra_nodes, 1u);
      EXPECT_LE(extra_nodes, 3u);
      // each new node brings its attachment edge, plus 1-3 free edges
      const auto extra_edges = ds[i].num_edges() - tpl.edges.size() - extra_nodes;
      EXPECT_GE(extra_edges, 1u);
      EXPECT_LE(extra_edges, 3u);
      for (int l : ds[i].node_labels()) {
        EXPECT_GE(l, 0);
        EXPECT_LE(l, 2);
      }
    }
  }
}

TEST(Synthetic, Deterministic) {
  const auto a = generate_synthetic_dataset(11, 5);
  const auto b = generate_synthetic_dataset(11, 5);
  const auto c = generate_synthetic_dataset(12, 5);
  ASSERT_EQ(a.train.size(), b.train.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_TRUE(a.train[i] == b.train[i]);
    EXPECT_TRUE(a.test[i] == b.test[i]);
    differs = differs || !(a.train[i] == c.train[i]);
  }
  EXPECT_TRUE(differs);
}
