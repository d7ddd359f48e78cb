#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"
#include "wwl/harness.hpp"

using namespace wwl;
using fixtures::random_dataset;

namespace {

Grids small_grids() {
  Grids g;
  g.H = {1, 2};
  g.C = {0.1, 10.0};
  g.gamma = {1e-2, 1.0};
  g.epsilon = {0.5, 1.0};
  return g;
}

KernelRecipe recipe(KernelKind kind) {
  KernelRecipe r;
  r.kind = kind;
  r.sgd = SgdConfig{0.05, 100, 0};
  return r;
}

// Two label-disjoint families, each sharing one pattern, so separable by every kernel.
GraphDataset separable(int per_class) {
  GraphDataset ds{"sep", {}};
  std::mt19937_64 rng(60);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int cls = i % 2 ? 1 : -1;
    auto g = fixtures::random_graph(rng, 7, 2, cls, i + 1, 0.4);
    std::vector<int> labels;
    for (std::size_t v = 0; v < g.num_nodes(); ++v) labels.push_back(g.label(v) + (cls > 0 ? 0 : 10));
    labels.push_back(cls > 0 ? 5 : 15);  // isolated node: a pattern shared by the whole class
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    ds.graphs.emplace_back(std::move(labels), std::move(edges), cls, i + 1);
  }
  return ds;
}

}  // namespace

TEST(Folds, StratifiedAndBalanced) {
  const auto ds = random_dataset(61, 53, 6, 3);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  const auto fold = stratified_folds(ds, all, 5, 9);
  for (int cls : {-1, 1}) {
    std::vector<int> per(5, 0);
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds[i].class_label() == cls) ++per[static_cast<std::size_t>(fold[i])];
    EXPECT_LE(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()), 1);
  }
  EXPECT_EQ(fold, stratified_folds(ds, all, 5, 9));
  EXPECT_NE(fold, stratified_folds(ds, all, 5, 10));
  EXPECT_THROW(stratified_folds(ds, all, 1, 0), std::invalid_argument);
  EXPECT_THROW(stratified_folds(ds, all, 40, 0), std::invalid_argument);
}

TEST(Folds, IndependentOfDatasetOrder) {
  const auto ds = random_dataset(62, 30, 6, 3);
  auto shuffled = ds;
  std::mt19937_64 rng(62);
  std::shuffle(shuffled.graphs.begin(), shuffled.graphs.end(), rng);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  const auto a = stratified_folds(ds, all, 3, 4), b = stratified_folds(shuffled, all, 3, 4);
  std::map<int, int> by_id;
  for (std::size_t i = 0; i < ds.size(); ++i) by_id[ds[i].graph_id()] = a[i];
  for (std::size_t i = 0; i < shuffled.size(); ++i) EXPECT_EQ(by_id.at(shuffled[i].graph_id()), b[i]);
}

TEST(CrossValidation, SeparableDataIsPerfect) {
  const auto ds = separable(15);
  CvConfig cfg{5, 2, 3, 1, 1};
  for (auto kind : {KernelKind::Subtree, KernelKind::OptimalAssignment, KernelKind::Wwl, KernelKind::Weighted}) {
    const auto res = cross_validate(ds, recipe(kind), small_grids(), cfg);
    EXPECT_DOUBLE_EQ(res.mean, 1.0) << to_string(kind);
    EXPECT_EQ(res.folds.size(), 10u);
    EXPECT_EQ(res.repeat_accuracies.size(), 2u);
  }
}

TEST(CrossValidation, DeterministicAcrossThreadCounts) {
  const auto ds = random_dataset(63, 30, 8, 3);
  const auto a = cross_validate(ds, recipe(KernelKind::Weighted), small_grids(), CvConfig{3, 2, 3, 5, 1});
  const auto b = cross_validate(ds, recipe(KernelKind::Weighted), small_grids(), CvConfig{3, 2, 3, 5, 3});
  EXPECT_EQ(a.repeat_accuracies, b.repeat_accuracies);
  for (std::size_t k = 0; k < a.folds.size(); ++k) {
    EXPECT_EQ(a.folds[k].params.H, b.folds[k].params.H);
    EXPECT_EQ(a.folds[k].params.C, b.folds[k].params.C);
  }
}

TEST(CrossValidation, NothingTouchesTheHeldOutFold) {
  const auto ds = random_dataset(64, 30, 8, 3);
  std::size_t learning = 0, fits = 0;
  std::map<std::pair<int, int>, std::set<std::size_t>> seen_test;
  const auto observer = [&](const CvEvent& e) {
    const std::set<std::size_t> held(e.held_out.begin(), e.held_out.end());
    ASSERT_FALSE(held.empty());
    for (auto i : e.used) ASSERT_EQ(held.count(i), 0u) << "repeat " << e.repeat << " fold " << e.fold;
    (e.stage == CvStage::WeightLearning ? learning : fits)++;
    seen_test[{e.repeat, e.fold}] = held;
  };
  const auto res = cross_validate(ds, recipe(KernelKind::Weighted), small_grids(), CvConfig{3, 2, 3, 7, 1}, observer);
  EXPECT_GT(learning, 0u);
  EXPECT_GT(fits, 0u);
  EXPECT_EQ(seen_test.size(), 6u);
  // every graph is held out exactly once per repeat
  for (int rep = 0; rep < 2; ++rep) {
    std::multiset<std::size_t> covered;
    for (int f = 0; f < 3; ++f) covered.insert(seen_test[{rep, f}].begin(), seen_test[{rep, f}].end());
    EXPECT_EQ(covered.size(), ds.size());
    EXPECT_EQ(std::set<std::size_t>(covered.begin(), covered.end()).size(), ds.size());
  }
  EXPECT_EQ(res.folds.size(), 6u);
}

TEST(CrossValidation, InvariantToGraphOrder) {
  const auto ds = random_dataset(65, 36, 8, 3);
  auto shuffled = ds;
  std::mt19937_64 rng(65);
  std::shuffle(shuffled.graphs.begin(), shuffled.graphs.end(), rng);
  for (auto kind : {KernelKind::Wwl, KernelKind::Weighted}) {
    const auto a = cross_validate(ds, recipe(kind), small_grids(), CvConfig{3, 2, 3, 2, 1});
    const auto b = cross_validate(shuffled, recipe(kind), small_grids(), CvConfig{3, 2, 3, 2, 1});
    EXPECT_EQ(a.repeat_accuracies, b.repeat_accuracies) << to_string(kind);
  }
}

// A dictionary built on every graph and one rebuilt from the training split
// (then extended by the test graphs) give identical learned weights and kernels.
TEST(CrossValidation, GlobalRefinementEqualsPerSplitRefinement) {
  const auto ds = random_dataset(66, 40, 9, 3);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < ds.size(); ++i) (i % 4 == 3 ? test : train).push_back(i);
  GraphDataset train_ds{"tr", {}}, test_ds{"te", {}};
  for (auto i : train) train_ds.graphs.push_back(ds[i]);
  for (auto i : test) test_ds.graphs.push_back(ds[i]);

  const LossConfig loss;
  const SgdConfig sgd{0.05, 2000, 3};
  for (int H : {1, 2, 3}) {
    const auto global = refine(ds, H);
    const auto local = refine(train_ds, H).extended(test_ds);
    const auto Wg = sgd_learn(ds, global, train, loss, sgd, {0.5, std::nullopt}).weights;
    const auto local_train = detail::all_indices(train.size());
    GraphDataset local_ds = train_ds;
    local_ds.graphs.insert(local_ds.graphs.end(), test_ds.graphs.begin(), test_ds.graphs.end());
    const auto Wl = sgd_learn(local_ds, local, local_train, loss, sgd, {0.5, std::nullopt}).weights;
    // local position of dataset index
    std::vector<std::size_t> pos(ds.size());
    for (std::size_t k = 0; k < train.size(); ++k) pos[train[k]] = k;
    for (std::size_t k = 0; k < test.size(); ++k) pos[test[k]] = train.size() + k;
    for (std::size_t i = 0; i < ds.size(); ++i)
      for (auto j : train) {
        EXPECT_NEAR(wwl_distance(global, i, j), wwl_distance(local, pos[i], pos[j]), 1e-15);
        EXPECT_NEAR(weighted_distance(Wg, pair_feature(global, i, j)),
                    weighted_distance(Wl, pair_feature(local, pos[i], pos[j])), 1e-12);
      }
  }
}

TEST(KernelCache, MatchesGramMatrix) {
  const auto ds = random_dataset(67, 16, 8, 3);
  const auto r = refine(ds, 2);
  const auto W = sgd_learn(ds, r, LossConfig{}, SgdConfig{0.05, 200, 1}, {1.0, std::nullopt}).weights;
  for (auto kind : {KernelKind::Subtree, KernelKind::OptimalAssignment, KernelKind::Wwl, KernelKind::Weighted}) {
    const KernelCache cache(ds, kind, {1, 2});
    const Matrix K = cache.kernel(2, 0.3, &W);
    const auto ref = gram_matrix(kind, r, &W, 0.3);
    EXPECT_LE((K - ref.values).cwiseAbs().maxCoeff(), 1e-15) << to_string(kind);
  }
  const KernelCache weighted(ds, KernelKind::Weighted, {2});
  EXPECT_THROW(weighted.kernel(2, 0.3, nullptr), std::invalid_argument);
}

TEST(Synthetic, ReportShape) {
  SyntheticConfig cfg;
  cfg.runs = 2;
  cfg.per_group = 6;
  cfg.sgd.iterations = 200;
  cfg.grids.C = {1.0, 100.0};
  cfg.grids.gamma = {1e-2};
  cfg.grids.epsilon = {1.0};
  cfg.inner_folds = 3;
  const auto rep = run_synthetic_experiment(cfg);
  ASSERT_EQ(rep.runs.size(), 2u);
  EXPECT_NE(rep.runs[0].data_seed, rep.runs[1].data_seed);
  for (const auto& r : rep.runs) {
    EXPECT_GE(r.wwl_accuracy, 0.0);
    EXPECT_LE(r.weighted_accuracy, 1.0);
    EXPECT_FALSE(r.h1_weights.empty());
    for (std::size_t k = 1; k < r.h1_weights.size(); ++k) EXPECT_GE(r.h1_weights[k - 1].weight, r.h1_weights[k].weight);
    EXPECT_EQ(r.weighted_params.H, cfg.H);
  }
  const auto again = run_synthetic_experiment(cfg);
  EXPECT_EQ(again.mean_weighted, rep.mean_weighted);
  EXPECT_EQ(again.runs[1].motif_weight, rep.runs[1].motif_weight);
}

TEST(Runtime, SampleAndRows) {
  const auto s = synthetic_sample(21, 3);
  EXPECT_EQ(s.size(), 21u);
  std::set<int> ids;
  for (const auto& g : s.graphs) ids.insert(g.graph_id());
  EXPECT_EQ(ids.size(), 21u);

  RuntimeConfig cfg;
  cfg.sizes = {20, 40};
  cfg.iterations = {1, 2};
  cfg.default_size = 20;
  cfg.steps = 5;
  const auto rows = run_runtime_experiment(cfg);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.variant == "sgd" || r.variant == "batch");
    EXPECT_GE(r.seconds, 0.0);
  }
}
