#ifndef WWL_HARNESS_HPP
#define WWL_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wwl/graph.hpp"
#include "wwl/kernels.hpp"
#include "wwl/learning.hpp"
#include "wwl/parallel.hpp"
#include "wwl/stats.hpp"
#include "wwl/svm.hpp"
#include "wwl/synthetic.hpp"
#include "wwl/wl.hpp"

namespace wwl {

struct Grids {
  std::vector<int> H{1, 2, 3, 4, 5, 6};
  std::vector<double> C{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::vector<double> gamma{1e-4, 1e-3, 1e-2};
  std::vector<double> epsilon{0.1, 0.5, 1.0};
};

struct KernelRecipe {
  KernelKind kind = KernelKind::Wwl;
  LossConfig loss;
  SgdConfig sgd;  // seed is ignored: each learning run derives its own
  std::optional<double> offset;  // b; defaults to 1 + epsilon
};

struct CvConfig {
  int folds = 10;
  int repeats = 10;
  int inner_folds = 5;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct Hyperparams {
  int H = 1;
  double C = 1.0;
  double gamma = 0.0;    // unused by wl / wloa
  double epsilon = 0.0;  // weighted kernel only
};

struct FoldRecord {
  int repeat = 0;
  int fold = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  Hyperparams params;
};

struct CvResult {
  std::vector<FoldRecord> folds;
  std::vector<double> repeat_accuracies;  // one mean accuracy per repeat
  double mean = 0.0;
  double stddev = 0.0;
};

enum class CvStage { WeightLearning, SvmTraining };

/// Reported for every weight-learning run and SVM fit inside cross-validation:
/// `used` are the dataset indices that fed it, `held_out` the outer test fold.
struct CvEvent {
  int repeat = 0;
  int fold = 0;
  CvStage stage = CvStage::SvmTraining;
  std::vector<std::size_t> used;
  std::vector<std::size_t> held_out;
};

using CvObserver = std::function<void(const CvEvent&)>;

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(splitmix(seed) ^ a) ^ b) ^ c);
}

/// Stratified fold ids for `subset` (indices into ds). Within each class the
/// members are ordered by graph id before shuffling, so the assignment does not
/// depend on the order of graphs in the dataset.
inline std::vector<int> stratified_folds(const GraphDataset& ds, const std::vector<std::size_t>& subset, int k,
                                         std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_folds: need at least two folds");
  std::vector<int> fold(subset.size(), 0);
  std::mt19937_64 rng(seed);
  for (int cls : {-1, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t p = 0; p < subset.size(); ++p)
      if (ds[subset[p]].class_label() == cls) members.push_back(p);
    if (members.empty()) continue;
    if (static_cast<std::size_t>(k) > members.size())
      throw std::invalid_argument("stratified_folds: more folds than members of a class");
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return ds[subset[a]].graph_id() < ds[subset[b]].graph_id(); });
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t r = 0; r < members.size(); ++r) fold[members[r]] = static_cast<int>(r % static_cast<std::size_t>(k));
  }
  return fold;
}

/// Per-H WL refinements over a fixed dataset with the unweighted kernel or
/// distance matrices and the pair features the weighted kernel needs.
///
/// Label equality does not depend on which graphs built the dictionary, so a
/// refinement over all graphs gives the same unweighted kernels as one rebuilt
/// on a training split. Weight learning only reads training pairs, and labels
/// never seen in those pairs keep weight 1.
class KernelCache {
 public:
  KernelCache(const GraphDataset& ds, KernelKind kind, const std::vector<int>& H_grid, int threads = 1)
      : kind_(kind), n_(ds.size()) {
    for (int H : H_grid) {
      auto [it, fresh] = refinements_.try_emplace(H, refine(ds, H));
      if (!fresh) continue;
      const auto& r = it->second;
      switch (kind) {
        case KernelKind::Subtree:
        case KernelKind::OptimalAssignment:
          base_[H] = gram_matrix(kind, r, nullptr, 1.0, threads).values;
          break;
        case KernelKind::Wwl:
          base_[H] = wwl_distance_matrix(r, threads);
          break;
        case KernelKind::Weighted: {
          auto& f = features_[H];
          f.reserve(n_ * (n_ + 1) / 2);
          for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i; j < n_; ++j) f.push_back(pair_feature(r, i, j));
          break;
        }
      }
    }
  }

  [[nodiscard]] const WLRefinement& refinement(int H) const { return refinements_.at(H); }
  [[nodiscard]] KernelKind kind() const { return kind_; }

  [[nodiscard]] Matrix kernel(int H, double gamma, const WeightVector* W) const {
    switch (kind_) {
      case KernelKind::Subtree:
      case KernelKind::OptimalAssignment:
        return base_.at(H);
      case KernelKind::Wwl:
        return (-gamma * base_.at(H).array()).exp().matrix();
      case KernelKind::Weighted: {
        if (W == nullptr) throw std::invalid_argument("KernelCache: weighted kernel needs weights");
        const auto& f = features_.at(H);
        Matrix K(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        std::size_t t = 0;
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = i; j < n_; ++j, ++t) {
            const double v = std::exp(-gamma * weighted_distance(*W, f[t]));
            K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
          }
        return K;
      }
    }
    return {};
  }

 private:
  KernelKind kind_;
  std::size_t n_;
  std::map<int, WLRefinement> refinements_;
  std::map<int, Matrix> base_;
  std::map<int, std::vector<PairFeature>> features_;
};

namespace detail {

inline bool uses_gamma(KernelKind k) { return k == KernelKind::Wwl || k == KernelKind::Weighted; }

inline std::vector<Eigen::Index> as_index(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

inline double holdout_accuracy(const Matrix& K, const std::vector<int>& y, const std::vector<std::size_t>& train,
                               const std::vector<std::size_t>& test, double C) {
  const auto tr = as_index(train), te = as_index(test);
  Matrix Ktt = K(tr, tr);
  Matrix Ket = K(te, tr);
  std::vector<int> ytr;
  for (auto i : train) ytr.push_back(y[i]);
  const auto model = svm_train(Ktt, ytr, C);
  const auto pred = svm_predict(model, Ket);
  std::size_t hit = 0;
  for (std::size_t k = 0; k < test.size(); ++k) hit += pred.labels[k] == y[test[k]];
  return static_cast<double>(hit) / static_cast<double>(test.size());
}

struct Scope {
  int repeat = 0;
  int fold = 0;
  const std::vector<std::size_t>* held_out = nullptr;
  const CvObserver* observer = nullptr;

  void report(CvStage stage, const std::vector<std::size_t>& used) const {
    if (observer == nullptr || !*observer) return;
    (*observer)(CvEvent{repeat, fold, stage, used, held_out ? *held_out : std::vector<std::size_t>{}});
  }
};

inline WeightVector learn_weights(const GraphDataset& ds, const WLRefinement& r, const std::vector<std::size_t>& train,
                                  const KernelRecipe& recipe, double eps, std::uint64_t seed, const Scope& scope) {
  scope.report(CvStage::WeightLearning, train);
  SgdConfig sgd = recipe.sgd;
  sgd.seed = seed;
  ConstraintConfig cons{eps, recipe.offset};
  return sgd_learn(ds, r, train, recipe.loss, sgd, cons).weights;
}

inline std::vector<double> eps_grid(KernelKind kind, const Grids& g) {
  return kind == KernelKind::Weighted ? g.epsilon : std::vector<double>{0.0};
}
inline std::vector<double> gamma_grid(KernelKind kind, const Grids& g) {
  return uses_gamma(kind) ? g.gamma : std::vector<double>{0.0};
}

/// Inner k-fold model selection on `train`. Ties keep the first combination in
/// grid order (H, epsilon, gamma, C).
inline Hyperparams select_hyperparams(const GraphDataset& ds, const KernelCache& cache, const KernelRecipe& recipe,
                                      const Grids& grids, const std::vector<std::size_t>& train, int inner_folds,
                                      std::uint64_t seed, const Scope& scope) {
  const auto y = ds.class_labels();
  const auto inner = stratified_folds(ds, train, inner_folds, seed);
  const auto eps = eps_grid(recipe.kind, grids);
  const auto gam = gamma_grid(recipe.kind, grids);
  Hyperparams best;
  double best_score = -1.0;
  for (int H : grids.H) {
    std::vector<double> score(eps.size() * gam.size() * grids.C.size(), 0.0);
    for (int f = 0; f < inner_folds; ++f) {
      std::vector<std::size_t> tr, va;
      for (std::size_t p = 0; p < train.size(); ++p) (inner[p] == f ? va : tr).push_back(train[p]);
      for (std::size_t e = 0; e < eps.size(); ++e) {
        WeightVector W;
        if (recipe.kind == KernelKind::Weighted)
          W = learn_weights(ds, cache.refinement(H), tr, recipe, eps[e],
                            mix_seed(seed, static_cast<std::uint64_t>(H), e, static_cast<std::uint64_t>(f) + 1), scope);
        for (std::size_t g = 0; g < gam.size(); ++g) {
          const Matrix K = cache.kernel(H, gam[g], recipe.kind == KernelKind::Weighted ? &W : nullptr);
          for (std::size_t c = 0; c < grids.C.size(); ++c) {
            scope.report(CvStage::SvmTraining, tr);
            score[(e * gam.size() + g) * grids.C.size() + c] += holdout_accuracy(K, y, tr, va, grids.C[c]);
          }
        }
      }
    }
    for (std::size_t e = 0; e < eps.size(); ++e)
      for (std::size_t g = 0; g < gam.size(); ++g)
        for (std::size_t c = 0; c < grids.C.size(); ++c) {
          const double s = score[(e * gam.size() + g) * grids.C.size() + c];
          if (s > best_score + 1e-12) {
            best_score = s;
            best = {H, grids.C[c], gam[g], eps[e]};
          }
        }
  }
  return best;
}

/// Selects hyperparameters on `train`, refits on all of it and scores `test`.
inline FoldRecord fit_and_score(const GraphDataset& ds, const KernelCache& cache, const KernelRecipe& recipe,
                                const Grids& grids, const std::vector<std::size_t>& train,
                                const std::vector<std::size_t>& test, int inner_folds, std::uint64_t seed,
                                const Scope& scope) {
  FoldRecord rec;
  rec.params = select_hyperparams(ds, cache, recipe, grids, train, inner_folds, mix_seed(seed, 11), scope);
  WeightVector W;
  if (recipe.kind == KernelKind::Weighted)
    W = learn_weights(ds, cache.refinement(rec.params.H), train, recipe, rec.params.epsilon, mix_seed(seed, 12), scope);
  const Matrix K = cache.kernel(rec.params.H, rec.params.gamma, recipe.kind == KernelKind::Weighted ? &W : nullptr);
  scope.report(CvStage::SvmTraining, train);
  rec.accuracy = holdout_accuracy(K, ds.class_labels(), train, test, rec.params.C);
  rec.n_test = test.size();
  return rec;
}

}  // namespace detail

/// Repeated stratified k-fold cross-validation with nested model selection.
/// Weight learning and selection see only the outer training portion.
inline CvResult cross_validate(const GraphDataset& ds, const KernelRecipe& recipe, const Grids& grids,
                               const CvConfig& cfg, const CvObserver& observer = {}) {
  if (cfg.repeats < 1) throw std::invalid_argument("cross_validate: repeats must be >= 1");
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  // validates fold count against class sizes up front
  (void)stratified_folds(ds, all, cfg.folds, cfg.seed);
  const KernelCache cache(ds, recipe.kind, grids.H, cfg.threads);

  struct Task {
    int repeat, fold;
    std::vector<std::size_t> train, test;
  };
  std::vector<Task> tasks;
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    const auto fold = stratified_folds(ds, all, cfg.folds, mix_seed(cfg.seed, 1, static_cast<std::uint64_t>(rep)));
    for (int f = 0; f < cfg.folds; ++f) {
      Task t{rep, f, {}, {}};
      for (std::size_t i = 0; i < ds.size(); ++i) (fold[i] == f ? t.test : t.train).push_back(i);
      // graph-id order keeps results independent of dataset order
      auto by_id = [&](std::size_t a, std::size_t b) { return ds[a].graph_id() < ds[b].graph_id(); };
      std::sort(t.train.begin(), t.train.end(), by_id);
      std::sort(t.test.begin(), t.test.end(), by_id);
      tasks.push_back(std::move(t));
    }
  }

  std::vector<FoldRecord> records(tasks.size());
  std::mutex observer_mutex;
  CvObserver guarded;
  if (observer)
    guarded = [&](const CvEvent& e) {
      std::lock_guard lock(observer_mutex);
      observer(e);
    };
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t k) {
    const auto& t = tasks[k];
    detail::Scope scope{t.repeat, t.fold, &t.test, &guarded};
    auto rec = detail::fit_and_score(ds, cache, recipe, grids, t.train, t.test, cfg.inner_folds,
                                     mix_seed(cfg.seed, 2, static_cast<std::uint64_t>(t.repeat),
                                              static_cast<std::uint64_t>(t.fold)),
                                     scope);
    rec.repeat = t.repeat;
    rec.fold = t.fold;
    records[k] = rec;
  });

  CvResult out;
  out.folds = std::move(records);
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    double hit = 0.0, total = 0.0;
    for (const auto& r : out.folds)
      if (r.repeat == rep) {
        hit += r.accuracy * static_cast<double>(r.n_test);
        total += static_cast<double>(r.n_test);
      }
    out.repeat_accuracies.push_back(hit / total);
  }
  out.mean = mean(out.repeat_accuracies);
  out.stddev = stddev(out.repeat_accuracies);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic motif experiment

struct LabelWeight {
  std::string pattern;
  int label = 0;
  double weight = 1.0;
};

struct SyntheticConfig {
  int runs = 10;
  std::size_t per_group = 20;
  NoiseConfig noise;
  std::array<MotifTemplate, 8> templates = motif_templates();
  int H = 2;
  LossConfig loss;
  SgdConfig sgd{0.05, 5000, 0, PairRouting::ByClassAgreement};
  std::optional<double> offset;
  Grids grids{{2}, {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}, {1e-4, 1e-3, 1e-2}, {0.1, 0.5, 1.0}};
  int inner_folds = 5;
  std::uint64_t seed = 0;
};

struct SyntheticRun {
  std::uint64_t data_seed = 0;
  double wwl_accuracy = 0.0;
  double weighted_accuracy = 0.0;
  Hyperparams wwl_params;
  Hyperparams weighted_params;
  std::vector<LabelWeight> h1_weights;  // sorted by weight, descending
  double motif_weight = 1.0;            // weight of the (1,[0,0]) pattern
  double median_weight = 1.0;
};

struct SyntheticReport {
  std::vector<SyntheticRun> runs;
  double mean_wwl = 0.0;
  double mean_weighted = 0.0;
  int motif_above_median = 0;
};

/// The h = 1 pattern of the motif's centre: a label-1 node whose only neighbors are two 0s.
inline const WLSignature& motif_signature() {
  static const WLSignature sig{1, {0, 0}};
  return sig;
}

inline std::vector<LabelWeight> iteration_weights(const WLRefinement& r, const WeightVector& W, int h) {
  std::vector<LabelWeight> out;
  const auto& alpha = r.alphabet(h);
  for (std::size_t id = 0; id < alpha.size(); ++id)
    out.push_back({alpha.key(static_cast<int>(id)).str(), static_cast<int>(id), W.weight(h, static_cast<int>(id))});
  std::stable_sort(out.begin(), out.end(), [](const LabelWeight& a, const LabelWeight& b) { return a.weight > b.weight; });
  return out;
}

inline SyntheticRun run_synthetic_once(const SyntheticConfig& cfg, std::uint64_t data_seed) {
  const auto split = generate_synthetic_dataset(data_seed, cfg.per_group, cfg.noise, cfg.templates);
  GraphDataset all{"SYNTH", split.train.graphs};
  all.graphs.insert(all.graphs.end(), split.test.graphs.begin(), split.test.graphs.end());
  std::vector<std::size_t> train(split.train.size()), test(split.test.size());
  std::iota(train.begin(), train.end(), 0);
  std::iota(test.begin(), test.end(), split.train.size());

  SyntheticRun run;
  run.data_seed = data_seed;
  Grids grids = cfg.grids;
  grids.H = {cfg.H};
  detail::Scope scope;
  for (KernelKind kind : {KernelKind::Wwl, KernelKind::Weighted}) {
    KernelRecipe recipe{kind, cfg.loss, cfg.sgd, cfg.offset};
    const KernelCache cache(all, kind, grids.H);
    const auto rec =
        detail::fit_and_score(all, cache, recipe, grids, train, test, cfg.inner_folds, mix_seed(data_seed, 3), scope);
    if (kind == KernelKind::Wwl) {
      run.wwl_accuracy = rec.accuracy;
      run.wwl_params = rec.params;
    } else {
      run.weighted_accuracy = rec.accuracy;
      run.weighted_params = rec.params;
      // the weights behind the reported accuracy, relearned for inspection
      const auto& r = cache.refinement(cfg.H);
      const auto W = detail::learn_weights(all, r, train, recipe, rec.params.epsilon, mix_seed(mix_seed(data_seed, 3), 12),
                                           scope);
      run.h1_weights = iteration_weights(r, W, 1);
      // patterns that occur only in the test groups never get a gradient
      std::vector<double> seen;
      std::vector<bool> in_train(r.alphabet(1).size(), false);
      for (auto i : train)
        for (const auto& lc : r.histogram(i).counts(1)) in_train[static_cast<std::size_t>(lc.label)] = true;
      for (const auto& lw : run.h1_weights)
        if (in_train[static_cast<std::size_t>(lw.label)]) seen.push_back(lw.weight);
      std::sort(seen.begin(), seen.end());
      if (!seen.empty()) {
        const auto m = seen.size();
        run.median_weight = m % 2 ? seen[m / 2] : 0.5 * (seen[m / 2 - 1] + seen[m / 2]);
      }
      if (auto id = r.alphabet(1).find(motif_signature())) run.motif_weight = W.weight(1, *id);
    }
  }
  return run;
}

inline SyntheticReport run_synthetic_experiment(const SyntheticConfig& cfg) {
  SyntheticReport rep;
  for (int k = 0; k < cfg.runs; ++k) {
    rep.runs.push_back(run_synthetic_once(cfg, mix_seed(cfg.seed, 4, static_cast<std::uint64_t>(k))));
    const auto& r = rep.runs.back();
    rep.mean_wwl += r.wwl_accuracy / cfg.runs;
    rep.mean_weighted += r.weighted_accuracy / cfg.runs;
    rep.motif_above_median += r.motif_weight > r.median_weight;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Runtime comparison of stochastic and full-batch learning

struct RuntimeConfig {
  std::vector<std::size_t> sizes{50, 100, 200, 400};
  std::vector<int> iterations{1, 2, 3, 4};
  std::size_t default_size = 100;
  int default_iterations = 2;
  int steps = 500;  // T for both variants
  LossConfig loss;
  double learning_rate = 1e-4;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
};

struct RuntimeRow {
  std::string variant;  // "sgd" or "batch"
  std::size_t N = 0;
  int H = 0;
  double seconds = 0.0;
};

/// N synthetic graphs drawn round-robin from the eight template groups.
inline GraphDataset synthetic_sample(std::size_t N, std::uint64_t seed, const NoiseConfig& noise = {}) {
  const std::size_t per_group = (N + 7) / 8;
  const auto split = generate_synthetic_dataset(seed, per_group, noise);
  GraphDataset out{"SYNTH", {}};
  for (std::size_t k = 0; out.size() < N; ++k) {
    const std::size_t group = k % 8, member = k / 8;
    const auto& src = group < 4 ? split.train : split.test;
    out.graphs.push_back(src.graphs[(group % 4) * per_group + member]);
  }
  return out;
}

inline std::vector<RuntimeRow> run_runtime_experiment(const RuntimeConfig& cfg) {
  std::vector<std::pair<std::size_t, int>> points;
  for (auto N : cfg.sizes) points.emplace_back(N, cfg.default_iterations);
  for (int H : cfg.iterations)
    if (std::find(points.begin(), points.end(), std::pair{cfg.default_size, H}) == points.end())
      points.emplace_back(cfg.default_size, H);

  std::vector<RuntimeRow> rows;
  using clock = std::chrono::steady_clock;
  for (auto [N, H] : points) {
    const auto ds = synthetic_sample(N, mix_seed(cfg.seed, 5, N));
    const auto r = refine(ds, H);
    const SgdConfig sgd{cfg.learning_rate, cfg.steps, mix_seed(cfg.seed, 6, N, static_cast<std::uint64_t>(H)),
                        PairRouting::ByClassAgreement};
    const ConstraintConfig cons{cfg.epsilon, std::nullopt};
    auto t0 = clock::now();
    (void)sgd_learn(ds, r, cfg.loss, sgd, cons);
    auto t1 = clock::now();
    rows.push_back({"sgd", N, H, std::chrono::duration<double>(t1 - t0).count()});
    t0 = clock::now();
    (void)batch_learn(ds, r, cfg.loss, sgd, cons);
    t1 = clock::now();
    rows.push_back({"batch", N, H, std::chrono::duration<double>(t1 - t0).count()});
  }
  return rows;
}

}  // namespace wwl

#endif  // WWL_HARNESS_HPP
