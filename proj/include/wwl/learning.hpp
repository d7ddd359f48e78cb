#ifndef WWL_LEARNING_HPP
#define WWL_LEARNING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "wwl/graph.hpp"
#include "wwl/kernels.hpp"
#include "wwl/wl.hpp"

namespace wwl {

/// Smooth hinge parameters: different-class pairs are pushed beyond alpha1,
/// same-class pairs inside alpha2; sigma is the width of the quadratic piece.
struct LossConfig {
  double alpha1 = 1.0;
  double alpha2 = 0.5;
  double sigma = 0.1;

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("LossConfig: sigma must be positive");
    if (!(alpha2 > 0.0)) throw std::invalid_argument("LossConfig: alpha2 must be positive");
    if (alpha1 < alpha2) throw std::invalid_argument("LossConfig: alpha1 must be >= alpha2");
    if (alpha1 - sigma < 0.0) throw std::invalid_argument("LossConfig: alpha1 - sigma must be >= 0");
  }
};

/// Which loss a sampled pair uses. `ByClassAgreement` applies V1 to pairs with
/// different labels and V2 to pairs with equal labels; `Transposed` swaps them.
enum class PairRouting { ByClassAgreement, Transposed };

struct SgdConfig {
  double learning_rate = 1e-4;
  int iterations = 500;
  std::uint64_t seed = 0;
  PairRouting routing = PairRouting::ByClassAgreement;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("SgdConfig: learning rate must be positive");
    if (iterations < 1) throw std::invalid_argument("SgdConfig: iterations must be >= 1");
  }
};

/// Ball radius shared by every iteration; the offset b defaults to 1 + epsilon,
/// the smallest value keeping d_W nonnegative on the feasible set.
struct ConstraintConfig {
  double epsilon = 1.0;
  std::optional<double> offset;

  [[nodiscard]] double b() const { return offset.value_or(1.0 + epsilon); }
  void validate() const {
    if (!(epsilon > 0.0) || epsilon > 1.0) throw std::invalid_argument("ConstraintConfig: epsilon must be in (0, 1]");
  }
};

using SparseGradient = PairFeature;

inline double loss_v1(double d, const LossConfig& cfg) {
  if (d >= cfg.alpha1) return 0.0;
  if (d <= cfg.alpha1 - cfg.sigma) return cfg.alpha1 - cfg.sigma / 2 - d;
  return (d - cfg.alpha1) * (d - cfg.alpha1) / (2 * cfg.sigma);
}

inline double loss_v2(double d, const LossConfig& cfg) {
  if (d <= cfg.alpha2) return 0.0;
  if (d >= cfg.alpha2 + cfg.sigma) return d - cfg.alpha2 - cfg.sigma / 2;
  return (d - cfg.alpha2) * (d - cfg.alpha2) / (2 * cfg.sigma);
}

inline double loss_v1(const WeightVector& W, const PairFeature& Z, const LossConfig& cfg) {
  return loss_v1(weighted_distance(W, Z), cfg);
}

inline double loss_v2(const WeightVector& W, const PairFeature& Z, const LossConfig& cfg) {
  return loss_v2(weighted_distance(W, Z), cfg);
}

namespace detail {

inline SparseGradient scaled(const PairFeature& Z, double s) {
  SparseGradient g{Z.H, {}};
  if (s == 0.0) return g;
  g.entries = Z.entries;
  for (auto& e : g.entries) e.value *= s;
  return g;
}

}  // namespace detail

/// dV1/dW. Since d_W decreases along Z, the gradient is a nonnegative multiple of Z.
inline SparseGradient grad_v1(const WeightVector& W, const PairFeature& Z, const LossConfig& cfg) {
  const double d = weighted_distance(W, Z);
  if (d >= cfg.alpha1) return detail::scaled(Z, 0.0);
  if (d <= cfg.alpha1 - cfg.sigma) return detail::scaled(Z, 1.0);
  return detail::scaled(Z, (cfg.alpha1 - d) / cfg.sigma);
}

/// dV2/dW, a nonpositive multiple of Z.
inline SparseGradient grad_v2(const WeightVector& W, const PairFeature& Z, const LossConfig& cfg) {
  const double d = weighted_distance(W, Z);
  if (d <= cfg.alpha2) return detail::scaled(Z, 0.0);
  if (d >= cfg.alpha2 + cfg.sigma) return detail::scaled(Z, -1.0);
  return detail::scaled(Z, -(d - cfg.alpha2) / cfg.sigma);
}

/// Euclidean projection onto C, block by block.
inline void project_in_place(WeightVector& W) {
  for (int h = 1; h <= W.iterations(); ++h) {
    const double dev = W.deviation(h);
    const double eps = W.radius(h);
    if (dev <= eps) continue;
    auto& w = W.block(h);
    const auto& c = W.center(h);
    const double s = eps / dev;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = c[i] + s * (w[i] - c[i]);
  }
}

inline WeightVector project(WeightVector W) {
  project_in_place(W);
  return W;
}

struct LearnResult {
  WeightVector weights;
  std::vector<double> loss_trace;
};

namespace detail {

inline bool uses_v1(int y1, int y2, PairRouting routing) {
  const bool differ = y1 != y2;
  return routing == PairRouting::ByClassAgreement ? differ : !differ;
}

inline void check_training_set(const GraphDataset& ds, const WLRefinement& r, std::span<const std::size_t> train) {
  if (train.empty()) throw std::invalid_argument("weight learning: empty training set");
  bool pos = false, neg = false;
  for (auto i : train) {
    if (i >= ds.size() || i >= r.num_graphs()) throw std::out_of_range("weight learning: index out of range");
    (ds[i].class_label() > 0 ? pos : neg) = true;
  }
  if (!(pos && neg)) throw std::invalid_argument("weight learning: both classes must be present");
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace detail

/// Projected stochastic gradient descent on the pairwise smooth-hinge objective.
///
/// Starts from W = 1. Each step draws an ordered pair of distinct training
/// graphs, takes the V1 or V2 gradient for that pair and projects back onto C.
/// The trace holds the sampled pair's loss before each update.
inline LearnResult sgd_learn(const GraphDataset& ds, const WLRefinement& r, std::span<const std::size_t> train,
                             const LossConfig& loss, const SgdConfig& sgd, const ConstraintConfig& cons) {
  loss.validate();
  sgd.validate();
  cons.validate();
  detail::check_training_set(ds, r, train);
  if (train.size() < 2) throw std::invalid_argument("sgd_learn: need at least two training graphs");

  LearnResult out{WeightVector::ones(r.alphabet_sizes(), cons.epsilon), {}};
  out.weights.set_offset(cons.b());
  out.loss_trace.reserve(static_cast<std::size_t>(sgd.iterations));
  WeightVector& W = out.weights;

  std::mt19937_64 rng(sgd.seed);
  std::uniform_int_distribution<std::size_t> first(0, train.size() - 1);
  std::uniform_int_distribution<std::size_t> second(0, train.size() - 2);
  for (int t = 0; t < sgd.iterations; ++t) {
    const std::size_t a = first(rng);
    std::size_t b = second(rng);
    if (b >= a) ++b;
    const std::size_t i = train[a], j = train[b];
    const auto Z = pair_feature(r, i, j);
    const double d = weighted_distance(W, Z);
    const bool v1 = detail::uses_v1(ds[i].class_label(), ds[j].class_label(), sgd.routing);
    out.loss_trace.push_back(v1 ? loss_v1(d, loss) : loss_v2(d, loss));
    const auto g = v1 ? grad_v1(W, Z, loss) : grad_v2(W, Z, loss);
    if (g.entries.empty()) continue;
    for (const auto& e : g.entries) W.block(e.h)[static_cast<std::size_t>(e.label)] -= sgd.learning_rate * e.value;
    project_in_place(W);
  }
  return out;
}

inline LearnResult sgd_learn(const GraphDataset& ds, const WLRefinement& r, const LossConfig& loss,
                             const SgdConfig& sgd, const ConstraintConfig& cons) {
  const auto all = detail::all_indices(ds.size());
  return sgd_learn(ds, r, all, loss, sgd, cons);
}

/// Mean pairwise loss over all ordered training pairs (including i = j).
inline double pairwise_objective(const GraphDataset& ds, const WLRefinement& r, std::span<const std::size_t> train,
                                 const WeightVector& W, const LossConfig& loss,
                                 PairRouting routing = PairRouting::ByClassAgreement) {
  double s = 0.0;
  for (auto i : train)
    for (auto j : train) {
      const double d = weighted_distance(W, pair_feature(r, i, j));
      s += detail::uses_v1(ds[i].class_label(), ds[j].class_label(), routing) ? loss_v1(d, loss) : loss_v2(d, loss);
    }
  const auto n = static_cast<double>(train.size());
  return s / (n * n);
}

/// Full-batch projected gradient descent: every step averages the gradient
/// over all n^2 ordered training pairs. The trace holds the objective at the
/// start of each step.
inline LearnResult batch_learn(const GraphDataset& ds, const WLRefinement& r, std::span<const std::size_t> train,
                               const LossConfig& loss, const SgdConfig& cfg, const ConstraintConfig& cons) {
  loss.validate();
  cfg.validate();
  cons.validate();
  detail::check_training_set(ds, r, train);
  if (train.size() < 2) throw std::invalid_argument("batch_learn: need at least two training graphs");

  const std::size_t n = train.size();
  // Z is symmetric in its arguments; cache the upper triangle.
  std::vector<PairFeature> cache;
  cache.reserve(n * (n + 1) / 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) cache.push_back(pair_feature(r, train[a], train[b]));
  auto tri = [n](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return a * n - a * (a - 1) / 2 + (b - a);
  };

  LearnResult out{WeightVector::ones(r.alphabet_sizes(), cons.epsilon), {}};
  WeightVector& W = out.weights;
  W.set_offset(cons.b());
  const auto sizes = r.alphabet_sizes();
  std::vector<std::vector<double>> grad(sizes.size());
  const double inv = 1.0 / static_cast<double>(n * n);
  for (int t = 0; t < cfg.iterations; ++t) {
    for (std::size_t h = 0; h < sizes.size(); ++h) grad[h].assign(sizes[h], 0.0);
    double objective = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const auto& Z = cache[tri(a, b)];
        const double d = weighted_distance(W, Z);
        const bool v1 = detail::uses_v1(ds[train[a]].class_label(), ds[train[b]].class_label(), cfg.routing);
        double scale;
        if (v1) {
          objective += loss_v1(d, loss);
          scale = d >= loss.alpha1 ? 0.0 : d <= loss.alpha1 - loss.sigma ? 1.0 : (loss.alpha1 - d) / loss.sigma;
        } else {
          objective += loss_v2(d, loss);
          scale = d <= loss.alpha2 ? 0.0 : d >= loss.alpha2 + loss.sigma ? -1.0 : -(d - loss.alpha2) / loss.sigma;
        }
        if (scale == 0.0) continue;
        for (const auto& e : Z.entries)
          grad[static_cast<std::size_t>(e.h - 1)][static_cast<std::size_t>(e.label)] += scale * e.value;
      }
    out.loss_trace.push_back(objective * inv);
    for (int h = 1; h <= W.iterations(); ++h) {
      auto& w = W.block(h);
      const auto& g = grad[static_cast<std::size_t>(h - 1)];
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * g[k] * inv;
    }
    project_in_place(W);
  }
  return out;
}

inline LearnResult batch_learn(const GraphDataset& ds, const WLRefinement& r, const LossConfig& loss,
                               const SgdConfig& cfg, const ConstraintConfig& cons) {
  const auto all = detail::all_indices(ds.size());
  return batch_learn(ds, r, all, loss, cfg, cons);
}

/// Bounds on the per-pair loss: gradient norm (max ||Z||_2), curvature
/// (max ||Z||_2^2 / sigma) and loss value M.
struct SmoothnessConstants {
  double grad_bound = 0.0;
  double hess_bound = 0.0;
  double loss_bound = 0.0;
};

inline SmoothnessConstants smoothness_constants(std::span<const PairFeature> pairs, const LossConfig& loss, double b) {
  loss.validate();
  if (pairs.empty()) throw std::invalid_argument("smoothness_constants: empty pair set");
  SmoothnessConstants s;
  for (const auto& z : pairs) s.grad_bound = std::max(s.grad_bound, z.norm());
  s.hess_bound = s.grad_bound * s.grad_bound / loss.sigma;
  s.loss_bound = std::max(b - loss.sigma / 2 - loss.alpha2, loss.alpha1 - loss.sigma / 2);
  return s;
}

}  // namespace wwl

#endif  // WWL_LEARNING_HPP
