#ifndef WWL_KERNELS_HPP
#define WWL_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wwl/parallel.hpp"
#include "wwl/transport.hpp"
#include "wwl/wl.hpp"

namespace wwl {

struct FeatureEntry {
  int h;      // iteration, 1-based
  int label;  // id in the alphabet of iteration h
  double value;
  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Sparse pair feature Z(G, G'): for every label shared at iteration h the
/// smaller of the two masses, divided by H. Entries are sorted by (h, label).
struct PairFeature {
  int H = 0;
  std::vector<FeatureEntry> entries;

  [[nodiscard]] double sum() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value;
    return s;
  }
  [[nodiscard]] double norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value * e.value;
    return std::sqrt(s);
  }
};

inline PairFeature pair_feature(const WLRefinement& r, std::size_t g1, std::size_t g2) {
  const auto& a = r.histogram(g1);
  const auto& b = r.histogram(g2);
  const int H = r.iterations();
  const double n1 = static_cast<double>(a.num_nodes()), n2 = static_cast<double>(b.num_nodes());
  PairFeature z{H, {}};
  for (int h = 1; h <= H; ++h)
    detail::intersect_counts(a.counts(h), b.counts(h), [&](int label, int c1, int c2) {
      z.entries.push_back({h, label, std::min(c1 / n1, c2 / n2) / H});
    });
  return z;
}

/// Learnable label weights W = [w_1; ...; w_H] with the ball constraints
/// ||w_h - c_h||_2 <= eps_h and the distance offset b.
///
/// Labels beyond a block's size (patterns first seen after training) have
/// weight 1 and sit at the center.
class WeightVector {
 public:
  WeightVector() = default;

  /// All-ones weights with unit centers.
  WeightVector(const std::vector<std::size_t>& alphabet_sizes, std::vector<double> radii, double offset)
      : radii_(std::move(radii)), offset_(offset) {
    if (radii_.size() != alphabet_sizes.size())
      throw std::invalid_argument("WeightVector: one radius per iteration required");
    for (auto n : alphabet_sizes) {
      blocks_.emplace_back(n, 1.0);
      centers_.emplace_back(n, 1.0);
    }
  }

  /// Unit weights with every radius set to eps and b = 1 + eps.
  static WeightVector ones(const std::vector<std::size_t>& alphabet_sizes, double eps) {
    return {alphabet_sizes, std::vector<double>(alphabet_sizes.size(), eps), 1.0 + eps};
  }

  [[nodiscard]] int iterations() const { return static_cast<int>(blocks_.size()); }
  [[nodiscard]] double offset() const { return offset_; }
  void set_offset(double b) { offset_ = b; }
  [[nodiscard]] double radius(int h) const { return radii_.at(static_cast<std::size_t>(h - 1)); }
  [[nodiscard]] const std::vector<double>& radii() const { return radii_; }

  [[nodiscard]] std::vector<double>& block(int h) { return blocks_.at(static_cast<std::size_t>(h - 1)); }
  [[nodiscard]] const std::vector<double>& block(int h) const { return blocks_.at(static_cast<std::size_t>(h - 1)); }
  [[nodiscard]] const std::vector<double>& center(int h) const { return centers_.at(static_cast<std::size_t>(h - 1)); }
  void set_center(int h, std::vector<double> c) {
    if (c.size() != block(h).size()) throw std::invalid_argument("WeightVector: center size mismatch");
    centers_.at(static_cast<std::size_t>(h - 1)) = std::move(c);
  }

  [[nodiscard]] double weight(int h, int label) const {
    const auto& w = block(h);
    return static_cast<std::size_t>(label) < w.size() ? w[static_cast<std::size_t>(label)] : 1.0;
  }

  [[nodiscard]] std::size_t dimension() const {
    std::size_t d = 0;
    for (const auto& b : blocks_) d += b.size();
    return d;
  }

  /// ||w_h - c_h||_2
  [[nodiscard]] double deviation(int h) const {
    const auto& w = block(h);
    const auto& c = center(h);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += (w[i] - c[i]) * (w[i] - c[i]);
    return std::sqrt(s);
  }

  [[nodiscard]] bool feasible(double tol = 1e-12) const {
    for (int h = 1; h <= iterations(); ++h)
      if (deviation(h) > radius(h) + tol) return false;
    return true;
  }

  /// FNV-1a over the raw weight bytes; tags kernel matrices with the weights used.
  [[nodiscard]] std::uint64_t fingerprint() const {
    std::uint64_t x = 1469598103934665603ULL;
    auto mix = [&](double v) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char c : bytes) x = (x ^ c) * 1099511628211ULL;
    };
    mix(offset_);
    for (const auto& b : blocks_)
      for (double v : b) mix(v);
    return x;
  }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<std::vector<double>> blocks_;
  std::vector<std::vector<double>> centers_;
  std::vector<double> radii_;
  double offset_ = 1.0;
};

/// d_W(G, G') = b - <W, Z(G, G')>
inline double weighted_distance(const WeightVector& W, const PairFeature& Z) {
  if (W.iterations() != Z.H) throw std::invalid_argument("weighted_distance: iteration count mismatch");
  double s = 0.0;
  for (const auto& e : Z.entries) s += W.weight(e.h, e.label) * e.value;
  return W.offset() - s;
}

enum class KernelKind { Subtree, OptimalAssignment, Wwl, Weighted };

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Subtree: return "wl";
    case KernelKind::OptimalAssignment: return "wloa";
    case KernelKind::Wwl: return "wwl";
    case KernelKind::Weighted: return "weighted";
  }
  return "?";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "wl") return KernelKind::Subtree;
  if (s == "wloa") return KernelKind::OptimalAssignment;
  if (s == "wwl") return KernelKind::Wwl;
  if (s == "weighted") return KernelKind::Weighted;
  throw std::invalid_argument("unknown kernel kind '" + s + "'");
}

struct KernelMatrix {
  Matrix values;
  KernelKind kind = KernelKind::Wwl;
  int H = 0;
  double gamma = 0.0;
  std::uint64_t weights_fingerprint = 0;

  [[nodiscard]] Eigen::Index size() const { return values.rows(); }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
};

/// WL subtree kernel: (1/H) sum_h <count_h(G), count_h(G')>, the number of
/// shared subtree patterns averaged over iterations.
inline double wl_subtree_kernel(const WLRefinement& r, std::size_t g1, std::size_t g2) {
  const auto& a = r.histogram(g1);
  const auto& b = r.histogram(g2);
  const int H = r.iterations();
  double k = 0.0;
  for (int h = 1; h <= H; ++h)
    detail::intersect_counts(a.counts(h), b.counts(h),
                             [&](int, int c1, int c2) { k += static_cast<double>(c1) * c2; });
  return k / H;
}

/// WL optimal-assignment kernel by histogram intersection, exact because the
/// base kernel is induced by the nested WL label hierarchy.
inline double wl_oa_kernel(const WLRefinement& r, std::size_t g1, std::size_t g2) {
  const auto& a = r.histogram(g1);
  const auto& b = r.histogram(g2);
  const int H = r.iterations();
  double k = 0.0;
  for (int h = 1; h <= H; ++h)
    detail::intersect_counts(a.counts(h), b.counts(h), [&](int, int c1, int c2) { k += std::min(c1, c2); });
  return k / H;
}

inline KernelMatrix laplacian_kernel(const Matrix& D, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("laplacian_kernel: gamma must be positive");
  if (D.rows() != D.cols()) throw std::invalid_argument("laplacian_kernel: distance matrix must be square");
  if ((D - D.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("laplacian_kernel: distance matrix is not symmetric");
  if ((D.array() < -1e-12).any()) throw std::invalid_argument("laplacian_kernel: negative distance");
  KernelMatrix K;
  K.values = (-gamma * D.array()).exp().matrix();
  K.gamma = gamma;
  return K;
}

namespace detail {

template <class F>
Matrix pairwise(std::size_t n, F&& f, int threads) {
  Matrix M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = f(i, j);
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  return M;
}

}  // namespace detail

inline Matrix wwl_distance_matrix(const WLRefinement& r, int threads = 1) {
  return detail::pairwise(
      r.num_graphs(), [&](std::size_t i, std::size_t j) { return i == j ? 0.0 : wwl_distance(r, i, j); }, threads);
}

inline Matrix weighted_distance_matrix(const WLRefinement& r, const WeightVector& W, int threads = 1) {
  return detail::pairwise(
      r.num_graphs(), [&](std::size_t i, std::size_t j) { return weighted_distance(W, pair_feature(r, i, j)); },
      threads);
}

/// Full Gram matrix over every graph of the refinement. `gamma` applies to the
/// Laplacian kinds (wwl, weighted); `W` is required for the weighted kind.
inline KernelMatrix gram_matrix(KernelKind kind, const WLRefinement& r, const WeightVector* W = nullptr,
                                double gamma = 1.0, int threads = 1) {
  KernelMatrix K;
  switch (kind) {
    case KernelKind::Subtree:
      K.values = detail::pairwise(
          r.num_graphs(), [&](std::size_t i, std::size_t j) { return wl_subtree_kernel(r, i, j); }, threads);
      break;
    case KernelKind::OptimalAssignment:
      K.values = detail::pairwise(
          r.num_graphs(), [&](std::size_t i, std::size_t j) { return wl_oa_kernel(r, i, j); }, threads);
      break;
    case KernelKind::Wwl:
      K = laplacian_kernel(wwl_distance_matrix(r, threads), gamma);
      break;
    case KernelKind::Weighted:
      if (W == nullptr) throw std::invalid_argument("gram_matrix: weighted kernel requires weights");
      K = laplacian_kernel(weighted_distance_matrix(r, *W, threads), gamma);
      K.weights_fingerprint = W->fingerprint();
      break;
  }
  K.kind = kind;
  K.H = r.iterations();
  if (kind == KernelKind::Wwl || kind == KernelKind::Weighted) K.gamma = gamma;
  return K;
}

struct PsdReport {
  bool ok = false;
  double min_eigenvalue = 0.0;
};

inline double min_eigenvalue(const Matrix& K) {
  if (K.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(K), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline PsdReport psd_check(const Matrix& K, double tol) {
  const double lmin = min_eigenvalue(K);
  return {lmin >= -tol, lmin};
}

inline PsdReport psd_check(const KernelMatrix& K, double tol) { return psd_check(K.values, tol); }

}  // namespace wwl

#endif  // WWL_KERNELS_HPP
