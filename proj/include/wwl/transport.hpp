#ifndef WWL_TRANSPORT_HPP
#define WWL_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wwl/wl.hpp"

namespace wwl {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Discrete optimal transport instance: min <P, cost> s.t. P 1 = p, P^T 1 = q, P >= 0.
struct TransportProblem {
  Matrix cost;
  Vector p;
  Vector q;
};

struct TransportPlan {
  Matrix plan;
  double objective = 0.0;
};

namespace detail {

// Transportation simplex on the bipartite spanning-tree basis (rows 0..m-1,
// columns m..m+n-1). Entering arc: most negative reduced cost, switching to
// first-negative (Bland) after a run of degenerate pivots.
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& c, const Vector& p, const Vector& q) : c_(c), m_(c.rows()), n_(c.cols()) {
    x_ = Matrix::Zero(m_, n_);
    basic_.assign(static_cast<std::size_t>(m_ * n_), false);
    std::vector<double> s(p.data(), p.data() + m_), d(q.data(), q.data() + n_);
    Eigen::Index i = 0, j = 0;
    for (;;) {
      const double x = std::max(0.0, std::min(s[i], d[j]));
      x_(i, j) = x;
      basic_[idx(i, j)] = true;
      s[i] -= x;
      d[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (j == n_ - 1 || (i < m_ - 1 && s[i] <= d[j])) ++i;
      else ++j;
    }
  }

  TransportPlan solve() {
    const double tol = 1e-12;
    int degenerate_run = 0;
    const long max_pivots = 100000 + 50 * m_ * n_;
    for (long iter = 0; iter < max_pivots; ++iter) {
      potentials();
      Eigen::Index ei = -1, ej = -1;
      double best = -tol;
      const bool bland = degenerate_run > 50;
      for (Eigen::Index i = 0; i < m_ && !(bland && ei >= 0); ++i)
        for (Eigen::Index j = 0; j < n_; ++j) {
          if (basic_[idx(i, j)]) continue;
          const double r = c_(i, j) - u_[i] - v_[j];
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
            if (bland) break;
          }
        }
      if (ei < 0) break;
      degenerate_run = pivot(ei, ej) ? 0 : degenerate_run + 1;
    }
    TransportPlan out;
    out.plan = x_;
    out.objective = (x_.array() * c_.array()).sum();
    return out;
  }

 private:
  [[nodiscard]] std::size_t idx(Eigen::Index i, Eigen::Index j) const { return static_cast<std::size_t>(i * n_ + j); }

  // Tree adjacency over m + n nodes from the current basis.
  [[nodiscard]] std::vector<std::vector<Eigen::Index>> tree() const {
    std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(m_ + n_));
    for (Eigen::Index i = 0; i < m_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j)
        if (basic_[idx(i, j)]) {
          adj[static_cast<std::size_t>(i)].push_back(m_ + j);
          adj[static_cast<std::size_t>(m_ + j)].push_back(i);
        }
    return adj;
  }

  void potentials() {
    u_.assign(static_cast<std::size_t>(m_), 0.0);
    v_.assign(static_cast<std::size_t>(n_), 0.0);
    const auto adj = tree();
    std::vector<bool> seen(static_cast<std::size_t>(m_ + n_), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const auto a = stack.back();
      stack.pop_back();
      for (auto b : adj[static_cast<std::size_t>(a)]) {
        if (seen[static_cast<std::size_t>(b)]) continue;
        seen[static_cast<std::size_t>(b)] = true;
        if (a < m_) v_[static_cast<std::size_t>(b - m_)] = c_(a, b - m_) - u_[static_cast<std::size_t>(a)];
        else u_[static_cast<std::size_t>(b)] = c_(b, a - m_) - v_[static_cast<std::size_t>(a - m_)];
        stack.push_back(b);
      }
    }
  }

  // Returns true when the pivot moved a positive amount of mass.
  bool pivot(Eigen::Index ei, Eigen::Index ej) {
    // Path in the tree from column node (m + ej) to row node ei.
    const auto adj = tree();
    const auto N = static_cast<std::size_t>(m_ + n_);
    std::vector<Eigen::Index> parent(N, -1);
    std::vector<bool> seen(N, false);
    std::vector<Eigen::Index> stack{m_ + ej};
    seen[static_cast<std::size_t>(m_ + ej)] = true;
    while (!stack.empty()) {
      const auto a = stack.back();
      stack.pop_back();
      if (a == ei) break;
      for (auto b : adj[static_cast<std::size_t>(a)]) {
        if (seen[static_cast<std::size_t>(b)]) continue;
        seen[static_cast<std::size_t>(b)] = true;
        parent[static_cast<std::size_t>(b)] = a;
        stack.push_back(b);
      }
    }
    // Walk from ei back to column ej: cells alternate -, +, -, ...
    std::vector<std::pair<Eigen::Index, Eigen::Index>> cycle;  // excluding entering cell
    for (Eigen::Index a = ei; a != m_ + ej; a = parent[static_cast<std::size_t>(a)]) {
      const auto b = parent[static_cast<std::size_t>(a)];
      cycle.emplace_back(a < m_ ? a : b, a < m_ ? b - m_ : a - m_);
    }
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = 0;
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      const double x = x_(cycle[k].first, cycle[k].second);
      if (x < theta) {
        theta = x;
        leave = k;
      }
    }
    x_(ei, ej) += theta;
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      auto& x = x_(cycle[k].first, cycle[k].second);
      x = std::max(0.0, x + (k % 2 == 0 ? -theta : theta));
    }
    x_(cycle[leave].first, cycle[leave].second) = 0.0;
    basic_[idx(ei, ej)] = true;
    basic_[idx(cycle[leave].first, cycle[leave].second)] = false;
    return theta > 0.0;
  }

  const Matrix& c_;
  Eigen::Index m_, n_;
  Matrix x_;
  std::vector<bool> basic_;
  std::vector<double> u_, v_;
};

}  // namespace detail

/// Exact optimal transport by the transportation simplex. Intended as an
/// oracle for small instances; the closed form below is the fast path.
inline TransportPlan lp_ot_solve(const TransportProblem& tp) {
  const auto m = tp.cost.rows(), n = tp.cost.cols();
  if (m == 0 || n == 0) throw std::invalid_argument("lp_ot_solve: empty problem");
  if (tp.p.size() != m || tp.q.size() != n) throw std::invalid_argument("lp_ot_solve: marginal size mismatch");
  if ((tp.p.array() < 0).any() || (tp.q.array() < 0).any()) throw std::invalid_argument("lp_ot_solve: negative mass");
  if (std::abs(tp.p.sum() - tp.q.sum()) > 1e-9) throw std::invalid_argument("lp_ot_solve: infeasible, masses differ");
  if (!tp.cost.allFinite() || (tp.cost.array() < 0).any())
    throw std::invalid_argument("lp_ot_solve: costs must be finite and nonnegative");
  if (m * n > 1'000'000) throw std::invalid_argument("lp_ot_solve: problem too large for the oracle");
  return detail::TransportSimplex(tp.cost, tp.p, tp.q).solve();
}

using MassMap = std::map<int, double>;

/// Wasserstein distance under the discrete ground metric: 1 - sum_v min(mu(v), nu(v)).
inline double wasserstein_discrete(const MassMap& mu, const MassMap& nu) {
  auto total = [](const MassMap& m) {
    double s = 0.0;
    for (auto [k, v] : m) {
      if (v < 0) throw std::invalid_argument("wasserstein_discrete: negative mass");
      s += v;
    }
    return s;
  };
  if (std::abs(total(mu) - 1.0) > 1e-9 || std::abs(total(nu) - 1.0) > 1e-9)
    throw std::invalid_argument("wasserstein_discrete: masses must sum to 1");
  double shared = 0.0;
  auto a = mu.begin();
  auto b = nu.begin();
  while (a != mu.end() && b != nu.end()) {
    if (a->first < b->first) ++a;
    else if (b->first < a->first) ++b;
    else {
      shared += std::min(a->second, b->second);
      ++a;
      ++b;
    }
  }
  return std::max(0.0, 1.0 - shared);
}

namespace detail {

// sum_v min(c1(v)/n1, c2(v)/n2) over two sorted count lists.
template <class F>
void intersect_counts(const std::vector<LabelCount>& x, const std::vector<LabelCount>& y, F&& on_shared) {
  auto a = x.begin();
  auto b = y.begin();
  while (a != x.end() && b != y.end()) {
    if (a->label < b->label) ++a;
    else if (b->label < a->label) ++b;
    else {
      on_shared(a->label, a->count, b->count);
      ++a;
      ++b;
    }
  }
}

inline double shared_mass(const LabelHistogram& g1, const LabelHistogram& g2, int h) {
  const double n1 = static_cast<double>(g1.num_nodes()), n2 = static_cast<double>(g2.num_nodes());
  double s = 0.0;
  intersect_counts(g1.counts(h), g2.counts(h),
                   [&](int, int c1, int c2) { s += std::min(c1 / n1, c2 / n2); });
  return s;
}

}  // namespace detail

/// WWL distance: mean over iterations 1..H of the discrete-metric Wasserstein
/// distance between the graphs' WL label distributions.
inline double wwl_distance(const WLRefinement& r, std::size_t g1, std::size_t g2) {
  const auto& a = r.histogram(g1);
  const auto& b = r.histogram(g2);
  const int H = r.iterations();
  double d = 0.0;
  for (int h = 1; h <= H; ++h) d += std::max(0.0, 1.0 - detail::shared_mass(a, b, h));
  return d / H;
}

/// Maximum-weight perfect matching value of a square similarity matrix
/// (Hungarian method with potentials, O(n^3)).
inline double assignment_oracle(const Matrix& k) {
  if (k.rows() != k.cols()) throw std::invalid_argument("assignment_oracle: matrix must be square");
  const auto n = static_cast<std::size_t>(k.rows());
  if (n == 0) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  // minimize cost = -k; 1-based arrays as in the classic formulation
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -k(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j)
    total += k(static_cast<Eigen::Index>(match[j] - 1), static_cast<Eigen::Index>(j - 1));
  return total;
}

}  // namespace wwl

#endif  // WWL_TRANSPORT_HPP
