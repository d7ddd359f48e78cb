#ifndef WWL_SVM_HPP
#define WWL_SVM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "wwl/kernels.hpp"

namespace wwl {

struct SvmOptions {
  double eps = 1e-3;  // stopping tolerance on the maximal KKT violation
  long max_iter = 10'000'000;
};

/// Binary C-SVM over a precomputed kernel. Decision: f(x) = sum_i coef_i K(x_i, x) - rho,
/// where coef_i = alpha_i y_i over the support vectors.
struct SvmModel {
  std::vector<std::size_t> support;
  std::vector<double> coef;
  std::vector<double> alpha;  // all training points
  double rho = 0.0;
  double C = 1.0;
  std::size_t n_train = 0;
  long iterations = 0;
  double kkt_gap = 0.0;  // m(alpha) - M(alpha) at termination
};

namespace detail {

// SMO with second-order working-set selection, no shrinking.
class SmoSolver {
 public:
  SmoSolver(const Matrix& K, std::span<const int> y, double C) : K_(K), y_(y.begin(), y.end()), C_(C) {
    n_ = y_.size();
    alpha_.assign(n_, 0.0);
    G_.assign(n_, -1.0);
    QD_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) QD_[i] = K_(ix(i), ix(i));
  }

  SvmModel solve(const SvmOptions& opt) {
    SvmModel m;
    long iter = 0;
    double gap = 0.0;
    for (; iter < opt.max_iter; ++iter) {
      std::size_t i = 0, j = 0;
      gap = select(i, j);
      if (gap < opt.eps) break;
      update(i, j);
    }
    m.iterations = iter;
    m.kkt_gap = gap;
    m.alpha = alpha_;
    m.rho = rho();
    m.C = C_;
    m.n_train = n_;
    for (std::size_t i = 0; i < n_; ++i)
      if (alpha_[i] > 0.0) {
        m.support.push_back(i);
        m.coef.push_back(alpha_[i] * y_[i]);
      }
    return m;
  }

 private:
  static constexpr double kTau = 1e-12;

  static Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }
  [[nodiscard]] double Q(std::size_t i, std::size_t j) const { return y_[i] * y_[j] * K_(ix(i), ix(j)); }
  [[nodiscard]] bool upper(std::size_t i) const { return alpha_[i] >= C_; }
  [[nodiscard]] bool lower(std::size_t i) const { return alpha_[i] <= 0.0; }

  // Returns the KKT gap; (i, j) is the working pair when the gap is positive.
  double select(std::size_t& out_i, std::size_t& out_j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n_;
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] == 1) {
        if (!upper(t) && -G_[t] >= gmax) gmax = -G_[t], i = t;
      } else {
        if (!lower(t) && G_[t] >= gmax) gmax = G_[t], i = t;
      }
    }
    if (i == n_) return 0.0;
    std::size_t j = n_;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] == 1) {
        if (lower(t)) continue;
        const double diff = gmax + G_[t];
        gmax2 = std::max(gmax2, G_[t]);
        if (diff > 0) {
          double quad = QD_[i] + QD_[t] - 2.0 * y_[i] * Q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) best = obj, j = t;
        }
      } else {
        if (upper(t)) continue;
        const double diff = gmax - G_[t];
        gmax2 = std::max(gmax2, -G_[t]);
        if (diff > 0) {
          double quad = QD_[i] + QD_[t] + 2.0 * y_[i] * Q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) best = obj, j = t;
        }
      }
    }
    const double gap = gmax + gmax2;
    if (j == n_) return 0.0;
    out_i = i;
    out_j = j;
    return gap;
  }

  void update(std::size_t i, std::size_t j) {
    const double Qij = Q(i, j);
    const double old_i = alpha_[i], old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      double quad = QD_[i] + QD_[j] + 2 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-G_[i] - G_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) aj = 0, ai = diff;
      } else {
        if (ai < 0) ai = 0, aj = -diff;
      }
      if (diff > 0) {
        if (ai > C_) ai = C_, aj = C_ - diff;
      } else {
        if (aj > C_) aj = C_, ai = C_ + diff;
      }
    } else {
      double quad = QD_[i] + QD_[j] - 2 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (G_[i] - G_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C_) {
        if (ai > C_) ai = C_, aj = sum - C_;
      } else {
        if (aj < 0) aj = 0, ai = sum;
      }
      if (sum > C_) {
        if (aj > C_) aj = C_, ai = sum - C_;
      } else {
        if (ai < 0) ai = 0, aj = sum;
      }
    }
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t k = 0; k < n_; ++k) G_[k] += Q(i, k) * di + Q(j, k) * dj;
  }

  [[nodiscard]] double rho() const {
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum = 0.0;
    int nfree = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double yG = y_[i] * G_[i];
      if (upper(i)) {
        if (y_[i] == -1) ub = std::min(ub, yG);
        else lb = std::max(lb, yG);
      } else if (lower(i)) {
        if (y_[i] == 1) ub = std::min(ub, yG);
        else lb = std::max(lb, yG);
      } else {
        ++nfree;
        sum += yG;
      }
    }
    return nfree > 0 ? sum / nfree : (ub + lb) / 2;
  }

  const Matrix& K_;
  std::vector<int> y_;
  double C_;
  std::size_t n_ = 0;
  std::vector<double> alpha_, G_, QD_;
};

}  // namespace detail

inline SvmModel svm_train(const Matrix& K, std::span<const int> y, double C, const SvmOptions& opt = {}) {
  if (K.rows() != K.cols() || static_cast<std::size_t>(K.rows()) != y.size())
    throw std::invalid_argument("svm_train: kernel must be square and match the labels");
  if (!(C > 0.0)) throw std::invalid_argument("svm_train: C must be positive");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw std::invalid_argument("svm_train: labels must be -1 or +1");
  }
  if (!(pos && neg)) throw std::invalid_argument("svm_train: both classes must be present");
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("svm_train: kernel is not symmetric");
  return detail::SmoSolver(K, y, C).solve(opt);
}

/// Decision values for rows of K(test, train).
inline std::vector<double> svm_decision(const SvmModel& m, const Matrix& K_test_train) {
  if (static_cast<std::size_t>(K_test_train.cols()) != m.n_train)
    throw std::invalid_argument("svm_decision: kernel rows must have one column per training point");
  std::vector<double> f(static_cast<std::size_t>(K_test_train.rows()));
  for (Eigen::Index r = 0; r < K_test_train.rows(); ++r) {
    double s = -m.rho;
    for (std::size_t k = 0; k < m.support.size(); ++k) s += m.coef[k] * K_test_train(r, static_cast<Eigen::Index>(m.support[k]));
    f[static_cast<std::size_t>(r)] = s;
  }
  return f;
}

struct SvmPrediction {
  std::vector<int> labels;
  std::vector<double> decision;
};

/// Sign of the decision value; exact zeros go to +1.
inline SvmPrediction svm_predict(const SvmModel& m, const Matrix& K_test_train) {
  SvmPrediction p;
  p.decision = svm_decision(m, K_test_train);
  for (double f : p.decision) p.labels.push_back(f >= 0.0 ? 1 : -1);
  return p;
}

/// Largest KKT violation m(alpha) - M(alpha) of `m` on its training problem.
inline double kkt_violation(const SvmModel& m, const Matrix& K, std::span<const int> y) {
  const std::size_t n = y.size();
  double up = -std::numeric_limits<double>::infinity(), low = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    double g = -1.0;
    for (std::size_t k = 0; k < n; ++k)
      g += y[t] * y[k] * K(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) * m.alpha[k];
    const double v = -y[t] * g;
    const bool in_up = (y[t] == 1 && m.alpha[t] < m.C) || (y[t] == -1 && m.alpha[t] > 0);
    const bool in_low = (y[t] == 1 && m.alpha[t] > 0) || (y[t] == -1 && m.alpha[t] < m.C);
    if (in_up) up = std::max(up, v);
    if (in_low) low = std::min(low, v);
  }
  return std::max(0.0, up - low);
}

/// Adds (|lambda_min| + 1e-9) I when the smallest eigenvalue is below -threshold.
/// Returns the shift applied (0 when none).
inline double regularize_indefinite(Matrix& K, double threshold = 1e-6) {
  const double lmin = min_eigenvalue(K);
  if (lmin >= -threshold) return 0.0;
  const double shift = -lmin + 1e-9;
  K.diagonal().array() += shift;
  return shift;
}

}  // namespace wwl

#endif  // WWL_SVM_HPP
