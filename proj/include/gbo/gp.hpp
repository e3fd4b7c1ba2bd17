#ifndef GBO_GP_HPP
#define GBO_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gbo/errors.hpp"

namespace gbo {

inline constexpr double kSigmaMin = 1e-6;

/// Diagonal jitter tried when a plain Cholesky factorization fails: start at
/// `start * mean(diag)` and grow by `factor` up to `max * mean(diag)`.
struct JitterPolicy {
  bool enabled = true;
  double start = 1e-10;
  double factor = 10.0;
  double max = 1e-4;
};

/// Evaluated candidates and their noisy observations.
struct ObservationSet {
  std::vector<std::size_t> indices;
  std::vector<double> y;

  std::size_t size() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }

  void add(std::size_t index, double value) {
    if (std::find(indices.begin(), indices.end(), index) != indices.end())
      throw ParameterError("candidate " + std::to_string(index) + " observed twice");
    indices.push_back(index);
    y.push_back(value);
  }

  double y_max() const {
    if (y.empty()) throw ParameterError("y_max of an empty observation set");
    return *std::max_element(y.begin(), y.end());
  }

  Eigen::VectorXd y_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  }
};

struct Posterior {
  double mean = 0.0;
  double var = 0.0;
};

/// K + sigma^2 I over the observed indices.
template <class Kernel>
Eigen::MatrixXd gram(std::span<const std::size_t> indices, const Kernel& kernel, double sigma) {
  if (sigma < 0.0) throw ParameterError("noise sigma must be non-negative");
  const auto t = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd k(t, t);
  for (Eigen::Index a = 0; a < t; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = kernel(indices[static_cast<std::size_t>(a)], indices[static_cast<std::size_t>(b)]);
      k(a, b) = v;
      k(b, a) = v;
    }
    k(a, a) += sigma * sigma;
  }
  return k;
}

/// Zero-mean GP conditioned on y through a Cholesky factor of K_sigma.
class GaussianProcess {
 public:
  GaussianProcess(const Eigen::MatrixXd& k_sigma, Eigen::VectorXd y, const JitterPolicy& policy = {})
      : y_(std::move(y)) {
    if (k_sigma.rows() != k_sigma.cols() || k_sigma.rows() != y_.size())
      throw ParameterError("GP: Gram matrix and observations disagree in size");
    if (y_.size() == 0) throw ParameterError("GP: no observations");
    llt_.compute(k_sigma);
    if (llt_.info() != Eigen::Success) {
      if (!policy.enabled) throw IllConditionedError("Cholesky factorization failed");
      const double scale = k_sigma.diagonal().mean();
      bool ok = false;
      for (double level = policy.start; level <= policy.max * (1.0 + 1e-12); level *= policy.factor) {
        Eigen::MatrixXd jittered = k_sigma;
        jittered.diagonal().array() += level * scale;
        llt_.compute(jittered);
        if (llt_.info() == Eigen::Success) {
          jitter_ = level * scale;
          ok = true;
          break;
        }
      }
      if (!ok) throw IllConditionedError("Cholesky factorization failed at maximum jitter");
    }
    alpha_ = llt_.solve(y_);
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(y_.size()); }
  double jitter() const noexcept { return jitter_; }

  /// mean = k*^T K_sigma^-1 y, var = k(x*,x*) - k*^T K_sigma^-1 k*, floored at 0.
  Posterior predict(const Eigen::VectorXd& k_star, double k_self) const {
    if (k_star.size() != y_.size()) throw ParameterError("GP: cross-covariance has wrong length");
    Posterior p;
    p.mean = k_star.dot(alpha_);
    Eigen::VectorXd v = llt_.matrixL().solve(k_star);
    p.var = std::max(0.0, k_self - v.squaredNorm());
    return p;
  }

  /// Rows of `k_star` are cross-covariances of several query points.
  std::vector<Posterior> predict_many(const Eigen::MatrixXd& k_star,
                                      const Eigen::VectorXd& k_self) const {
    if (k_star.cols() != y_.size()) throw ParameterError("GP: cross-covariance has wrong width");
    Eigen::VectorXd mean = k_star * alpha_;
    Eigen::MatrixXd v = llt_.matrixL().solve(k_star.transpose());
    Eigen::VectorXd reduce = v.colwise().squaredNorm().transpose();
    std::vector<Posterior> out(static_cast<std::size_t>(k_star.rows()));
    for (Eigen::Index i = 0; i < k_star.rows(); ++i)
      out[static_cast<std::size_t>(i)] = {mean[i], std::max(0.0, k_self[i] - reduce[i])};
    return out;
  }

  /// -1/2 y^T K^-1 y - 1/2 log|K| - t/2 log(2 pi)
  double log_marginal_likelihood() const {
    const double t = static_cast<double>(y_.size());
    double log_det = 0.0;
    const auto& l = llt_.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += std::log(l(i, i));
    return -0.5 * y_.dot(alpha_) - log_det - 0.5 * t * std::log(2.0 * std::numbers::pi);
  }

 private:
  Eigen::VectorXd y_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

template <class Kernel>
Posterior predict(std::size_t candidate, const ObservationSet& obs, const Kernel& kernel,
                  double sigma, const JitterPolicy& policy = {}) {
  if (obs.empty()) throw ParameterError("predict: no observations");
  GaussianProcess gp(gram(obs.indices, kernel, sigma), obs.y_vector(), policy);
  Eigen::VectorXd k_star(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i)
    k_star[static_cast<Eigen::Index>(i)] = kernel(candidate, obs.indices[i]);
  return gp.predict(k_star, kernel(candidate, candidate));
}

template <class Kernel>
double log_marginal_likelihood(const ObservationSet& obs, const Kernel& kernel, double sigma,
                               const JitterPolicy& policy = {}) {
  if (obs.empty()) throw ParameterError("log marginal likelihood: no observations");
  return GaussianProcess(gram(obs.indices, kernel, sigma), obs.y_vector(), policy)
      .log_marginal_likelihood();
}

}  // namespace gbo

#endif  // GBO_GP_HPP
