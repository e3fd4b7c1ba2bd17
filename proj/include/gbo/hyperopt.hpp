#ifndef GBO_HYPEROPT_HPP
#define GBO_HYPEROPT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "gbo/gp.hpp"
#include "gbo/kernels.hpp"
#include "gbo/nelder_mead.hpp"
#include "gbo/random.hpp"

namespace gbo {

inline std::vector<std::pair<int, int>> default_grid() {
  static const int values[] = {2, 5, 10, 25, 50};
  std::vector<std::pair<int, int>> grid;
  for (int w : values)
    for (int d : values) grid.emplace_back(w, d);
  return grid;
}

struct FitOptions {
  std::vector<std::pair<int, int>> grid = default_grid();
  int restarts = 5;
  std::uint64_t seed = 0;
  bool pin_alpha_zero = false;  // SEARD-only surrogate
  bool pin_betas_zero = false;  // graph-kernel-only surrogate
  NelderMeadOptions nelder_mead{600, 0.5, 1e-6, 1e-4};
};

/// One (grid point, restart) optimization.
struct FitOutcome {
  int window = 0;
  int dim = 0;
  int restart = 0;
  double start_lml = 0.0;
  double lml = 0.0;
};

struct FitResult {
  KernelParams params;
  double lml = -std::numeric_limits<double>::infinity();
  std::vector<FitOutcome> outcomes;
};

// Positivity comes from optimizing logs; these clamps keep the Gram matrix
// finite when the simplex wanders.
namespace fit_bounds {
inline constexpr double length_lo = 1e-3, length_hi = 1e3;
inline constexpr double sigma_hi = 10.0;
inline constexpr double weight_lo = 1e-6, weight_hi = 1e3;
}  // namespace fit_bounds

/// Log marginal likelihood of the combined kernel for a fixed observation set,
/// with the per-dimension squared feature distances precomputed.
class LmlWorkspace {
 public:
  LmlWorkspace(const ObservationSet& obs, const FeatureGroups& groups, bool use_alpha,
               bool use_betas)
      : obs_(obs), groups_(groups), use_alpha_(use_alpha), use_betas_(use_betas) {
    const auto t = static_cast<Eigen::Index>(obs.size());
    y_ = obs.y_vector();
    for (const auto& g : groups) {
      std::vector<Eigen::MatrixXd> dims;
      for (Eigen::Index d = 0; d < g.dim(); ++d) {
        Eigen::MatrixXd sq(t, t);
        for (Eigen::Index a = 0; a < t; ++a)
          for (Eigen::Index b = 0; b < t; ++b) {
            const double r = g.values(static_cast<Eigen::Index>(obs.indices[static_cast<std::size_t>(a)]), d) -
                             g.values(static_cast<Eigen::Index>(obs.indices[static_cast<std::size_t>(b)]), d);
            sq(a, b) = r * r;
          }
        dims.push_back(std::move(sq));
      }
      sqdist_.push_back(std::move(dims));
    }
    graph_ = Eigen::MatrixXd::Zero(t, t);
  }

  void set_graph_kernel(const GraphKernel& k) {
    const auto t = static_cast<Eigen::Index>(obs_.size());
    for (Eigen::Index a = 0; a < t; ++a)
      for (Eigen::Index b = 0; b < t; ++b)
        graph_(a, b) = k(obs_.indices[static_cast<std::size_t>(a)], obs_.indices[static_cast<std::size_t>(b)]);
  }

  Eigen::Index dimension() const {
    Eigen::Index n = 1;  // sigma
    if (use_alpha_) ++n;
    if (use_betas_) {
      n += static_cast<Eigen::Index>(groups_.size());
      for (const auto& g : groups_) n += g.dim();
    }
    return n;
  }

  /// Vector layout: [log l (all groups), log sigma, log alpha, log beta_j],
  /// with pinned blocks omitted.
  KernelParams decode(const Eigen::VectorXd& x, int window, int dim) const {
    KernelParams p;
    p.window = window;
    p.dim = dim;
    Eigen::Index at = 0;
    for (const auto& g : groups_) {
      Eigen::VectorXd l = Eigen::VectorXd::Ones(g.dim());
      if (use_betas_)
        for (Eigen::Index d = 0; d < g.dim(); ++d)
          l[d] = std::clamp(std::exp(x[at++]), fit_bounds::length_lo, fit_bounds::length_hi);
      p.length_scales.push_back(std::move(l));
    }
    p.sigma = std::clamp(std::exp(x[at++]), kSigmaMin, fit_bounds::sigma_hi);
    p.alpha = use_alpha_ ? std::clamp(std::exp(x[at++]), fit_bounds::weight_lo, fit_bounds::weight_hi) : 0.0;
    for (std::size_t j = 0; j < groups_.size(); ++j)
      p.betas.push_back(use_betas_ ? std::clamp(std::exp(x[at++]), fit_bounds::weight_lo,
                                                fit_bounds::weight_hi)
                                   : 0.0);
    return p;
  }

  Eigen::MatrixXd gram(const KernelParams& p) const {
    const auto t = static_cast<Eigen::Index>(obs_.size());
    Eigen::MatrixXd k = p.alpha * graph_;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      if (p.betas[g] == 0.0) continue;
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(t, t);
      for (std::size_t d = 0; d < sqdist_[g].size(); ++d) {
        const double l = p.length_scales[g][static_cast<Eigen::Index>(d)];
        e.noalias() += sqdist_[g][d] * (-0.5 / (l * l));
      }
      k.array() += p.betas[g] * e.array().exp();
    }
    k.diagonal().array() += p.sigma * p.sigma;
    return k;
  }

  double lml(const KernelParams& p) const {
    try {
      return GaussianProcess(gram(p), y_).log_marginal_likelihood();
    } catch (const IllConditionedError&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

  /// Log-uniform start: l in [0.05,5], sigma in [1e-4,0.5], weights in [0.01,10].
  Eigen::VectorXd random_start(Rng& rng) const {
    auto log_uniform = [&](double lo, double hi) {
      return std::log(lo) + uniform01(rng) * (std::log(hi) - std::log(lo));
    };
    Eigen::VectorXd x(dimension());
    Eigen::Index at = 0;
    if (use_betas_)
      for (const auto& g : groups_)
        for (Eigen::Index d = 0; d < g.dim(); ++d) x[at++] = log_uniform(0.05, 5.0);
    x[at++] = log_uniform(1e-4, 0.5);
    if (use_alpha_) x[at++] = log_uniform(0.01, 10.0);
    if (use_betas_)
      for (std::size_t j = 0; j < groups_.size(); ++j) x[at++] = log_uniform(0.01, 10.0);
    return x;
  }

 private:
  const ObservationSet& obs_;
  const FeatureGroups& groups_;
  bool use_alpha_, use_betas_;
  Eigen::VectorXd y_;
  std::vector<std::vector<Eigen::MatrixXd>> sqdist_;
  Eigen::MatrixXd graph_;
};

/// Maximizes the log marginal likelihood: every (window, dim) grid point gets
/// `restarts` Nelder-Mead runs over the log-space continuous block, and the
/// best outcome over all of them is returned. Restart starts are shared across
/// grid points. When alpha is pinned the graph kernel drops out and only the
/// first grid point is fitted.
inline FitResult fit_params(const ObservationSet& obs, const GraphKernelBank& bank,
                            const FeatureGroups& groups, const FitOptions& opt) {
  if (obs.size() < 2) throw ParameterError("fit_params: need at least 2 observations");
  if (opt.grid.empty()) throw ParameterError("fit_params: empty (w,d) grid");
  if (opt.restarts < 1) throw ParameterError("fit_params: restarts must be >= 1");
  if (opt.pin_alpha_zero && opt.pin_betas_zero)
    throw ParameterError("fit_params: cannot pin both kernel weights to zero");
  if (opt.pin_alpha_zero && groups.empty())
    throw ParameterError("fit_params: SEARD-only surrogate needs a feature group");
  const bool use_betas = !opt.pin_betas_zero && !groups.empty();

  LmlWorkspace ws(obs, groups, !opt.pin_alpha_zero, use_betas);
  std::vector<Eigen::VectorXd> starts;
  Rng rng(opt.seed);
  for (int r = 0; r < opt.restarts; ++r) starts.push_back(ws.random_start(rng));

  FitResult best;
  const std::size_t points = opt.pin_alpha_zero ? 1 : opt.grid.size();
  for (std::size_t gi = 0; gi < points; ++gi) {
    const auto [w, d] = opt.grid[gi];
    if (!opt.pin_alpha_zero) ws.set_graph_kernel(bank.at(w, d));
    auto objective = [&](const Eigen::VectorXd& x) { return ws.lml(ws.decode(x, w, d)); };
    for (int r = 0; r < opt.restarts; ++r) {
      const auto& s = starts[static_cast<std::size_t>(r)];
      auto res = nelder_mead(objective, s, opt.nelder_mead);
      best.outcomes.push_back({w, d, r, objective(s), res.value});
      if (res.value > best.lml) {
        best.lml = res.value;
        best.params = ws.decode(res.x, w, d);
      }
    }
  }
  if (!std::isfinite(best.lml)) throw FitError("fit_params: no grid point produced a finite likelihood");
  return best;
}

}  // namespace gbo

#endif  // GBO_HYPEROPT_HPP
