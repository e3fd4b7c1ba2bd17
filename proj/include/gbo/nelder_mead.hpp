#ifndef GBO_NELDER_MEAD_HPP
#define GBO_NELDER_MEAD_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "gbo/errors.hpp"

namespace gbo {

struct NelderMeadOptions {
  int max_evals = 1000;
  double initial_step = 0.5;  // simplex edge along each axis
  double f_tol = 1e-8;
  double x_tol = 1e-8;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

/// Downhill simplex maximizing `f` (reflection 1, expansion 2, contraction
/// 1/2, shrink 1/2). Non-finite objective values rank below every finite one.
/// The start point is a simplex vertex, so the result is never worse than it.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& start,
                                    const NelderMeadOptions& opt = {}) {
  const Eigen::Index n = start.size();
  if (n < 1) throw ParameterError("nelder_mead: dimension must be >= 1");
  int evals = 0;
  // minimize the negated objective
  auto cost = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  vals[0] = cost(start);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[static_cast<std::size_t>(i + 1)][i] += opt.initial_step;
    vals[static_cast<std::size_t>(i + 1)] = cost(pts[static_cast<std::size_t>(i + 1)]);
  }
  std::vector<std::size_t> order(pts.size());

  while (evals < opt.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    {
      std::vector<Eigen::VectorXd> p2;
      std::vector<double> v2;
      for (auto i : order) {
        p2.push_back(pts[i]);
        v2.push_back(vals[i]);
      }
      pts.swap(p2);
      vals.swap(v2);
    }
    double f_spread = 0.0, x_spread = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      f_spread = std::max(f_spread, std::abs(vals[i] - vals[0]));
      x_spread = std::max(x_spread, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
    }
    if (std::isfinite(vals.back()) && f_spread <= opt.f_tol && x_spread <= opt.x_tol) break;

    const std::size_t worst = pts.size() - 1;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < worst; ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);

    Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = cost(xr);
    if (fr < vals[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = cost(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[worst - 1]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    // contraction: outside if the reflection improved on the worst point
    const bool outside = fr < vals[worst];
    Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                 : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = cost(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
      vals[i] = cost(pts[i]);
    }
  }
  auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  NelderMeadResult r;
  r.x = pts[best];
  r.value = std::isfinite(vals[best]) ? -vals[best] : -std::numeric_limits<double>::infinity();
  r.evaluations = evals;
  return r;
}

/// Runs nelder_mead from every start and keeps the best outcome (earliest on ties).
inline NelderMeadResult nelder_mead_multistart(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const std::vector<Eigen::VectorXd>& starts, const NelderMeadOptions& opt = {}) {
  if (starts.empty()) throw ParameterError("nelder_mead_multistart: no starts");
  NelderMeadResult best;
  int total = 0;
  for (const auto& s : starts) {
    auto r = nelder_mead(f, s, opt);
    total += r.evaluations;
    if (best.x.size() == 0 || r.value > best.value) best = std::move(r);
  }
  best.evaluations = total;
  return best;
}

}  // namespace gbo

#endif  // GBO_NELDER_MEAD_HPP
