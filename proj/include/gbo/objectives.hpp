#ifndef GBO_OBJECTIVES_HPP
#define GBO_OBJECTIVES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gbo/errors.hpp"
#include "gbo/graph.hpp"
#include "gbo/random.hpp"

namespace gbo {

namespace hartmann {
inline constexpr std::array<double, 4> alpha{1.0, 1.2, 3.0, 3.2};
// first four columns of the 6-D A and P matrices
inline constexpr double A[4][4] = {
    {10.0, 3.0, 17.0, 3.5}, {0.05, 10.0, 17.0, 0.1}, {3.0, 3.5, 1.7, 10.0}, {17.0, 8.0, 0.05, 10.0}};
inline constexpr double P[4][4] = {{0.1312, 0.1696, 0.5569, 0.0124},
                                   {0.2329, 0.4135, 0.8307, 0.3736},
                                   {0.2348, 0.1451, 0.3522, 0.2883},
                                   {0.4047, 0.8828, 0.8732, 0.5743}};
}  // namespace hartmann

/// Hartmann-4 in its minimization form, -sum_i alpha_i exp(-sum_j A_ij (x_j - P_ij)^2).
inline double hartmann4(std::span<const double> x) {
  if (x.size() != 4) throw ParameterError("hartmann4 takes 4 coordinates");
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double r = x[static_cast<std::size_t>(j)] - hartmann::P[i][j];
      inner += hartmann::A[i][j] * r * r;
    }
    s += hartmann::alpha[static_cast<std::size_t>(i)] * std::exp(-inner);
  }
  return -s;
}

/// Maximization target -Hart(x1..x4) of the four normalized features.
inline double hartmann_objective(std::span<const double> normalized) {
  if (normalized.size() != 4) throw ParameterError("hartmann objective takes 4 normalized features");
  for (double v : normalized)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("hartmann objective: feature outside [0,1]");
  return -hartmann4(normalized);
}

enum class Removal { random, targeted };

inline Removal parse_removal(const std::string& s) {
  if (s == "random") return Removal::random;
  if (s == "targeted") return Removal::targeted;
  throw ParameterError("unknown removal mode '" + s + "'");
}

/// Size of the largest connected component among nodes with alive[v] set.
inline std::size_t largest_component(const Graph& g, const std::vector<char>& alive) {
  const std::size_t n = g.node_count();
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack;
  std::size_t best = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!alive[s] || seen[s]) continue;
    std::size_t size = 0;
    seen[s] = 1;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      ++size;
      for (NodeId v : g.neighbors(u))
        if (alive[v] && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
    best = std::max(best, size);
  }
  return best;
}

/// Connectivity robustness C / (N - N_r) after removing N_r = round(p N) nodes.
/// Targeted removal takes the N_r highest-degree nodes of the original graph
/// (lower index first on ties) and ignores `trials`; random removal averages
/// over `trials` uniformly drawn node sets.
inline double robustness(const Graph& g, Removal mode, double p, std::size_t trials, std::uint64_t seed) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("robustness: removal ratio must lie in (0,1)");
  if (trials < 1) throw ParameterError("robustness: trials must be >= 1");
  const std::size_t n = g.node_count();
  const auto removed = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
  if (removed >= n) throw ParameterError("robustness: removal leaves no nodes");
  const double remaining = static_cast<double>(n - removed);

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (mode == Removal::targeted) {
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
    std::vector<char> alive(n, 1);
    for (std::size_t i = 0; i < removed; ++i) alive[order[i]] = 0;
    return static_cast<double>(largest_component(g, alive)) / remaining;
  }
  Rng rng(seed);
  double total = 0.0;
  std::vector<char> alive(n);
  for (std::size_t t = 0; t < trials; ++t) {
    // partial Fisher-Yates: the first `removed` slots are a uniform subset
    for (std::size_t i = 0; i < removed; ++i) std::swap(order[i], order[i + uniform_index(rng, n - i)]);
    std::fill(alive.begin(), alive.end(), 1);
    for (std::size_t i = 0; i < removed; ++i) alive[order[i]] = 0;
    total += static_cast<double>(largest_component(g, alive));
  }
  return total / static_cast<double>(trials) / remaining;
}

/// Social activity log(d_t2 - d_t) - 1 for a node whose degree grew from d_t to d_t2.
inline double activity(double d_t, double d_t2) {
  if (!(d_t2 > d_t)) throw DomainError("activity: degree must grow");
  return std::log(d_t2 - d_t) - 1.0;
}

}  // namespace gbo

#endif  // GBO_OBJECTIVES_HPP
