#ifndef GBO_GENERATORS_HPP
#define GBO_GENERATORS_HPP

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "gbo/graph.hpp"
#include "gbo/random.hpp"

namespace gbo {

/// Erdos-Renyi G(n, p): each unordered pair is drawn independently, in
/// lexicographic pair order, from a generator seeded with `seed`.
inline Graph generate_er(std::size_t n, double p, std::uint64_t seed) {
  if (n < 1) throw ParameterError("generate_er: n must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("generate_er: p must lie in [0,1]");
  Rng rng(seed);
  Graph g(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < p) g.add_edge(u, v);
  return g;
}

/// Barabasi-Albert preferential attachment. The seed core is m isolated
/// nodes; the first added node attaches to all of them, later nodes attach
/// to m distinct targets drawn proportionally to degree.
inline Graph generate_ba(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 1 || m >= n) throw ParameterError("generate_ba: requires 1 <= m < n");
  Rng rng(seed);
  Graph g(n);
  std::vector<NodeId> targets(m);
  for (NodeId i = 0; i < m; ++i) targets[i] = i;
  std::vector<NodeId> repeated;  // each node appears once per incident edge
  repeated.reserve(2 * n * m);
  for (auto source = static_cast<NodeId>(m); source < n; ++source) {
    for (NodeId t : targets) g.add_edge(source, t);
    repeated.insert(repeated.end(), targets.begin(), targets.end());
    repeated.insert(repeated.end(), m, source);
    std::unordered_set<NodeId> chosen;
    targets.clear();
    while (targets.size() < m) {
      NodeId x = repeated[uniform_index(rng, repeated.size())];
      if (chosen.insert(x).second) targets.push_back(x);
    }
  }
  return g;
}

/// Parameter lists for the mixed ER/BA dataset. Graph i of a family takes
/// node_counts[i % N] and its family parameter from index (i / N) % P, so the
/// lists are cycled over their cross product.
struct SynthSpec {
  std::vector<std::size_t> node_counts{20, 30, 40, 50, 60};
  std::vector<double> er_probs{0.1, 0.15, 0.2, 0.25, 0.3};
  std::vector<std::size_t> ba_edges{1, 2, 3, 4, 5};
  std::size_t count_per_family = 250;
  std::uint64_t seed = 0;
};

inline CandidateSet synth_dataset(const SynthSpec& spec) {
  if (spec.node_counts.empty() || spec.er_probs.empty() || spec.ba_edges.empty())
    throw ParameterError("synth_dataset: parameter lists must be non-empty");
  CandidateSet out;
  const std::size_t nn = spec.node_counts.size();
  for (std::size_t i = 0; i < spec.count_per_family; ++i) {
    std::size_t n = spec.node_counts[i % nn];
    double p = spec.er_probs[(i / nn) % spec.er_probs.size()];
    out.graphs.push_back(generate_er(n, p, derive_seed(spec.seed, {0, i})));
    out.ids.push_back("er-" + std::to_string(i));
  }
  for (std::size_t i = 0; i < spec.count_per_family; ++i) {
    std::size_t n = spec.node_counts[i % nn];
    std::size_t m = spec.ba_edges[(i / nn) % spec.ba_edges.size()];
    out.graphs.push_back(generate_ba(n, m, derive_seed(spec.seed, {1, i})));
    out.ids.push_back("ba-" + std::to_string(i));
  }
  return out;
}

}  // namespace gbo

#endif  // GBO_GENERATORS_HPP
