#ifndef GBO_GRAPHLETS_HPP
#define GBO_GRAPHLETS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "gbo/graph.hpp"
#include "gbo/random.hpp"

namespace gbo {

inline constexpr int kMinGraphletSize = 3;
inline constexpr int kMaxGraphletSize = 6;

inline void check_graphlet_size(int k) {
  if (k < kMinGraphletSize || k > kMaxGraphletSize)
    throw ParameterError("graphlet size must lie in [3,6], got " + std::to_string(k));
}

/// Bit position of the pair (i, j), i < j, in the upper-triangular adjacency
/// bit-string of a k-node graph (row-major).
constexpr int pair_bit(int k, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * (2 * k - i - 1) / 2 + (j - i - 1);
}

/// Lookup tables for one graphlet size: every adjacency bit-string maps to
/// the dense index of its isomorphism class, and each class carries its
/// canonical form (the minimum bit-string over all node permutations).
class GraphletTable {
 public:
  explicit GraphletTable(int k) : k_(k) {
    check_graphlet_size(k);
    const int bits = k * (k - 1) / 2;
    const std::uint32_t codes = 1u << bits;
    std::vector<std::array<int, kMaxGraphletSize>> perms;
    std::array<int, kMaxGraphletSize> p{};
    std::iota(p.begin(), p.begin() + k, 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.begin() + k));

    std::vector<std::uint32_t> canon(codes, UINT32_MAX);
    std::vector<std::uint32_t> orbit;
    for (std::uint32_t c = 0; c < codes; ++c) {
      if (canon[c] != UINT32_MAX) continue;
      orbit.clear();
      std::uint32_t best = c;
      for (const auto& perm : perms) {
        std::uint32_t img = permute(c, perm);
        orbit.push_back(img);
        best = std::min(best, img);
      }
      for (auto img : orbit) canon[img] = best;
      class_codes_.push_back(best);
    }
    std::sort(class_codes_.begin(), class_codes_.end());
    class_codes_.erase(std::unique(class_codes_.begin(), class_codes_.end()), class_codes_.end());
    raw_to_class_.resize(codes);
    for (std::uint32_t c = 0; c < codes; ++c) {
      auto it = std::lower_bound(class_codes_.begin(), class_codes_.end(), canon[c]);
      raw_to_class_[c] = static_cast<std::uint16_t>(it - class_codes_.begin());
    }
  }

  int k() const noexcept { return k_; }
  std::size_t class_count() const noexcept { return class_codes_.size(); }
  std::uint32_t canonical(std::uint32_t code) const { return class_codes_[raw_to_class_[code]]; }
  std::uint16_t class_index(std::uint32_t code) const { return raw_to_class_[code]; }
  std::span<const std::uint32_t> class_codes() const noexcept { return class_codes_; }

  /// Shared immutable table per size; initialization is thread-safe.
  static const GraphletTable& get(int k) {
    check_graphlet_size(k);
    switch (k) {
      case 3: {
        static const GraphletTable t(3);
        return t;
      }
      case 4: {
        static const GraphletTable t(4);
        return t;
      }
      case 5: {
        static const GraphletTable t(5);
        return t;
      }
      default: {
        static const GraphletTable t(6);
        return t;
      }
    }
  }

 private:
  std::uint32_t permute(std::uint32_t code, const std::array<int, kMaxGraphletSize>& perm) const {
    std::uint32_t out = 0;
    for (int i = 0; i < k_; ++i)
      for (int j = i + 1; j < k_; ++j)
        if (code >> pair_bit(k_, i, j) & 1u) out |= 1u << pair_bit(k_, perm[i], perm[j]);
    return out;
  }

  int k_;
  std::vector<std::uint32_t> class_codes_;
  std::vector<std::uint16_t> raw_to_class_;
};

/// Adjacency bit-string of the subgraph induced on `nodes`. Positions past
/// nodes.size() up to k are padding nodes with no edges.
inline std::uint32_t induced_code(const Graph& g, std::span<const NodeId> nodes, int k) {
  std::uint32_t code = 0;
  const int m = static_cast<int>(nodes.size());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (g.has_edge(nodes[i], nodes[j])) code |= 1u << pair_bit(k, i, j);
  return code;
}

/// Canonical id of a graph with at most 6 nodes (padded with isolated nodes
/// up to 3). Isomorphic inputs map to the same id.
inline std::uint32_t canonical_form(const Graph& small) {
  const auto n = static_cast<int>(small.node_count());
  if (n > kMaxGraphletSize) throw ParameterError("canonical_form supports at most 6 nodes");
  const int k = std::max(n, kMinGraphletSize);
  std::vector<NodeId> nodes(static_cast<std::size_t>(n));
  std::iota(nodes.begin(), nodes.end(), 0);
  return GraphletTable::get(k).canonical(induced_code(small, nodes, k));
}

namespace detail {

// k distinct entries of `pool` in random order; all of them when the pool is
// smaller than k.
inline void draw_distinct(Rng& rng, std::span<const NodeId> pool, int k,
                          std::vector<NodeId>& out) {
  out.clear();
  const std::size_t s = pool.size();
  const auto want = std::min<std::size_t>(static_cast<std::size_t>(k), s);
  while (out.size() < want) {
    NodeId x = pool[uniform_index(rng, s)];
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
}

}  // namespace detail

/// Relative frequencies of induced k-node subgraphs over `samples` uniform
/// draws of k distinct nodes. With a partition, the budget is split across
/// the parts, each part is sampled on its own node subset, and the counts are
/// pooled. The generator is seeded with `seed` alone, so graphs sharing a
/// node set are probed at the same node subsets.
inline Eigen::VectorXd sample_graphlets(
    const Graph& g, int k, std::size_t samples, std::uint64_t seed,
    const std::optional<std::vector<std::vector<NodeId>>>& partition = std::nullopt) {
  const auto& table = GraphletTable::get(k);
  if (samples < 1) throw ParameterError("sample_graphlets: samples must be >= 1");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.class_count()));
  Rng rng(seed);
  std::vector<NodeId> picked;

  auto sample_from = [&](std::span<const NodeId> pool, std::size_t count) {
    for (std::size_t s = 0; s < count; ++s) {
      detail::draw_distinct(rng, pool, k, picked);
      counts[table.class_index(induced_code(g, picked, k))] += 1.0;
    }
  };

  if (!partition || partition->empty()) {
    std::vector<NodeId> all(g.node_count());
    std::iota(all.begin(), all.end(), 0);
    sample_from(all, samples);
  } else {
    const std::size_t parts = partition->size();
    for (std::size_t p = 0; p < parts; ++p) {
      for (NodeId u : (*partition)[p])
        if (u >= g.node_count()) throw ParameterError("partition names a missing node");
      std::size_t count = samples / parts + (p < samples % parts ? 1 : 0);
      sample_from((*partition)[p], count);
    }
  }
  return counts / static_cast<double>(samples);
}

using Sentence = std::vector<std::uint16_t>;

/// Node-rooted corpus: for every node of every graph one sentence of
/// `samples_per_node` graphlet class indices, each graphlet made of the root
/// plus k-1 nodes drawn from its neighborhood (widened breadth-first when the
/// 1-hop neighborhood is too small).
inline std::vector<Sentence> build_corpus(const CandidateSet& set, int k,
                                          std::size_t samples_per_node, std::uint64_t seed) {
  const auto& table = GraphletTable::get(k);
  std::vector<Sentence> corpus;
  std::vector<NodeId> pool, picked, local;
  std::vector<char> seen;
  for (std::size_t gi = 0; gi < set.size(); ++gi) {
    const Graph& g = set.graphs[gi];
    seen.assign(g.node_count(), 0);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      // pool: neighbors of v first, then farther nodes until k-1 candidates
      pool.clear();
      std::fill(seen.begin(), seen.end(), 0);
      seen[v] = 1;
      std::vector<NodeId> frontier{v};
      while (!frontier.empty() && pool.size() + 1 < static_cast<std::size_t>(k)) {
        std::vector<NodeId> next;
        for (NodeId u : frontier)
          for (NodeId w : g.neighbors(u))
            if (!seen[w]) {
              seen[w] = 1;
              next.push_back(w);
            }
        pool.insert(pool.end(), next.begin(), next.end());
        frontier.swap(next);
      }
      Rng rng(derive_seed(seed, {gi, v}));
      Sentence sentence;
      sentence.reserve(samples_per_node);
      for (std::size_t s = 0; s < samples_per_node; ++s) {
        detail::draw_distinct(rng, pool, k - 1, picked);
        local.assign(1, v);
        local.insert(local.end(), picked.begin(), picked.end());
        sentence.push_back(table.class_index(induced_code(g, local, k)));
      }
      corpus.push_back(std::move(sentence));
    }
  }
  return corpus;
}

}  // namespace gbo

#endif  // GBO_GRAPHLETS_HPP
