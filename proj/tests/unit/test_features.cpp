#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "gbo/features.hpp"
#include "gbo/generators.hpp"

using namespace gbo;

namespace {

Graph path(std::size_t n) {
  Graph g(n);
  for (NodeId i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph complete(std::size_t n) { return generate_er(n, 1.0, 0); }

Graph relabel(const Graph& g, const std::vector<NodeId>& perm) {
  Graph h(g.node_count());
  for (auto [u, v] : g.edges()) h.add_edge(perm[u], perm[v]);
  return h;
}

// All-pairs hop distances and shortest-path counts by Floyd-Warshall style
// dynamic programming, independent of the BFS used by the library.
struct AllPairs {
  std::vector<std::vector<long>> d;
  std::vector<std::vector<double>> sigma;
};

AllPairs all_pairs(const Graph& g) {
  const std::size_t n = g.node_count();
  const long inf = std::numeric_limits<long>::max() / 4;
  AllPairs ap{std::vector<std::vector<long>>(n, std::vector<long>(n, inf)),
              std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0))};
  for (std::size_t i = 0; i < n; ++i) ap.d[i][i] = 0;
  for (auto [u, v] : g.edges()) ap.d[u][v] = ap.d[v][u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ap.d[i][j] = std::min(ap.d[i][j], ap.d[i][k] + ap.d[k][j]);
  // path counts by increasing distance
  for (std::size_t s = 0; s < n; ++s) {
    ap.sigma[s][s] = 1.0;
    for (long len = 1; len < static_cast<long>(n); ++len)
      for (std::size_t t = 0; t < n; ++t) {
        if (ap.d[s][t] != len) continue;
        for (NodeId w : g.neighbors(static_cast<NodeId>(t)))
          if (ap.d[s][w] == len - 1) ap.sigma[s][t] += ap.sigma[s][w];
      }
  }
  return ap;
}

double brute_force_avg_betweenness(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n < 3) return 0.0;
  const auto ap = all_pairs(g);
  const long inf = std::numeric_limits<long>::max() / 4;
  std::vector<double> bc(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = s + 1; t < n; ++t) {
      if (ap.d[s][t] >= inf) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == s || v == t) continue;
        if (ap.d[s][v] + ap.d[v][t] == ap.d[s][t]) bc[v] += ap.sigma[s][v] * ap.sigma[v][t] / ap.sigma[s][t];
      }
    }
  const double pairs = static_cast<double>(n - 1) * static_cast<double>(n - 2) / 2.0;
  return std::accumulate(bc.begin(), bc.end(), 0.0) / pairs / static_cast<double>(n);
}

double brute_force_avg_closeness(const Graph& g) {
  const std::size_t n = g.node_count();
  const auto ap = all_pairs(g);
  const long inf = std::numeric_limits<long>::max() / 4;
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double sum = 0.0, reach = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      if (t != s && ap.d[s][t] < inf) {
        sum += static_cast<double>(ap.d[s][t]);
        reach += 1.0;
      }
    if (sum > 0.0) total += (reach / sum) * (reach / static_cast<double>(n - 1));
  }
  return total / static_cast<double>(n);
}

}  // namespace

TEST(Extract, CompleteGraphHasUnitDegreeCentrality) {
  EXPECT_DOUBLE_EQ(extract(complete(4), {"avg_degree_centrality"})[0], 1.0);
}

TEST(Extract, PathOnThreeNodesHasBetweennessOneThird) {
  EXPECT_NEAR(extract(path(3), {"avg_betweenness"})[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(brute_force_avg_betweenness(path(3)), 1.0 / 3.0, 1e-15);
}

TEST(Extract, TriangleHasUnitClustering) { EXPECT_DOUBLE_EQ(extract(complete(3), {"avg_clustering"})[0], 1.0); }

TEST(Extract, CountsAndOrder) {
  const Graph g = path(5);
  const auto v = extract(g, {"edge_count", "node_count"});
  EXPECT_EQ(v, (std::vector<double>{4.0, 5.0}));
}

TEST(Extract, BetweennessMatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Graph g = seed % 2 ? generate_er(14, 0.15, seed) : generate_ba(15, 2, seed);
    EXPECT_NEAR(extract(g, {"avg_betweenness"})[0], brute_force_avg_betweenness(g), 1e-12) << seed;
  }
}

TEST(Extract, ClosenessMatchesAllPairsOracleIncludingDisconnectedGraphs) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Graph g = generate_er(16, 0.1, seed);
    EXPECT_NEAR(extract(g, {"avg_closeness"})[0], brute_force_avg_closeness(g), 1e-12) << seed;
  }
}

TEST(Extract, TagFeatureReadsGraphAttribute) {
  Graph g(3);
  g.set_attribute("posts", 12.5);
  EXPECT_DOUBLE_EQ(extract(g, {"tag:posts"})[0], 12.5);
  EXPECT_THROW(extract(g, {"tag:missing"}), ParameterError);
}

TEST(Extract, UnknownFeatureIsRejected) {
  EXPECT_THROW(extract(path(3), {"diameter"}), ParameterError);
  EXPECT_FALSE(is_known_feature("tag:"));
  EXPECT_TRUE(is_known_feature("tag:x"));
}

TEST(Extract, RandomUnrelatedIsReproducibleAndKeyed) {
  const Graph g = path(4);
  const double a = extract(g, {"random_unrelated"}, {5, 1})[0];
  EXPECT_EQ(a, extract(g, {"random_unrelated"}, {5, 1})[0]);
  EXPECT_NE(a, extract(g, {"random_unrelated"}, {5, 2})[0]);
  EXPECT_NE(a, extract(g, {"random_unrelated"}, {6, 1})[0]);
  EXPECT_GE(a, 0.0);
  EXPECT_LT(a, 1.0);
}

TEST(Extract, TopologicalFeaturesArePermutationInvariant) {
  const std::vector<std::string> names{"node_count",      "edge_count",    "avg_degree_centrality",
                                       "avg_betweenness", "avg_closeness", "avg_clustering"};
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Graph g = generate_er(18, 0.2, seed);
    std::vector<NodeId> perm(18);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a = extract(g, names), b = extract(relabel(g, perm), names);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12) << names[i];
  }
}

TEST(Normalize, MinMaxScalesColumns) {
  Eigen::MatrixXd raw(3, 1);
  raw << 2, 4, 6;
  const auto out = normalize(raw);
  EXPECT_DOUBLE_EQ(out(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(out(2, 0), 1.0);
}

TEST(Normalize, ConstantColumnMapsToZero) {
  Eigen::MatrixXd raw(2, 1);
  raw << 5, 5;
  EXPECT_TRUE(normalize(raw).isZero());
}

TEST(Normalize, EmptyMatrixIsRejected) { EXPECT_THROW(normalize(Eigen::MatrixXd(0, 0)), ParameterError); }

TEST(Normalize, RangeAndIdempotence) {
  Rng rng(1);
  Eigen::MatrixXd raw(20, 4);
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (Eigen::Index j = 0; j < raw.cols(); ++j) raw(i, j) = 100.0 * uniform01(rng) - 30.0;
  const auto once = normalize(raw);
  for (Eigen::Index j = 0; j < once.cols(); ++j) {
    EXPECT_DOUBLE_EQ(once.col(j).minCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(once.col(j).maxCoeff(), 1.0);
  }
  EXPECT_TRUE(normalize(once).isApprox(once, 1e-15));
}

TEST(FeatureGroups, BuildsNormalizedGroups) {
  SynthSpec spec;
  spec.count_per_family = 5;
  const auto set = synth_dataset(spec);
  const auto groups = build_feature_groups(
      set, {{"structure", {"node_count", "edge_count"}}, {"noise", {"random_unrelated"}}}, 9);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].dim(), 2);
  EXPECT_EQ(groups[1].values.rows(), 10);
  EXPECT_GE(groups[0].values.minCoeff(), 0.0);
  EXPECT_LE(groups[0].values.maxCoeff(), 1.0);
  EXPECT_THROW(build_feature_groups(set, {{"empty", {}}}), ParameterError);
}
