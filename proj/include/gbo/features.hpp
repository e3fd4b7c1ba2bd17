#ifndef GBO_FEATURES_HPP
#define GBO_FEATURES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "gbo/graph.hpp"
#include "gbo/random.hpp"

namespace gbo {

// Centralities use the normalized definitions, so every topological feature
// except the two counts already lies in [0,1] before min-max scaling.
namespace centrality {

inline double average_degree(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n == 1) return 1.0;
  return 2.0 * static_cast<double>(g.edge_count()) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
}

/// Brandes betweenness, normalized by (n-1)(n-2) over double-counted pairs.
inline std::vector<double> betweenness(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> bc(n, 0.0);
  std::vector<std::size_t> order;
  std::vector<std::vector<NodeId>> preds(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<long> dist(n);
  order.reserve(n);
  for (NodeId s = 0; s < n; ++s) {
    order.clear();
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<NodeId> queue{s};
    while (!queue.empty()) {
      NodeId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (NodeId w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      NodeId w = static_cast<NodeId>(*it);
      for (NodeId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  if (n > 2) {
    const double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
    for (auto& b : bc) b *= scale;
  } else {
    std::fill(bc.begin(), bc.end(), 0.0);
  }
  return bc;
}

/// Closeness over the reachable set, scaled by the reachable fraction so
/// unreachable pairs contribute nothing.
inline std::vector<double> closeness(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> out(n, 0.0);
  std::vector<long> dist(n);
  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::deque<NodeId> queue{s};
    double total = 0.0;
    std::size_t reached = 1;
    while (!queue.empty()) {
      NodeId v = queue.front();
      queue.pop_front();
      for (NodeId w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          total += static_cast<double>(dist[w]);
          ++reached;
          queue.push_back(w);
        }
      }
    }
    if (total > 0.0 && n > 1) {
      const double r1 = static_cast<double>(reached - 1);
      out[s] = (r1 / total) * (r1 / static_cast<double>(n - 1));
    }
  }
  return out;
}

inline std::vector<double> clustering(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> out(n, 0.0);
  for (NodeId u = 0; u < n; ++u) {
    auto nb = g.neighbors(u);
    const std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (g.has_edge(nb[i], nb[j])) ++links;
    out[u] = 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace centrality

/// Identifies the graph being featurized; only `random_unrelated` uses it.
struct FeatureContext {
  std::uint64_t seed = 0;
  std::size_t graph_index = 0;
};

inline bool is_known_feature(const std::string& name) {
  static const char* known[] = {"node_count",      "edge_count",  "avg_degree_centrality",
                                "avg_betweenness", "avg_closeness", "avg_clustering",
                                "random_unrelated"};
  for (const char* k : known)
    if (name == k) return true;
  return name.rfind("tag:", 0) == 0 && name.size() > 4;
}

/// Feature vector in the order of `names`. `tag:<name>` reads the graph
/// attribute <name>; `random_unrelated` is a uniform draw keyed on
/// (context.seed, context.graph_index).
inline std::vector<double> extract(const Graph& g, const std::vector<std::string>& names,
                                   const FeatureContext& ctx = {}) {
  std::vector<double> out;
  out.reserve(names.size());
  for (const auto& name : names) {
    if (name == "node_count") {
      out.push_back(static_cast<double>(g.node_count()));
    } else if (name == "edge_count") {
      out.push_back(static_cast<double>(g.edge_count()));
    } else if (name == "avg_degree_centrality") {
      out.push_back(centrality::average_degree(g));
    } else if (name == "avg_betweenness") {
      out.push_back(centrality::mean(centrality::betweenness(g)));
    } else if (name == "avg_closeness") {
      out.push_back(centrality::mean(centrality::closeness(g)));
    } else if (name == "avg_clustering") {
      out.push_back(centrality::mean(centrality::clustering(g)));
    } else if (name == "random_unrelated") {
      Rng rng(derive_seed(ctx.seed, {0xD157AC7, ctx.graph_index}));
      out.push_back(uniform01(rng));
    } else if (name.rfind("tag:", 0) == 0 && name.size() > 4) {
      auto v = g.attribute(name.substr(4));
      if (!v) throw ParameterError("graph has no attribute '" + name.substr(4) + "'");
      out.push_back(*v);
    } else {
      throw ParameterError("unknown feature '" + name + "'");
    }
  }
  return out;
}

inline Eigen::MatrixXd extract_matrix(const CandidateSet& set,
                                      const std::vector<std::string>& names,
                                      std::uint64_t seed = 0) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(set.size()),
                    static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto row = extract(set.graphs[i], names, {seed, i});
    for (std::size_t j = 0; j < row.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

/// Column-wise min-max scaling to [0,1]; constant columns become 0.
inline Eigen::MatrixXd normalize(const Eigen::MatrixXd& raw) {
  if (raw.size() == 0) throw ParameterError("normalize: empty feature matrix");
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double lo = raw.col(j).minCoeff();
    const double hi = raw.col(j).maxCoeff();
    if (hi > lo)
      out.col(j) = ((raw.col(j).array() - lo) / (hi - lo)).matrix();
    else
      out.col(j).setZero();
  }
  return out;
}

struct FeatureGroup {
  std::string name;
  std::vector<std::string> features;
  Eigen::MatrixXd values;  // one normalized row per candidate

  Eigen::Index dim() const { return values.cols(); }
};

using FeatureGroups = std::vector<FeatureGroup>;

struct FeatureGroupSpec {
  std::string name;
  std::vector<std::string> features;
};

inline FeatureGroups build_feature_groups(const CandidateSet& set,
                                          const std::vector<FeatureGroupSpec>& specs,
                                          std::uint64_t seed = 0) {
  FeatureGroups out;
  for (const auto& s : specs) {
    if (s.features.empty()) throw ParameterError("feature group '" + s.name + "' is empty");
    out.push_back({s.name, s.features, normalize(extract_matrix(set, s.features, seed))});
  }
  return out;
}

}  // namespace gbo

#endif  // GBO_FEATURES_HPP
