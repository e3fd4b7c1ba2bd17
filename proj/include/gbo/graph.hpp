#ifndef GBO_GRAPH_HPP
#define GBO_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gbo/errors.hpp"

namespace gbo {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph with optional integer node tags and real-valued
/// graph attributes. Neighbor lists are kept sorted so equality and edge
/// queries do not depend on insertion order.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t node_count) : adj_(node_count) {}

  static Graph from_edges(std::size_t node_count, std::span<const Edge> edges) {
    Graph g(node_count);
    for (auto [u, v] : edges) g.add_edge(u, v);
    return g;
  }

  std::size_t node_count() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  void add_edge(NodeId u, NodeId v) {
    if (u == v) throw ParameterError("self-loop on node " + std::to_string(u));
    if (u >= node_count() || v >= node_count())
      throw ParameterError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                           ") out of range for " + std::to_string(node_count()) +
                           " nodes");
    if (has_edge(u, v))
      throw ParameterError("duplicate edge (" + std::to_string(u) + "," +
                           std::to_string(v) + ")");
    insert_sorted(adj_[u], v);
    insert_sorted(adj_[v], u);
    ++edge_count_;
  }

  bool has_edge(NodeId u, NodeId v) const {
    if (u >= node_count() || v >= node_count()) return false;
    const auto& a = adj_[u];
    return std::binary_search(a.begin(), a.end(), v);
  }

  std::span<const NodeId> neighbors(NodeId u) const { return adj_[u]; }
  std::size_t degree(NodeId u) const { return adj_[u].size(); }

  /// Edges as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId u = 0; u < node_count(); ++u)
      for (NodeId v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  void set_tag(NodeId u, int tag) {
    if (u >= node_count()) throw ParameterError("tag on missing node " + std::to_string(u));
    tags_[u] = tag;
  }
  std::optional<int> tag(NodeId u) const {
    auto it = tags_.find(u);
    if (it == tags_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<NodeId, int>& tags() const noexcept { return tags_; }

  void set_attribute(const std::string& name, double value) { attrs_[name] = value; }
  std::optional<double> attribute(const std::string& name) const {
    auto it = attrs_.find(name);
    if (it == attrs_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<std::string, double>& attributes() const noexcept { return attrs_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  static void insert_sorted(std::vector<NodeId>& v, NodeId x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
  }

  std::vector<std::vector<NodeId>> adj_;
  std::size_t edge_count_ = 0;
  std::map<NodeId, int> tags_;
  std::map<std::string, double> attrs_;
};

/// Ordered, non-empty collection of graphs with unique string ids.
struct CandidateSet {
  std::vector<Graph> graphs;
  std::vector<std::string> ids;

  std::size_t size() const noexcept { return graphs.size(); }

  void validate() const {
    if (graphs.empty()) throw ParameterError("candidate set is empty");
    if (ids.size() != graphs.size())
      throw ParameterError("candidate set has " + std::to_string(graphs.size()) +
                           " graphs but " + std::to_string(ids.size()) + " ids");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
      if (!seen.insert(id).second) throw ParameterError("duplicate graph id '" + id + "'");
  }

  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
  }
};

}  // namespace gbo

#endif  // GBO_GRAPH_HPP
