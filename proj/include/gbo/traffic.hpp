#ifndef GBO_TRAFFIC_HPP
#define GBO_TRAFFIC_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gbo/errors.hpp"
#include "gbo/graph.hpp"
#include "gbo/graph_io.hpp"
#include "gbo/random.hpp"

namespace gbo {

/// Directed road link with a BPR cost t0 (1 + b (v/c)^power).
struct Link {
  NodeId from = 0;
  NodeId to = 0;
  double capacity = 1.0;
  double length = 0.0;
  double free_flow_time = 0.0;
  double b = 0.15;
  double power = 4.0;
};

struct OdFlow {
  NodeId origin = 0;
  NodeId destination = 0;
  double flow = 0.0;
};

struct TrafficNetwork {
  std::size_t node_count = 0;
  std::vector<Link> links;
  std::vector<OdFlow> demand;  // positive entries only, grouped by origin

  double total_demand() const {
    double s = 0.0;
    for (const auto& od : demand) s += od.flow;
    return s;
  }
};

inline double bpr_time(const Link& l, double v) {
  return l.free_flow_time * (1.0 + l.b * std::pow(v / l.capacity, l.power));
}

/// Integral of the BPR cost from 0 to v.
inline double bpr_integral(const Link& l, double v) {
  return l.free_flow_time *
         (v + l.b * l.capacity / (l.power + 1.0) * std::pow(v / l.capacity, l.power + 1.0));
}

/// d t / d v
inline double bpr_derivative(const Link& l, double v) {
  if (l.power == 0.0) return 0.0;
  return l.free_flow_time * l.b * l.power / l.capacity * std::pow(v / l.capacity, l.power - 1.0);
}

namespace detail {

// Reads "<KEY> value" metadata lines up to <END OF METADATA>. Returns the
// number of lines consumed.
inline std::size_t read_tntp_metadata(std::istream& in, const std::string& where,
                                      std::unordered_map<std::string, std::string>& meta) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '~') continue;
    if (t[0] != '<') throw ParseError(where, n, "expected metadata line, got '" + t + "'");
    const auto close = t.find('>');
    if (close == std::string::npos) throw ParseError(where, n, "unterminated metadata tag");
    const std::string key = t.substr(1, close - 1);
    if (key == "END OF METADATA") return n;
    meta[key] = trim(t.substr(close + 1));
  }
  throw ParseError(where, n, "missing <END OF METADATA>");
}

inline std::size_t meta_count(const std::unordered_map<std::string, std::string>& meta,
                              const std::string& key, const std::string& where) {
  auto it = meta.find(key);
  if (it == meta.end()) throw ParseError(where, 0, "missing <" + key + ">");
  try {
    std::size_t used = 0;
    const long v = std::stol(it->second, &used);
    if (v < 0 || used != it->second.size()) throw std::invalid_argument("");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(where, 0, "<" + key + "> is not a count: '" + it->second + "'");
  }
}

}  // namespace detail

/// Parses a TNTP network file and trips file. Node numbers are 1-based in the
/// files and 0-based in the result. An empty trips file gives zero demand.
inline TrafficNetwork parse_tntp(std::istream& net, const std::string& net_where, std::istream& trips,
                                 const std::string& trips_where) {
  TrafficNetwork tn;
  std::unordered_map<std::string, std::string> meta;
  std::size_t line_no = detail::read_tntp_metadata(net, net_where, meta);
  tn.node_count = detail::meta_count(meta, "NUMBER OF NODES", net_where);
  const std::size_t link_count = detail::meta_count(meta, "NUMBER OF LINKS", net_where);
  if (tn.node_count == 0) throw ParseError(net_where, 0, "network has no nodes");

  std::string line;
  while (std::getline(net, line)) {
    ++line_no;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '~') continue;
    if (t.back() != ';') throw ParseError(net_where, line_no, "link record not terminated by ';'");
    t.pop_back();
    std::istringstream ss(t);
    long from = 0, to = 0;
    Link l;
    double speed = 0, toll = 0, type = 0;
    if (!(ss >> from >> to >> l.capacity >> l.length >> l.free_flow_time >> l.b >> l.power >> speed >> toll >> type))
      throw ParseError(net_where, line_no, "malformed link record");
    if (from < 1 || to < 1 || static_cast<std::size_t>(from) > tn.node_count ||
        static_cast<std::size_t>(to) > tn.node_count)
      throw ParseError(net_where, line_no, "link endpoint out of range");
    if (from == to) throw ParseError(net_where, line_no, "link is a self-loop");
    if (!(l.capacity > 0.0)) throw ParseError(net_where, line_no, "capacity must be positive");
    if (!(l.free_flow_time >= 0.0)) throw ParseError(net_where, line_no, "free-flow time must be non-negative");
    if (!(l.power >= 0.0) || !(l.b >= 0.0)) throw ParseError(net_where, line_no, "BPR coefficients must be non-negative");
    l.from = static_cast<NodeId>(from - 1);
    l.to = static_cast<NodeId>(to - 1);
    tn.links.push_back(l);
  }
  if (tn.links.size() != link_count)
    throw ParseError(net_where, line_no,
                     "header declares " + std::to_string(link_count) + " links, found " +
                         std::to_string(tn.links.size()));

  // trips
  std::vector<std::string> lines;
  while (std::getline(trips, line)) lines.push_back(line);
  bool any = false;
  for (const auto& l : lines)
    if (!detail::trim(l).empty()) any = true;
  if (!any) return tn;

  std::istringstream tin([&] {
    std::string all;
    for (const auto& l : lines) all += l + '\n';
    return all;
  }());
  meta.clear();
  line_no = detail::read_tntp_metadata(tin, trips_where, meta);
  std::optional<double> declared;
  if (auto it = meta.find("TOTAL OD FLOW"); it != meta.end()) declared = std::stod(it->second);

  std::optional<NodeId> origin;
  while (std::getline(tin, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '~') continue;
    if (t.rfind("Origin", 0) == 0) {
      std::istringstream ss(t.substr(6));
      long o = 0;
      if (!(ss >> o) || o < 1 || static_cast<std::size_t>(o) > tn.node_count)
        throw ParseError(trips_where, line_no, "bad origin");
      origin = static_cast<NodeId>(o - 1);
      continue;
    }
    if (!origin) throw ParseError(trips_where, line_no, "demand entry before any 'Origin' line");
    std::size_t pos = 0;
    while (pos < t.size()) {
      const auto semi = t.find(';', pos);
      if (semi == std::string::npos) {
        if (!detail::trim(t.substr(pos)).empty())
          throw ParseError(trips_where, line_no, "demand entry not terminated by ';'");
        break;
      }
      const std::string entry = t.substr(pos, semi - pos);
      pos = semi + 1;
      const auto colon = entry.find(':');
      if (colon == std::string::npos) throw ParseError(trips_where, line_no, "demand entry without ':'");
      long d = 0;
      double flow = 0.0;
      try {
        d = std::stol(entry.substr(0, colon));
        flow = std::stod(entry.substr(colon + 1));
      } catch (const std::exception&) {
        throw ParseError(trips_where, line_no, "malformed demand entry '" + detail::trim(entry) + "'");
      }
      if (d < 1 || static_cast<std::size_t>(d) > tn.node_count)
        throw ParseError(trips_where, line_no, "destination out of range");
      if (!(flow >= 0.0)) throw ParseError(trips_where, line_no, "negative demand");
      if (flow > 0.0 && static_cast<NodeId>(d - 1) != *origin)
        tn.demand.push_back({*origin, static_cast<NodeId>(d - 1), flow});
    }
  }
  if (declared && std::abs(tn.total_demand() - *declared) > 1e-6 * std::max(1.0, *declared))
    throw ParseError(trips_where, line_no, "demand total disagrees with <TOTAL OD FLOW>");
  return tn;
}

inline TrafficNetwork parse_tntp(const std::string& net_path, const std::string& trips_path) {
  std::ifstream net(net_path), trips(trips_path);
  if (!net) throw ParseError(net_path, 0, "cannot open network file");
  if (!trips) throw ParseError(trips_path, 0, "cannot open trips file");
  return parse_tntp(net, net_path, trips, trips_path);
}

namespace detail {

// Adds each OD flow along its shortest path under `cost`; returns the
// all-or-nothing link loads and the total shortest-path cost.
inline std::pair<std::vector<double>, double> all_or_nothing(const TrafficNetwork& tn,
                                                             const std::vector<double>& cost) {
  const std::size_t n = tn.node_count;
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < tn.links.size(); ++i) out[tn.links[i].from].push_back(i);

  std::vector<double> load(tn.links.size(), 0.0);
  double sp_total = 0.0;
  std::vector<double> dist(n);
  std::vector<std::size_t> pred(n);
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  using Item = std::pair<double, NodeId>;

  std::size_t k = 0;
  while (k < tn.demand.size()) {
    const NodeId o = tn.demand[k].origin;
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(pred.begin(), pred.end(), none);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[o] = 0.0;
    heap.emplace(0.0, o);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (std::size_t li : out[u]) {
        const double nd = d + cost[li];
        const NodeId v = tn.links[li].to;
        if (nd < dist[v]) {
          dist[v] = nd;
          pred[v] = li;
          heap.emplace(nd, v);
        }
      }
    }
    for (; k < tn.demand.size() && tn.demand[k].origin == o; ++k) {
      const auto& od = tn.demand[k];
      if (!std::isfinite(dist[od.destination]))
        throw InfeasibleError("no path from node " + std::to_string(od.origin + 1) + " to node " +
                              std::to_string(od.destination + 1));
      sp_total += od.flow * dist[od.destination];
      for (NodeId v = od.destination; v != o;) {
        const std::size_t li = pred[v];
        load[li] += od.flow;
        v = tn.links[li].from;
      }
    }
  }
  return {std::move(load), sp_total};
}

}  // namespace detail

struct FrankWolfeOptions {
  double tolerance = 1e-4;
  int max_iter = 500;
  double line_search_tol = 1e-12;
  // conjugate direction: the all-or-nothing target is mixed with the previous
  // target so that consecutive directions are conjugate under the Beckmann
  // Hessian; false gives the classic all-or-nothing direction
  bool conjugate = true;
};

struct AssignmentResult {
  std::vector<double> flows;
  double total_travel_time = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> gap_history;
  std::vector<double> beckmann_history;  // objective at each iterate, starting with the initial load
};

inline double beckmann(const TrafficNetwork& tn, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < tn.links.size(); ++i) s += bpr_integral(tn.links[i], v[i]);
  return s;
}

inline double total_travel_time(const TrafficNetwork& tn, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < tn.links.size(); ++i) s += v[i] * bpr_time(tn.links[i], v[i]);
  return s;
}

/// Root of a non-decreasing function on [lo, hi] by bisection; returns hi when
/// the function stays negative and lo when it starts non-negative.
inline double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (f(lo) >= 0.0) return lo;
  if (f(hi) <= 0.0) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// User-equilibrium assignment by Frank-Wolfe with exact line search. The
/// relative gap is (TSTT - SPTT) / TSTT, where SPTT loads all demand on current
/// shortest paths. With `conjugate` set the search direction follows the
/// conjugate Frank-Wolfe rule, which reaches small gaps in far fewer iterations.
inline AssignmentResult frank_wolfe(const TrafficNetwork& tn, const FrankWolfeOptions& opt = {}) {
  if (opt.max_iter < 1) throw ParameterError("frank_wolfe: max_iter must be >= 1");
  AssignmentResult r;
  const std::size_t m = tn.links.size();
  std::vector<double> cost(m);
  for (std::size_t i = 0; i < m; ++i) cost[i] = bpr_time(tn.links[i], 0.0);
  auto [v, unused] = detail::all_or_nothing(tn, cost);
  (void)unused;
  r.beckmann_history.push_back(beckmann(tn, v));

  std::vector<double> trial(m), target(m);
  bool have_target = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (std::size_t i = 0; i < m; ++i) cost[i] = bpr_time(tn.links[i], v[i]);
    auto [y, sptt] = detail::all_or_nothing(tn, cost);
    double tstt = 0.0;
    for (std::size_t i = 0; i < m; ++i) tstt += v[i] * cost[i];
    r.relative_gap = tstt > 0.0 ? (tstt - sptt) / tstt : 0.0;
    r.gap_history.push_back(r.relative_gap);
    r.iterations = it - 1;
    if (r.relative_gap <= opt.tolerance) {
      r.converged = true;
      break;
    }

    double mix = 0.0;
    if (opt.conjugate && have_target) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double h = bpr_derivative(tn.links[i], v[i]);
        num += (target[i] - v[i]) * h * (y[i] - v[i]);
        den += (target[i] - v[i]) * h * (y[i] - target[i]);
      }
      if (den != 0.0) mix = std::clamp(num / den, 0.0, 0.99);
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      target[i] = mix * target[i] + (1.0 - mix) * y[i];
      slope += cost[i] * (target[i] - v[i]);
    }
    if (!(slope < 0.0)) target = y;  // not a descent direction: plain step
    have_target = true;

    // the Beckmann restriction is convex in the step, so its minimizer is the
    // root of the directional derivative sum_i t_i(v + lambda d) d_i
    auto along = [&](double lambda) {
      for (std::size_t i = 0; i < m; ++i) trial[i] = v[i] + lambda * (target[i] - v[i]);
      return beckmann(tn, trial);
    };
    auto slope_at = [&](double lambda) {
      double g = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = target[i] - v[i];
        g += bpr_time(tn.links[i], v[i] + lambda * d) * d;
      }
      return g;
    };
    double lambda = bisect_root(slope_at, 0.0, 1.0, opt.line_search_tol);
    if (along(lambda) > r.beckmann_history.back()) lambda = 0.0;
    for (std::size_t i = 0; i < m; ++i) v[i] += lambda * (target[i] - v[i]);
    r.beckmann_history.push_back(beckmann(tn, v));
    r.iterations = it;
  }
  r.total_travel_time = total_travel_time(tn, v);
  r.flows = std::move(v);
  return r;
}

/// A candidate road: both directed links between two nodes.
struct Project {
  int id = 0;
  NodeId a = 0;
  NodeId b = 0;
};

inline std::vector<Project> parse_projects(const std::string& text, const std::string& where = "projects") {
  std::vector<Project> out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_array()) throw ParseError(where, 0, "expected a JSON list");
    for (const auto& e : j) {
      const auto road = e.at("road");
      if (!road.is_array() || road.size() != 2) throw ParseError(where, 0, "road must list two endpoints");
      const long a = road[0].get<long>(), b = road[1].get<long>();
      if (a < 1 || b < 1 || a == b) throw ParseError(where, 0, "bad road endpoints");
      out.push_back({e.at("id").get<int>(), static_cast<NodeId>(a - 1), static_cast<NodeId>(b - 1)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where, 0, e.what());
  }
  return out;
}

inline std::vector<Project> read_projects(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open project file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_projects(ss.str(), path);
}

inline std::string projects_to_json(const std::vector<Project>& projects) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : projects) j.push_back({{"id", p.id}, {"road", {p.a + 1, p.b + 1}}});
  return j.dump(1);
}

namespace detail {

inline bool on_road(const Link& l, NodeId a, NodeId b) {
  return (l.from == a && l.to == b) || (l.from == b && l.to == a);
}

// Every positive-demand destination reachable from its origin.
inline bool demand_connected(const TrafficNetwork& tn) {
  std::vector<std::vector<NodeId>> out(tn.node_count);
  for (const auto& l : tn.links) out[l.from].push_back(l.to);
  std::optional<NodeId> last;
  std::vector<char> seen;
  for (const auto& od : tn.demand) {
    if (!last || *last != od.origin) {
      seen.assign(tn.node_count, 0);
      std::vector<NodeId> stack{od.origin};
      seen[od.origin] = 1;
      while (!stack.empty()) {
        const NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : out[u])
          if (!seen[v]) {
            seen[v] = 1;
            stack.push_back(v);
          }
      }
      last = od.origin;
    }
    if (!seen[od.destination]) return false;
  }
  return true;
}

}  // namespace detail

/// Network with the links of every project not set in `decision` removed.
inline TrafficNetwork apply_decision(const TrafficNetwork& full, const std::vector<Project>& projects,
                                     std::uint64_t decision) {
  TrafficNetwork tn;
  tn.node_count = full.node_count;
  tn.demand = full.demand;
  for (const auto& l : full.links) {
    bool keep = true;
    for (std::size_t j = 0; j < projects.size(); ++j)
      if (!((decision >> j) & 1ULL) && detail::on_road(l, projects[j].a, projects[j].b)) keep = false;
    if (keep) tn.links.push_back(l);
  }
  return tn;
}

/// Seeded choice of `count` two-way roads whose joint removal keeps every
/// positive-demand OD pair connected. Roads are visited in a seeded random
/// order and kept when removing them with the roads kept so far stays feasible.
inline std::vector<Project> select_projects(const TrafficNetwork& full, std::size_t count, std::uint64_t seed) {
  std::vector<std::pair<NodeId, NodeId>> roads;
  for (const auto& l : full.links)
    if (l.from < l.to)
      for (const auto& r : full.links)
        if (r.from == l.to && r.to == l.from) {
          roads.emplace_back(l.from, l.to);
          break;
        }
  Rng rng(seed);
  std::shuffle(roads.begin(), roads.end(), rng);
  std::vector<Project> chosen;
  for (const auto& [a, b] : roads) {
    if (chosen.size() == count) break;
    chosen.push_back({static_cast<int>(chosen.size()) + 1, a, b});
    if (!detail::demand_connected(apply_decision(full, chosen, 0))) chosen.pop_back();
  }
  if (chosen.size() < count)
    throw InfeasibleError("only " + std::to_string(chosen.size()) + " roads can be removed jointly");
  return chosen;
}

/// Undirected view of a road network: one edge per connected node pair.
inline Graph to_undirected(const TrafficNetwork& tn) {
  Graph g(tn.node_count);
  for (const auto& l : tn.links)
    if (!g.has_edge(l.from, l.to)) g.add_edge(l.from, l.to);
  return g;
}

struct TrafficCandidate {
  std::uint64_t decision = 0;
  TrafficNetwork network;
  Graph graph;
};

inline constexpr std::size_t kMaxProjects = 20;

/// All 2^|projects| design decisions; candidate i has decision bit vector i.
inline std::vector<TrafficCandidate> build_candidates(const TrafficNetwork& full,
                                                      const std::vector<Project>& projects) {
  if (projects.size() > kMaxProjects)
    throw ParameterError("build_candidates: at most " + std::to_string(kMaxProjects) + " projects");
  for (std::size_t i = 0; i < projects.size(); ++i) {
    bool found = false;
    for (const auto& l : full.links) found = found || detail::on_road(l, projects[i].a, projects[i].b);
    if (!found) throw ParameterError("project " + std::to_string(projects[i].id) + " names a missing road");
    for (std::size_t j = 0; j < i; ++j)
      if (detail::on_road({projects[j].a, projects[j].b}, projects[i].a, projects[i].b))
        throw ParameterError("projects " + std::to_string(projects[j].id) + " and " +
                             std::to_string(projects[i].id) + " share a road");
  }
  std::vector<TrafficCandidate> out;
  const std::uint64_t count = 1ULL << projects.size();
  out.reserve(count);
  for (std::uint64_t u = 0; u < count; ++u) {
    TrafficCandidate c;
    c.decision = u;
    c.network = apply_decision(full, projects, u);
    c.graph = to_undirected(c.network);
    out.push_back(std::move(c));
  }
  return out;
}

/// -ln(total travel time at user equilibrium); -inf when some OD pair is cut off.
inline double utndp_objective(const TrafficNetwork& tn, const FrankWolfeOptions& opt = {}) {
  double total = 0.0;
  try {
    total = frank_wolfe(tn, opt).total_travel_time;
  } catch (const InfeasibleError&) {
    return -std::numeric_limits<double>::infinity();
  }
  if (!(total > 0.0)) throw DomainError("utndp objective: total travel time must be positive");
  return -std::log(total);
}

/// Thread-safe memo of candidate objective values.
class EvaluationCache {
 public:
  explicit EvaluationCache(std::function<double(std::size_t)> f) : f_(std::move(f)) {}

  double operator()(std::size_t i) {
    {
      std::lock_guard lock(mu_);
      if (auto it = values_.find(i); it != values_.end()) return it->second;
    }
    const double y = f_(i);
    std::lock_guard lock(mu_);
    return values_.emplace(i, y).first->second;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return values_.size();
  }

 private:
  std::function<double(std::size_t)> f_;
  mutable std::mutex mu_;
  std::unordered_map<std::size_t, double> values_;
};

}  // namespace gbo

#endif  // GBO_TRAFFIC_HPP
