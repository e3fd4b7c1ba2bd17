#ifndef GBO_GRAPH_IO_HPP
#define GBO_GRAPH_IO_HPP

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "gbo/graph.hpp"

namespace gbo {

// Edge-list text format. Each graph starts with a header
//
//   # nodes=<n> [id=<id>]
//
// followed by `u v` edge lines (0-based), `t u tag` node-tag lines and
// `a name value` attribute lines. Blank lines are ignored. Without an id the
// graph is named graph-<index>.

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline CandidateSet parse_graphs(std::istream& in, const std::string& where = "<stream>") {
  CandidateSet set;
  Graph* current = nullptr;
  std::string raw;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) { throw ParseError(where, lineno, msg); };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(raw);
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (line[0] == '#') {
      std::string hash, tok;
      ss >> hash;
      long long n = -1;
      std::string id;
      while (ss >> tok) {
        if (tok.rfind("nodes=", 0) == 0) {
          try {
            n = std::stoll(tok.substr(6));
          } catch (const std::exception&) {
            fail("bad node count '" + tok + "'");
          }
        } else if (tok.rfind("id=", 0) == 0) {
          id = tok.substr(3);
        } else {
          fail("unknown header field '" + tok + "'");
        }
      }
      if (n < 1) fail("header needs nodes=<n> with n >= 1");
      set.graphs.emplace_back(static_cast<std::size_t>(n));
      set.ids.push_back(id.empty() ? "graph-" + std::to_string(set.graphs.size() - 1) : id);
      current = &set.graphs.back();
      continue;
    }
    if (current == nullptr) fail("record before any '# nodes=' header");
    try {
      if (line[0] == 't') {
        char t;
        long long u;
        int tag;
        if (!(ss >> t >> u >> tag) || u < 0) fail("malformed tag line");
        current->set_tag(static_cast<NodeId>(u), tag);
      } else if (line[0] == 'a') {
        char a;
        std::string name;
        double value;
        if (!(ss >> a >> name >> value)) fail("malformed attribute line");
        current->set_attribute(name, value);
      } else {
        long long u, v;
        if (!(ss >> u >> v) || u < 0 || v < 0) fail("malformed edge line");
        std::string extra;
        if (ss >> extra) fail("trailing data on edge line");
        current->add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
      }
    } catch (const ParameterError& e) {
      fail(e.what());
    }
  }
  if (set.graphs.empty()) throw ParseError(where, lineno, "no graphs in input");
  try {
    set.validate();
  } catch (const ParameterError& e) {
    throw ParseError(where, lineno, e.what());
  }
  return set;
}

inline CandidateSet read_graphs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse_graphs(in, path);
}

inline void write_graphs(std::ostream& out, const CandidateSet& set) {
  set.validate();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Graph& g = set.graphs[i];
    out << "# nodes=" << g.node_count() << " id=" << set.ids[i] << '\n';
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
    for (auto [u, tag] : g.tags()) out << "t " << u << ' ' << tag << '\n';
    for (const auto& [name, value] : g.attributes()) out << "a " << name << ' ' << value << '\n';
  }
}

inline void write_graphs(const CandidateSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path);
  write_graphs(out, set);
}

}  // namespace gbo

#endif  // GBO_GRAPH_IO_HPP
