#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ks1/configmodel.hpp"
#include "ks1/multigraph.hpp"
#include "ks1/types.hpp"

namespace ks1::io {

struct EdgeList {
  std::size_t n = 0;
  std::vector<VertexPair> edges;
};

namespace detail {

// Next line that is neither blank nor a '#' comment.
inline bool content_line(std::istream& is, std::string& line, std::size_t& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

[[noreturn]] inline void bad(std::size_t lineno, const std::string& what) {
  throw InputError("line " + std::to_string(lineno) + ": " + what);
}

}  // namespace detail

/// "n m" followed by m lines "u v", 0-based. Loops are rejected.
inline EdgeList read_edge_list(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  EdgeList out;
  if (!detail::content_line(is, line, lineno)) throw InputError("empty edge list");
  std::size_t m = 0;
  {
    std::istringstream ls(line);
    if (!(ls >> out.n >> m)) detail::bad(lineno, "expected \"n m\"");
  }
  out.edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (!detail::content_line(is, line, lineno)) throw InputError("edge list ends after " + std::to_string(k) + " edges");
    std::istringstream ls(line);
    std::uint64_t u = 0, v = 0;
    if (!(ls >> u >> v)) detail::bad(lineno, "expected \"u v\"");
    if (u >= out.n || v >= out.n) detail::bad(lineno, "vertex out of range");
    if (u == v) detail::bad(lineno, "loop at vertex " + std::to_string(u));
    out.edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  }
  return out;
}

inline void write_edge_list(std::ostream& os, std::size_t n, const std::vector<VertexPair>& edges) {
  os << n << ' ' << edges.size() << '\n';
  for (const auto& [u, v] : edges) os << u << ' ' << v << '\n';
}

/// One degree per line.
inline DegreeSequence read_degree_sequence(std::istream& is) {
  DegreeSequence d;
  std::string line;
  std::size_t lineno = 0;
  while (detail::content_line(is, line, lineno)) {
    std::istringstream ls(line);
    std::uint32_t x = 0;
    if (!(ls >> x)) detail::bad(lineno, "expected a degree");
    d.push_back(x);
  }
  return d;
}

struct MatchingFile {
  std::vector<VertexPair> pairs;
  std::string header;  // text of the leading comment, without '#'
};

inline void write_matching(std::ostream& os, const std::vector<VertexPair>& pairs, std::size_t kappa, std::size_t r0,
                           std::size_t r2b) {
  os << "# kappa=" << kappa << " R0=" << r0 << " R2b=" << r2b << '\n';
  for (const auto& [u, v] : pairs) os << u << ' ' << v << '\n';
}

inline MatchingFile read_matching(std::istream& is) {
  MatchingFile out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#') {
      if (out.header.empty()) out.header = line.substr(pos + 1);
      continue;
    }
    std::istringstream ls(line);
    std::uint64_t u = 0, v = 0;
    if (!(ls >> u >> v)) detail::bad(lineno, "expected \"u v\"");
    out.pairs.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  }
  return out;
}

}  // namespace ks1::io
