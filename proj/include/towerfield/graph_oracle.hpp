#pragma once

#include <algorithm>
#include <functional>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "towerfield/errors.hpp"

namespace towerfield {

/// Total decidable edge predicate on unordered pairs of naturals.
/// Either a finite explicit graph on vertices 0..n-1 or a named infinite
/// builtin.  Queries are symmetric and irreflexive by construction.
class GraphOracle {
 public:
  static GraphOracle finite(int n, const std::set<std::pair<int, int>>& edges) {
    GraphOracle g;
    g.n_ = n;
    for (auto [i, j] : edges) {
      check_pair(i, j, n);
      g.edges_.insert(normalize(i, j));
    }
    std::ostringstream d;
    d << "vertices " << n;
    for (auto [a, b] : g.edges_) d << ";edge " << a << " " << b;
    g.description_ = d.str();
    return g;
  }

  /// Builtins: empty, complete, parity (edge iff i+j odd), rado (for i < j:
  /// edge iff bit i of j is set), threshold<c> (edge iff i+j >= c).
  static GraphOracle builtin(const std::string& name) {
    GraphOracle g;
    g.n_ = -1;
    g.description_ = "oracle " + name;
    if (name == "empty") {
      g.rule_ = [](int, int) { return false; };
    } else if (name == "complete") {
      g.rule_ = [](int, int) { return true; };
    } else if (name == "parity") {
      g.rule_ = [](int i, int j) { return (i + j) % 2 == 1; };
    } else if (name == "rado") {
      g.rule_ = [](int i, int j) {
        if (i > j) std::swap(i, j);
        return i < 63 && ((static_cast<unsigned long long>(j) >> i) & 1u) != 0;
      };
    } else if (name.rfind("threshold", 0) == 0 && name.size() > 9) {
      const std::string num = name.substr(9);
      if (num.find_first_not_of("0123456789") != std::string::npos) {
        throw InputFormatError("unknown graph oracle: " + name);
      }
      int c = std::stoi(num);
      g.rule_ = [c](int i, int j) { return i + j >= c; };
    } else {
      throw InputFormatError("unknown graph oracle: " + name);
    }
    return g;
  }

  bool is_finite() const { return n_ >= 0; }
  /// Vertex count in finite mode; -1 for infinite builtins.
  int vertex_count() const { return n_; }
  const std::string& description() const { return description_; }

  /// Edge query on the 2-element set {i,j}; i == j is a caller bug.
  bool edge(int i, int j) const {
    if (i == j || i < 0 || j < 0) {
      throw std::invalid_argument("GraphOracle: edge query needs two distinct naturals");
    }
    if (is_finite()) {
      check_pair(i, j, n_);
      return edges_.count(normalize(i, j)) != 0;
    }
    return rule_(i, j);
  }

  /// Edge set restricted to vertices 0..n-1, normalized (hi, lo) pairs
  /// in lexicographic order.
  std::vector<std::pair<int, int>> edge_list(int n) const {
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        if (edge(i, j)) out.emplace_back(i, j);
      }
    }
    return out;
  }

  friend bool same_restriction(const GraphOracle& a, const GraphOracle& b, int n) {
    return a.edge_list(n) == b.edge_list(n);
  }

 private:
  GraphOracle() = default;

  static std::pair<int, int> normalize(int i, int j) {
    return {std::max(i, j), std::min(i, j)};
  }
  static void check_pair(int i, int j, int n) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw VertexOutOfRange("vertex pair (" + std::to_string(i) + "," +
                             std::to_string(j) + ") outside 0.." +
                             std::to_string(n - 1));
    }
    if (i == j) throw InputFormatError("self-loop on vertex " + std::to_string(i));
  }

  int n_ = -1;
  std::set<std::pair<int, int>> edges_;
  std::function<bool(int, int)> rule_;
  std::string description_;
};

/// Line-oriented graph file:
///   # comment and blank lines are skipped
///   header: `vertices <n>`  or  `oracle <name>`
///   body (vertices mode only): `edge <i> <j>` lines, duplicates idempotent.
inline GraphOracle parse_graph_file(std::istream& in) {
  std::string line;
  int line_no = 0;
  int n = -2;  // -2: no header yet; -1: oracle mode; >=0: vertices mode
  std::string oracle_name;
  std::set<std::pair<int, int>> edges;

  auto fail = [&line_no](const std::string& msg) -> void {
    throw InputFormatError("graph file line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (n == -2) {
      if (word == "vertices") {
        if (!(ls >> n) || n < 0) fail("expected `vertices <n>` with n >= 0");
      } else if (word == "oracle") {
        if (!(ls >> oracle_name)) fail("expected `oracle <name>`");
        n = -1;
      } else {
        fail("expected `vertices <n>` or `oracle <name>` header");
      }
    } else if (word == "edge") {
      if (n == -1) fail("oracle-mode graph admits no edge lines");
      int i = 0, j = 0;
      if (!(ls >> i >> j)) fail("expected `edge <i> <j>`");
      if (i < 0 || j < 0 || i >= n || j >= n) fail("edge endpoint outside 0..n-1");
      if (i == j) fail("self-loop");
      edges.insert({std::max(i, j), std::min(i, j)});
    } else {
      fail("unrecognized directive `" + word + "`");
    }
    std::string trailing;
    if (ls >> trailing) fail("trailing tokens");
  }
  if (n == -2) throw InputFormatError("graph file: missing header");
  if (n == -1) return GraphOracle::builtin(oracle_name);
  return GraphOracle::finite(n, edges);
}

inline GraphOracle parse_graph_text(const std::string& text) {
  std::istringstream in(text);
  return parse_graph_file(in);
}

}  // namespace towerfield
