#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>

#include "towerfield/errors.hpp"
#include "towerfield/graph_oracle.hpp"

using namespace towerfield;

TEST_CASE("finite graph edge queries", "[graph]") {
  GraphOracle g = GraphOracle::finite(4, {{1, 0}, {3, 2}});
  CHECK(g.is_finite());
  CHECK(g.vertex_count() == 4);
  CHECK(g.edge(0, 1));
  CHECK(g.edge(1, 0));
  CHECK(g.edge(2, 3));
  CHECK(!g.edge(0, 2));
  CHECK_THROWS_AS(g.edge(0, 4), VertexOutOfRange);
  CHECK_THROWS_AS(g.edge(2, 2), std::invalid_argument);
  CHECK(g.edge_list(4) == std::vector<std::pair<int, int>>{{1, 0}, {3, 2}});
  CHECK(g.edge_list(2) == std::vector<std::pair<int, int>>{{1, 0}});
}

TEST_CASE("builtin oracles", "[graph]") {
  GraphOracle empty = GraphOracle::builtin("empty");
  GraphOracle complete = GraphOracle::builtin("complete");
  GraphOracle parity = GraphOracle::builtin("parity");
  GraphOracle rado = GraphOracle::builtin("rado");
  GraphOracle thresh = GraphOracle::builtin("threshold4");

  CHECK(!empty.is_finite());
  CHECK(empty.vertex_count() == -1);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < i; ++j) {
      CHECK(!empty.edge(i, j));
      CHECK(complete.edge(i, j));
      CHECK(parity.edge(i, j) == ((i + j) % 2 == 1));
      CHECK(thresh.edge(i, j) == (i + j >= 4));
    }
  }
  // rado: for i < j, edge iff bit i of j is set
  CHECK(rado.edge(0, 1));    // bit 0 of 1
  CHECK(!rado.edge(0, 2));   // bit 0 of 2
  CHECK(rado.edge(1, 2));    // bit 1 of 2
  CHECK(rado.edge(2, 0) == rado.edge(0, 2));
  CHECK(rado.edge(0, 5));
  CHECK(!rado.edge(1, 5));

  CHECK_THROWS_AS(GraphOracle::builtin("nonsense"), InputFormatError);
  CHECK_THROWS_AS(GraphOracle::builtin("thresholdx"), InputFormatError);
}

TEST_CASE("graph file parsing", "[graph]") {
  GraphOracle g = parse_graph_text(
      "# a path on three vertices\n"
      "vertices 3\n"
      "\n"
      "edge 0 1\n"
      "edge 1 2\n"
      "edge 1 0\n");  // duplicate, idempotent
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge(0, 1));
  CHECK(g.edge(1, 2));
  CHECK(!g.edge(0, 2));
  CHECK(g.edge_list(3).size() == 2);

  GraphOracle o = parse_graph_text("oracle parity\n");
  CHECK(!o.is_finite());
  CHECK(o.edge(2, 3));

  CHECK_THROWS_AS(parse_graph_text(""), InputFormatError);
  CHECK_THROWS_AS(parse_graph_text("vertices 3\nedge 0 3\n"), InputFormatError);
  CHECK_THROWS_AS(parse_graph_text("vertices 3\nedge 1 1\n"), InputFormatError);
  CHECK_THROWS_AS(parse_graph_text("oracle parity\nedge 0 1\n"), InputFormatError);
  CHECK_THROWS_AS(parse_graph_text("vertices 3\nfoo 1 2\n"), InputFormatError);
  CHECK_THROWS_AS(parse_graph_text("edge 0 1\n"), InputFormatError);
  CHECK_THROWS_AS(parse_graph_text("vertices 3\nedge 0 1 9\n"), InputFormatError);
}

TEST_CASE("graph descriptions are canonical", "[graph]") {
  GraphOracle a = GraphOracle::finite(3, {{1, 0}, {2, 1}});
  GraphOracle b = GraphOracle::finite(3, {{2, 1}, {0, 1}});
  CHECK(a.description() == b.description());
  CHECK(GraphOracle::builtin("rado").description() == "oracle rado");
  CHECK(same_restriction(a, b, 3));
  CHECK(!same_restriction(a, GraphOracle::builtin("empty"), 3));
}
