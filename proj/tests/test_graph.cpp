#include "doctest.h"
#include "evgraph/errors.hpp"
#include "evgraph/graph.hpp"
#include "support.hpp"

using namespace evgraph;

namespace {

std::vector<EvidenceItem> items(int n) {
  std::vector<EvidenceItem> out;
  for (int i = 0; i < n; ++i) out.push_back({ElementId::sentence("P", i), "sequence " + std::to_string(i), "t"});
  return out;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("edges and neighborhoods") {
    const HashEmbedding p(64, 0);
    const auto one = build_graph(1, "claim", items(1), p);
    CHECK(one.edge_count() == 1);
    CHECK(neighborhoods(one) == std::vector<std::vector<int>>{{0}});
    const auto five = build_graph(1, "claim", items(5), p);
    CHECK(five.edge_count() == 25);
    for (const auto& nb : neighborhoods(build_graph(1, "c", items(3), p))) CHECK(nb == std::vector<int>{0, 1, 2});
    CHECK_THROWS_AS(build_graph(1, "claim", {}, p), DataError);
  }

  TEST_CASE("features come from the pair encoder in selection order") {
    const HashEmbedding p(64, 4);
    auto its = items(3);
    its[2].sequence = its[0].sequence;
    const std::vector<ElementId> gold{ElementId::sentence("P", 1)};
    const auto g = build_graph(9, "the claim", its, p, &gold, Label::kRefutes);
    CHECK(g.dimension() == 64);
    CHECK(g.has_gold_flags);
    CHECK(g.label == Label::kRefutes);
    CHECK((g.nodes[0].feature - p.encode_pair("the claim", its[0].sequence)).norm() == 0.0);
    CHECK((g.nodes[0].feature - g.nodes[2].feature).norm() == 0.0);
    CHECK(g.nodes[1].gold);
    CHECK_FALSE(g.nodes[0].gold);
    const auto again = build_graph(9, "the claim", its, p, &gold, Label::kRefutes);
    CHECK((again.feature_matrix() - g.feature_matrix()).norm() == 0.0);
    CHECK(g.feature_matrix().rows() == 3);
  }

  TEST_CASE("permutation relabels nodes consistently") {
    const HashEmbedding p(32, 0);
    const auto g = build_graph(1, "c", items(4), p);
    const std::vector<int> perm{2, 0, 3, 1};
    const auto q = permute_nodes(g, perm);
    for (int i = 0; i < 4; ++i) CHECK(q.nodes[static_cast<std::size_t>(i)].id == g.nodes[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])].id);
    CHECK(neighborhoods(q) == neighborhoods(g));
    CHECK_THROWS(permute_nodes(g, {0, 0, 1, 2}));
  }
}
