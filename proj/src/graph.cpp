#include "evgraph/graph.hpp"

#include <algorithm>

#include "evgraph/errors.hpp"

namespace evgraph {

Eigen::MatrixXd EvidenceGraph::feature_matrix() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(nodes.size()), dimension());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature.size() != x.cols())
      throw DimensionError("graph " + std::to_string(claim_id) + " mixes node feature dimensions");
    x.row(static_cast<Eigen::Index>(i)) = nodes[i].feature.transpose();
  }
  return x;
}

EvidenceGraph build_graph(std::int64_t claim_id, const std::string& claim, const std::vector<EvidenceItem>& selected,
                          const EmbeddingProvider& provider, const std::vector<ElementId>* gold,
                          std::optional<Label> label) {
  if (selected.empty()) throw DataError("claim " + std::to_string(claim_id) + ": cannot build a graph with no nodes");
  EvidenceGraph g;
  g.claim_id = claim_id;
  g.claim = claim;
  g.label = label;
  g.has_gold_flags = gold != nullptr;
  for (const auto& item : selected) {
    GraphNode node{item.id, item.sequence, provider.encode_pair(claim, item.sequence), false};
    if (gold) node.gold = std::find(gold->begin(), gold->end(), item.id) != gold->end();
    g.nodes.push_back(std::move(node));
  }
  return g;
}

std::vector<std::vector<int>> neighborhoods(const EvidenceGraph& g) {
  std::vector<int> all(g.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return std::vector<std::vector<int>>(g.size(), all);
}

EvidenceGraph permute_nodes(const EvidenceGraph& g, const std::vector<int>& perm) {
  if (perm.size() != g.size()) throw DataError("permutation size differs from node count");
  std::vector<bool> used(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= perm.size() || used[static_cast<std::size_t>(p)])
      throw DataError("not a permutation of the node indices");
    used[static_cast<std::size_t>(p)] = true;
  }
  EvidenceGraph out = g;
  for (std::size_t i = 0; i < perm.size(); ++i) out.nodes[i] = g.nodes.at(static_cast<std::size_t>(perm[i]));
  return out;
}

}  // namespace evgraph
