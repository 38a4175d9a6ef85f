#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evgraph/corpus.hpp"
#include "evgraph/embedding.hpp"
#include "evgraph/graph.hpp"
#include "evgraph/pipeline.hpp"
#include "evgraph/rng.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(EVGRAPH_FIXTURES) + "/" + name; }
inline std::string data_file(const std::string& name) { return std::string(EVGRAPH_DATA) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline evgraph::PageStore store_from(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return evgraph::ingest_corpus(in);
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("evgraph_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Graph with n nodes of dimension d, Gaussian features, alternating gold flags.
inline evgraph::EvidenceGraph random_graph(evgraph::Rng& rng, int n, int d, evgraph::Label label) {
  evgraph::EvidenceGraph g;
  g.claim = "random";
  g.label = label;
  g.has_gold_flags = true;
  for (int i = 0; i < n; ++i) {
    evgraph::GraphNode node;
    node.id = evgraph::ElementId::sentence("P", i);
    node.feature = evgraph::Vector(d);
    for (int k = 0; k < d; ++k) node.feature(k) = rng.normal();
    node.gold = i % 2 == 0;
    g.nodes.push_back(std::move(node));
  }
  return g;
}

// Graphs whose label is planted in the text of 1-2 gold nodes: each gold
// sequence carries the keyword of its label, other nodes hold filler words.
// Features come from the hash pair encoder, so the signal is linear in them.
inline std::vector<evgraph::EvidenceGraph> planted_dataset(std::size_t count, int dim, std::uint64_t seed,
                                                           int min_nodes = 4, int max_nodes = 8) {
  static const char* kKeywords[] = {"supported", "refuted", "unverifiable"};
  evgraph::Rng rng(seed);
  const evgraph::HashEmbedding provider(dim, seed + 1);
  auto filler = [&]() { return "w" + std::to_string(rng.below(300)); };
  std::vector<evgraph::EvidenceGraph> out;
  for (std::size_t k = 0; k < count; ++k) {
    evgraph::EvidenceGraph g;
    g.claim_id = static_cast<std::int64_t>(k);
    const auto label = static_cast<int>(rng.below(3));
    g.label = static_cast<evgraph::Label>(label);
    g.has_gold_flags = true;
    g.claim = "claim " + filler() + " " + filler();
    const int n = min_nodes + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_nodes - min_nodes + 1)));
    const int gold = 1 + static_cast<int>(rng.below(2));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    for (int i = 0; i < n; ++i) {
      evgraph::GraphNode node;
      node.id = evgraph::ElementId::sentence("Synthetic " + std::to_string(k), i);
      node.gold = order[static_cast<std::size_t>(i)] < gold;
      node.sequence = filler() + " " + filler() + " " + filler();
      if (node.gold) node.sequence += std::string(" ") + kKeywords[label];
      node.feature = provider.encode_pair(g.claim, node.sequence);
      g.nodes.push_back(std::move(node));
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Graphs with the signal planted directly in node features: on top of a
// random unit vector, gold nodes get strength * (marker + label direction)
// and the others -strength * marker.
inline std::vector<evgraph::EvidenceGraph> planted_node_dataset(std::size_t count, int dim, std::uint64_t seed,
                                                                double strength) {
  evgraph::Rng rng(seed);
  auto unit = [&]() {
    evgraph::Vector v(dim);
    for (int k = 0; k < dim; ++k) v(k) = rng.normal();
    return evgraph::Vector(v / v.norm());
  };
  const evgraph::Vector marker = unit();
  const evgraph::Vector directions[3] = {unit(), unit(), unit()};
  std::vector<evgraph::EvidenceGraph> out;
  for (std::size_t k = 0; k < count; ++k) {
    evgraph::EvidenceGraph g;
    g.claim_id = static_cast<std::int64_t>(k);
    const auto label = static_cast<int>(rng.below(3));
    g.label = static_cast<evgraph::Label>(label);
    g.has_gold_flags = true;
    const int n = 4 + static_cast<int>(rng.below(5));
    const int gold = 1 + static_cast<int>(rng.below(2));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    for (int i = 0; i < n; ++i) {
      evgraph::GraphNode node;
      node.id = evgraph::ElementId::sentence("Planted " + std::to_string(k), i);
      node.gold = order[static_cast<std::size_t>(i)] < gold;
      node.feature = unit();
      if (node.gold)
        node.feature += strength * (marker + directions[label]);
      else
        node.feature -= strength * marker;
      g.nodes.push_back(std::move(node));
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Small end-to-end configuration over the mini fixture.
inline evgraph::PipelineConfig mini_pipeline(const std::string& out_dir, evgraph::Mode mode, unsigned threads = 1) {
  evgraph::PipelineConfig cfg;
  cfg.corpus_path = fixture("mini_corpus.jsonl");
  cfg.claims_path = fixture("mini_claims.jsonl");
  cfg.lexicon_path = data_file("entity_lexicon.tsv");
  cfg.output_dir = out_dir;
  cfg.mode = mode;
  cfg.provider.dim = 128;
  cfg.augment.n_reduction = 20;
  cfg.augment.n_mutation = 10;
  cfg.augment.rng_seed = 3;
  cfg.train.model.mode = mode;
  cfg.train.model.hidden = 16;
  cfg.train.model.mlp_hidden = 16;
  cfg.train.model.evidence_hidden = 8;
  cfg.train.steps = 120;
  cfg.train.learning_rate = 1e-3;
  cfg.train.batch_size = 16;
  cfg.train.eval_every = 20;
  cfg.train.threads = threads;
  cfg.threads = threads;
  return cfg;
}

}  // namespace testing
