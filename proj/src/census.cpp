#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "evgraph/corpus.hpp"
#include "evgraph/linearizer.hpp"

namespace evgraph {
namespace {

using PairMap = std::map<std::pair<std::string, std::string>, std::size_t>;

void count_pairs(const std::vector<ElementId>& ids, PairMap& counts) {
  std::set<std::string> local;
  for (const auto& id : ids) local.insert(id.local_str());
  for (auto a = local.begin(); a != local.end(); ++a)
    for (auto b = std::next(a); b != local.end(); ++b) ++counts[{*a, *b}];
}

std::vector<PairCount> top_pairs(const PairMap& counts, std::size_t top_n) {
  std::vector<PairCount> out;
  for (const auto& [pair, n] : counts) out.push_back({pair.first, pair.second, n});
  std::stable_sort(out.begin(), out.end(),
                   [](const PairCount& a, const PairCount& b) { return a.count > b.count; });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

}  // namespace

CensusReport corpus_census(const PageStore& store, const std::vector<ClaimRecord>& claims,
                           std::size_t top_n) {
  static const char* kTypes[] = {"sentence", "table_caption", "cell", "header_cell",
                                 "list_item", "table", "infobox", "general_table"};
  CensusReport report;
  report.claims = claims.size();
  std::map<std::string, std::size_t> hits;
  PairMap set_pairs, union_pairs;

  for (const auto& claim : claims) {
    for (const auto& set : claim.evidence_sets) {
      ++report.evidence_sets;
      std::set<std::string> present;
      for (const auto& id : set) {
        switch (id.kind) {
          case ElementKind::kSentence:
            present.insert("sentence");
            break;
          case ElementKind::kItem:
            present.insert("list_item");
            break;
          case ElementKind::kTableCaption:
          case ElementKind::kCell:
          case ElementKind::kHeaderCell: {
            present.insert(std::string(kind_name(id.kind)));
            present.insert("table");
            const Page* page = store.find(id.page);
            if (page && id.index[0] < static_cast<int>(page->tables.size())) {
              const Table& t = page->tables[static_cast<std::size_t>(id.index[0])];
              const TableKind kind = classify_table(t, store.grid(id.page, id.index[0]));
              present.insert(kind == TableKind::kInfobox ? "infobox" : "general_table");
            }
            break;
          }
        }
      }
      for (const auto& type : present) ++hits[type];
      count_pairs(set, set_pairs);
    }
    count_pairs(claim.evidence_union(), union_pairs);
  }

  for (const char* type : kTypes) {
    report.type_fraction[type] =
        report.evidence_sets == 0 ? 0.0 : static_cast<double>(hits[type]) / static_cast<double>(report.evidence_sets);
  }
  report.set_pairs = top_pairs(set_pairs, top_n);
  report.union_pairs = top_pairs(union_pairs, top_n);
  return report;
}

}  // namespace evgraph
