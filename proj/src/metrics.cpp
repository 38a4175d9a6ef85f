#include "evgraph/metrics.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "evgraph/errors.hpp"
#include "json.hpp"

namespace evgraph {
namespace {

struct Aligned {
  const Prediction* pred;
  const ClaimRecord* gold;
};

std::vector<Aligned> align(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold) {
  if (preds.size() != gold.size())
    throw DataError("prediction count " + std::to_string(preds.size()) + " differs from gold count " +
                    std::to_string(gold.size()));
  std::unordered_map<std::int64_t, const Prediction*> by_id;
  for (const auto& p : preds)
    if (!by_id.emplace(p.claim_id, &p).second)
      throw DataError("duplicate prediction for claim " + std::to_string(p.claim_id));
  std::vector<Aligned> out;
  std::set<std::int64_t> seen;
  for (const auto& g : gold) {
    if (!seen.insert(g.claim_id).second) throw DataError("duplicate gold claim " + std::to_string(g.claim_id));
    auto it = by_id.find(g.claim_id);
    if (it == by_id.end()) throw DataError("no prediction for claim " + std::to_string(g.claim_id));
    out.push_back({it->second, &g});
  }
  return out;
}

bool covered(const Prediction& p, const ClaimRecord& g) {
  if (g.evidence_sets.empty()) return true;
  const std::set<ElementId> predicted(p.evidence.begin(), p.evidence.end());
  return std::any_of(g.evidence_sets.begin(), g.evidence_sets.end(), [&](const std::vector<ElementId>& set) {
    return std::all_of(set.begin(), set.end(), [&](const ElementId& id) { return predicted.contains(id); });
  });
}

template <typename F>
double fraction(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold, F&& pass) {
  const auto rows = align(preds, gold);
  if (rows.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& r : rows)
    if (pass(*r.pred, *r.gold)) ++n;
  return static_cast<double>(n) / static_cast<double>(rows.size());
}

bool cell_budget(const ElementId& id) { return id.is_cell_kind() || id.kind == ElementKind::kItem; }

}  // namespace

double label_accuracy(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold) {
  return fraction(preds, gold, [](const Prediction& p, const ClaimRecord& g) { return p.label == g.label; });
}

double evidence_recall(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold) {
  return fraction(preds, gold, covered);
}

double feverous_score(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold) {
  return fraction(preds, gold,
                  [](const Prediction& p, const ClaimRecord& g) { return p.label == g.label && covered(p, g); });
}

double evidence_precision(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold) {
  const auto rows = align(preds, gold);
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& r : rows) {
    if (r.pred->evidence.empty()) continue;
    const auto gold_ids = r.gold->evidence_union();
    const std::set<ElementId> g(gold_ids.begin(), gold_ids.end());
    const std::set<ElementId> p(r.pred->evidence.begin(), r.pred->evidence.end());
    std::size_t hit = 0;
    for (const auto& id : p)
      if (g.contains(id)) ++hit;
    total += static_cast<double>(hit) / static_cast<double>(p.size());
    ++counted;
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

std::vector<ElementId> enforce_limits(std::vector<ScoredId> evidence, EvidenceCaps caps) {
  std::vector<std::pair<std::string, ScoredId>> keyed;
  for (auto& e : evidence) keyed.push_back({e.id.str(), std::move(e)});
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.second.score != b.second.score) return a.second.score > b.second.score;
    return a.first < b.first;
  });
  std::vector<ElementId> out;
  std::set<ElementId> seen;
  std::size_t cells = 0, sentences = 0;
  for (auto& [_, e] : keyed) {
    if (!seen.insert(e.id).second) continue;
    if (cell_budget(e.id)) {
      if (cells++ < caps.cells) out.push_back(e.id);
    } else if (sentences++ < caps.sentences) {
      out.push_back(e.id);
    }
  }
  return out;
}

bool within_limits(const std::vector<ElementId>& evidence, EvidenceCaps caps) {
  const std::set<ElementId> unique(evidence.begin(), evidence.end());
  const auto cells = static_cast<std::size_t>(std::count_if(unique.begin(), unique.end(), cell_budget));
  return cells <= caps.cells && unique.size() - cells <= caps.sentences;
}

std::string EvaluationReport::to_json() const {
  return nlohmann::json{{"label_accuracy", label_accuracy},
                        {"evidence_recall", evidence_recall},
                        {"evidence_precision", evidence_precision},
                        {"feverous_score", feverous_score},
                        {"n", n}}
      .dump();
}

EvaluationReport evaluate(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold,
                          EvidenceCaps caps) {
  for (const auto& p : preds)
    if (!within_limits(p.evidence, caps))
      throw DataError("prediction for claim " + std::to_string(p.claim_id) + " exceeds the evidence limits");
  EvaluationReport r;
  r.label_accuracy = label_accuracy(preds, gold);
  r.evidence_recall = evidence_recall(preds, gold);
  r.evidence_precision = evidence_precision(preds, gold);
  r.feverous_score = feverous_score(preds, gold);
  r.n = gold.size();
  return r;
}

}  // namespace evgraph
