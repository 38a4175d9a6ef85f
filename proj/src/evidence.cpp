#include "evgraph/evidence.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "evgraph/errors.hpp"
#include "evgraph/linearizer.hpp"
#include "evgraph/rng.hpp"

namespace evgraph {
namespace {

bool is_word_byte(unsigned char ch) {
  return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch >= 0x80;
}

bool word_boundary(std::string_view s, std::size_t begin, std::size_t end) {
  const bool left = begin == 0 || !is_word_byte(static_cast<unsigned char>(s[begin - 1]));
  const bool right = end >= s.size() || !is_word_byte(static_cast<unsigned char>(s[end]));
  return left && right;
}

bool is_source(const ClaimRecord& c) { return c.label == Label::kSupports || c.label == Label::kRefutes; }

struct Substitution {
  std::size_t begin = 0;
  std::size_t length = 0;
  std::string replacement;
  bool numeric = false;
};

std::vector<Substitution> substitutions(const std::string& claim,
                                        const std::vector<std::pair<std::string, std::string>>& lexicon) {
  std::vector<Substitution> out;
  for (const auto& [surface, replacement] : lexicon) {
    if (surface.empty()) continue;
    for (std::size_t pos = claim.find(surface); pos != std::string::npos; pos = claim.find(surface, pos + 1)) {
      if (word_boundary(claim, pos, pos + surface.size())) out.push_back({pos, surface.size(), replacement, false});
    }
  }
  // Standalone integers are always substitutable.
  for (std::size_t i = 0; i < claim.size();) {
    if (claim[i] >= '0' && claim[i] <= '9') {
      std::size_t j = i;
      while (j < claim.size() && claim[j] >= '0' && claim[j] <= '9') ++j;
      if (j - i <= 9 && word_boundary(claim, i, j)) out.push_back({i, j - i, {}, true});
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

bool evidence_resolves(const PageStore& store, const ClaimRecord& c) {
  try {
    for (const auto& set : c.evidence_sets)
      for (const auto& id : set) resolve(store, id);
  } catch (const NotFoundError&) {
    return false;
  }
  return true;
}

}  // namespace

EvidenceItem make_item(const PageStore& store, const ElementId& id) {
  return {id, linearize(store, id), resolve(store, id).text};
}

std::vector<EvidenceItem> collect_items(const PageStore& store, const std::vector<std::string>& pages) {
  std::vector<EvidenceItem> items;
  for (const auto& page_id : pages) {
    const Page* page = store.find(page_id);
    if (!page) continue;
    for (const ElementId& id : store.elements(*page)) items.push_back(make_item(store, id));
  }
  return items;
}

std::vector<ScoredEvidence> score_evidence(const std::vector<const EmbeddingProvider*>& providers,
                                           std::string_view claim, const std::vector<EvidenceItem>& items) {
  if (providers.empty()) throw ConfigError("score_evidence needs at least one provider");
  for (const auto* p : providers)
    if (p->dimension() != providers.front()->dimension())
      throw DimensionError("providers disagree on dimension: " + std::to_string(providers.front()->dimension()) +
                           " vs " + std::to_string(p->dimension()));
  std::vector<Vector> claim_vecs;
  for (const auto* p : providers) claim_vecs.push_back(p->encode_text(claim));

  std::vector<std::pair<std::string, ScoredEvidence>> keyed;
  for (const auto& item : items) {
    if (item.text.empty()) continue;
    double total = 0.0;
    for (std::size_t k = 0; k < providers.size(); ++k)
      total += cosine(claim_vecs[k], providers[k]->encode_text(item.sequence));
    keyed.push_back({item.id.str(), {item.id, item.sequence, total / static_cast<double>(providers.size())}});
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.second.score != b.second.score) return a.second.score > b.second.score;
    return a.first < b.first;
  });
  std::vector<ScoredEvidence> out;
  out.reserve(keyed.size());
  for (auto& [_, s] : keyed) out.push_back(std::move(s));
  return out;
}

std::vector<ScoredEvidence> select_test_stl(const std::vector<ScoredEvidence>& ranked, EvidenceCaps caps) {
  std::vector<ScoredEvidence> out;
  std::size_t cells = 0, sentences = 0;
  for (const auto& e : ranked) {
    if (e.id.kind == ElementKind::kCell) {
      if (cells < caps.cells) {
        out.push_back(e);
        ++cells;
      }
    } else if (e.id.is_sentence_kind()) {
      if (sentences < caps.sentences) {
        out.push_back(e);
        ++sentences;
      }
    }
  }
  return out;
}

std::vector<ScoredEvidence> select_test_mtl(const std::vector<ScoredEvidence>& ranked, std::size_t cap) {
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(cap, ranked.size()))};
}

std::vector<ElementId> select_train_nodes(const std::vector<ElementId>& gold, const std::vector<ScoredEvidence>& ranked) {
  if (gold.empty() && ranked.empty()) throw DataError("training graph needs at least one node");
  std::vector<ElementId> nodes;
  std::set<ElementId> seen;
  for (const auto& g : gold)
    if (seen.insert(g).second) nodes.push_back(g);
  const std::size_t extra = gold.size() <= 1 ? 4 : gold.size();
  for (std::size_t i = 0; i < std::min(extra, ranked.size()); ++i)
    if (seen.insert(ranked[i].id).second) nodes.push_back(ranked[i].id);
  return nodes;
}

std::vector<std::pair<std::string, std::string>> load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw DataError("lexicon '" + path + "' line " + std::to_string(line_no) + ": expected surface<TAB>replacement");
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::vector<ClaimRecord> augment_nei(const std::vector<ClaimRecord>& claims, const PageStore& store,
                                     const AugmentationConfig& cfg) {
  std::vector<ClaimRecord> out = claims;
  if (cfg.n_reduction == 0 && cfg.n_mutation == 0) return out;

  std::int64_t next_id = 0;
  for (const auto& c : claims) next_id = std::max(next_id, c.claim_id + 1);

  std::vector<std::size_t> reducible, mutable_claims;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const auto& c = claims[i];
    if (!is_source(c) || !evidence_resolves(store, c)) continue;
    if (std::any_of(c.evidence_sets.begin(), c.evidence_sets.end(), [](const auto& s) { return s.size() >= 2; }))
      reducible.push_back(i);
    if (!substitutions(c.claim, cfg.entity_lexicon).empty()) mutable_claims.push_back(i);
  }
  if (cfg.n_reduction > 0 && reducible.empty())
    throw DataError("evidence reduction needs source claims for " + std::to_string(cfg.n_reduction) +
                    " records, but no SUPPORTS/REFUTES claim has an evidence set of two or more items");
  if (cfg.n_mutation > 0 && mutable_claims.empty())
    throw DataError("claim mutation needs source claims for " + std::to_string(cfg.n_mutation) +
                    " records, but no SUPPORTS/REFUTES claim contains a lexicon entry or number");

  Rng rng(cfg.rng_seed);
  out.reserve(out.size() + cfg.n_reduction + cfg.n_mutation);

  for (std::size_t n = 0; n < cfg.n_reduction; ++n) {
    const ClaimRecord& src = claims[reducible[rng.below(reducible.size())]];
    std::vector<const std::vector<ElementId>*> sets;
    for (const auto& s : src.evidence_sets)
      if (s.size() >= 2) sets.push_back(&s);
    std::vector<ElementId> kept = *sets[rng.below(sets.size())];
    // Drop a random non-empty proper subset.
    const std::size_t drop = 1 + rng.below(kept.size() - 1);
    rng.shuffle(kept);
    kept.resize(kept.size() - drop);
    std::sort(kept.begin(), kept.end());
    ClaimRecord rec{next_id++, src.claim, Label::kNei, {std::move(kept)}};
    out.push_back(std::move(rec));
  }

  for (std::size_t n = 0; n < cfg.n_mutation; ++n) {
    const ClaimRecord& src = claims[mutable_claims[rng.below(mutable_claims.size())]];
    const auto options = substitutions(src.claim, cfg.entity_lexicon);
    const Substitution& sub = options[rng.below(options.size())];
    std::string replacement = sub.replacement;
    if (sub.numeric) {
      const long long value = std::stoll(src.claim.substr(sub.begin, sub.length));
      replacement = std::to_string(value + 1 + static_cast<long long>(rng.below(9)));
    }
    std::string mutated = src.claim;
    mutated.replace(sub.begin, sub.length, replacement);
    out.push_back({next_id++, std::move(mutated), Label::kNei, src.evidence_sets});
  }
  return out;
}

}  // namespace evgraph
