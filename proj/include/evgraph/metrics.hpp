#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evgraph/corpus.hpp"
#include "evgraph/evidence.hpp"

namespace evgraph {

struct Prediction {
  std::int64_t claim_id = 0;
  Label label = Label::kNei;
  std::vector<ElementId> evidence;
};

// Every metric aligns predictions with gold records by claim id and throws
// DataError when the two id sets differ or an id repeats.

double label_accuracy(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold);

// Fraction of claims where at least one complete gold evidence set is
// contained in the predicted evidence. A claim without gold sets, or with an
// empty one, counts as covered.
double evidence_recall(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold);

// Mean over claims with non-empty predicted evidence of the fraction of
// predicted ids found in any gold set; 0 when no claim predicts evidence.
double evidence_precision(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold);

// Fraction of claims with the correct label AND a covered gold evidence set,
// for every label including NOT ENOUGH INFO.
double feverous_score(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold);

struct ScoredId {
  ElementId id;
  double score = 0.0;
};

// Keeps the top caps.cells cell-budget ids (cells, header cells and list
// items) and the top caps.sentences sentences/captions by score, ties by id
// string. Result is sorted by descending score.
std::vector<ElementId> enforce_limits(std::vector<ScoredId> evidence, EvidenceCaps caps = {});
bool within_limits(const std::vector<ElementId>& evidence, EvidenceCaps caps = {});

struct EvaluationReport {
  double label_accuracy = 0.0;
  double evidence_recall = 0.0;
  double evidence_precision = 0.0;
  double feverous_score = 0.0;
  std::size_t n = 0;

  // {"label_accuracy": f, "evidence_recall": f, "evidence_precision": f,
  //  "feverous_score": f, "n": int}
  std::string to_json() const;
};

// Throws DataError when a prediction exceeds the evidence limits.
EvaluationReport evaluate(const std::vector<Prediction>& preds, const std::vector<ClaimRecord>& gold,
                          EvidenceCaps caps = {});

}  // namespace evgraph
