#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "evgraph/reasoner.hpp"

namespace evgraph {

struct TrainConfig {
  ModelConfig model;  // mode, input_dim (1024), hidden (128), lambda (0.5)
  double learning_rate = 1e-5;
  std::size_t batch_size = 64;
  std::size_t steps = 20000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t rng_seed = 0;
  double holdout_fraction = 0.05;  // split used for checkpoint selection
  std::size_t eval_every = 100;
  bool select_checkpoint = true;   // false keeps the final weights
  double dropout = 0.0;
  double weight_decay = 0.0;
  unsigned threads = 1;
};

struct StepLog {
  std::size_t step = 0;
  LossParts loss;
  // Selection metric when evaluated at this step, NaN otherwise: held-out
  // label loss (STL) or held-out evidence node recall (MTL).
  double heldout_metric = std::numeric_limits<double>::quiet_NaN();
  double heldout_loss = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  GraphReasoner model;
  std::vector<StepLog> log;
  std::size_t best_step = 0;
  double best_metric = std::numeric_limits<double>::quiet_NaN();
};

// Adam on shuffled minibatches. Gradients are accumulated over fixed chunks
// of 8 graphs and summed in chunk order, so results do not depend on the
// thread count. STL keeps the weights with the lowest held-out label loss;
// MTL keeps the highest held-out evidence recall (ties: lower joint loss).
// With no held-out graphs the training set is used for selection. Throws
// DataError for an empty dataset.
TrainResult train(GraphReasoner model, const std::vector<EvidenceGraph>& dataset, const TrainConfig& cfg);

double label_accuracy(const GraphReasoner& model, const std::vector<const EvidenceGraph*>& graphs);
// Fraction of gold nodes (pooled over graphs) with evidence probability >= threshold.
double node_recall(const GraphReasoner& model, const std::vector<const EvidenceGraph*>& graphs,
                   double threshold = 0.5);

void write_step_log(std::ostream& out, const std::vector<StepLog>& log);

}  // namespace evgraph
