#include "evgraph/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "evgraph/errors.hpp"

namespace evgraph {
namespace {

constexpr std::size_t kChunk = 8;

struct Adam {
  GraphReasoner m, v;
  std::size_t t = 0;
};

void add_into(GraphReasoner& dst, GraphReasoner& src, double scale) {
  std::vector<Matrix*> targets;
  dst.visit([&](const std::string&, Matrix& p) { targets.push_back(&p); });
  std::size_t i = 0;
  src.visit([&](const std::string&, Matrix& p) { *targets[i++] += scale * p; });
}

// Loss and gradient of one minibatch, chunked for deterministic summation.
LossParts batch_gradient(const GraphReasoner& model, const GraphBatch& batch, GraphReasoner& grad,
                         const TrainConfig& cfg, std::size_t step) {
  const std::size_t n_chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<GraphReasoner> grads(n_chunks);
  std::vector<LossParts> losses(n_chunks);

  auto work = [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(batch.size(), begin + kChunk);
    GraphBatch chunk(batch.begin() + static_cast<std::ptrdiff_t>(begin), batch.begin() + static_cast<std::ptrdiff_t>(end));
    grads[c] = model.zeros_like();
    Rng rng(cfg.rng_seed ^ (0x5851f42d4c957f2dULL * (step + 1)) ^ (c * 0x2545f4914f6cdd1dULL));
    losses[c] = loss_and_grad(model, chunk, grads[c], cfg.dropout, cfg.dropout > 0.0 ? &rng : nullptr);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(n_chunks)));
  if (threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) work(c);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t]() {
        for (std::size_t c = t; c < n_chunks; c += threads) work(c);
      });
  }

  LossParts total;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t size = std::min(batch.size(), (c + 1) * kChunk) - c * kChunk;
    const double w = static_cast<double>(size) * inv_b;
    add_into(grad, grads[c], w);
    total.joint += w * losses[c].joint;
    total.label += w * losses[c].label;
    total.evidence += w * losses[c].evidence;
  }
  return total;
}

void adam_step(GraphReasoner& model, GraphReasoner& grad, Adam& state, const TrainConfig& cfg) {
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  std::vector<Matrix*> g, m, v;
  grad.visit([&](const std::string&, Matrix& p) { g.push_back(&p); });
  state.m.visit([&](const std::string&, Matrix& p) { m.push_back(&p); });
  state.v.visit([&](const std::string&, Matrix& p) { v.push_back(&p); });
  std::size_t i = 0;
  model.visit([&](const std::string&, Matrix& p) {
    Matrix gi = *g[i];
    if (cfg.weight_decay > 0.0) gi += cfg.weight_decay * p;
    *m[i] = cfg.beta1 * *m[i] + (1.0 - cfg.beta1) * gi;
    *v[i] = cfg.beta2 * *v[i] + (1.0 - cfg.beta2) * gi.cwiseProduct(gi);
    p.array() -= cfg.learning_rate * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + cfg.adam_epsilon);
    ++i;
  });
}

}  // namespace

double label_accuracy(const GraphReasoner& model, const std::vector<const EvidenceGraph*>& graphs) {
  if (graphs.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto* g : graphs)
    if (g->label && model.predict_veracity(*g).label() == *g->label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(graphs.size());
}

double node_recall(const GraphReasoner& model, const std::vector<const EvidenceGraph*>& graphs, double threshold) {
  std::size_t gold = 0, hit = 0;
  for (const auto* g : graphs) {
    const Eigen::VectorXd p = model.predict_evidence_nodes(*g);
    for (std::size_t i = 0; i < g->size(); ++i) {
      if (!g->nodes[i].gold) continue;
      ++gold;
      if (p(static_cast<Eigen::Index>(i)) >= threshold) ++hit;
    }
  }
  return gold == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(gold);
}

TrainResult train(GraphReasoner model, const std::vector<EvidenceGraph>& dataset, const TrainConfig& cfg) {
  if (dataset.empty()) throw DataError("training on an empty dataset");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (cfg.holdout_fraction < 0.0 || cfg.holdout_fraction >= 1.0) throw ConfigError("holdout_fraction must be in [0, 1)");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  const bool mtl = model.mode() == Mode::kMtl;

  Rng rng(cfg.rng_seed);
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const auto n_holdout = static_cast<std::size_t>(std::floor(cfg.holdout_fraction * static_cast<double>(dataset.size())));
  std::vector<const EvidenceGraph*> heldout, training;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_holdout && n_holdout < order.size() ? heldout : training).push_back(&dataset[order[i]]);
  const std::vector<const EvidenceGraph*>& selection = heldout.empty() ? training : heldout;

  TrainResult result;
  result.model = model;
  Adam adam{model.zeros_like(), model.zeros_like(), 0};
  double best_metric = 0.0, best_loss = 0.0;
  bool have_best = false;

  auto evaluate = [&](StepLog& entry) {
    if (mtl) {
      entry.heldout_loss = loss_mtl(model, selection).joint;
      entry.heldout_metric = node_recall(model, selection);
    } else {
      entry.heldout_loss = loss_stl(model, selection);
      entry.heldout_metric = entry.heldout_loss;
    }
    const bool better = !have_best ||
                        (mtl ? (entry.heldout_metric > best_metric ||
                                (entry.heldout_metric == best_metric && entry.heldout_loss < best_loss))
                             : entry.heldout_metric < best_metric);
    if (better) {
      have_best = true;
      best_metric = entry.heldout_metric;
      best_loss = entry.heldout_loss;
      result.model = model;
      result.best_step = entry.step;
      result.best_metric = best_metric;
    }
  };

  std::vector<std::size_t> stream;
  std::size_t cursor = 0;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    GraphBatch batch;
    while (batch.size() < std::min(cfg.batch_size, training.size())) {
      if (cursor == stream.size()) {
        stream.resize(training.size());
        for (std::size_t i = 0; i < stream.size(); ++i) stream[i] = i;
        rng.shuffle(stream);
        cursor = 0;
      }
      batch.push_back(training[stream[cursor++]]);
    }
    GraphReasoner grad = model.zeros_like();
    StepLog entry;
    entry.step = step;
    entry.loss = batch_gradient(model, batch, grad, cfg, step);
    adam_step(model, grad, adam, cfg);
    if (cfg.select_checkpoint && (step % std::max<std::size_t>(1, cfg.eval_every) == 0 || step == cfg.steps))
      evaluate(entry);
    result.log.push_back(entry);
  }

  if (!cfg.select_checkpoint || !have_best) {
    result.model = model;
    result.best_step = cfg.steps;
  }
  return result;
}

void write_step_log(std::ostream& out, const std::vector<StepLog>& log) {
  out << "step,loss,label_loss,evidence_loss,heldout_loss,heldout_metric\n";
  out.precision(17);
  auto opt = [&](double v) {
    if (!std::isnan(v)) out << v;
  };
  for (const auto& e : log) {
    out << e.step << ',' << e.loss.joint << ',' << e.loss.label << ',' << e.loss.evidence << ',';
    opt(e.heldout_loss);
    out << ',';
    opt(e.heldout_metric);
    out << '\n';
  }
}

}  // namespace evgraph
