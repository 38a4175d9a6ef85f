#include <cmath>
#include <cstring>
#include <sstream>

#include "doctest.h"
#include "evgraph/errors.hpp"
#include "evgraph/trainer.hpp"
#include "support.hpp"

using namespace evgraph;

namespace {

TrainConfig quick(Mode mode, std::size_t steps) {
  TrainConfig cfg;
  cfg.model.mode = mode;
  cfg.model.input_dim = 32;
  cfg.model.hidden = 8;
  cfg.model.mlp_hidden = 8;
  cfg.model.evidence_hidden = 4;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 16;
  cfg.steps = steps;
  cfg.eval_every = 5;
  cfg.rng_seed = 4;
  return cfg;
}

bool same_params(const GraphReasoner& a, const GraphReasoner& b) {
  std::vector<Matrix> pa, pb;
  a.visit([&](const std::string&, const Matrix& m) { pa.push_back(m); });
  b.visit([&](const std::string&, const Matrix& m) { pb.push_back(m); });
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i].size() != pb[i].size() || std::memcmp(pa[i].data(), pb[i].data(), sizeof(double) * pa[i].size()) != 0)
      return false;
  return true;
}

std::vector<const EvidenceGraph*> ptrs(const std::vector<EvidenceGraph>& gs) {
  std::vector<const EvidenceGraph*> out;
  for (const auto& g : gs) out.push_back(&g);
  return out;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("zero learning rate leaves parameters unchanged") {
    const auto data = testing::planted_dataset(20, 32, 1);
    auto cfg = quick(Mode::kMtl, 10);
    cfg.learning_rate = 0.0;
    cfg.select_checkpoint = false;
    const auto init = GraphReasoner::init(cfg.model, 5);
    CHECK(same_params(train(init, data, cfg).model, init));
  }

  TEST_CASE("same seed reproduces bit-identical weights for any thread count") {
    const auto data = testing::planted_dataset(40, 32, 2);
    for (Mode mode : {Mode::kStl, Mode::kMtl}) {
      auto cfg = quick(mode, 20);
      cfg.dropout = 0.1;
      const auto a = train(GraphReasoner::init(cfg.model, 1), data, cfg);
      const auto b = train(GraphReasoner::init(cfg.model, 1), data, cfg);
      cfg.threads = 3;
      const auto c = train(GraphReasoner::init(cfg.model, 1), data, cfg);
      CHECK(same_params(a.model, b.model));
      CHECK(same_params(a.model, c.model));
      CHECK(a.best_step == c.best_step);
    }
  }

  TEST_CASE("loss decreases on a planted dataset") {
    const auto data = testing::planted_dataset(60, 32, 3);
    auto cfg = quick(Mode::kMtl, 60);
    cfg.holdout_fraction = 0.0;
    cfg.select_checkpoint = false;
    const auto result = train(GraphReasoner::init(cfg.model, 2), data, cfg);
    const auto first = loss_mtl(GraphReasoner::init(cfg.model, 2), ptrs(data)).joint;
    const auto last = loss_mtl(result.model, ptrs(data)).joint;
    CHECK(last < first);
  }

  TEST_CASE("checkpoint selection keeps the best evaluated step") {
    const auto data = testing::planted_dataset(40, 32, 4);
    auto cfg = quick(Mode::kStl, 30);
    cfg.holdout_fraction = 0.25;
    const auto r = train(GraphReasoner::init(cfg.model, 3), data, cfg);
    double best = 1e300;
    std::size_t step = 0;
    for (const auto& e : r.log)
      if (!std::isnan(e.heldout_metric) && e.heldout_metric < best) {
        best = e.heldout_metric;
        step = e.step;
      }
    CHECK(r.best_step == step);
    CHECK(r.best_metric == best);

    auto mcfg = quick(Mode::kMtl, 30);
    mcfg.holdout_fraction = 0.25;
    const auto m = train(GraphReasoner::init(mcfg.model, 3), data, mcfg);
    double top = -1;
    for (const auto& e : m.log)
      if (!std::isnan(e.heldout_metric)) top = std::max(top, e.heldout_metric);
    CHECK(m.best_metric == top);
  }

  TEST_CASE("configuration errors") {
    const auto data = testing::planted_dataset(4, 32, 5);
    auto cfg = quick(Mode::kStl, 2);
    CHECK_THROWS_AS(train(GraphReasoner::init(cfg.model, 0), {}, cfg), DataError);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train(GraphReasoner::init(cfg.model, 0), data, cfg), ConfigError);
  }

  TEST_CASE("step log csv") {
    const auto data = testing::planted_dataset(10, 32, 6);
    auto cfg = quick(Mode::kMtl, 6);
    const auto r = train(GraphReasoner::init(cfg.model, 0), data, cfg);
    std::ostringstream out;
    write_step_log(out, r.log);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,loss,label_loss,evidence_loss,heldout_loss,heldout_metric");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
  }

  TEST_CASE("accuracy and node recall helpers") {
    const auto data = testing::planted_dataset(10, 32, 7);
    ModelConfig c = quick(Mode::kMtl, 1).model;
    const auto zero = GraphReasoner::zeros(c);
    // Zero model: all nodes at 0.5 count as recalled; argmax ties go to SUPPORTS.
    CHECK(node_recall(zero, ptrs(data)) == 1.0);
    std::size_t supports = 0;
    for (const auto& g : data) supports += *g.label == Label::kSupports;
    CHECK(label_accuracy(zero, ptrs(data)) == doctest::Approx(static_cast<double>(supports) / 10.0));
  }
}
