#include "evgraph/reasoner.hpp"

#include <algorithm>
#include <cmath>

#include "evgraph/errors.hpp"

namespace evgraph {
namespace {

Matrix elu(const Matrix& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

Matrix elu_grad(const Matrix& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Row-wise softmax of an n x m matrix.
Matrix softmax_rows(const Matrix& e) {
  Matrix out(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    const double m = e.row(i).maxCoeff();
    out.row(i) = (e.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& g) {
  const double m = g.maxCoeff();
  Eigen::VectorXd w = (g.array() - m).exp().matrix();
  return w / w.sum();
}

double log_sum_exp(const Eigen::RowVectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

void xavier(Matrix& m, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  m.resize(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-limit, limit);
}

template <typename Model, typename F>
void visit_params(Model& m, F&& f) {
  auto layers = [&](auto& branch, const std::string& prefix) {
    for (std::size_t i = 0; i < branch.size(); ++i) {
      const std::string p = prefix + "." + std::to_string(i);
      f(p + ".weight", branch[i].weight);
      f(p + ".attention", branch[i].attention);
    }
  };
  layers(m.branch_a, "branch_a");
  layers(m.branch_b, "branch_b");
  f("pool.gate_weight", m.pool.gate_weight);
  f("pool.gate_bias", m.pool.gate_bias);
  f("pool.feature_weight", m.pool.feature_weight);
  f("pool.feature_bias", m.pool.feature_bias);
  f("head.w", m.head.w);
  f("head.b", m.head.b);
  f("head.m1", m.head.m1);
  f("head.c1", m.head.c1);
  f("head.m2", m.head.m2);
  f("head.c2", m.head.c2);
  if (m.mode() == Mode::kMtl) {
    f("evidence.e1", m.evidence.e1);
    f("evidence.f1", m.evidence.f1);
    f("evidence.e2", m.evidence.e2);
    f("evidence.f2", m.evidence.f2);
  }
}

void validate(const ModelConfig& c) {
  if (c.input_dim < 1 || c.hidden < 1 || c.mlp_hidden < 1 || c.evidence_hidden < 1)
    throw ConfigError("model dimensions must be positive");
  if (c.lambda < 0.0) throw ConfigError("lambda must be >= 0");
}

}  // namespace

std::string_view mode_name(Mode mode) { return mode == Mode::kMtl ? "mtl" : "stl"; }

Mode parse_mode(std::string_view s) {
  if (s == "stl") return Mode::kStl;
  if (s == "mtl") return Mode::kMtl;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected stl or mtl)");
}

Label VeracityPrediction::label() const {
  const auto it = std::max_element(probs.begin(), probs.end());
  return static_cast<Label>(it - probs.begin());
}

GatCache gat_forward(const GatLayer& layer, const Matrix& x, double slope) {
  if (x.cols() != layer.weight.rows())
    throw DimensionError("GAT layer expects " + std::to_string(layer.weight.rows()) + " input features, got " +
                         std::to_string(x.cols()));
  const Eigen::Index d_out = layer.weight.cols();
  GatCache c;
  c.input = x;
  c.z = x * layer.weight;
  const Eigen::VectorXd s = c.z * layer.attention.topRows(d_out);
  const Eigen::VectorXd t = c.z * layer.attention.bottomRows(d_out);
  c.pre = s.replicate(1, x.rows()) + t.transpose().replicate(x.rows(), 1);
  const Matrix e = c.pre.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
  c.alpha = softmax_rows(e);
  c.h = c.alpha * c.z;
  c.out = elu(c.h);
  return c;
}

Matrix gat_backward(const GatLayer& layer, const GatCache& c, const Matrix& d_out, double slope, GatLayer& grad) {
  const Eigen::Index d_out_dim = layer.weight.cols();
  Matrix d = c.dropout_mask.size() > 0 ? Matrix(d_out.cwiseProduct(c.dropout_mask)) : d_out;
  const Matrix dh = d.cwiseProduct(elu_grad(c.h));
  const Matrix d_alpha = dh * c.z.transpose();
  Matrix dz = c.alpha.transpose() * dh;
  // Softmax backward, row by row.
  const Eigen::VectorXd row_dot = c.alpha.cwiseProduct(d_alpha).rowwise().sum();
  const Matrix de = c.alpha.cwiseProduct(d_alpha - row_dot.replicate(1, d_alpha.cols()));
  const Matrix d_pre = de.cwiseProduct(c.pre.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; }));
  const Eigen::VectorXd ds = d_pre.rowwise().sum();
  const Eigen::VectorXd dt = d_pre.colwise().sum().transpose();
  dz += ds * layer.attention.topRows(d_out_dim).transpose() + dt * layer.attention.bottomRows(d_out_dim).transpose();
  grad.attention.topRows(d_out_dim) += c.z.transpose() * ds;
  grad.attention.bottomRows(d_out_dim) += c.z.transpose() * dt;
  grad.weight += c.input.transpose() * dz;
  return dz * layer.weight.transpose();
}

PoolCache pool_forward(const GlobalAttentionPool& pool, const Matrix& x) {
  if (x.rows() == 0) throw DataError("global attention pooling over an empty graph");
  PoolCache c;
  c.x = x;
  const Eigen::VectorXd g = (x * pool.gate_weight).col(0).array() + pool.gate_bias(0, 0);
  c.weights = softmax(g);
  c.theta = (x * pool.feature_weight).rowwise() + pool.feature_bias.row(0);
  c.out = c.weights.transpose() * c.theta;
  return c;
}

Matrix pool_backward(const GlobalAttentionPool& pool, const PoolCache& c, const Eigen::RowVectorXd& d_out,
                     GlobalAttentionPool& grad) {
  const Matrix d_theta = c.weights * d_out;
  const Eigen::VectorXd d_w = c.theta * d_out.transpose();
  const Eigen::VectorXd dg = c.weights.cwiseProduct((d_w.array() - c.weights.dot(d_w)).matrix());
  grad.gate_weight += c.x.transpose() * dg;
  grad.gate_bias(0, 0) += dg.sum();
  grad.feature_weight += c.x.transpose() * d_theta;
  grad.feature_bias += d_theta.colwise().sum();
  return d_theta * pool.feature_weight.transpose() + dg * pool.gate_weight.transpose();
}

GraphReasoner GraphReasoner::zeros(const ModelConfig& config) {
  validate(config);
  GraphReasoner m;
  m.config_ = config;
  const int h = config.hidden;
  const int branches = config.mode == Mode::kMtl ? 2 : 1;
  for (int b = 0; b < branches; ++b) {
    auto& branch = b == 0 ? m.branch_a : m.branch_b;
    branch.push_back({Matrix::Zero(config.input_dim, h), Matrix::Zero(2 * h, 1)});
    branch.push_back({Matrix::Zero(h, h), Matrix::Zero(2 * h, 1)});
  }
  const int d = m.node_dim();
  m.pool = {Matrix::Zero(d, 1), Matrix::Zero(1, 1), Matrix::Zero(d, d), Matrix::Zero(1, d)};
  m.head = {Matrix::Zero(d, d),
            Matrix::Zero(1, d),
            Matrix::Zero(d, config.mlp_hidden),
            Matrix::Zero(1, config.mlp_hidden),
            Matrix::Zero(config.mlp_hidden, kNumLabels),
            Matrix::Zero(1, kNumLabels)};
  if (config.mode == Mode::kMtl) {
    m.evidence = {Matrix::Zero(d, config.evidence_hidden), Matrix::Zero(1, config.evidence_hidden),
                  Matrix::Zero(config.evidence_hidden, 1), Matrix::Zero(1, 1)};
  }
  return m;
}

GraphReasoner GraphReasoner::init(const ModelConfig& config, std::uint64_t seed) {
  GraphReasoner m = zeros(config);
  Rng rng(seed);
  auto init = [&](Matrix& p) { xavier(p, p.rows(), p.cols(), rng); };
  for (auto* branch : {&m.branch_a, &m.branch_b}) {
    for (GatLayer& layer : *branch) {
      init(layer.weight);
      init(layer.attention);
    }
  }
  init(m.pool.gate_weight);
  init(m.pool.feature_weight);
  init(m.head.w);
  init(m.head.m1);
  init(m.head.m2);
  if (config.mode == Mode::kMtl) {
    init(m.evidence.e1);
    init(m.evidence.e2);
  }
  return m;
}

void GraphReasoner::visit(const std::function<void(const std::string&, Matrix&)>& f) { visit_params(*this, f); }

void GraphReasoner::visit(const std::function<void(const std::string&, const Matrix&)>& f) const {
  visit_params(*this, f);
}

std::size_t GraphReasoner::parameter_count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Matrix& p) { n += static_cast<std::size_t>(p.size()); });
  return n;
}

ForwardPass GraphReasoner::forward(const Matrix& x, double dropout, Rng* rng) const {
  if (x.cols() != config_.input_dim)
    throw DimensionError("model expects node features of dimension " + std::to_string(config_.input_dim) + ", got " +
                         std::to_string(x.cols()));
  if (x.rows() == 0) throw DataError("forward pass over an empty graph");
  const bool drop = dropout > 0.0 && rng != nullptr;
  ForwardPass p;
  auto run_branch = [&](const std::vector<GatLayer>& branch, std::vector<GatCache>& caches) {
    Matrix h = x;
    for (const GatLayer& layer : branch) {
      GatCache c = gat_forward(layer, h, config_.leaky_slope);
      if (drop) {
        c.dropout_mask.resize(c.out.rows(), c.out.cols());
        for (Eigen::Index j = 0; j < c.out.cols(); ++j)
          for (Eigen::Index i = 0; i < c.out.rows(); ++i)
            c.dropout_mask(i, j) = rng->uniform() < dropout ? 0.0 : 1.0 / (1.0 - dropout);
        c.out = c.out.cwiseProduct(c.dropout_mask);
      }
      h = c.out;
      caches.push_back(std::move(c));
    }
    return h;
  };
  const Matrix ha = run_branch(branch_a, p.a);
  if (config_.mode == Mode::kMtl) {
    const Matrix hb = run_branch(branch_b, p.b);
    p.nodes.resize(x.rows(), ha.cols() + hb.cols());
    p.nodes << ha, hb;
  } else {
    p.nodes = ha;
  }

  p.pool = pool_forward(pool, p.nodes);
  p.u = p.pool.out * head.w + head.b.row(0);
  p.v = p.u * head.m1 + head.c1.row(0);
  p.y = elu(p.v);
  p.logits = p.y * head.m2 + head.c2.row(0);
  const double lse = log_sum_exp(p.logits);
  p.probs = (p.logits.array() - lse).exp().matrix();

  if (config_.mode == Mode::kMtl) {
    p.ev_q = (p.nodes * evidence.e1).rowwise() + evidence.f1.row(0);
    p.ev_r = elu(p.ev_q);
    p.node_logits = (p.ev_r * evidence.e2).col(0).array() + evidence.f2(0, 0);
  }
  return p;
}

void GraphReasoner::backward(const ForwardPass& p, const Eigen::RowVectorXd& d_logits,
                             const Eigen::VectorXd* d_node_logits, GraphReasoner& grad) const {
  // Veracity head.
  grad.head.m2 += p.y.transpose() * d_logits;
  grad.head.c2 += d_logits;
  const Eigen::RowVectorXd dv = (d_logits * head.m2.transpose()).cwiseProduct(elu_grad(p.v));
  grad.head.m1 += p.u.transpose() * dv;
  grad.head.c1 += dv;
  const Eigen::RowVectorXd du = dv * head.m1.transpose();
  grad.head.w += p.pool.out.transpose() * du;
  grad.head.b += du;
  const Eigen::RowVectorXd d_o = du * head.w.transpose();

  Matrix d_nodes = pool_backward(pool, p.pool, d_o, grad.pool);

  if (config_.mode == Mode::kMtl && d_node_logits) {
    grad.evidence.e2 += p.ev_r.transpose() * (*d_node_logits);
    grad.evidence.f2(0, 0) += d_node_logits->sum();
    const Matrix dq = ((*d_node_logits) * evidence.e2.transpose()).cwiseProduct(elu_grad(p.ev_q));
    grad.evidence.e1 += p.nodes.transpose() * dq;
    grad.evidence.f1 += dq.colwise().sum();
    d_nodes += dq * evidence.e1.transpose();
  }

  auto back_branch = [&](const std::vector<GatLayer>& branch, const std::vector<GatCache>& caches,
                         std::vector<GatLayer>& grads, Matrix d) {
    for (std::size_t i = branch.size(); i-- > 0;)
      d = gat_backward(branch[i], caches[i], d, config_.leaky_slope, grads[i]);
  };
  if (config_.mode == Mode::kMtl) {
    const Eigen::Index h = config_.hidden;
    back_branch(branch_a, p.a, grad.branch_a, d_nodes.leftCols(h));
    back_branch(branch_b, p.b, grad.branch_b, d_nodes.rightCols(h));
  } else {
    back_branch(branch_a, p.a, grad.branch_a, d_nodes);
  }
}

VeracityPrediction GraphReasoner::predict_veracity(const EvidenceGraph& g) const {
  const ForwardPass p = forward(g.feature_matrix());
  VeracityPrediction out;
  for (int k = 0; k < kNumLabels; ++k) out.probs[static_cast<std::size_t>(k)] = p.probs(k);
  out.gate_weights = p.pool.weights;
  out.first_layer_attention = p.a.front().alpha;
  return out;
}

Eigen::VectorXd GraphReasoner::predict_evidence_nodes(const EvidenceGraph& g) const {
  if (config_.mode != Mode::kMtl) throw Error("evidence node prediction needs an MTL model");
  const ForwardPass p = forward(g.feature_matrix());
  return p.node_logits.unaryExpr([](double l) { return sigmoid(l); });
}

namespace {

LossParts compute_loss(const GraphReasoner& model, const GraphBatch& batch, double lambda, bool with_evidence,
                       GraphReasoner* grad, double dropout, Rng* rng) {
  if (batch.empty()) throw DataError("loss over an empty batch");
  if (with_evidence && model.mode() != Mode::kMtl) throw Error("MTL loss needs an MTL model");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  LossParts total;
  for (const EvidenceGraph* g : batch) {
    if (!g->label) throw DataError("graph " + std::to_string(g->claim_id) + " has no label");
    if (with_evidence && !g->has_gold_flags)
      throw DataError("graph " + std::to_string(g->claim_id) + " has no gold node flags");
    const ForwardPass p = model.forward(g->feature_matrix(), dropout, rng);
    const int y = static_cast<int>(*g->label);
    total.label += (log_sum_exp(p.logits) - p.logits(y)) * inv_b;

    Eigen::VectorXd d_nodes;
    if (with_evidence) {
      const double inv_n = 1.0 / static_cast<double>(g->size());
      d_nodes.resize(static_cast<Eigen::Index>(g->size()));
      double bce = 0.0;
      for (std::size_t i = 0; i < g->size(); ++i) {
        const double l = p.node_logits(static_cast<Eigen::Index>(i));
        const double t = g->nodes[i].gold ? 1.0 : 0.0;
        bce += softplus(l) - t * l;
        d_nodes(static_cast<Eigen::Index>(i)) = lambda * (sigmoid(l) - t) * inv_n * inv_b;
      }
      total.evidence += bce * inv_n * inv_b;
    }
    if (grad) {
      Eigen::RowVectorXd d_logits = p.probs * inv_b;
      d_logits(y) -= inv_b;
      model.backward(p, d_logits, with_evidence ? &d_nodes : nullptr, *grad);
    }
  }
  total.joint = total.label + (with_evidence ? lambda * total.evidence : 0.0);
  return total;
}

}  // namespace

double loss_stl(const GraphReasoner& model, const GraphBatch& batch) {
  return compute_loss(model, batch, 0.0, false, nullptr, 0.0, nullptr).label;
}

LossParts loss_mtl(const GraphReasoner& model, const GraphBatch& batch, double lambda) {
  return compute_loss(model, batch, lambda, true, nullptr, 0.0, nullptr);
}

LossParts loss_mtl(const GraphReasoner& model, const GraphBatch& batch) {
  return loss_mtl(model, batch, model.config().lambda);
}

LossParts loss_and_grad(const GraphReasoner& model, const GraphBatch& batch, GraphReasoner& grad, double dropout,
                        Rng* rng) {
  const bool mtl = model.mode() == Mode::kMtl;
  return compute_loss(model, batch, model.config().lambda, mtl, &grad, dropout, rng);
}

double max_relative_gradient_error(const std::vector<ParamRef>& params, const std::function<double()>& loss,
                                   double epsilon) {
  double worst = 0.0;
  for (const ParamRef& p : params) {
    Matrix& value = *p.value;
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      const double saved = value.data()[k];
      value.data()[k] = saved + epsilon;
      const double up = loss();
      value.data()[k] = saved - epsilon;
      const double down = loss();
      value.data()[k] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = p.grad->data()[k];
      const double err = std::abs(analytic - numeric) / std::max(1e-6, std::abs(analytic) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double grad_check(GraphReasoner& model, const GraphBatch& batch, double epsilon) {
  GraphReasoner grad = model.zeros_like();
  loss_and_grad(model, batch, grad);
  std::vector<ParamRef> refs;
  model.visit([&](const std::string& name, Matrix& value) { refs.push_back({name, &value, nullptr}); });
  std::size_t i = 0;
  grad.visit([&](const std::string&, const Matrix& g) { refs[i++].grad = &g; });
  const bool mtl = model.mode() == Mode::kMtl;
  return max_relative_gradient_error(
      refs,
      [&]() {
        return mtl ? loss_mtl(model, batch).joint : loss_stl(model, batch);
      },
      epsilon);
}

}  // namespace evgraph
