#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "evgraph/graph.hpp"
#include "evgraph/rng.hpp"

namespace evgraph {

using Matrix = Eigen::MatrixXd;

enum class Mode { kStl, kMtl };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view s);  // "stl" | "mtl", throws ConfigError

struct ModelConfig {
  Mode mode = Mode::kStl;
  int input_dim = 1024;
  int hidden = 128;          // GAT layer width; MTL concatenates two branches
  int mlp_hidden = 128;      // veracity MLP hidden layer
  int evidence_hidden = 64;  // evidence head hidden layer (MTL)
  double leaky_slope = 0.2;
  double lambda = 0.5;       // weight of the evidence loss in MTL
};

inline constexpr int kNumLabels = 3;

// Single-head graph attention layer over a complete graph with self-loops.
// Node features are rows: Z = X W, e_ij = LeakyReLU(a_src.z_i + a_dst.z_j),
// alpha = row softmax of e, out = ELU(alpha Z).
struct GatLayer {
  Matrix weight;     // d_in x d_out
  Matrix attention;  // 2*d_out x 1: source half then destination half
};

struct GatCache {
  Matrix input;
  Matrix z;
  Matrix pre;    // pre-activation attention logits
  Matrix alpha;  // attention coefficients, rows sum to 1
  Matrix h;      // alpha Z before ELU
  Matrix out;
  Matrix dropout_mask;  // empty when dropout is off
};

GatCache gat_forward(const GatLayer& layer, const Matrix& x, double slope);
// Accumulates parameter gradients into `grad` and returns d loss / d input.
Matrix gat_backward(const GatLayer& layer, const GatCache& cache, const Matrix& d_out, double slope, GatLayer& grad);

// o = sum_n softmax_n(x_n . w_gate + b_gate) * (x_n Theta + b_Theta)
struct GlobalAttentionPool {
  Matrix gate_weight;     // d x 1
  Matrix gate_bias;       // 1 x 1
  Matrix feature_weight;  // d x d
  Matrix feature_bias;    // 1 x d
};

struct PoolCache {
  Matrix x;
  Eigen::VectorXd weights;  // softmax of gate logits over nodes
  Matrix theta;             // n x d transformed features
  Eigen::RowVectorXd out;
};

PoolCache pool_forward(const GlobalAttentionPool& pool, const Matrix& x);
Matrix pool_backward(const GlobalAttentionPool& pool, const PoolCache& cache, const Eigen::RowVectorXd& d_out,
                     GlobalAttentionPool& grad);

// logits = ELU((o W + b) M1 + c1) M2 + c2
struct VeracityHead {
  Matrix w, b;    // d x d, 1 x d
  Matrix m1, c1;  // d x mlp_hidden, 1 x mlp_hidden
  Matrix m2, c2;  // mlp_hidden x 3, 1 x 3
};

// Per-node logit = ELU(h E1 + f1) E2 + f2
struct EvidenceHead {
  Matrix e1, f1;  // d x evidence_hidden, 1 x evidence_hidden
  Matrix e2, f2;  // evidence_hidden x 1, 1 x 1
};

struct ForwardPass;

struct VeracityPrediction {
  std::array<double, kNumLabels> probs{};  // SUPPORTS, REFUTES, NOT ENOUGH INFO
  Eigen::VectorXd gate_weights;            // pooling softmax per node
  Matrix first_layer_attention;            // alpha of the first GAT layer (branch a)
  Label label() const;
};

class GraphReasoner {
 public:
  GraphReasoner() = default;
  // Xavier-uniform matrices and zero biases from `seed`.
  static GraphReasoner init(const ModelConfig& config, std::uint64_t seed);
  // Same shapes, all parameters zero.
  static GraphReasoner zeros(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }
  Mode mode() const { return config_.mode; }
  int node_dim() const { return config_.mode == Mode::kMtl ? 2 * config_.hidden : config_.hidden; }

  // Visits parameters in a fixed order with stable dotted names.
  void visit(const std::function<void(const std::string&, Matrix&)>& f);
  void visit(const std::function<void(const std::string&, const Matrix&)>& f) const;
  std::size_t parameter_count() const;
  GraphReasoner zeros_like() const { return zeros(config_); }

  // x is n x input_dim. dropout > 0 requires rng and is meant for training.
  ForwardPass forward(const Matrix& x, double dropout = 0.0, Rng* rng = nullptr) const;
  // Accumulates gradients for d loss / d logits and (MTL) d loss / d node logits.
  void backward(const ForwardPass& pass, const Eigen::RowVectorXd& d_logits, const Eigen::VectorXd* d_node_logits,
                GraphReasoner& grad) const;

  // Throws DimensionError when the graph's features do not match input_dim.
  VeracityPrediction predict_veracity(const EvidenceGraph& g) const;
  // Per-node evidence probabilities. Throws Error for an STL model.
  Eigen::VectorXd predict_evidence_nodes(const EvidenceGraph& g) const;

  std::vector<GatLayer> branch_a;
  std::vector<GatLayer> branch_b;  // MTL only
  GlobalAttentionPool pool;
  VeracityHead head;
  EvidenceHead evidence;  // MTL only

 private:
  ModelConfig config_;
};

struct ForwardPass {
  std::vector<GatCache> a;
  std::vector<GatCache> b;
  Matrix nodes;  // combined node representation fed to pooling
  PoolCache pool;
  Eigen::RowVectorXd u, v, y;  // head intermediates: oW+b, uM1+c1, ELU(v)
  Eigen::RowVectorXd logits;
  Eigen::RowVectorXd probs;
  Matrix ev_q, ev_r;  // evidence head intermediates
  Eigen::VectorXd node_logits;
};

struct LossParts {
  double joint = 0.0;
  double label = 0.0;
  double evidence = 0.0;
};

using GraphBatch = std::vector<const EvidenceGraph*>;

// Mean categorical cross-entropy of the veracity logits. Throws DataError for
// an unlabeled graph or an empty batch.
double loss_stl(const GraphReasoner& model, const GraphBatch& batch);

// L_joint = lambda * L_evidence + L_label, where L_evidence is the per-graph
// mean node binary cross-entropy averaged over graphs. Throws DataError when
// a graph lacks gold flags or a label, Error for an STL model.
LossParts loss_mtl(const GraphReasoner& model, const GraphBatch& batch, double lambda);
LossParts loss_mtl(const GraphReasoner& model, const GraphBatch& batch);

// Loss of the model's own mode (lambda from its config) with gradients
// accumulated into `grad`.
LossParts loss_and_grad(const GraphReasoner& model, const GraphBatch& batch, GraphReasoner& grad,
                        double dropout = 0.0, Rng* rng = nullptr);

struct ParamRef {
  std::string name;
  Matrix* value;
  const Matrix* grad;
};

// Central differences on every entry of every parameter; returns
// max |analytic - numeric| / max(1e-6, |analytic| + |numeric|). The floor sits
// above the round-off of central differences on near-zero gradients.
double max_relative_gradient_error(const std::vector<ParamRef>& params, const std::function<double()>& loss,
                                   double epsilon);

// Gradient check of loss_and_grad for the model's mode on `batch`.
double grad_check(GraphReasoner& model, const GraphBatch& batch, double epsilon = 1e-5);

}  // namespace evgraph
