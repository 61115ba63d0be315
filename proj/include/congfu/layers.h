#pragma once

// Graph layers: GINE message passing, the three stages of a CongFu layer
// (context propagation, graph update, attention-readout bottleneck), the
// multi-graph bottleneck, the bipartite cross-attention layer used when
// conditioning is ablated, and plain MLPs.
//
// Node features are row matrices [N x D] and weights act from the right
// (x . W), so a weight stored as [D_in x D_out] maps rows of width D_in to
// width D_out. Contexts are one row per graph: [G x D].

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "congfu/graph_batch.h"
#include "congfu/ops.h"

namespace congfu::nn {

/// Seeded initializer. Each parameter draws from its own generator derived
/// from (seed, name), so its values do not depend on creation order.
class ParamInit {
 public:
  explicit ParamInit(std::uint64_t seed) : seed_(seed) {}

  /// U(-1/sqrt(fan_in), +1/sqrt(fan_in))
  template <typename T>
  Tensor<T> uniform(const std::string& name, Shape shape, std::size_t fan_in) const;
  /// N(0, 1) / sqrt(width), for embedding tables [V x width].
  template <typename T>
  Tensor<T> embedding(const std::string& name, std::size_t rows, std::size_t width) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Visitor over named parameters (learnable) and buffers (running stats).
template <typename T>
struct StateVisitor {
  std::function<void(const std::string&, Tensor<T>&)> param;
  std::function<void(const std::string&, std::vector<T>&)> buffer;
};

template <typename T>
struct Linear {
  Tensor<T> weight;  // [in x out]
  Tensor<T> bias;    // [out]

  static Linear init(const ParamInit& init, const std::string& name, std::size_t in, std::size_t out);
  Tensor<T> forward(const Tensor<T>& x) const { return add_bias(matmul(x, weight), bias); }
  void visit(const std::string& prefix, const StateVisitor<T>& v);
};

/// Affine layers with ReLU between them and none after the last.
template <typename T>
struct Mlp {
  std::vector<Linear<T>> layers;

  /// sizes = [in, hidden..., out]
  static Mlp init(const ParamInit& init, const std::string& name, const std::vector<std::size_t>& sizes);
  std::size_t in_features() const;
  std::size_t out_features() const;
  void visit(const std::string& prefix, const StateVisitor<T>& v);
};

template <typename T>
Tensor<T> mlp_forward(const Tensor<T>& x, const Mlp<T>& mlp);

template <typename T>
struct BatchNormParams {
  Tensor<T> gamma;
  Tensor<T> beta;
  BatchNormState<T> state;

  static BatchNormParams init(std::size_t features);
  void visit(const std::string& prefix, const StateVisitor<T>& v);
};

/// x' = MLP((1 + eps) x + sum_{j in N(i)} ReLU(x_j + e_ji)), with the bond
/// embedding e looked up from this layer's own table.
template <typename T>
struct GineLayerParams {
  Tensor<T> eps;             // [1], learnable
  Mlp<T> mlp;                // D -> D -> D
  Tensor<T> edge_embedding;  // [5 x D]

  static GineLayerParams init(const ParamInit& init, const std::string& name, std::size_t width);
  void visit(const std::string& prefix, const StateVisitor<T>& v);
};

/// GINE followed by batch norm and ReLU.
template <typename T>
struct GraphUpdateParams {
  GineLayerParams<T> gine;
  BatchNormParams<T> bn;

  static GraphUpdateParams init(const ParamInit& init, const std::string& name, std::size_t width);
  void visit(const std::string& prefix, const StateVisitor<T>& v);
};

/// Attention readout shared by both graphs of a layer.
template <typename T>
struct ReadoutParams {
  Tensor<T> w4;  // [D x D]
  Tensor<T> d;   // [2D], scores [W4 c || W4 x_i]
  Tensor<T> b;   // [D]

  static ReadoutParams init(const ParamInit& init, const std::string& name, std::size_t width);
  void visit(const std::string& prefix, const StateVisitor<T>& v);
};

template <typename T>
struct CongFuLayerParams {
  std::optional<Tensor<T>> context_weight;  // [D_cont x D]; only when the context is not yet at width D
  Tensor<T> w1;  // node self transform
  Tensor<T> w2;  // context output transform
  Tensor<T> w3;  // context input transform
  GraphUpdateParams<T> update;
  ReadoutParams<T> readout;

  /// `name` prefixes the context-propagation and readout weights
  /// (congfu.{l}); `update_name` prefixes the inner graph update (gine.{l}).
  static CongFuLayerParams init(const ParamInit& init, const std::string& name, const std::string& update_name,
                                std::size_t width);
  void visit(const std::string& prefix, const std::string& update_prefix, const StateVisitor<T>& v);
};

/// Single-head graph attention over the complete bipartite graph between the
/// two molecules of a pair.
template <typename T>
struct CrossAttentionLayerParams {
  Tensor<T> weight;     // [D x D], shared projection for both sides
  Tensor<T> attention;  // [2D], scores [W h_i || W h_j]
  Tensor<T> bias;       // [D]
  T negative_slope = T(0.2);

  static CrossAttentionLayerParams init(const ParamInit& init, const std::string& name, std::size_t width);
  void visit(const std::string& prefix, const StateVisitor<T>& v);
};

/// c . W when the context width differs from `width`; otherwise c itself.
template <typename T>
Tensor<T> context_transform(const Tensor<T>& context, const Tensor<T>* weight, std::size_t width);

/// x + x W1 + gather(ReLU(c W3) W2): every node of graph g receives the same
/// context term computed from row g of the context.
template <typename T>
Tensor<T> context_propagation(const Tensor<T>& x, const Tensor<T>& context, std::span<const Index> segments,
                              const Tensor<T>& w1, const Tensor<T>& w2, const Tensor<T>& w3);

template <typename T>
Tensor<T> gine_forward(const Tensor<T>& x, const GraphBatch& graph, const GineLayerParams<T>& params);

/// ReLU(BatchNorm(GINE(x))).
template <typename T>
Tensor<T> graph_update(const Tensor<T>& x, const GraphBatch& graph, GraphUpdateParams<T>& params, Mode mode);

/// Per graph j: alpha = softmax_i(d . [W4 c_j || W4 x_i]) and
/// c_j = sum_i alpha_i / (N_j + 1) * W4 x_i + b. A graph without nodes
/// reads out b.
template <typename T>
Tensor<T> attention_readout(const Tensor<T>& x, const Tensor<T>& context, const ReadoutParams<T>& params,
                            const GraphBatch& graph);

/// Attention coefficients of the readout, one per node (for inspection).
template <typename T>
std::vector<T> readout_attention(const Tensor<T>& x, const Tensor<T>& context, const ReadoutParams<T>& params,
                                 const GraphBatch& graph);

/// Local contexts of both graphs summed into the new global context.
template <typename T>
Tensor<T> bottleneck(const Tensor<T>& xa, const Tensor<T>& xb, const Tensor<T>& context,
                     const ReadoutParams<T>& params, const GraphBatch& graph_a, const GraphBatch& graph_b);

/// Elementwise sum of k >= 1 local contexts, folded left to right.
template <typename T>
Tensor<T> multi_graph_bottleneck(const std::vector<Tensor<T>>& readouts);

template <typename T>
struct CongFuOutput {
  Tensor<T> xa;
  Tensor<T> xb;
  Tensor<T> context;
};

/// Context propagation, graph update and bottleneck for a batch of pairs.
template <typename T>
CongFuOutput<T> congfu_layer_forward(const Tensor<T>& xa, const Tensor<T>& xb, const Tensor<T>& context,
                                     const GraphBatch& graph_a, const GraphBatch& graph_b,
                                     CongFuLayerParams<T>& params, Mode mode);

template <typename T>
struct CrossAttentionOutput {
  Tensor<T> xa;
  Tensor<T> xb;
};

/// Each node of one molecule attends over all nodes of its partner:
/// h_i' = sum_j alpha_ij W h_j + bias with
/// alpha_ij = softmax_j(LeakyReLU(a . [W h_i || W h_j])).
template <typename T>
CrossAttentionOutput<T> cross_attention_layer_forward(const Tensor<T>& xa, const Tensor<T>& xb,
                                                      const GraphBatch& graph_a, const GraphBatch& graph_b,
                                                      const CrossAttentionLayerParams<T>& params);

/// Attention weights of the nodes of `query` over their partner nodes, in
/// (query node, partner node) order.
template <typename T>
std::vector<T> cross_attention_weights(const Tensor<T>& query, const Tensor<T>& keys, const GraphBatch& graph_q,
                                       const GraphBatch& graph_k, const CrossAttentionLayerParams<T>& params);

}  // namespace congfu::nn
