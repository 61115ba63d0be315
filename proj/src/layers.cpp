#include "congfu/layers.h"

#include <cmath>
#include <random>

#include "congfu/log.h"

namespace congfu::nn {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::mt19937_64 generator_for(std::uint64_t seed, const std::string& name) {
  const auto h = fnv1a(name);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

template <typename T>
Tensor<T> param(Tensor<T> t) {
  t.set_requires_grad(true);
  return t;
}

// Index lists of the complete bipartite graph between the molecules of each
// pair, ordered by query node and then partner node.
struct BipartitePairs {
  std::vector<Index> query;
  std::vector<Index> key;
};

BipartitePairs bipartite_pairs(const GraphBatch& q, const GraphBatch& k) {
  if (q.num_graphs() != k.num_graphs()) {
    throw DimensionError("cross attention: " + std::to_string(q.num_graphs()) + " query graphs vs " +
                         std::to_string(k.num_graphs()) + " partner graphs");
  }
  BipartitePairs p;
  for (std::size_t g = 0; g < q.num_graphs(); ++g) {
    if (q.graph_size(g) == 0 || k.graph_size(g) == 0) {
      throw ContractError("cross attention: pair " + std::to_string(g) + " has an empty molecule");
    }
    for (auto i = q.node_offsets[g]; i < q.node_offsets[g + 1]; ++i)
      for (auto j = k.node_offsets[g]; j < k.node_offsets[g + 1]; ++j) {
        p.query.push_back(i);
        p.key.push_back(j);
      }
  }
  return p;
}

template <typename T>
Tensor<T> column(const Tensor<T>& v) {
  return reshape(v, Shape{v.size(), 1});
}

template <typename T>
Tensor<T> readout_scores(const Tensor<T>& projected, const Tensor<T>& context, const ReadoutParams<T>& params,
                         const GraphBatch& graph) {
  const auto ctx = embedding_lookup(matmul(context, params.w4), graph.segments);
  const auto scores = matmul(concat_rows<T>({ctx, projected}), column(params.d));
  return segment_softmax(reshape(scores, Shape{graph.num_nodes()}), graph.segments, graph.num_graphs());
}

template <typename T>
Tensor<T> cross_scores(const Tensor<T>& wq, const Tensor<T>& wk, const BipartitePairs& pairs, std::size_t n_query,
                       const CrossAttentionLayerParams<T>& params) {
  const auto cat = concat_rows<T>({embedding_lookup(wq, pairs.query), embedding_lookup(wk, pairs.key)});
  const auto raw = reshape(matmul(cat, column(params.attention)), Shape{pairs.query.size()});
  return segment_softmax(leaky_relu(raw, params.negative_slope), pairs.query, n_query);
}

template <typename T>
Tensor<T> cross_attend(const Tensor<T>& q, const Tensor<T>& k, const GraphBatch& gq, const GraphBatch& gk,
                       const CrossAttentionLayerParams<T>& params) {
  const auto pairs = bipartite_pairs(gq, gk);
  const auto wq = matmul(q, params.weight);
  const auto wk = matmul(k, params.weight);
  const auto alpha = cross_scores(wq, wk, pairs, gq.num_nodes(), params);
  const auto msg = mul_rows(embedding_lookup(wk, pairs.key), alpha);
  return add_bias(segment_sum(msg, pairs.query, gq.num_nodes()), params.bias);
}

}  // namespace

template <typename T>
Tensor<T> ParamInit::uniform(const std::string& name, Shape shape, std::size_t fan_in) const {
  auto gen = generator_for(seed_, name);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> data(numel(shape));
  for (auto& v : data) v = static_cast<T>(dist(gen));
  return Tensor<T>(std::move(shape), std::move(data));
}

template <typename T>
Tensor<T> ParamInit::embedding(const std::string& name, std::size_t rows, std::size_t width) const {
  auto gen = generator_for(seed_, name);
  std::normal_distribution<double> dist(0.0, 1.0);
  const double s = 1.0 / std::sqrt(static_cast<double>(width));
  std::vector<T> data(rows * width);
  for (auto& v : data) v = static_cast<T>(dist(gen) * s);
  return Tensor<T>({rows, width}, std::move(data));
}

template <typename T>
Linear<T> Linear<T>::init(const ParamInit& init, const std::string& name, std::size_t in, std::size_t out) {
  return {param(init.uniform<T>(name + ".weight", {in, out}, in)), param(Tensor<T>::zeros({out}))};
}

template <typename T>
void Linear<T>::visit(const std::string& prefix, const StateVisitor<T>& v) {
  v.param(prefix + ".weight", weight);
  v.param(prefix + ".bias", bias);
}

template <typename T>
Mlp<T> Mlp<T>::init(const ParamInit& init, const std::string& name, const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw ConfigError("MLP " + name + " needs at least input and output sizes");
  Mlp mlp;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    mlp.layers.push_back(Linear<T>::init(init, name + "." + std::to_string(i), sizes[i], sizes[i + 1]));
  }
  return mlp;
}

template <typename T>
std::size_t Mlp<T>::in_features() const {
  return layers.front().weight.dim(0);
}

template <typename T>
std::size_t Mlp<T>::out_features() const {
  return layers.back().weight.dim(1);
}

template <typename T>
void Mlp<T>::visit(const std::string& prefix, const StateVisitor<T>& v) {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].visit(prefix + "." + std::to_string(i), v);
}

template <typename T>
Tensor<T> mlp_forward(const Tensor<T>& x, const Mlp<T>& mlp) {
  if (mlp.layers.empty()) throw ContractError("mlp_forward: MLP has no layers");
  Tensor<T> h = x;
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    if (h.ndim() != 2 || h.dim(1) != mlp.layers[i].weight.dim(0)) {
      throw DimensionError("mlp_forward: layer " + std::to_string(i) + " expects width " +
                           std::to_string(mlp.layers[i].weight.dim(0)) + ", got " + shape_str(h.shape()));
    }
    h = mlp.layers[i].forward(h);
    if (i + 1 < mlp.layers.size()) h = relu(h);
  }
  return h;
}

template <typename T>
BatchNormParams<T> BatchNormParams<T>::init(std::size_t features) {
  return {param(Tensor<T>::full({features}, T(1))), param(Tensor<T>::zeros({features})),
          BatchNormState<T>(features)};
}

template <typename T>
void BatchNormParams<T>::visit(const std::string& prefix, const StateVisitor<T>& v) {
  v.param(prefix + ".gamma", gamma);
  v.param(prefix + ".beta", beta);
  if (v.buffer) {
    v.buffer(prefix + ".running_mean", state.running_mean);
    v.buffer(prefix + ".running_var", state.running_var);
  }
}

template <typename T>
GineLayerParams<T> GineLayerParams<T>::init(const ParamInit& init, const std::string& name, std::size_t width) {
  return {param(Tensor<T>::scalar(T(0))), Mlp<T>::init(init, name + ".mlp", {width, width, width}),
          param(init.embedding<T>(name + ".edge_embedding", chem::kNumBondCodes, width))};
}

template <typename T>
void GineLayerParams<T>::visit(const std::string& prefix, const StateVisitor<T>& v) {
  v.param(prefix + ".eps", eps);
  mlp.visit(prefix + ".mlp", v);
  v.param(prefix + ".edge_embedding", edge_embedding);
}

template <typename T>
GraphUpdateParams<T> GraphUpdateParams<T>::init(const ParamInit& init, const std::string& name, std::size_t width) {
  return {GineLayerParams<T>::init(init, name, width), BatchNormParams<T>::init(width)};
}

template <typename T>
void GraphUpdateParams<T>::visit(const std::string& prefix, const StateVisitor<T>& v) {
  gine.visit(prefix, v);
  bn.visit(prefix + ".bn", v);
}

template <typename T>
ReadoutParams<T> ReadoutParams<T>::init(const ParamInit& init, const std::string& name, std::size_t width) {
  return {param(init.uniform<T>(name + ".w4", {width, width}, width)),
          param(init.uniform<T>(name + ".d", {2 * width}, 2 * width)), param(Tensor<T>::zeros({width}))};
}

template <typename T>
void ReadoutParams<T>::visit(const std::string& prefix, const StateVisitor<T>& v) {
  v.param(prefix + ".w4", w4);
  v.param(prefix + ".d", d);
  v.param(prefix + ".b", b);
}

template <typename T>
CongFuLayerParams<T> CongFuLayerParams<T>::init(const ParamInit& init, const std::string& name,
                                                const std::string& update_name, std::size_t width) {
  CongFuLayerParams p{std::nullopt,
                      param(init.uniform<T>(name + ".w1", {width, width}, width)),
                      param(init.uniform<T>(name + ".w2", {width, width}, width)),
                      param(init.uniform<T>(name + ".w3", {width, width}, width)),
                      GraphUpdateParams<T>::init(init, update_name, width),
                      ReadoutParams<T>::init(init, name, width)};
  return p;
}

template <typename T>
void CongFuLayerParams<T>::visit(const std::string& prefix, const std::string& update_prefix,
                                 const StateVisitor<T>& v) {
  if (context_weight) v.param(prefix + ".context_weight", *context_weight);
  v.param(prefix + ".w1", w1);
  v.param(prefix + ".w2", w2);
  v.param(prefix + ".w3", w3);
  update.visit(update_prefix, v);
  readout.visit(prefix, v);
}

template <typename T>
CrossAttentionLayerParams<T> CrossAttentionLayerParams<T>::init(const ParamInit& init, const std::string& name,
                                                                std::size_t width) {
  return {param(init.uniform<T>(name + ".weight", {width, width}, width)),
          param(init.uniform<T>(name + ".attention", {2 * width}, 2 * width)), param(Tensor<T>::zeros({width}))};
}

template <typename T>
void CrossAttentionLayerParams<T>::visit(const std::string& prefix, const StateVisitor<T>& v) {
  v.param(prefix + ".weight", weight);
  v.param(prefix + ".attention", attention);
  v.param(prefix + ".bias", bias);
}

template <typename T>
Tensor<T> context_transform(const Tensor<T>& context, const Tensor<T>* weight, std::size_t width) {
  if (context.ndim() == 2 && context.dim(1) == width) return context;
  if (!weight) {
    throw DimensionError("context_transform: context " + shape_str(context.shape()) + " is not at width " +
                         std::to_string(width) + " and no transform weight was given");
  }
  if (weight->ndim() != 2 || weight->dim(1) != width) {
    throw DimensionError("context_transform: weight " + shape_str(weight->shape()) + " does not map to width " +
                         std::to_string(width));
  }
  return matmul(context, *weight);
}

template <typename T>
Tensor<T> context_propagation(const Tensor<T>& x, const Tensor<T>& context, std::span<const Index> segments,
                              const Tensor<T>& w1, const Tensor<T>& w2, const Tensor<T>& w3) {
  if (x.ndim() != 2 || context.ndim() != 2 || x.dim(1) != context.dim(1)) {
    throw DimensionError("context_propagation: node features " + shape_str(x.shape()) + " vs context " +
                         shape_str(context.shape()));
  }
  const auto ctx_term = matmul(relu(matmul(context, w3)), w2);
  return add(add(x, matmul(x, w1)), embedding_lookup(ctx_term, segments));
}

template <typename T>
Tensor<T> gine_forward(const Tensor<T>& x, const GraphBatch& graph, const GineLayerParams<T>& params) {
  const std::size_t n = x.dim(0);
  if (n != graph.num_nodes()) {
    throw DimensionError("gine_forward: " + std::to_string(n) + " feature rows for " +
                         std::to_string(graph.num_nodes()) + " nodes");
  }
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    if (graph.src[e] >= n || graph.dst[e] >= n) {
      throw IndexError("gine_forward: edge " + std::to_string(e) + " references a missing node");
    }
  }
  const auto messages =
      relu(add(embedding_lookup(x, graph.src), embedding_lookup(params.edge_embedding, graph.edge_codes)));
  const auto aggregated = segment_sum(messages, graph.dst, n);
  return mlp_forward(add(scale_by(x, params.eps, T(1)), aggregated), params.mlp);
}

template <typename T>
Tensor<T> graph_update(const Tensor<T>& x, const GraphBatch& graph, GraphUpdateParams<T>& params, Mode mode) {
  const auto h = gine_forward(x, graph, params.gine);
  return relu(batch_norm(h, params.bn.gamma, params.bn.beta, params.bn.state, mode));
}

template <typename T>
Tensor<T> attention_readout(const Tensor<T>& x, const Tensor<T>& context, const ReadoutParams<T>& params,
                            const GraphBatch& graph) {
  const std::size_t g = graph.num_graphs();
  if (context.ndim() != 2 || context.dim(0) != g) {
    throw DimensionError("attention_readout: context " + shape_str(context.shape()) + " for " + std::to_string(g) +
                         " graphs");
  }
  for (std::size_t j = 0; j < g; ++j) {
    if (graph.graph_size(j) == 0) log_warn("attention_readout: graph " + std::to_string(j) + " has no nodes");
  }
  const auto projected = matmul(x, params.w4);
  const auto alpha = readout_scores(projected, context, params, graph);
  std::vector<T> norm(graph.num_nodes());
  for (std::size_t i = 0; i < norm.size(); ++i) norm[i] = T(1) / T(graph.graph_size(graph.segments[i]) + 1);
  const std::size_t nodes = norm.size();
  const Tensor<T> norm_t({nodes}, std::move(norm));
  const auto weighted = mul_rows(mul_rows(projected, alpha), norm_t);
  return add_bias(segment_sum(weighted, graph.segments, g), params.b);
}

template <typename T>
std::vector<T> readout_attention(const Tensor<T>& x, const Tensor<T>& context, const ReadoutParams<T>& params,
                                 const GraphBatch& graph) {
  NoGradGuard<T> guard;
  return readout_scores(matmul(x, params.w4), context, params, graph).to_vector();
}

template <typename T>
Tensor<T> bottleneck(const Tensor<T>& xa, const Tensor<T>& xb, const Tensor<T>& context,
                     const ReadoutParams<T>& params, const GraphBatch& graph_a, const GraphBatch& graph_b) {
  return multi_graph_bottleneck<T>(
      {attention_readout(xa, context, params, graph_a), attention_readout(xb, context, params, graph_b)});
}

template <typename T>
Tensor<T> multi_graph_bottleneck(const std::vector<Tensor<T>>& readouts) {
  if (readouts.empty()) throw ContractError("multi_graph_bottleneck: no local contexts");
  Tensor<T> total = readouts.front();
  for (std::size_t k = 1; k < readouts.size(); ++k) total = add(total, readouts[k]);
  return total;
}

template <typename T>
CongFuOutput<T> congfu_layer_forward(const Tensor<T>& xa, const Tensor<T>& xb, const Tensor<T>& context,
                                     const GraphBatch& graph_a, const GraphBatch& graph_b,
                                     CongFuLayerParams<T>& params, Mode mode) {
  const std::size_t width = params.w1.dim(0);
  const auto c = context_transform(context, params.context_weight ? &*params.context_weight : nullptr, width);
  auto ha = context_propagation(xa, c, graph_a.segments, params.w1, params.w2, params.w3);
  auto hb = context_propagation(xb, c, graph_b.segments, params.w1, params.w2, params.w3);
  ha = graph_update(ha, graph_a, params.update, mode);
  hb = graph_update(hb, graph_b, params.update, mode);
  auto next = bottleneck(ha, hb, c, params.readout, graph_a, graph_b);
  return {std::move(ha), std::move(hb), std::move(next)};
}

template <typename T>
CrossAttentionOutput<T> cross_attention_layer_forward(const Tensor<T>& xa, const Tensor<T>& xb,
                                                      const GraphBatch& graph_a, const GraphBatch& graph_b,
                                                      const CrossAttentionLayerParams<T>& params) {
  return {cross_attend(xa, xb, graph_a, graph_b, params), cross_attend(xb, xa, graph_b, graph_a, params)};
}

template <typename T>
std::vector<T> cross_attention_weights(const Tensor<T>& query, const Tensor<T>& keys, const GraphBatch& graph_q,
                                       const GraphBatch& graph_k, const CrossAttentionLayerParams<T>& params) {
  NoGradGuard<T> guard;
  const auto pairs = bipartite_pairs(graph_q, graph_k);
  return cross_scores(matmul(query, params.weight), matmul(keys, params.weight), pairs, graph_q.num_nodes(), params)
      .to_vector();
}

#define CONGFU_INSTANTIATE_LAYERS(T)                                                                                \
  template Tensor<T> ParamInit::uniform<T>(const std::string&, Shape, std::size_t) const;                           \
  template Tensor<T> ParamInit::embedding<T>(const std::string&, std::size_t, std::size_t) const;                   \
  template struct Linear<T>;                                                                                        \
  template struct Mlp<T>;                                                                                           \
  template struct BatchNormParams<T>;                                                                               \
  template struct GineLayerParams<T>;                                                                               \
  template struct GraphUpdateParams<T>;                                                                             \
  template struct ReadoutParams<T>;                                                                                 \
  template struct CongFuLayerParams<T>;                                                                             \
  template struct CrossAttentionLayerParams<T>;                                                                     \
  template Tensor<T> mlp_forward(const Tensor<T>&, const Mlp<T>&);                                                  \
  template Tensor<T> context_transform(const Tensor<T>&, const Tensor<T>*, std::size_t);                            \
  template Tensor<T> context_propagation(const Tensor<T>&, const Tensor<T>&, std::span<const Index>,                \
                                         const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> gine_forward(const Tensor<T>&, const GraphBatch&, const GineLayerParams<T>&);                  \
  template Tensor<T> graph_update(const Tensor<T>&, const GraphBatch&, GraphUpdateParams<T>&, Mode);                \
  template Tensor<T> attention_readout(const Tensor<T>&, const Tensor<T>&, const ReadoutParams<T>&,                 \
                                       const GraphBatch&);                                                          \
  template std::vector<T> readout_attention(const Tensor<T>&, const Tensor<T>&, const ReadoutParams<T>&,            \
                                            const GraphBatch&);                                                     \
  template Tensor<T> bottleneck(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const ReadoutParams<T>&,      \
                                const GraphBatch&, const GraphBatch&);                                              \
  template Tensor<T> multi_graph_bottleneck(const std::vector<Tensor<T>>&);                                         \
  template CongFuOutput<T> congfu_layer_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,               \
                                                const GraphBatch&, const GraphBatch&, CongFuLayerParams<T>&, Mode); \
  template CrossAttentionOutput<T> cross_attention_layer_forward(const Tensor<T>&, const Tensor<T>&,                \
                                                                 const GraphBatch&, const GraphBatch&,              \
                                                                 const CrossAttentionLayerParams<T>&);              \
  template std::vector<T> cross_attention_weights(const Tensor<T>&, const Tensor<T>&, const GraphBatch&,            \
                                                  const GraphBatch&, const CrossAttentionLayerParams<T>&);

CONGFU_INSTANTIATE_LAYERS(float)
CONGFU_INSTANTIATE_LAYERS(double)

}  // namespace congfu::nn
