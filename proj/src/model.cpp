#include "congfu/model.h"

#include <cmath>
#include <fstream>
#include <set>

#include "congfu/errors.h"

namespace congfu {

const char* to_string(FusionMode m) {
  switch (m) {
    case FusionMode::CongFu: return "congfu";
    case FusionMode::CrossAttention: return "cross_attention";
    case FusionMode::NoFusion: return "no_fusion";
  }
  return "?";
}

const char* to_string(Pooling p) { return p == Pooling::Mean ? "mean" : "sum"; }
const char* to_string(Precision p) { return p == Precision::Float32 ? "float32" : "float64"; }

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "congfu") return FusionMode::CongFu;
  if (s == "cross_attention") return FusionMode::CrossAttention;
  if (s == "no_fusion") return FusionMode::NoFusion;
  throw ConfigError("unknown mode '" + s + "' (expected congfu, cross_attention or no_fusion)");
}

Pooling parse_pooling(const std::string& s) {
  if (s == "mean") return Pooling::Mean;
  if (s == "sum") return Pooling::Sum;
  throw ConfigError("unknown pooling '" + s + "' (expected mean or sum)");
}

Precision parse_precision(const std::string& s) {
  if (s == "float32") return Precision::Float32;
  if (s == "float64") return Precision::Float64;
  throw ConfigError("unknown dtype '" + s + "' (expected float32 or float64)");
}

std::vector<std::size_t> ModelConfig::head_sizes() const {
  std::vector<std::size_t> sizes{head_input.value_or(3 * D)};
  sizes.insert(sizes.end(), head_hidden.begin(), head_hidden.end());
  sizes.push_back(1);
  return sizes;
}

void ModelConfig::validate() const {
  if (D == 0) throw ConfigError("D must be positive");
  if (L == 0) throw ConfigError("L must be positive");
  if (F_l > L) throw ConfigError("F_l = " + std::to_string(F_l) + " exceeds L = " + std::to_string(L));
  if (cell_encoder.size() < 2) throw ConfigError("cell_encoder needs at least input and output sizes");
  if (cell_encoder.back() != D) {
    throw ConfigError("cell_encoder must end at D = " + std::to_string(D) + ", got " +
                      std::to_string(cell_encoder.back()));
  }
  for (auto s : cell_encoder)
    if (s == 0) throw ConfigError("cell_encoder sizes must be positive");
  for (auto s : head_hidden)
    if (s == 0) throw ConfigError("head_hidden sizes must be positive");
  if (head_input && *head_input == 0) throw ConfigError("head_input must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j{{"D", D},
                   {"L", L},
                   {"F_l", F_l},
                   {"cell_encoder", cell_encoder},
                   {"head_hidden", head_hidden},
                   {"mode", to_string(mode)},
                   {"pooling", to_string(pooling)},
                   {"lr", lr},
                   {"epochs", epochs},
                   {"batch_size", batch_size},
                   {"seed", seed},
                   {"dtype", to_string(dtype)},
                   {"early_stop_patience", early_stop_patience}};
  if (head_input) j["head_input"] = *head_input;
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"D",     "L",      "F_l",        "cell_encoder", "head_hidden",
                                           "head_input", "mode", "pooling", "lr", "epochs",
                                           "batch_size", "seed", "dtype", "early_stop_patience"};
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown model config field '" + key + "'");
  ModelConfig c;
  try {
    if (j.contains("D")) c.D = j["D"].get<std::size_t>();
    if (j.contains("L")) c.L = j["L"].get<std::size_t>();
    if (j.contains("F_l")) c.F_l = j["F_l"].get<std::size_t>();
    if (j.contains("cell_encoder")) {
      c.cell_encoder = j["cell_encoder"].get<std::vector<std::size_t>>();
    } else if (j.contains("D")) {
      c.cell_encoder.back() = c.D;
    }
    if (j.contains("head_hidden")) c.head_hidden = j["head_hidden"].get<std::vector<std::size_t>>();
    if (j.contains("head_input")) c.head_input = j["head_input"].get<std::size_t>();
    if (j.contains("mode")) c.mode = parse_fusion_mode(j["mode"].get<std::string>());
    if (j.contains("pooling")) c.pooling = parse_pooling(j["pooling"].get<std::string>());
    if (j.contains("lr")) c.lr = j["lr"].get<double>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("dtype")) c.dtype = parse_precision(j["dtype"].get<std::string>());
    if (j.contains("early_stop_patience")) c.early_stop_patience = j["early_stop_patience"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  if (c.mode == FusionMode::NoFusion) c.F_l = c.L;
  c.validate();
  return c;
}

ModelConfig ModelConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

template <typename T>
void ModelParams<T>::visit(const nn::StateVisitor<T>& v) {
  v.param("atom_embedding", atom_embedding);
  cell_encoder.visit("cell_mlp", v);
  const std::size_t f = config.fusion_layer();
  for (std::size_t l = 0; l < encoders.size(); ++l) encoders[l].visit("gine." + std::to_string(l), v);
  for (std::size_t k = 0; k < congfu.size(); ++k) {
    const auto l = std::to_string(f + k);
    congfu[k].visit("congfu." + l, "gine." + l, v);
  }
  for (std::size_t k = 0; k < cross_attention.size(); ++k) {
    const auto l = std::to_string(f + k);
    fused_updates[k].visit("gine." + l, v);
    cross_attention[k].visit("xattn." + l, v);
  }
  if (head_projection) head_projection->visit("head_proj", v);
  head.visit("head", v);
}

template <typename T>
std::vector<Tensor<T>> ModelParams<T>::parameters() {
  std::vector<Tensor<T>> out;
  visit({[&](const std::string&, Tensor<T>& t) { out.push_back(t); }, nullptr});
  return out;
}

template <typename T>
std::vector<std::string> ModelParams<T>::parameter_names() {
  std::vector<std::string> out;
  visit({[&](const std::string& name, Tensor<T>&) { out.push_back(name); }, nullptr});
  return out;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() {
  std::size_t n = 0;
  visit({[&](const std::string&, Tensor<T>& t) { n += t.size(); }, nullptr});
  return n;
}

template <typename T>
Checkpoint<T> ModelParams<T>::to_checkpoint(nlohmann::json metadata) {
  Checkpoint<T> ckpt;
  visit({[&](const std::string& name, Tensor<T>& t) { ckpt.entries.push_back({name, t.shape(), t.to_vector()}); },
         [&](const std::string& name, std::vector<T>& buf) { ckpt.entries.push_back({name, {buf.size()}, buf}); }});
  metadata["config"] = config.to_json();
  ckpt.metadata = std::move(metadata);
  return ckpt;
}

template <typename T>
void ModelParams<T>::load(const Checkpoint<T>& ckpt) {
  std::size_t expected = 0;
  const auto fetch = [&](const std::string& name, const Shape& shape) -> const CheckpointEntry<T>& {
    const auto* e = ckpt.find(name);
    if (!e) throw SchemaError("checkpoint is missing tensor " + name);
    if (e->shape != shape) {
      throw SchemaError("checkpoint tensor " + name + " has shape " + shape_str(e->shape) + ", model expects " +
                        shape_str(shape));
    }
    ++expected;
    return *e;
  };
  visit({[&](const std::string& name, Tensor<T>& t) {
           const auto& e = fetch(name, t.shape());
           std::copy(e.data.begin(), e.data.end(), t.data().begin());
         },
         [&](const std::string& name, std::vector<T>& buf) { buf = fetch(name, {buf.size()}).data; }});
  if (expected != ckpt.entries.size()) {
    throw SchemaError("checkpoint holds " + std::to_string(ckpt.entries.size()) + " tensors, model uses " +
                      std::to_string(expected));
  }
}

template <typename T>
ModelParams<T> build_model(const ModelConfig& cfg_in, std::uint64_t seed) {
  ModelConfig cfg = cfg_in;
  if (cfg.mode == FusionMode::NoFusion) cfg.F_l = cfg.L;
  cfg.validate();
  cfg.seed = seed;
  const nn::ParamInit init(seed);
  ModelParams<T> p;
  p.config = cfg;
  p.atom_embedding = init.embedding<T>("atom_embedding", chem::kNumAtomCodes, cfg.D).set_requires_grad(true);
  p.cell_encoder = nn::Mlp<T>::init(init, "cell_mlp", cfg.cell_encoder);
  const std::size_t f = cfg.fusion_layer();
  for (std::size_t l = 0; l < f; ++l) {
    p.encoders.push_back(nn::GraphUpdateParams<T>::init(init, "gine." + std::to_string(l), cfg.D));
  }
  for (std::size_t l = f; l < cfg.L; ++l) {
    const auto s = std::to_string(l);
    if (cfg.mode == FusionMode::CongFu) {
      p.congfu.push_back(nn::CongFuLayerParams<T>::init(init, "congfu." + s, "gine." + s, cfg.D));
    } else {
      p.fused_updates.push_back(nn::GraphUpdateParams<T>::init(init, "gine." + s, cfg.D));
      p.cross_attention.push_back(nn::CrossAttentionLayerParams<T>::init(init, "xattn." + s, cfg.D));
    }
  }
  if (cfg.has_head_projection()) p.head_projection = nn::Linear<T>::init(init, "head_proj", 3 * cfg.D, *cfg.head_input);
  p.head = nn::Mlp<T>::init(init, "head", cfg.head_sizes());
  return p;
}

namespace {

template <typename T>
Tensor<T> pool(const Tensor<T>& x, const GraphBatch& g, Pooling pooling) {
  auto pooled = segment_sum(x, g.segments, g.num_graphs());
  if (pooling == Pooling::Sum) return pooled;
  std::vector<T> inv(g.num_graphs());
  for (std::size_t j = 0; j < inv.size(); ++j) inv[j] = g.graph_size(j) ? T(1) / T(g.graph_size(j)) : T(0);
  return mul_rows(pooled, Tensor<T>({g.num_graphs()}, std::move(inv)));
}

template <typename T>
std::vector<double> as_double(const Tensor<T>& t) {
  return {t.data().begin(), t.data().end()};
}

}  // namespace

template <typename T>
Tensor<T> model_forward(ModelParams<T>& params, const PairBatch& batch, Mode mode, ForwardTrace* trace) {
  const auto& cfg = params.config;
  const std::size_t n = batch.size();
  if (n == 0) throw ContractError("model_forward: empty batch");
  if (batch.b.num_graphs() != n) throw DimensionError("model_forward: drug A and drug B batches differ in size");
  if (batch.context_width != cfg.context_width() || batch.contexts.size() != n * batch.context_width) {
    throw DimensionError("model_forward: contexts are " + std::to_string(batch.context_width) +
                         " wide, model expects " + std::to_string(cfg.context_width()));
  }
  Tensor<T> raw_ctx({n, batch.context_width}, std::vector<T>(batch.contexts.begin(), batch.contexts.end()));
  Tensor<T> context = nn::mlp_forward(raw_ctx, params.cell_encoder);
  if (trace) trace->cell_context = as_double(context);

  Tensor<T> xa = embedding_lookup(params.atom_embedding, batch.a.node_ids);
  Tensor<T> xb = embedding_lookup(params.atom_embedding, batch.b.node_ids);
  for (auto& enc : params.encoders) {
    xa = nn::graph_update(xa, batch.a, enc, mode);
    xb = nn::graph_update(xb, batch.b, enc, mode);
  }
  for (auto& layer : params.congfu) {
    auto out = nn::congfu_layer_forward(xa, xb, context, batch.a, batch.b, layer, mode);
    xa = std::move(out.xa);
    xb = std::move(out.xb);
    context = std::move(out.context);
  }
  for (std::size_t k = 0; k < params.cross_attention.size(); ++k) {
    xa = nn::graph_update(xa, batch.a, params.fused_updates[k], mode);
    xb = nn::graph_update(xb, batch.b, params.fused_updates[k], mode);
    auto out = nn::cross_attention_layer_forward(xa, xb, batch.a, batch.b, params.cross_attention[k]);
    xa = add(xa, out.xa);
    xb = add(xb, out.xb);
  }
  if (trace) trace->head_context = as_double(context);

  auto head_in = concat_rows<T>({pool(xa, batch.a, cfg.pooling), pool(xb, batch.b, cfg.pooling), context});
  if (params.head_projection) head_in = params.head_projection->forward(head_in);
  return reshape(nn::mlp_forward(head_in, params.head), Shape{n});
}

template <typename T>
Tensor<T> model_loss(ModelParams<T>& params, const PairBatch& batch, Mode mode) {
  if (batch.labels.size() != batch.size()) throw ContractError("model_loss: batch has no labels");
  const std::vector<T> labels(batch.labels.begin(), batch.labels.end());
  return bce_with_logits_loss(model_forward(params, batch, mode), std::span<const T>(labels));
}

template <typename T>
std::vector<double> predict_logits(ModelParams<T>& params, const PairBatch& batch) {
  NoGradGuard<T> guard;
  return as_double(model_forward(params, batch, Mode::Eval));
}

template <typename T>
std::vector<double> predict_batch(ModelParams<T>& params, const PairBatch& batch) {
  auto out = predict_logits(params, batch);
  for (auto& z : out) z = sigmoid(z);
  return out;
}

#define CONGFU_INSTANTIATE_MODEL(T)                                                                      \
  template struct ModelParams<T>;                                                                        \
  template ModelParams<T> build_model<T>(const ModelConfig&, std::uint64_t);                             \
  template Tensor<T> model_forward<T>(ModelParams<T>&, const PairBatch&, Mode, ForwardTrace*);           \
  template Tensor<T> model_loss<T>(ModelParams<T>&, const PairBatch&, Mode);                             \
  template std::vector<double> predict_logits<T>(ModelParams<T>&, const PairBatch&);                     \
  template std::vector<double> predict_batch<T>(ModelParams<T>&, const PairBatch&);

CONGFU_INSTANTIATE_MODEL(float)
CONGFU_INSTANTIATE_MODEL(double)

}  // namespace congfu
