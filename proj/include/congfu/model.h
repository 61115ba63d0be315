#pragma once

// The full drug-pair model: atom and bond embeddings, F_l independent GINE
// encoders per molecule, L - F_l fusion layers (CongFu or cross attention),
// mean/sum pooling and a prediction head over [pool_A || pool_B || context],
// optionally projected to a configured head width first.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "congfu/checkpoint.h"
#include "congfu/graph_batch.h"
#include "congfu/layers.h"

namespace congfu {

enum class FusionMode { CongFu, CrossAttention, NoFusion };
enum class Pooling { Mean, Sum };
enum class Precision { Float32, Float64 };

const char* to_string(FusionMode m);
const char* to_string(Pooling p);
const char* to_string(Precision p);
FusionMode parse_fusion_mode(const std::string& s);
Pooling parse_pooling(const std::string& s);
Precision parse_precision(const std::string& s);

struct ModelConfig {
  std::size_t D = 300;
  std::size_t L = 5;
  std::size_t F_l = 3;
  std::vector<std::size_t> cell_encoder{908, 512, 300};
  std::vector<std::size_t> head_hidden{256, 64};
  /// Head MLP input width, 3 * D by default. Any other value inserts a
  /// linear projection from the 3 * D concatenation to this width.
  std::optional<std::size_t> head_input;
  FusionMode mode = FusionMode::CongFu;
  Pooling pooling = Pooling::Mean;
  double lr = 1e-4;
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  Precision dtype = Precision::Float32;
  std::size_t early_stop_patience = 0;  // 0 disables early stopping

  /// Fusion layer actually used: L for no_fusion, F_l otherwise.
  std::size_t fusion_layer() const { return mode == FusionMode::NoFusion ? L : F_l; }
  std::size_t num_plain_layers() const { return fusion_layer(); }
  std::size_t num_fusion_layers() const { return L - fusion_layer(); }
  std::size_t context_width() const { return cell_encoder.front(); }
  std::vector<std::size_t> head_sizes() const;
  bool has_head_projection() const { return head_input && *head_input != 3 * D; }

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static ModelConfig from_json(const nlohmann::json& j);
  static ModelConfig load(const std::string& path);
};

/// Records what the head consumed, for inspection in tests.
struct ForwardTrace {
  std::vector<double> cell_context;  // cell-encoder output [B x D]
  std::vector<double> head_context;  // context half of the head input [B x D]
};

template <typename T>
struct ModelParams {
  ModelConfig config;
  Tensor<T> atom_embedding;  // [119 x D]
  nn::Mlp<T> cell_encoder;
  std::vector<nn::GraphUpdateParams<T>> encoders;                // layers [0, F_l)
  std::vector<nn::CongFuLayerParams<T>> congfu;                  // layers [F_l, L), mode congfu
  std::vector<nn::GraphUpdateParams<T>> fused_updates;           // layers [F_l, L), mode cross_attention
  std::vector<nn::CrossAttentionLayerParams<T>> cross_attention;  // layers [F_l, L), mode cross_attention
  std::optional<nn::Linear<T>> head_projection;  // [3D x head_input], only when head_input != 3D
  nn::Mlp<T> head;

  void visit(const nn::StateVisitor<T>& v);
  std::vector<Tensor<T>> parameters();
  std::vector<std::string> parameter_names();
  std::size_t parameter_count();

  Checkpoint<T> to_checkpoint(nlohmann::json metadata = nlohmann::json::object());
  /// Copies values from a checkpoint; names and shapes must match exactly.
  void load(const Checkpoint<T>& ckpt);
};

/// Seeded, deterministic initialization.
template <typename T>
ModelParams<T> build_model(const ModelConfig& cfg, std::uint64_t seed);

template <typename T>
ModelParams<T> build_model(const ModelConfig& cfg) {
  return build_model<T>(cfg, cfg.seed);
}

/// One logit per pair, [B].
template <typename T>
Tensor<T> model_forward(ModelParams<T>& params, const PairBatch& batch, Mode mode, ForwardTrace* trace = nullptr);

template <typename T>
Tensor<T> model_loss(ModelParams<T>& params, const PairBatch& batch, Mode mode = Mode::Train);

/// sigmoid(logit) per pair from an eval-mode forward pass.
template <typename T>
std::vector<double> predict_batch(ModelParams<T>& params, const PairBatch& batch);

/// Raw eval-mode logits as doubles.
template <typename T>
std::vector<double> predict_logits(ModelParams<T>& params, const PairBatch& batch);

double sigmoid(double z);

}  // namespace congfu
