#pragma once

// Minibatch training with Adam, per-epoch validation, best/last checkpoints,
// and checkpoint evaluation. Precision follows ModelConfig::dtype.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "congfu/data.h"
#include "congfu/model.h"
#include "congfu/splits.h"

namespace congfu {

struct EpochRecord {
  std::size_t epoch = 0;    // 1-based
  double train_loss = 0.0;  // mean BCE over the epoch's training samples
  std::optional<double> val_auroc;  // empty when the val set is single-class
  std::optional<double> val_aucpr;
};

struct TrainResult {
  std::vector<EpochRecord> curve;
  std::size_t best_epoch = 0;
  std::optional<double> best_val_aucpr;
  bool early_stopped = false;
};

/// Trains on plan.train, validating on plan.val, with batches reshuffled
/// each epoch from (config.seed, epoch). When out_dir is non-empty writes
/// best.ckpt, last.ckpt and loss_curve.csv there.
TrainResult train_model(const ModelConfig& config, const std::vector<data::LabeledTriplet>& samples,
                        const data::SplitPlan& plan, const std::filesystem::path& out_dir,
                        const nlohmann::json& checkpoint_metadata = nlohmann::json::object());

struct Scored {
  std::vector<double> logits;
  std::vector<int> labels;
};

/// Eval-mode logits of the given samples for a checkpoint of either dtype.
Scored score_checkpoint(const std::filesystem::path& checkpoint, const std::vector<data::LabeledTriplet>& samples,
                        const std::vector<std::size_t>& ids);

void write_loss_curve(const std::filesystem::path& path, const std::vector<EpochRecord>& curve);

}  // namespace congfu
