#include "congfu/training.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "congfu/errors.h"
#include "congfu/log.h"
#include "congfu/metrics.h"
#include "congfu/optim.h"

namespace congfu {
namespace {

// Fixed-size chunks in order; a trailing single sample joins the previous
// batch because train-mode batch norm needs at least two rows.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& ids, std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < ids.size(); i += batch_size) {
    const auto end = std::min(ids.size(), i + batch_size);
    batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(i), ids.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

template <typename T>
Scored score_ids(ModelParams<T>& params, const std::vector<data::LabeledTriplet>& samples,
                 const std::vector<std::size_t>& ids) {
  Scored out;
  const auto batch_size = std::max<std::size_t>(1, params.config.batch_size);
  for (std::size_t i = 0; i < ids.size(); i += batch_size) {
    const std::vector<std::size_t> chunk(ids.begin() + static_cast<std::ptrdiff_t>(i),
                                         ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), i + batch_size)));
    const auto batch = data::batch_graphs(samples, chunk);
    const auto logits = predict_logits(params, batch);
    out.logits.insert(out.logits.end(), logits.begin(), logits.end());
    for (auto id : chunk) out.labels.push_back(samples[id].label);
  }
  return out;
}

void check_ids(const std::vector<data::LabeledTriplet>& samples, const std::vector<std::size_t>& ids) {
  for (auto id : ids) {
    if (id >= samples.size() || samples[id].id != id) {
      throw IndexError("sample id " + std::to_string(id) + " is not in the dataset");
    }
  }
}

template <typename T>
TrainResult train_typed(const ModelConfig& config, const std::vector<data::LabeledTriplet>& samples,
                        const data::SplitPlan& plan, const std::filesystem::path& out_dir,
                        const nlohmann::json& metadata) {
  config.validate();
  check_ids(samples, plan.train);
  check_ids(samples, plan.val);
  if (plan.train.size() < 2) throw ContractError("training needs at least 2 samples");

  auto params = build_model<T>(config);
  Adam<T> adam(params.parameters(), AdamOptions{config.lr});
  const bool write = !out_dir.empty();
  if (write) std::filesystem::create_directories(out_dir);

  TrainResult result;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto order = plan.train;
    data::seeded_shuffle(order, config.seed * 1000003ULL + epoch);
    double loss_sum = 0.0;
    for (const auto& ids : make_batches(order, std::max<std::size_t>(1, config.batch_size))) {
      const auto batch = data::batch_graphs(samples, ids);
      adam.zero_grad();
      auto loss = model_loss(params, batch, Mode::Train);
      loss_sum += double(loss.item()) * double(ids.size());
      backward(loss);
      adam.step();
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(plan.train.size());
    if (!std::isfinite(rec.train_loss)) throw EvaluationError("training loss diverged at epoch " + std::to_string(epoch));
    if (!plan.val.empty()) {
      const auto s = score_ids(params, samples, plan.val);
      try {
        rec.val_auroc = metrics::auroc(s.logits, s.labels);
        rec.val_aucpr = metrics::aucpr(s.logits, s.labels);
      } catch (const UndefinedMetricError&) {
        rec.val_auroc.reset();
        rec.val_aucpr.reset();
      }
    }
    result.curve.push_back(rec);

    const bool better = rec.val_aucpr && (!result.best_val_aucpr || *rec.val_aucpr > *result.best_val_aucpr);
    const bool first = result.best_epoch == 0;
    if (better || (first && !rec.val_aucpr)) {
      result.best_epoch = epoch;
      if (better) result.best_val_aucpr = rec.val_aucpr;
      since_best = 0;
      if (write) {
        auto meta = metadata;
        meta["epoch"] = epoch;
        save_checkpoint(out_dir / "best.ckpt", params.to_checkpoint(meta));
      }
    } else {
      ++since_best;
    }
    log_info("epoch " + std::to_string(epoch) + " loss " + std::to_string(rec.train_loss));
    if (config.early_stop_patience && since_best >= config.early_stop_patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (write) {
    auto meta = metadata;
    meta["epoch"] = result.curve.size();
    save_checkpoint(out_dir / "last.ckpt", params.to_checkpoint(meta));
    write_loss_curve(out_dir / "loss_curve.csv", result.curve);
  }
  return result;
}

template <typename T>
Scored score_typed(const std::filesystem::path& path, const std::vector<data::LabeledTriplet>& samples,
                   const std::vector<std::size_t>& ids) {
  const auto ckpt = load_checkpoint<T>(path);
  if (!ckpt.metadata.contains("config")) throw SchemaError(path.string() + ": checkpoint carries no model config");
  const auto cfg = ModelConfig::from_json(ckpt.metadata.at("config"));
  auto params = build_model<T>(cfg);
  params.load(ckpt);
  return score_ids(params, samples, ids);
}

}  // namespace

TrainResult train_model(const ModelConfig& config, const std::vector<data::LabeledTriplet>& samples,
                        const data::SplitPlan& plan, const std::filesystem::path& out_dir,
                        const nlohmann::json& checkpoint_metadata) {
  if (config.dtype == Precision::Float64) return train_typed<double>(config, samples, plan, out_dir, checkpoint_metadata);
  return train_typed<float>(config, samples, plan, out_dir, checkpoint_metadata);
}

Scored score_checkpoint(const std::filesystem::path& checkpoint, const std::vector<data::LabeledTriplet>& samples,
                        const std::vector<std::size_t>& ids) {
  check_ids(samples, ids);
  const auto manifest = read_checkpoint_manifest(checkpoint);
  const auto dtype = manifest.at("dtype").get<std::string>();
  if (dtype == "float64") return score_typed<double>(checkpoint, samples, ids);
  if (dtype == "float32") return score_typed<float>(checkpoint, samples, ids);
  throw SchemaError(checkpoint.string() + ": unsupported dtype " + dtype);
}

void write_loss_curve(const std::filesystem::path& path, const std::vector<EpochRecord>& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const auto num = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return std::string(buf);
  };
  out << "epoch,train_loss,val_auroc,val_aucpr\n";
  for (const auto& r : curve) {
    out << r.epoch << ',' << num(r.train_loss) << ',' << num(r.val_auroc) << ',' << num(r.val_aucpr) << '\n';
  }
}

}  // namespace congfu
