#pragma once

// The command layer behind the `congfu` executable. Each command throws on
// failure; the executable maps exceptions to a nonzero exit code.
//
// Dataset directory (written by preprocess):
//   samples.csv, cells.csv, stats.json, stats.txt, splits/<setup>_fold<k>.json
// Run directory (written by train):
//   best.ckpt(.bin), last.ckpt(.bin), loss_curve.csv, metrics.csv, manifest.json

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "congfu/data.h"
#include "congfu/model.h"

namespace congfu::cli {

struct PreprocessOptions {
  std::filesystem::path triplets;
  std::filesystem::path cells;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Returns the preprocessing report (counts of every filter).
data::PreprocessReport cmd_preprocess(const PreprocessOptions& opts);

struct Dataset {
  std::filesystem::path dir;
  std::vector<data::LabeledTriplet> samples;
  std::string checksum;  // FNV-1a 64 of samples.csv, hex
};

Dataset load_dataset(const std::filesystem::path& dir);

struct TrainOptions {
  std::filesystem::path data;
  std::string setup = "transductive";
  std::size_t fold = 0;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  /// Applied on top of the config file, e.g. {"epochs": 30}.
  nlohmann::json overrides = nlohmann::json::object();
};

struct RunSummary {
  std::filesystem::path out;
  ModelConfig config;
  std::vector<double> loss_curve;
  std::optional<double> train_auroc;
  std::optional<double> test_auroc;
  std::optional<double> test_aucpr;
  bool context_fused = false;
  nlohmann::json manifest;
};

ModelConfig resolve_config(const std::optional<std::filesystem::path>& path, const nlohmann::json& overrides);

RunSummary cmd_train(const TrainOptions& opts);
/// Same as cmd_train for an already loaded dataset and config.
RunSummary train_run(const Dataset& ds, const std::string& setup, std::size_t fold, const ModelConfig& cfg,
                     const std::filesystem::path& out, const std::string& command);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::string setup = "transductive";
  std::size_t fold = 0;
  std::string subset = "test";  // train | val | test
  std::optional<std::filesystem::path> metrics_out;  // appended CSV, default <checkpoint dir>/metrics.csv
};

struct EvalResult {
  double auroc = 0.0;
  double aucpr = 0.0;
  std::string row;  // metrics CSV row
};

/// UndefinedMetricError when the chosen subset holds a single class.
EvalResult cmd_eval(const EvalOptions& opts);

struct SweepOptions {
  std::filesystem::path data;
  std::string setup = "transductive";
  std::size_t fold = 0;
  std::optional<std::filesystem::path> config;
  nlohmann::json overrides = nlohmann::json::object();
  std::optional<std::size_t> fl_min;  // default 0
  std::optional<std::size_t> fl_max;  // default L
  std::filesystem::path out;
};

/// Writes fusion_sweep.csv: one row per (kind, F_l), kinds congfu and
/// cross_attention. The row matching the default F_l is flagged.
std::filesystem::path cmd_sweep_fusion(const SweepOptions& opts);
/// Parses "a..b" (inclusive) or a single integer.
std::pair<std::size_t, std::size_t> parse_range(const std::string& text);

struct AblateOptions {
  std::filesystem::path data;
  std::string setup = "transductive";
  std::size_t fold = 0;
  std::optional<std::filesystem::path> config;
  nlohmann::json overrides = nlohmann::json::object();
  std::vector<FusionMode> modes{FusionMode::CongFu, FusionMode::CrossAttention, FusionMode::NoFusion};
  std::filesystem::path out;
};

/// Writes ablation.csv with one row per mode.
std::filesystem::path cmd_ablate(const AblateOptions& opts);

/// Groups metrics.csv rows by (dataset, setup) and writes mean ± std rows.
std::filesystem::path cmd_aggregate(const std::vector<std::filesystem::path>& metric_files,
                                    const std::filesystem::path& out);

/// Parsed graph as edge-list text.
std::string cmd_parse_smiles(const std::string& smiles);

/// Appends one entry to a JSON-array manifest file, creating it if needed.
void append_manifest(const std::filesystem::path& path, const nlohmann::json& entry);

std::string revision();

}  // namespace congfu::cli
