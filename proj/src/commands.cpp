#include "congfu/commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "congfu/checkpoint.h"
#include "congfu/errors.h"
#include "congfu/log.h"
#include "congfu/metrics.h"
#include "congfu/smiles.h"
#include "congfu/splits.h"
#include "congfu/training.h"

#ifndef CONGFU_REVISION
#define CONGFU_REVISION "unknown"
#endif

namespace fs = std::filesystem;

namespace congfu::cli {
namespace {

fs::path checked_split_path(const fs::path& dir, const std::string& setup, std::size_t fold) {
  if (std::find(std::begin(data::kSetups), std::end(data::kSetups), setup) == std::end(data::kSetups)) {
    throw ConfigError("unknown setup '" + setup + "' (transductive, leave-drug-out, leave-comb-out)");
  }
  if (fold >= data::kNumFolds) {
    throw ConfigError("fold " + std::to_string(fold) + " out of range 0.." + std::to_string(data::kNumFolds - 1));
  }
  return data::split_path(dir, setup, fold);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

void append_csv_row(const fs::path& path, const std::string& header, const std::string& row) {
  const bool fresh = !fs::exists(path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write " + path.string());
  if (fresh) out << header << '\n';
  out << row << '\n';
}

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string stats_table(const std::string& name, const data::PreprocessReport& r, std::size_t rejected) {
  char line[256];
  std::ostringstream os;
  std::snprintf(line, sizeof line, "%-16s %10s %12s %8s %12s\n", "dataset", "samples", "% positive", "drugs",
                "cell lines");
  os << line;
  std::snprintf(line, sizeof line, "%-16s %10zu %12.1f %8zu %12zu\n", name.c_str(), r.samples, r.positive_percent(),
                r.drugs, r.cell_lines);
  os << line << '\n';
  os << "rows rejected while loading: " << rejected << '\n'
     << "triplets loaded:             " << r.input << '\n'
     << "dropped, unknown cell line:  " << r.dropped_missing_cell << '\n'
     << "dropped, unparseable SMILES: " << r.dropped_bad_smiles << " (" << r.unparseable_smiles
     << " distinct strings)\n"
     << "dropped, exact duplicate:    " << r.dropped_exact_duplicate << '\n'
     << "merged into a mean score:    " << r.merged_conflicting << '\n'
     << "dropped, score in [-10, 10]: " << r.dropped_unlabeled_band << '\n';
  return os.str();
}

std::optional<std::pair<double, double>> try_metrics(const Scored& s) {
  try {
    return std::make_pair(metrics::auroc(s.logits, s.labels), metrics::aucpr(s.logits, s.labels));
  } catch (const UndefinedMetricError& e) {
    log_warn(e.what());
    return std::nullopt;
  }
}

const std::vector<std::size_t>& subset_ids(const data::SplitPlan& plan, const std::string& subset) {
  if (subset == "train") return plan.train;
  if (subset == "val") return plan.val;
  if (subset == "test") return plan.test;
  throw ConfigError("unknown subset '" + subset + "' (train|val|test)");
}

}  // namespace

std::string revision() { return CONGFU_REVISION; }

void append_manifest(const fs::path& path, const nlohmann::json& entry) {
  auto runs = fs::exists(path) ? read_json(path) : nlohmann::json::array();
  if (!runs.is_array()) throw SchemaError(path.string() + ": manifest must be a JSON array");
  runs.push_back(entry);
  write_text(path, runs.dump(2) + "\n");
}

data::PreprocessReport cmd_preprocess(const PreprocessOptions& opts) {
  const auto load = data::load_triplets(opts.triplets);
  const auto cells = data::load_cell_features(opts.cells);
  auto pre = data::preprocess(load.triplets, cells, opts.threads);
  if (pre.samples.empty()) throw ValidationError("preprocessing left no labeled samples");

  fs::create_directories(opts.out);
  data::write_samples(opts.out / "samples.csv", pre.samples);
  std::set<std::string> used;
  for (const auto& s : pre.samples) used.insert(s.cell_line_id);
  data::write_cell_features(opts.out / "cells.csv", cells, std::vector<std::string>(used.begin(), used.end()));
  for (const char* setup : data::kSetups) {
    for (const auto& plan : data::make_splits(setup, pre.samples, opts.seed)) {
      data::write_split(data::split_path(opts.out, setup, plan.fold), plan);
    }
  }
  auto stats = pre.report.to_json();
  stats["rejected_rows"] = load.rejected;
  stats["seed"] = opts.seed;
  write_text(opts.out / "stats.json", stats.dump(2) + "\n");
  write_text(opts.out / "stats.txt", stats_table(fs::absolute(opts.out).lexically_normal().filename().string(), pre.report, load.rejected));
  return pre.report;
}

Dataset load_dataset(const fs::path& dir) {
  const auto cells = data::load_cell_features(dir / "cells.csv");
  Dataset ds;
  ds.dir = dir;
  ds.samples = data::read_samples(dir / "samples.csv", cells);
  ds.checksum = fnv1a_file(dir / "samples.csv");
  return ds;
}

ModelConfig resolve_config(const std::optional<fs::path>& path, const nlohmann::json& overrides) {
  nlohmann::json j = path ? read_json(*path) : nlohmann::json::object();
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : overrides.items()) j[k] = v;
  auto cfg = ModelConfig::from_json(j);
  cfg.validate();
  return cfg;
}

RunSummary train_run(const Dataset& ds, const std::string& setup, std::size_t fold, const ModelConfig& cfg,
                     const fs::path& out, const std::string& command) {
  cfg.validate();
  const auto split_file = checked_split_path(ds.dir, setup, fold);
  const auto plan = data::read_split(split_file);
  const auto started = utc_now();
  const nlohmann::json meta = {{"setup", setup}, {"fold", fold}, {"dataset_checksum", ds.checksum}};
  const auto result = train_model(cfg, ds.samples, plan, out, meta);

  RunSummary run;
  run.out = out;
  run.config = cfg;
  for (const auto& r : result.curve) run.loss_curve.push_back(r.train_loss);
  run.context_fused = cfg.mode == FusionMode::CongFu && cfg.num_fusion_layers() > 0;
  if (const auto m = try_metrics(score_checkpoint(out / "last.ckpt", ds.samples, plan.train))) run.train_auroc = m->first;
  if (!plan.test.empty()) {
    if (const auto m = try_metrics(score_checkpoint(out / "best.ckpt", ds.samples, plan.test))) {
      run.test_auroc = m->first;
      run.test_aucpr = m->second;
      append_csv_row(out / "metrics.csv", metrics::kMetricsHeader,
                     metrics::format_row({ds.dir.filename().string(), setup, std::to_string(fold), m->first, m->second}));
    }
  }

  run.manifest = {{"command", command},
                  {"config", cfg.to_json()},
                  {"dataset", ds.dir.string()},
                  {"dataset_checksum", ds.checksum},
                  {"split_file", split_file.string()},
                  {"setup", setup},
                  {"fold", fold},
                  {"seed", cfg.seed},
                  {"revision", revision()},
                  {"threads", data::env_thread_count()},
                  {"started", started},
                  {"finished", utc_now()},
                  {"context_fused", run.context_fused},
                  {"epochs_run", result.curve.size()},
                  {"early_stopped", result.early_stopped},
                  {"best_epoch", result.best_epoch},
                  {"final_metrics",
                   {{"final_train_loss", run.loss_curve.empty() ? nlohmann::json(nullptr) : nlohmann::json(run.loss_curve.back())},
                    {"best_val_aucpr", opt_json(result.best_val_aucpr)},
                    {"train_auroc", opt_json(run.train_auroc)},
                    {"test_auroc", opt_json(run.test_auroc)},
                    {"test_aucpr", opt_json(run.test_aucpr)}}}};
  append_manifest(out / "manifest.json", run.manifest);
  return run;
}

RunSummary cmd_train(const TrainOptions& opts) {
  const auto cfg = resolve_config(opts.config, opts.overrides);
  return train_run(load_dataset(opts.data), opts.setup, opts.fold, cfg, opts.out, "train");
}

EvalResult cmd_eval(const EvalOptions& opts) {
  const auto ds = load_dataset(opts.data);
  const auto plan = data::read_split(checked_split_path(opts.data, opts.setup, opts.fold));
  const auto scored = score_checkpoint(opts.checkpoint, ds.samples, subset_ids(plan, opts.subset));
  EvalResult r;
  r.auroc = metrics::auroc(scored.logits, scored.labels);
  r.aucpr = metrics::aucpr(scored.logits, scored.labels);
  const auto fold = opts.subset == "test" ? std::to_string(opts.fold) : std::to_string(opts.fold) + ":" + opts.subset;
  r.row = metrics::format_row({opts.data.filename().string(), opts.setup, fold, r.auroc, r.aucpr});
  const auto dest = opts.metrics_out ? *opts.metrics_out : opts.checkpoint.parent_path() / "metrics.csv";
  append_csv_row(dest, metrics::kMetricsHeader, r.row);
  return r;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto bad = [&] { return ConfigError("bad range '" + text + "', expected a..b or a single integer"); };
  const auto to_index = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw bad();
    return static_cast<std::size_t>(std::stoull(s));
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = to_index(text);
    return {v, v};
  }
  const auto lo = to_index(text.substr(0, dots)), hi = to_index(text.substr(dots + 2));
  if (lo > hi) throw bad();
  return {lo, hi};
}

fs::path cmd_sweep_fusion(const SweepOptions& opts) {
  const auto base = resolve_config(opts.config, opts.overrides);
  const auto lo = opts.fl_min.value_or(0), hi = opts.fl_max.value_or(base.L);
  if (lo > hi || hi > base.L) {
    throw ConfigError("fusion range " + std::to_string(lo) + ".." + std::to_string(hi) + " is outside 0.." +
                      std::to_string(base.L));
  }
  const auto ds = load_dataset(opts.data);
  const auto csv = opts.out / "fusion_sweep.csv";
  fs::create_directories(opts.out);
  std::ostringstream table;
  table << "kind,F_l,is_default,setup,fold,seed,final_train_loss,auroc,aucpr\n";
  for (const auto kind : {FusionMode::CongFu, FusionMode::CrossAttention}) {
    for (std::size_t f = lo; f <= hi; ++f) {
      auto cfg = base;
      cfg.mode = kind;
      cfg.F_l = f;
      const auto run = train_run(ds, opts.setup, opts.fold, cfg, opts.out / (std::string(to_string(kind)) + "_F" + std::to_string(f)),
                                 "sweep-fusion");
      table << to_string(kind) << ',' << f << ',' << (f == base.F_l ? "true" : "false") << ',' << opts.setup << ',' << opts.fold
            << ',' << cfg.seed << ',' << num(run.loss_curve.back()) << ',' << num(run.test_auroc) << ','
            << num(run.test_aucpr) << '\n';
    }
  }
  write_text(csv, table.str());
  return csv;
}

fs::path cmd_ablate(const AblateOptions& opts) {
  const auto base = resolve_config(opts.config, opts.overrides);
  const auto ds = load_dataset(opts.data);
  const auto csv = opts.out / "ablation.csv";
  fs::create_directories(opts.out);
  std::ostringstream table;
  table << "mode,setup,fold,seed,context_fused,final_train_loss,auroc,aucpr\n";
  for (const auto mode : opts.modes) {
    auto cfg = base;
    cfg.mode = mode;
    if (mode == FusionMode::NoFusion) cfg.F_l = cfg.L;
    const auto run = train_run(ds, opts.setup, opts.fold, cfg, opts.out / to_string(mode), "ablate");
    table << to_string(mode) << ',' << opts.setup << ',' << opts.fold << ',' << cfg.seed << ','
          << (run.context_fused ? "true" : "false") << ',' << num(run.loss_curve.back()) << ','
          << num(run.test_auroc) << ',' << num(run.test_aucpr) << '\n';
  }
  write_text(csv, table.str());
  return csv;
}

fs::path cmd_aggregate(const std::vector<fs::path>& metric_files, const fs::path& out) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& path : metric_files) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != metrics::kMetricsHeader) {
      throw SchemaError(path.string() + ": expected header " + metrics::kMetricsHeader);
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      if (f.size() != 5) throw SchemaError(path.string() + ": malformed row '" + line + "'");
      const auto key = std::make_pair(f[0], f[1]);
      if (!groups.count(key)) order.push_back(key);
      groups[key].first.push_back(std::stod(f[3]));
      groups[key].second.push_back(std::stod(f[4]));
    }
  }
  if (order.empty()) throw ValidationError("no metric rows to aggregate");
  std::ostringstream table;
  table << "dataset,setup,folds,auroc,aucpr\n";
  for (const auto& key : order) {
    const auto& [au, ap] = groups[key];
    table << key.first << ',' << key.second << ',' << au.size() << ','
          << metrics::format_mean_std(metrics::mean_std(au)) << ',' << metrics::format_mean_std(metrics::mean_std(ap))
          << '\n';
  }
  write_text(out, table.str());
  return out;
}

std::string cmd_parse_smiles(const std::string& smiles) { return chem::to_edge_list_text(chem::parse_smiles(smiles)); }

}  // namespace congfu::cli
