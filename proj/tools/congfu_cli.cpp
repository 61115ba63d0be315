// congfu: preprocessing, training, evaluation, fusion sweep and ablations.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "congfu/commands.h"
#include "congfu/errors.h"
#include "congfu/smiles.h"

namespace fs = std::filesystem;
using namespace congfu;

namespace {

struct Common {
  std::string data;
  std::string setup = "transductive";
  std::size_t fold = 0;
  std::string config;
  std::string out;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> early_stop;
  std::optional<std::string> dtype;
};

void add_common(CLI::App* cmd, Common& c, bool with_fold = true) {
  cmd->add_option("--data", c.data, "Preprocessed dataset directory")->required();
  cmd->add_option("--setup", c.setup, "transductive | leave-drug-out | leave-comb-out")
      ->check(CLI::IsMember({"transductive", "leave-drug-out", "leave-comb-out"}));
  if (with_fold) cmd->add_option("--fold", c.fold, "Fold index")->check(CLI::Range(0, 4));
}

void add_training(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Model config JSON");
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--epochs", c.epochs, "Override the configured epoch count");
  cmd->add_option("--seed", c.seed, "Override the configured seed");
  cmd->add_option("--early-stop-patience", c.early_stop, "Stop after this many epochs without val AUCPR gain");
  cmd->add_option("--dtype", c.dtype, "float32 | float64")->check(CLI::IsMember({"float32", "float64"}));
}

nlohmann::json overrides(const Common& c) {
  auto j = nlohmann::json::object();
  if (c.epochs) j["epochs"] = *c.epochs;
  if (c.seed) j["seed"] = *c.seed;
  if (c.early_stop) j["early_stop_patience"] = *c.early_stop;
  if (c.dtype) j["dtype"] = *c.dtype;
  return j;
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CongFu drug-synergy pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::revision());

  cli::PreprocessOptions pre;
  auto* p = app.add_subcommand("preprocess", "Filter, label and split a triplet table");
  p->add_option("--triplets", pre.triplets, "Triplet CSV")->required()->check(CLI::ExistingFile);
  p->add_option("--cells", pre.cells, "Cell-line feature CSV/TSV")->required()->check(CLI::ExistingFile);
  p->add_option("--out", pre.out, "Dataset directory to write")->required();
  p->add_option("--seed", pre.seed, "Split seed");

  Common tr;
  auto* t = app.add_subcommand("train", "Train one model on one split");
  add_common(t, tr);
  add_training(t, tr);

  cli::EvalOptions ev;
  std::string ev_metrics;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a split subset");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint manifest")->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data, "Preprocessed dataset directory")->required();
  e->add_option("--setup", ev.setup, "Split setup")
      ->check(CLI::IsMember({"transductive", "leave-drug-out", "leave-comb-out"}));
  e->add_option("--fold", ev.fold, "Fold index")->check(CLI::Range(0, 4));
  e->add_option("--subset", ev.subset, "train | val | test")->check(CLI::IsMember({"train", "val", "test"}));
  e->add_option("--metrics-out", ev_metrics, "CSV to append to (default: next to the checkpoint)");

  Common sw;
  std::string range;
  auto* s = app.add_subcommand("sweep-fusion", "Train one model per fusion-injection layer and kind");
  add_common(s, sw);
  add_training(s, sw);
  s->add_option("--Fl-range", range, "Inclusive range a..b (default 0..L)");

  Common ab;
  std::vector<std::string> modes;
  auto* a = app.add_subcommand("ablate", "Compare congfu, cross_attention and no_fusion");
  add_common(a, ab);
  add_training(a, ab);
  a->add_option("--mode", modes, "Modes to run (repeatable; default all three)")
      ->check(CLI::IsMember({"congfu", "cross_attention", "no_fusion"}));

  std::vector<std::string> agg_inputs;
  std::string agg_out;
  auto* g = app.add_subcommand("aggregate", "Mean ± std of metrics.csv rows per dataset and setup");
  g->add_option("inputs", agg_inputs, "metrics.csv files")->required()->check(CLI::ExistingFile);
  g->add_option("--out", agg_out, "Output CSV")->required();

  std::string smiles;
  auto* ps = app.add_subcommand("parse-smiles", "Dump a parsed molecule as edge-list text");
  ps->add_option("smiles", smiles, "SMILES string")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (*p) {
      const auto rep = cli::cmd_preprocess(pre);
      std::cout << rep.to_json().dump(2) << '\n';
    } else if (*t) {
      const auto run = cli::cmd_train({tr.data, tr.setup, tr.fold, opt_path(tr.config), tr.out, overrides(tr)});
      std::cout << run.manifest["final_metrics"].dump(2) << '\n';
    } else if (*e) {
      if (!ev_metrics.empty()) ev.metrics_out = ev_metrics;
      std::cout << cli::cmd_eval(ev).row << '\n';
    } else if (*s) {
      cli::SweepOptions opts{sw.data, sw.setup, sw.fold, opt_path(sw.config), overrides(sw), {}, {}, sw.out};
      if (!range.empty()) std::tie(opts.fl_min, opts.fl_max) = cli::parse_range(range);
      std::cout << cli::cmd_sweep_fusion(opts).string() << '\n';
    } else if (*a) {
      cli::AblateOptions opts{ab.data, ab.setup, ab.fold, opt_path(ab.config), overrides(ab), {}, ab.out};
      if (modes.empty()) modes = {"congfu", "cross_attention", "no_fusion"};
      for (const auto& m : modes) opts.modes.push_back(parse_fusion_mode(m));
      std::cout << cli::cmd_ablate(opts).string() << '\n';
    } else if (*g) {
      std::vector<fs::path> inputs(agg_inputs.begin(), agg_inputs.end());
      std::cout << cli::cmd_aggregate(inputs, agg_out).string() << '\n';
    } else if (*ps) {
      std::cout << cli::cmd_parse_smiles(smiles);
    }
  } catch (const chem::SmilesError& err) {
    std::cerr << "congfu: SMILES error at offset " << err.position() << ": " << err.what() << '\n';
    return 2;
  } catch (const UndefinedMetricError& err) {
    std::cerr << "congfu: undefined metric: " << err.what() << '\n';
    return 3;
  } catch (const ConfigError& err) {
    std::cerr << "congfu: config error: " << err.what() << '\n';
    return 4;
  } catch (const std::exception& err) {
    std::cerr << "congfu: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
