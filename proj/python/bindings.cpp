// Python bindings: SMILES parsing, metrics, model construction and the
// preprocess/train/eval commands.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "congfu/commands.h"
#include "congfu/errors.h"
#include "congfu/metrics.h"
#include "congfu/model.h"
#include "congfu/smiles.h"

namespace py = pybind11;
using namespace congfu;

namespace {

// nlohmann::json <-> Python via the json module keeps the binding small.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::object& o) {
  if (o.is_none()) return nlohmann::json::object();
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

std::optional<std::filesystem::path> opt_path(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return std::filesystem::path(*s);
}

py::dict summary_dict(const cli::RunSummary& run) {
  py::dict d;
  d["out"] = run.out.string();
  d["loss_curve"] = run.loss_curve;
  d["train_auroc"] = run.train_auroc;
  d["test_auroc"] = run.test_auroc;
  d["test_aucpr"] = run.test_aucpr;
  d["context_fused"] = run.context_fused;
  d["manifest"] = to_py(run.manifest);
  return d;
}

}  // namespace

PYBIND11_MODULE(_congfu, m) {
  m.doc() = "CongFu conditional graph fusion for drug-synergy prediction";
  m.attr("revision") = cli::revision();

  py::register_exception<chem::SmilesError>(m, "SmilesError", PyExc_ValueError);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);

  m.def(
      "parse_smiles",
      [](const std::string& s) {
        const auto g = chem::parse_smiles(s);
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> edges;
        for (const auto& e : g.edges) edges.emplace_back(e.u, e.v, chem::bond_code_name(e.bond));
        py::dict d;
        d["atom_nums"] = g.atom_nums;
        d["edges"] = edges;
        return d;
      },
      py::arg("smiles"), "Atomic numbers and undirected (u, v, bond) edges of a SMILES string.");
  m.def("edge_list_text", &cli::cmd_parse_smiles, py::arg("smiles"));

  m.def(
      "auroc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) { return metrics::auroc(scores, labels); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "aucpr",
      [](const std::vector<double>& scores, const std::vector<int>& labels) { return metrics::aucpr(scores, labels); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "format_mean_std",
      [](const std::vector<double>& values, int digits) {
        return metrics::format_mean_std(metrics::mean_std(values), digits);
      },
      py::arg("values"), py::arg("digits") = 3);

  m.def(
      "default_config", [] { return to_py(ModelConfig{}.to_json()); }, "Default model configuration.");
  m.def(
      "parameter_count",
      [](const py::object& config) {
        auto cfg = cli::resolve_config(std::nullopt, from_py(config));
        return build_model<float>(cfg).parameter_count();
      },
      py::arg("config") = py::none());
  m.def(
      "layer_layout",
      [](const py::object& config) {
        auto cfg = cli::resolve_config(std::nullopt, from_py(config));
        const auto p = build_model<float>(cfg);
        py::dict d;
        d["gine"] = p.encoders.size();
        d["congfu"] = p.congfu.size();
        d["cross_attention"] = p.cross_attention.size();
        return d;
      },
      py::arg("config") = py::none(), "Number of plain, CongFu and cross-attention layers.");

  m.def(
      "preprocess",
      [](const std::string& triplets, const std::string& cells, const std::string& out, std::uint64_t seed) {
        data::PreprocessReport rep;
        {
          py::gil_scoped_release release;
          rep = cli::cmd_preprocess({triplets, cells, out, seed, 1});
        }
        return to_py(rep.to_json());
      },
      py::arg("triplets"), py::arg("cells"), py::arg("out"), py::arg("seed") = 0);
  m.def(
      "train",
      [](const std::string& data, const std::string& out, const std::string& setup, std::size_t fold,
         const std::optional<std::string>& config, const py::object& overrides) {
        cli::TrainOptions opts{data, setup, fold, opt_path(config), out, from_py(overrides)};
        cli::RunSummary run;
        {
          py::gil_scoped_release release;
          run = cli::cmd_train(opts);
        }
        return summary_dict(run);
      },
      py::arg("data"), py::arg("out"), py::arg("setup") = "transductive", py::arg("fold") = 0,
      py::arg("config") = py::none(), py::arg("overrides") = py::none());
  m.def(
      "evaluate",
      [](const std::string& checkpoint, const std::string& data, const std::string& setup, std::size_t fold,
         const std::string& subset) {
        cli::EvalOptions opts;
        opts.checkpoint = checkpoint;
        opts.data = data;
        opts.setup = setup;
        opts.fold = fold;
        opts.subset = subset;
        const auto r = cli::cmd_eval(opts);
        py::dict d;
        d["auroc"] = r.auroc;
        d["aucpr"] = r.aucpr;
        d["row"] = r.row;
        return d;
      },
      py::arg("checkpoint"), py::arg("data"), py::arg("setup") = "transductive", py::arg("fold") = 0,
      py::arg("subset") = "test");
}
