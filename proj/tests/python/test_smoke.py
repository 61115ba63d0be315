import json

import pytest

import congfu
from conftest import TINY


def test_parse_smiles():
    g = congfu.parse_smiles("CC(=O)O")
    assert g["atom_nums"] == [6, 6, 8, 8]
    assert sorted(g["edges"]) == [(0, 1, "single"), (1, 2, "double"), (1, 3, "single")]
    assert congfu.edge_list_text("C=O") == "atoms 6 8\n0 1 double\n"


def test_smiles_error_is_value_error():
    with pytest.raises(congfu.SmilesError):
        congfu.parse_smiles("C1CC")
    with pytest.raises(ValueError):
        congfu.parse_smiles("C(C")


def test_metrics():
    assert congfu.auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert congfu.aucpr([0.2, 0.9], [0, 1]) == 1.0
    assert congfu.format_mean_std([0.975, 0.976, 0.977]) == "0.976 ± 0.001"
    with pytest.raises(congfu.UndefinedMetricError):
        congfu.auroc([0.1, 0.2], [1, 1])


def test_config_and_layout():
    cfg = congfu.default_config()
    assert cfg["D"] == 300 and cfg["L"] == 5 and cfg["F_l"] == 3
    assert congfu.layer_layout() == {"gine": 3, "congfu": 2, "cross_attention": 0}
    assert congfu.layer_layout({"mode": "cross_attention"}) == {"gine": 3, "congfu": 0, "cross_attention": 2}
    assert congfu.layer_layout({"mode": "no_fusion"})["gine"] == 5
    assert congfu.parameter_count(TINY) < congfu.parameter_count()
    with pytest.raises(congfu.ConfigError):
        congfu.layer_layout({"F_l": 6})
    assert congfu.parameter_count({"head_input": 812}) - congfu.parameter_count() == 900 * 812 + 812 - 88 * 256
    with pytest.raises(congfu.ConfigError):
        congfu.parameter_count({"head_input": 0})


def test_train_and_evaluate(dataset, tmp_path):
    run = congfu.train(str(dataset), str(tmp_path / "run"), overrides=TINY)
    assert len(run["loss_curve"]) == 2
    assert run["context_fused"] is True
    ev = congfu.evaluate(str(tmp_path / "run" / "best.ckpt"), str(dataset))
    assert ev["auroc"] == pytest.approx(run["test_auroc"], abs=0)
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert len(manifest) == 1 and manifest[0]["config"]["D"] == 8
