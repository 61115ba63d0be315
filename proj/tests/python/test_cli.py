import csv
import json
import os
import shutil
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("CONGFU_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="CONGFU_CLI not set")


def run(*args, check=True):
    p = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    if check:
        assert p.returncode == 0, p.stderr
    return p


def test_parse_smiles_and_exit_codes():
    assert run("parse-smiles", "CCO").stdout == "atoms 6 6 8\n0 1 single\n1 2 single\n"
    bad = run("parse-smiles", "C1CC", check=False)
    assert bad.returncode == 2
    assert "at offset 1" in bad.stderr
    assert run("frobnicate", check=False).returncode != 0


def test_bad_config_exits_4(dataset, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"F_l": 9}))
    p = run("train", "--data", dataset, "--config", cfg, "--out", tmp_path / "x", check=False)
    assert p.returncode == 4, p.stderr


def test_preprocess_train_eval(dataset, tiny_config, tmp_path):
    out = tmp_path / "pre"
    from conftest import DATA

    run("preprocess", "--triplets", DATA / "fixture200" / "triplets.csv",
        "--cells", DATA / "fixture200" / "cells.csv", "--out", out)
    assert (out / "samples.csv").read_bytes() == (dataset / "samples.csv").read_bytes()

    r = tmp_path / "run"
    run("train", "--data", dataset, "--setup", "leave-comb-out", "--fold", 2, "--config", tiny_config,
        "--out", r, "--epochs", 1, "--dtype", "float64")
    assert len((r / "loss_curve.csv").read_text().splitlines()) == 2
    run("eval", "--checkpoint", r / "best.ckpt", "--data", dataset, "--setup", "leave-comb-out", "--fold", 2)
    rows = list(csv.reader((r / "metrics.csv").open()))
    assert rows[0] == ["dataset", "setup", "fold", "auroc", "aucpr"]
    assert len(rows) == 3 and rows[1] == rows[2]

    agg = tmp_path / "agg.csv"
    run("aggregate", r / "metrics.csv", "--out", agg)
    assert agg.read_text().splitlines()[1].startswith("fixture200,leave-comb-out,2,")


def test_single_class_eval_exits_3(dataset, tiny_config, tmp_path):
    r = tmp_path / "run"
    run("train", "--data", dataset, "--config", tiny_config, "--out", r, "--epochs", 1)
    copy = tmp_path / "fixture200"
    shutil.copytree(dataset, copy)
    labels = {int(row["sample_id"]): int(row["label"]) for row in csv.DictReader((copy / "samples.csv").open())}
    split = copy / "splits" / "transductive_fold0.json"
    plan = json.loads(split.read_text())
    plan["test"] = [i for i in plan["test"] if labels[i] == 1]
    split.write_text(json.dumps(plan))
    p = run("eval", "--checkpoint", r / "best.ckpt", "--data", copy, check=False)
    assert p.returncode == 3, p.stderr
