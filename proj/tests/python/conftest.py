import json
import os
from pathlib import Path

import pytest

DATA = Path(os.environ.get("CONGFU_TEST_DATA", Path(__file__).resolve().parents[1] / "data"))

TINY = {
    "D": 8,
    "L": 2,
    "F_l": 1,
    "cell_encoder": [908, 8],
    "head_hidden": [4],
    "epochs": 2,
    "batch_size": 64,
    "lr": 1e-3,
}


@pytest.fixture(scope="session")
def dataset(tmp_path_factory):
    import congfu

    out = tmp_path_factory.mktemp("data") / "fixture200"
    report = congfu.preprocess(
        str(DATA / "fixture200" / "triplets.csv"), str(DATA / "fixture200" / "cells.csv"), str(out)
    )
    assert report["samples"] == 200
    return out


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY))
    return path
