"""Shared fixtures: real artifacts produced by the experiment driver CLI.

The plotting package is exercised only against the published CSV contract,
so the fixtures shell out (in-process) to the driver rather than fabricating
files by hand.
"""

import json

import pytest

from semigroup_lab.cli import main as lab_main

ARTIFACT_CONFIG = {
    "experiments": [
        {"kind": "examples", "name": "shift_weighted",
         "family": "shift_weighted", "lambda": 1.0,
         "n_list": [1, 4, 16, "inf"]},
        {"kind": "examples", "name": "radial_d3", "family": "radial_d3",
         "lambda": 1.0, "a_list": [1.0, 0.1, 0.01], "r_max": 3.0},
        {"kind": "exhaust", "name": "ou", "field": "ou", "lambda": 1.0,
         "h": 0.05, "radii": [2.0, 3.0, 4.0], "t": 0.1,
         "probes": ["smoothing", "mass_loss"]},
    ]
}


@pytest.fixture(scope="session")
def artifact_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("artifacts")
    config_path = root / "config.json"
    config_path.write_text(json.dumps(ARTIFACT_CONFIG))
    code = lab_main(["run", str(config_path), "--out", str(root)])
    assert code == 0
    return root


@pytest.fixture()
def out_dir(tmp_path):
    return tmp_path / "figures"
