#!/usr/bin/env python3
"""Render the closed-form example profiles to CSV.

Produces one directory per family under --out, each with a profile.csv:
the monotone weighted-shift resolvents, the half-line shift resolvent, the
radial obstacle profiles for a shrinking obstacle, and the scalar decreasing
family.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from semigroup_lab.cli import main as lab_main


def build_config(lam: float) -> dict:
    return {
        "experiments": [
            {"kind": "examples", "name": "shift_weighted",
             "family": "shift_weighted", "lambda": lam,
             "n_list": [1, 2, 4, 8, 16, 32, "inf"]},
            {"kind": "examples", "name": "shift_halfline",
             "family": "shift_halfline", "lambda": lam},
            {"kind": "examples", "name": "radial_d3", "family": "radial_d3",
             "lambda": lam, "a_list": [1.0, 0.5, 0.1, 0.01], "r_max": 3.0},
            {"kind": "examples", "name": "scalar_decreasing",
             "family": "scalar_decreasing",
             "n_list": [1, 4, 16, 64, 256],
             "t_list": [0.0, 0.001, 0.01, 0.1, 0.5, 1.0]},
        ]
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0)
    parser.add_argument("--out", default="lab_output/examples")
    args = parser.parse_args()
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as handle:
        json.dump(build_config(args.lam), handle)
        config_path = handle.name
    code = lab_main(["run", config_path, "--out", args.out])
    Path(config_path).unlink(missing_ok=True)
    return code


if __name__ == "__main__":
    sys.exit(main())
