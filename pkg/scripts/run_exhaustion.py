#!/usr/bin/env python3
"""Run the domain-exhaustion pipeline for one coefficient field.

Writes stages.csv (the monotone resolvent stages), plus the smoothing,
mass-loss and semigroup-trace probes, into --out/<field>/.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from semigroup_lab.cli import main as lab_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--field", default="ou",
                        choices=["ou", "laplace", "cubic_drift"])
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0)
    parser.add_argument("--h", type=float, default=0.05)
    parser.add_argument("--radii", default="2,4,6,8")
    parser.add_argument("--t", type=float, default=0.1)
    parser.add_argument("--out", default="lab_output/exhaustion")
    args = parser.parse_args()
    config = {
        "experiments": [{
            "kind": "exhaust",
            "name": args.field,
            "field": args.field,
            "lambda": args.lam,
            "h": args.h,
            "radii": [float(r) for r in args.radii.split(",")],
            "t": args.t,
            "probes": ["smoothing", "mass_loss", "trace"],
        }]
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as handle:
        json.dump(config, handle)
        config_path = handle.name
    code = lab_main(["run", config_path, "--out", args.out])
    Path(config_path).unlink(missing_ok=True)
    return code


if __name__ == "__main__":
    sys.exit(main())
