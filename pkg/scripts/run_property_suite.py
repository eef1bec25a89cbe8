#!/usr/bin/env python3
"""Run the deterministic invariant suite and print a scoreboard.

Exit code 0 when every non-inconclusive check passes, 2 otherwise.
"""

import argparse
import sys
from pathlib import Path

from semigroup_lab.checks import reports_to_json, run_suite, suite_exit_code


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--json", default=None,
                        help="optional path for the full JSON report")
    args = parser.parse_args()
    reports = run_suite(seed=args.seed)
    for report in reports:
        mark = {"pass": "ok ", "fail": "FAIL", "inconclusive": "?? "}[report.verdict]
        print(f"{mark} {report.name}: residual {report.worst_residual:.3e} "
              f"(tol {report.tolerance:.1e})")
    if args.json:
        Path(args.json).write_text(reports_to_json(reports))
    failures = sum(1 for r in reports if not r.passed and r.verdict != "inconclusive")
    print(f"{len(reports)} checks, {failures} failures")
    return suite_exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())
