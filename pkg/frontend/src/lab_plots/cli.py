"""Batch figure renderer.

``render <figures.json>`` reads a figure manifest and writes each image in
turn.  Exit codes: 0 all figures written, 1 manifest/configuration error,
2 a CSV input was missing or misformatted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, FigureError, FigureSpec, render

EXIT_OK, EXIT_CONFIG, EXIT_INPUT = 0, 1, 2


class ManifestError(ValueError):
    pass


def load_manifest(path: str) -> list[FigureSpec]:
    manifest_path = Path(path)
    if not manifest_path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    try:
        payload = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}:{exc.lineno}: {exc.msg}") from None
    figures = payload.get("figures") if isinstance(payload, dict) else None
    if not isinstance(figures, list) or not figures:
        raise ManifestError(f"{path}: expected a non-empty 'figures' list")
    specs = []
    for i, entry in enumerate(figures):
        if not isinstance(entry, dict):
            raise ManifestError(f"{path}: figures[{i}] must be an object")
        missing = {"kind", "inputs", "output"} - set(entry)
        if missing:
            raise ManifestError(f"{path}: figures[{i}] missing {sorted(missing)}")
        try:
            specs.append(FigureSpec(kind=entry["kind"],
                                    inputs=tuple(entry["inputs"]),
                                    output=entry["output"],
                                    title=entry.get("title", "")))
        except FigureError as exc:
            raise ManifestError(f"{path}: figures[{i}]: {exc}") from None
    return specs


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="semigroup-lab-plots",
                                     description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    render_parser = sub.add_parser("render", help="render a figure manifest")
    render_parser.add_argument("manifest", help="path to figures.json")
    render_parser.add_argument("--out", default=None,
                               help="directory prepended to relative outputs")
    args = parser.parse_args(argv)

    try:
        specs = load_manifest(args.manifest)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for spec in specs:
        if args.out is not None and not Path(spec.output).is_absolute():
            spec = FigureSpec(spec.kind, spec.inputs,
                              str(Path(args.out) / spec.output), spec.title)
        try:
            render(spec)
        except FigureError as exc:
            print(f"error: {spec.kind}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(f"wrote {spec.output}")
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
