"""Command line entry point: ``ofdm-isac <experiment> [options]``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from ..channel import Target, snap_range
from ..errors import ConfigError, PreconditionError
from ..waveform import PRESETS
from .config import EXPERIMENTS, METHODS, OPTIONS, SweepSpec, load_spec, parse_power, with_overrides
from .runners import budget_rows, render_csv, run

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION = 0, 2, 3

log = logging.getLogger("ofdm_isac")


def _methods(text: str) -> List[str]:
    out = [m.strip().replace("-", "_") for m in text.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"methods must be a comma list of {', '.join(METHODS)}")
    return out


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ofdm-isac",
        description="CP-OFDM radar simulator with coherent compensation of long echoes.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [e.replace("_", "-") for e in EXPERIMENTS] + ["budget"]:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="YAML experiment file")
        p.add_argument("--seeds", type=_positive_int, help="Monte-Carlo seeds per point")
        p.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
        p.add_argument("--method", type=_methods, help="comma list, e.g. none,td_cc,mtcc")
        p.add_argument("--epsilon", help="clipping threshold in dBm, or 'auto' (100 x noise)")
        p.add_argument("--frame", choices=sorted(PRESETS), help="frame preset")
        p.add_argument("--workers", type=_positive_int, help="parallel sweep points")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _spec_from_args(args, experiment: Optional[str]) -> SweepSpec:
    if args.config is not None:
        spec = load_spec(args.config, experiment, fallback="single_sweep")
    else:
        spec = SweepSpec(experiment or "single_sweep")
    if args.frame is not None:
        spec = with_overrides(spec, frame_name=args.frame, frame=PRESETS[args.frame]())
        if "frames" in OPTIONS[spec.experiment]:
            spec = replace(spec, options={**spec.options, "frames": [args.frame]})
    spec = with_overrides(spec, seeds=args.seeds, methods=args.method, workers=args.workers,
                          output=args.out)
    if args.epsilon is not None:
        spec = replace(spec, epsilon=parse_power(args.epsilon))  # "auto" resets to None
    return spec


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from exc


def _budget(args) -> None:
    spec = _spec_from_args(args, None)
    frame = spec.frame
    targets = spec.targets or [Target(4500.0, rcs=0.1), Target(105.0, rcs=10.0)]
    targets = [replace(t, range_m=snap_range(t.range_m, frame)) for t in targets]
    rows = budget_rows(frame, targets, spec.methods or list(METHODS), spec.epsilon)
    cols = ["method", "target", "range_m", "rcs_m2", "peak_dbm", "isi_dbm", "ici_dbm",
            "therm_dbm", "sinr_db"]
    if args.out is not None:
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join(_cell(r[c]) for c in cols))
        _emit("\n".join(lines) + "\n", args.out)
        return
    header = f"{'method':<7}{'tgt':>4}{'range_m':>10}{'rcs_m2':>8}" + "".join(
        f"{c:>11}" for c in cols[4:])
    print(header)
    for r in rows:
        print(f"{r['method']:<7}{r['target']:>4}{r['range_m']:>10.2f}{r['rcs_m2']:>8.3g}"
              + "".join(f"{_cell(r[c]):>11}" for c in cols[4:]))


def _cell(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "-inf" if v < 0 else "inf"
        return f"{v:.2f}"
    return str(v)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "budget":
            _budget(args)
            return EXIT_OK
        experiment = args.command.replace("-", "_")
        spec = _spec_from_args(args, experiment)
        rows = run(spec)
        _emit(render_csv(rows, experiment), spec.output)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except PreconditionError as exc:
        log.error("%s", exc)
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
