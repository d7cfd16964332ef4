"""Command-line entry point.

    degenlab run CONFIG [--out DIR] [--seed N] [--threads N] [--strict]
    degenlab sweep CONFIG ...      (CONFIG must declare sweep.eps)
    degenlab refine CONFIG ...     (CONFIG must declare refine.levels)
    degenlab catalog NAME [--a A] [--eps E] [--samples N] [--delta D]
    degenlab report DIR

CONFIG is a config file path or the name of a bundled scenario.  Exit
codes: 0 when every declared tolerance holds, 1 when one fails, 2 on
configuration errors.  --strict additionally fails the run when any
score comes back non-finite, tolerance or not.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from ..errors import ConfigError, DegenlabError
from ..weights import CATALOG_NAMES, WeightParams, catalog
from .io import format_cell
from .runner import (execute, load_scenario, render_report, summary_failed,
                     write_report)
from .scenarios import validate

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degenlab",
        description="finite-difference laboratory for weights degenerate "
                    "on a hyperplane")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config",
                       help="config file path or bundled scenario name")
        p.add_argument("--out", default=None,
                       help="output directory (default results/<name>)")
        p.add_argument("--seed", type=int, default=None,
                       help="override scenario.seed")
        p.add_argument("--threads", type=int, default=1,
                       help="thread pool size for independent rounds")
        p.add_argument("--strict", action="store_true",
                       help="also fail on non-finite scores")
        return p

    scenario_cmd("run", "run a scenario in its declared mode")
    scenario_cmd("sweep", "run the declared eps sweep")
    scenario_cmd("refine", "run the declared refinement study")

    cat = sub.add_parser("catalog", help="tabulate a named exact solution")
    cat.add_argument("name", help=f"one of {', '.join(CATALOG_NAMES)}")
    cat.add_argument("--a", type=float, default=0.5)
    cat.add_argument("--eps", type=float, default=0.0)
    cat.add_argument("--samples", type=int, default=33)
    cat.add_argument("--delta", type=float, default=None,
                     help="cutoff scale (cutoff only)")
    cat.add_argument("--out", default=None,
                     help="write <name>.csv there instead of stdout")

    rep = sub.add_parser("report", help="render a written results dir")
    rep.add_argument("dir")
    return parser


def _cmd_scenario(args, require: str | None) -> int:
    scn = load_scenario(args.config, seed=args.seed)
    if require == "sweep" and scn.sweep_eps is None:
        raise ConfigError(
            f"scenario {scn.name!r} declares no sweep.eps; "
            "use `run` or add one")
    if require == "refine" and scn.refine_levels is None:
        raise ConfigError(
            f"scenario {scn.name!r} declares no refine.levels; "
            "use `run` or add one")
    validate(scn)
    report = execute(scn, threads=args.threads)
    out_dir = write_report(
        report, args.out if args.out is not None else f"results/{scn.name}")
    print(f"scenario {report.scenario} ({report.mode}), "
          f"{report.runtime:.2f}s, results in {out_dir}")
    failed = False
    for c in report.checks:
        tol = "none" if c.tolerance is None else format_cell(c.tolerance)
        print(f"  {c.status:4s}  {c.measurement}: score "
              f"{format_cell(c.score)} {c.direction} {tol}")
        if c.status == "fail":
            failed = True
        if args.strict and not math.isfinite(c.score):
            print(f"  strict: {c.measurement} score is not finite")
            failed = True
    return 1 if failed else 0


def _cmd_catalog(args) -> int:
    w = WeightParams(a=args.a, eps=args.eps)
    if args.samples < 2:
        raise ConfigError("--samples must be at least 2")
    y = np.linspace(0.0, 1.0, args.samples)
    values = np.atleast_1d(catalog(args.name, w, y, delta=args.delta))
    lines = ["y,value"]
    lines += [f"{format_cell(float(t))},{format_cell(float(v))}"
              for t, v in zip(y, values)]
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        from pathlib import Path
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.name}.csv").write_text(text, encoding="utf-8")
        print(f"wrote {out / (args.name + '.csv')}")
    return 0


def _cmd_report(args) -> int:
    sys.stdout.write(render_report(args.dir))
    return 1 if summary_failed(args.dir) else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command in ("run", "sweep", "refine"):
            require = None if args.command == "run" else args.command
            return _cmd_scenario(args, require)
        if args.command == "catalog":
            return _cmd_catalog(args)
        return _cmd_report(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DegenlabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
