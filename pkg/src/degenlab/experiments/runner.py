"""Execution of scenarios: single passes, eps sweeps, refinement studies.

A run produces one CSV per measurement plus a summary file.  The tables
are a determinism contract: same config and seed, byte-identical bytes,
whatever the thread count.  Rounds of a sweep or refinement are
independent, so --threads only maps them over a pool; results are
reassembled in declaration order.  The summary carries the runtime and
the pass/fail verdicts, and is the one file allowed to differ between
reruns.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from ..errors import ConfigError
from ..weights import WeightParams
from .config import parse_config, parse_config_text
from .io import Table, format_cell, read_table, write_table
from .prng import SplitMix64
from .scenarios import (MEASUREMENTS, RunContext, Scenario, build_scenario,
                        bundled_config_text, bundled_names, validate)

__all__ = ["Report", "ToleranceCheck", "load_scenario", "execute", "run",
           "sweep_eps", "refine", "render_report"]


@dataclass
class ToleranceCheck:
    measurement: str
    score: float
    direction: str
    tolerance: float | None
    status: str  # pass, fail, or info when no tolerance is declared


@dataclass
class Report:
    scenario: str
    mode: str
    seed: int
    tables: dict
    checks: list
    runtime: float

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)


def load_scenario(config, seed: int | None = None) -> Scenario:
    """Scenario from a config path or a bundled config name."""
    config = str(config)
    if os.path.exists(config):
        cfg = parse_config(config)
    elif config in bundled_names():
        cfg = parse_config_text(bundled_config_text(config),
                                source=f"bundled:{config}")
    else:
        raise ConfigError(
            f"no config file {config!r} and no bundled scenario of that "
            f"name; bundled: {bundled_names()}")
    scn = build_scenario(cfg)
    if seed is not None:
        scn = replace(scn, seed=int(seed))
    return scn


def _single_pass(scn: Scenario, w: WeightParams, grid) -> dict:
    """All declared measurements at one weight on one grid."""
    ctx = RunContext(scenario=scn, grid=grid, weight=w,
                     rng=SplitMix64(scn.seed))
    return {m: MEASUREMENTS[m](ctx) for m in scn.measurements}


def _rounds(items, fn, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _worse(direction: str, a: float, b: float) -> float:
    return max(a, b) if direction == "<=" else min(a, b)


def _sweep(scn: Scenario, eps_values, threads: int):
    """Rounds over eps on a fixed grid with fixed data.

    Tables gain a leading eps column unless the measurement already
    stamps one; scores aggregate to the worst round.
    """
    grid = scn.make_grid()
    results = _rounds(
        list(eps_values),
        lambda e: _single_pass(scn, WeightParams(a=scn.a, eps=e), grid),
        threads)
    tables: dict = {}
    scores: dict = {}
    for e, res in zip(eps_values, results):
        for m, r in res.items():
            t = r.table if "eps" in r.table.columns else \
                r.table.with_lead("eps", float(e))
            if m not in tables:
                tables[m] = Table(columns=list(t.columns))
                scores[m] = (r.score, r.direction, r.note)
            for row in t.rows:
                tables[m].append(row)
            worst = _worse(r.direction, scores[m][0], r.score)
            scores[m] = (worst, r.direction, scores[m][2])
    return tables, scores


def _refine(scn: Scenario, levels: int, threads: int):
    """Rounds over doubled grids; adds the refinement rate table.

    Rates are log2 ratios of successive scores, meaningful for
    error-like scores read with <=; the aggregate score per measurement
    is the finest level's.
    """
    grids = [scn.make_grid(2 ** k) for k in range(levels)]
    results = _rounds(
        grids, lambda g: _single_pass(scn, scn.weight, g), threads)
    tables: dict = {}
    scores: dict = {}
    rate_tab = Table(columns=["measurement", "level", "cells", "h",
                              "score", "rate"])
    for m in scn.measurements:
        prev = None
        for k, (grid, res) in enumerate(zip(grids, results)):
            r = res[m]
            t = (r.table
                 .with_lead("h", float(max(grid.h)))
                 .with_lead("cells", int(grid.cells[-1]))
                 .with_lead("level", k))
            if m not in tables:
                tables[m] = Table(columns=list(t.columns))
            for row in t.rows:
                tables[m].append(row)
            rate = math.nan
            if (prev is not None and r.direction == "<="
                    and prev > 0 and r.score > 0):
                rate = math.log2(prev / r.score)
            rate_tab.append({"measurement": m, "level": k,
                             "cells": int(grid.cells[-1]),
                             "h": float(max(grid.h)),
                             "score": r.score, "rate": rate})
            prev = r.score
            scores[m] = (r.score, r.direction, r.note)
    tables["refinement"] = rate_tab
    return tables, scores


def execute(scn: Scenario, threads: int = 1) -> Report:
    """Run the scenario in whichever mode it declares."""
    t0 = time.perf_counter()
    if scn.sweep_eps is not None:
        mode = "sweep"
        tables, scores = _sweep(scn, scn.sweep_eps, threads)
    elif scn.refine_levels is not None:
        mode = "refine"
        tables, scores = _refine(scn, scn.refine_levels, threads)
    else:
        mode = "single"
        results = _single_pass(scn, scn.weight, scn.make_grid())
        tables = {m: r.table for m, r in results.items()}
        scores = {m: (r.score, r.direction, r.note)
                  for m, r in results.items()}
    checks = []
    for m in scn.measurements:
        score, direction, _ = scores[m]
        tol = scn.tolerances.get(m)
        if tol is None:
            status = "info"
        elif direction == "<=":
            status = "pass" if score <= tol else "fail"
        else:
            status = "pass" if score >= tol else "fail"
        checks.append(ToleranceCheck(measurement=m, score=float(score),
                                     direction=direction, tolerance=tol,
                                     status=status))
    return Report(scenario=scn.name, mode=mode, seed=scn.seed,
                  tables=tables, checks=checks,
                  runtime=time.perf_counter() - t0)


def sweep_eps(scn: Scenario, eps_values, threads: int = 1) -> dict:
    """Tables of every measurement over the given eps ladder."""
    probe = replace(scn, sweep_eps=tuple(float(e) for e in eps_values),
                    refine_levels=None)
    validate(probe)
    tables, _ = _sweep(probe, probe.sweep_eps, threads)
    return tables


def refine(scn: Scenario, levels: int, threads: int = 1) -> dict:
    """Tables of every measurement over doubled grids, plus rates."""
    probe = replace(scn, refine_levels=int(levels), sweep_eps=None)
    validate(probe)
    tables, _ = _refine(probe, probe.refine_levels, threads)
    return tables


def write_report(report: Report, out_dir) -> Path:
    """One CSV per table plus summary.txt; returns the directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, table in report.tables.items():
        write_table(table, out / f"{name}.csv")
    lines = [
        f"scenario {report.scenario}",
        f"mode {report.mode}",
        f"seed {report.seed}",
        f"runtime_s {report.runtime:.3f}",
    ]
    for c in report.checks:
        tol = "none" if c.tolerance is None else format_cell(c.tolerance)
        lines.append(
            f"check {c.measurement} score={format_cell(c.score)} "
            f"direction={c.direction} tolerance={tol} status={c.status}")
    for name, table in report.tables.items():
        lines.append(f"table {name} rows={len(table.rows)} "
                     f"file={name}.csv")
    (out / "summary.txt").write_text("\n".join(lines) + "\n",
                                     encoding="utf-8")
    return out


def run(config, out=None, seed: int | None = None, threads: int = 1) -> tuple:
    """Load, validate, execute, and write out; returns (report, path).

    config is a file path or a bundled scenario name.  The output
    directory defaults to results/<scenario-name>.
    """
    scn = load_scenario(config, seed=seed)
    validate(scn)
    report = execute(scn, threads=threads)
    out_dir = Path(out) if out is not None else Path("results") / scn.name
    write_report(report, out_dir)
    return report, out_dir


def render_report(out_dir) -> str:
    """Human-readable digest of a written results directory."""
    out = Path(out_dir)
    summary = out / "summary.txt"
    if not summary.is_file():
        raise ConfigError(f"{out} has no summary.txt; not a results dir?")
    lines = summary.read_text(encoding="utf-8").splitlines()
    rendered = []
    for line in lines:
        if line.startswith("table "):
            name = line.split()[1]
            table = read_table(out / f"{name}.csv")
            rendered.append(f"-- {name} ({len(table.rows)} rows) --")
            head = table.rows[:8]
            widths = {c: max(len(str(c)), *(len(format_cell(r[c]))
                                            for r in head), 0)
                      for c in table.columns} if head else {}
            if head:
                rendered.append("  ".join(
                    str(c).ljust(widths[c]) for c in table.columns))
                for r in head:
                    rendered.append("  ".join(
                        format_cell(r[c]).ljust(widths[c])
                        for c in table.columns))
                if len(table.rows) > 8:
                    rendered.append(f"... {len(table.rows) - 8} more rows")
        else:
            rendered.append(line)
    return "\n".join(rendered) + "\n"


def summary_failed(out_dir) -> bool:
    """Whether the written summary records any failed check."""
    text = (Path(out_dir) / "summary.txt").read_text(encoding="utf-8")
    return any(line.startswith("check ") and line.endswith("status=fail")
               for line in text.splitlines())
