"""Scenario descriptions and the measurement registry.

A scenario is a declarative bundle: one weight family, one grid, one
problem (right-hand side plus boundary data), and an ordered list of
named measurements with per-measurement options and tolerances.
Scenarios come from config files (config.py has the syntax);
build_scenario turns a parsed ConfigMap into a Scenario, and validate
rejects requests the solvers cannot honor before any work starts.

Each measurement is a function RunContext -> MeasurementResult.  The
result carries a Table of rows for the CSV writer, a scalar score, and
the direction a declared tolerance reads that score: "<=" for defects
and error norms, ">=" for quotients bounded from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from ..analysis import (c1alpha_estimate, holder_estimate, moser_ratio,
                        rayleigh_hardy, rayleigh_trace, stability_quotient)
from ..assembly import (Dirichlet, NeumannRhs, ProblemSpec, VolumetricRhs,
                        assemble, assemble_neumann, outer_faces)
from ..calculus import duality_transform, op_Fa, op_G, second_dy
from ..errors import ConfigError
from ..frequency import (_ladder_derivative, check_derivative_relation,
                         compute_HE, growth_exponent, radius_ladder)
from ..mesh import Grid, build_grid
from ..solver import SolveOptions, solve
from ..weights import (CATALOG_NAMES, WeightParams, catalog, cutoff_energy,
                       ode_example)
from .config import ConfigMap
from .io import Table
from .prng import SplitMix64


# ------------------------------------------------------- named ingredients

#: Polynomial/trigonometric comparison fields defined on the whole grid,
#: on top of the one-dimensional analytic catalog.
LOCAL_FIELDS = ("ysq", "y4", "cos_even", "linear_y")

RHS_NAMES = ("none", "one", "manufactured_even", "even_smooth",
             "neumann_flux_one")


def reference_field(name: str, w: WeightParams):
    """Callable (*coords) -> values for a named comparison field.

    Local names cover the even polynomial tests; anything else is looked
    up in the analytic catalog and applied to the y-coordinate.
    """
    if name == "ysq":
        return lambda *c: c[-1] ** 2
    if name == "y4":
        return lambda *c: c[-1] ** 4
    if name == "cos_even":
        return lambda *c: np.cos(np.pi * c[0]) * (1.0 + c[-1] ** 2)
    if name == "linear_y":
        return lambda *c: c[-1] + 0.0 * c[0]
    if name in CATALOG_NAMES:
        return lambda *c: catalog(name, w, c[-1]) + 0.0 * c[0]
    raise ConfigError(
        f"unknown reference field {name!r}; "
        f"choose from {LOCAL_FIELDS + tuple(CATALOG_NAMES)}"
    )


def make_rhs(name: str, w: WeightParams):
    """Right-hand-side object for a named datum, or None for none.

    manufactured_even is the exact source of u = y^2 at every eps:
    f = -2 (1 + a y^2 / (eps^2 + y^2)), which collapses to the constant
    -2 (1 + a) on the sharp weight.
    """
    if name == "none":
        return None
    if name == "one":
        return VolumetricRhs(1.0)
    if name == "manufactured_even":
        a, e = w.a, w.eps
        return VolumetricRhs(
            lambda *c: -2.0 * (1.0 + a * c[-1] ** 2 / (e * e + c[-1] ** 2)))
    if name == "even_smooth":
        return VolumetricRhs(
            lambda *c: np.cos(0.5 * np.pi * c[0]) * np.exp(-c[-1]))
    if name == "neumann_flux_one":
        return NeumannRhs(1.0)
    raise ConfigError(f"unknown rhs {name!r}; choose from {RHS_NAMES}")


# ----------------------------------------------------------------- scenario


@dataclass
class Scenario:
    """Validated description of one experiment run."""

    name: str
    seed: int
    n: int
    cells: tuple
    half: bool
    symmetry: str
    a: float
    eps: float
    rhs_name: str
    bc_name: str
    reference: str | None
    measurements: tuple
    options: dict
    tolerances: dict
    sweep_eps: tuple | None
    refine_levels: int | None
    cell_cap: int

    @property
    def weight(self) -> WeightParams:
        return WeightParams(a=self.a, eps=self.eps)

    @property
    def has_problem(self) -> bool:
        """Whether there is anything to solve for."""
        return self.rhs_name != "none" or self.bc_name == "reference"

    def make_grid(self, factor: int = 1) -> Grid:
        cells = tuple(int(c) * factor for c in self.cells)
        return build_grid(self.n, cells, self.half, self.symmetry)

    def make_problem(self, w: WeightParams, grid: Grid) -> ProblemSpec | None:
        rhs = make_rhs(self.rhs_name, w)
        if rhs is None and self.bc_name == "zero":
            return None
        if self.bc_name == "reference":
            g = reference_field(self.reference, w)
            bc = {face: Dirichlet(g) for face in outer_faces(grid)}
        else:
            bc = {face: Dirichlet(0.0) for face in outer_faces(grid)}
        return ProblemSpec(weight=w, rhs=rhs, bc=bc, symmetry=self.symmetry)


def build_scenario(cfg: ConfigMap) -> Scenario:
    """Assemble a Scenario from a parsed config, consuming every key.

    Unknown sections and leftover keys are config errors: a typo should
    fail loudly, not silently run with defaults.
    """
    name = str(cfg.get("scenario.name", required=True))
    seed = cfg.get("scenario.seed", default=0, kind=int)
    meas = tuple(str(m) for m in cfg.get_list("scenario.measurements",
                                              required=True))

    cells = tuple(int(c) for c in cfg.get_list("grid.cells",
                                               default=[64, 64]))
    n = cfg.get("grid.n", default=len(cells) - 1, kind=int)
    half = cfg.get("grid.half", default=True, kind=bool)
    symmetry = str(cfg.get("grid.symmetry", default="even"))

    a = cfg.get("problem.a", default=0.0, kind=float)
    eps = cfg.get("problem.eps", default=0.0, kind=float)
    rhs_name = str(cfg.get("problem.rhs", default="none"))
    bc_name = str(cfg.get("problem.bc", default="zero"))
    reference = cfg.get("problem.reference", default=None)
    reference = None if reference is None else str(reference)

    sweep = cfg.get_list("sweep.eps", default=None)
    sweep = None if sweep is None else tuple(float(e) for e in sweep)
    levels = cfg.get("refine.levels", default=None, kind=int)
    cap = cfg.get("refine.cell_cap", default=1 << 22, kind=int)

    tolerances = {k: float(v) for k, v in cfg.section("tolerance").items()}
    options = {m: cfg.section(m) for m in meas}

    known = {"scenario", "grid", "problem", "sweep", "refine",
             "tolerance"} | set(meas)
    for key in cfg.values:
        sect = key.split(".", 1)[0]
        if sect not in known:
            raise ConfigError(
                f"unknown section {sect!r} at {cfg.where(key)}")
    leftover = cfg.unused_keys()
    if leftover:
        spots = ", ".join(f"{k} ({cfg.where(k)})" for k in leftover)
        raise ConfigError(f"unused config keys: {spots}")

    return Scenario(name=name, seed=seed, n=n, cells=cells, half=half,
                    symmetry=symmetry, a=a, eps=eps, rhs_name=rhs_name,
                    bc_name=bc_name, reference=reference,
                    measurements=meas, options=options,
                    tolerances=tolerances, sweep_eps=sweep,
                    refine_levels=levels, cell_cap=cap)


def validate(scn: Scenario) -> None:
    """Reject scenarios the measurements cannot honor.

    Raises ConfigError with an explanation; returns None when the
    scenario is runnable as declared.
    """
    if not scn.measurements:
        raise ConfigError("scenario declares no measurements")
    seen = set()
    for m in scn.measurements:
        if m in seen:
            raise ConfigError(f"measurement {m!r} declared twice")
        seen.add(m)
        if m not in MEASUREMENTS:
            raise ConfigError(
                f"unknown measurement {m!r}; "
                f"choose from {tuple(MEASUREMENTS)}")
    try:
        grid = scn.make_grid()
    except ValueError as exc:
        raise ConfigError(f"bad grid: {exc}") from None

    if scn.rhs_name not in RHS_NAMES:
        raise ConfigError(
            f"unknown rhs {scn.rhs_name!r}; choose from {RHS_NAMES}")
    if scn.bc_name not in ("zero", "reference"):
        raise ConfigError(
            f"problem.bc must be zero or reference, got {scn.bc_name!r}")
    if scn.bc_name == "reference" or "solve_error_vs" in scn.measurements:
        ref = scn.options.get("solve_error_vs", {}).get("reference",
                                                        scn.reference)
        if ref is None:
            raise ConfigError(
                "a reference field is required (problem.reference)")
        probe = [np.full(2, 0.5) for _ in range(grid.ndim)]
        try:
            reference_field(str(ref), scn.weight)(*probe)
        except (ValueError, TypeError) as exc:
            raise ConfigError(
                f"reference field {ref!r} is unusable here: {exc}"
            ) from None
    if scn.rhs_name == "neumann_flux_one":
        if not -1.0 < scn.a < 1.0:
            raise ConfigError(
                f"weighted flux data needs a in (-1, 1), got a = {scn.a}")
        if scn.symmetry != "even":
            raise ConfigError("weighted flux data needs an even grid")

    solving = {"solve_error_vs", "holder", "c1alpha", "moser", "frequency"}
    wants_solve = solving & set(scn.measurements)
    if "duality" in scn.measurements:
        src = str(scn.options.get("duality", {}).get("source", "solve"))
        if src == "solve":
            wants_solve.add("duality")
    if wants_solve and not scn.has_problem:
        raise ConfigError(
            f"measurements {sorted(wants_solve)} need a problem to "
            "solve; declare problem.rhs or problem.bc = reference")

    for m in scn.measurements:
        checker = _VALIDATORS.get(m)
        if checker is not None:
            checker(scn, grid)

    if scn.sweep_eps is not None:
        es = scn.sweep_eps
        if len(es) < 2:
            raise ConfigError("sweep.eps needs at least two values")
        if any(e < 0 for e in es):
            raise ConfigError("sweep.eps values must be >= 0")
        if any(e2 >= e1 for e1, e2 in zip(es, es[1:])):
            raise ConfigError("sweep.eps must be strictly decreasing")
        if es[-1] != 0.0:
            raise ConfigError("sweep.eps must end at the sharp weight 0.0")
    if scn.refine_levels is not None:
        if scn.refine_levels < 3:
            raise ConfigError("refine.levels must be at least 3")
        top = max(scn.cells) * 2 ** (scn.refine_levels - 1)
        total = top ** grid.ndim
        if total > scn.cell_cap:
            raise ConfigError(
                f"finest level would hold about {total} cells, over the "
                f"cap {scn.cell_cap}; lower refine.levels or raise "
                "refine.cell_cap")
    if scn.sweep_eps is not None and scn.refine_levels is not None:
        raise ConfigError("declare sweep.eps or refine.levels, not both")

    for key in scn.tolerances:
        if key not in scn.measurements:
            raise ConfigError(
                f"tolerance.{key} does not match any declared measurement")


def _check_rayleigh(scn: Scenario, grid: Grid) -> None:
    opts = scn.options.get("rayleigh", {})
    kind = str(opts.get("kind", "trace"))
    if kind not in ("trace", "hardy", "stability"):
        raise ConfigError(f"rayleigh.kind must be trace, hardy or "
                          f"stability, got {kind!r}")
    mode = str(opts.get("mode", "minimize"))
    if mode not in ("minimize", "trials"):
        raise ConfigError(f"rayleigh.mode must be minimize or trials, "
                          f"got {mode!r}")
    if kind != "trace" and mode == "minimize":
        raise ConfigError(f"rayleigh.kind = {kind} only supports trials")
    a_values = opts.get("a_values", [scn.a])
    if not isinstance(a_values, list):
        a_values = [a_values]
    for av in a_values:
        if float(av) >= 1.0:
            raise ConfigError(
                f"boundary quotients need a < 1, got a = {av}")
    if not grid.half:
        raise ConfigError("boundary quotients need a half grid")


def _check_frequency(scn: Scenario, grid: Grid) -> None:
    rounds = scn.sweep_eps if scn.sweep_eps is not None else (scn.eps,)
    for e in rounds:
        if e not in (0.0, 1.0):
            raise ConfigError(
                f"frequency profiles are defined at eps = 0 or the "
                f"normalized eps = 1, got eps = {e}")
    opts = scn.options.get("frequency", {})
    check = str(opts.get("check", "relation"))
    if check not in ("relation", "growth"):
        raise ConfigError(
            f"frequency.check must be relation or growth, got {check!r}")
    if check == "relation":
        if any(e != 0.0 for e in rounds):
            raise ConfigError(
                "the derivative relation holds on the sharp weight only; "
                "set eps = 0")
        if scn.symmetry != "odd":
            raise ConfigError(
                "the derivative relation needs the trace to vanish: "
                "use an odd grid")


def _check_moser(scn: Scenario, grid: Grid) -> None:
    if scn.rhs_name in ("none", "neumann_flux_one"):
        raise ConfigError("moser needs a volumetric right-hand side")
    opts = scn.options.get("moser", {})
    p = float(opts.get("p", 4.0))
    floor = (grid.n + 1 + max(scn.a, 0.0)) / 2.0
    if p <= floor:
        raise ConfigError(
            f"moser.p must exceed (n + 1 + a+)/2 = {floor}, got {p}")


def _check_identity(scn: Scenario, grid: Grid) -> None:
    if scn.symmetry != "even" or not grid.half:
        raise ConfigError(
            "the second-derivative identity check runs on even half "
            "grids")


def _check_cutoff(scn: Scenario, grid: Grid) -> None:
    deltas = scn.options.get("cutoff_capacity", {}).get(
        "deltas", list(_DEFAULT_DELTAS))
    if not isinstance(deltas, list) or len(deltas) < 2:
        raise ConfigError("cutoff_capacity.deltas needs at least two values")
    ds = [float(d) for d in deltas]
    if any(not 0.0 < d < 1.0 for d in ds):
        raise ConfigError("cutoff deltas must lie in (0, 1)")
    if any(d2 >= d1 for d1, d2 in zip(ds, ds[1:])):
        raise ConfigError("cutoff deltas must decrease strictly")


def _check_ode(scn: Scenario, grid: Grid) -> None:
    opts = scn.options.get("ode_example", {})
    eps = float(opts.get("eps", 1e-4))
    if eps <= 0:
        raise ConfigError("ode_example needs eps > 0")
    a_values = opts.get("a_values", [scn.a])
    if not isinstance(a_values, list):
        a_values = [a_values]
    for av in a_values:
        if float(av) <= -1.0:
            raise ConfigError(
                f"ode_example needs a > -1, got a = {av}")


_VALIDATORS = {
    "rayleigh": _check_rayleigh,
    "frequency": _check_frequency,
    "moser": _check_moser,
    "identity_secondyy": _check_identity,
    "cutoff_capacity": _check_cutoff,
    "ode_example": _check_ode,
}


# ------------------------------------------------------------ run context


@dataclass
class MeasurementResult:
    table: Table
    score: float
    direction: str = "<="
    note: str = ""


@dataclass
class RunContext:
    """One round of measurements: fixed weight, grid, and random stream.

    The discrete solution is computed once and shared; the stream hands
    out named substreams so the draws one measurement consumes can never
    shift another's.
    """

    scenario: Scenario
    grid: Grid
    weight: WeightParams
    rng: SplitMix64
    _cache: dict = field(default_factory=dict)

    def options(self, name: str) -> dict:
        return self.scenario.options.get(name, {})

    def solution(self) -> np.ndarray:
        if "u" not in self._cache:
            spec = self.scenario.make_problem(self.weight, self.grid)
            if spec is None:
                raise ConfigError(
                    f"scenario {self.scenario.name!r} declares no problem "
                    "to solve")
            build = (assemble_neumann if isinstance(spec.rhs, NeumannRhs)
                     else assemble)
            self._cache["u"] = solve(build(spec, self.grid),
                                     SolveOptions(rel_tol=1e-11))
        return self._cache["u"]

    def rhs_cells(self) -> np.ndarray:
        rhs = make_rhs(self.scenario.rhs_name, self.weight)
        if not isinstance(rhs, VolumetricRhs):
            raise ConfigError("no volumetric right-hand side declared")
        f = rhs.f
        if callable(f):
            return self.grid.sample_centers(f)
        return np.full(self.grid.shape, float(f))


def trial_field(grid: Grid, rng: SplitMix64) -> np.ndarray:
    """Random admissible trial for the boundary quotients.

    Bounded, vanishing linearly on Sigma, mixing a handful of smooth
    modes with standard normal coefficients.
    """
    cs = grid.centers()
    x, y = cs[0], cs[-1]
    c = [rng.normal() for _ in range(6)]
    return y * (c[0] + c[1] * x + c[2] * y + c[3] * np.cos(2.0 * x)
                + c[4] * np.sin(x + y) + c[5] * x * y)


# ------------------------------------------------------------ measurements


def _m_solve_error_vs(ctx: RunContext) -> MeasurementResult:
    """Max-norm error of the discrete solution against a named field."""
    scn = ctx.scenario
    name = str(ctx.options("solve_error_vs").get("reference",
                                                 scn.reference))
    u = ctx.solution()
    exact = ctx.grid.sample_centers(reference_field(name, ctx.weight))
    err = float(np.abs(u - exact).max())
    t = Table(columns=["reference", "max_error"])
    t.append({"reference": name, "max_error": err})
    return MeasurementResult(t, err, "<=", f"vs {name}")


def _scales_opt(opts: dict):
    scales = opts.get("scales")
    if scales is None:
        return None
    return [float(s) for s in scales]


def _m_holder(ctx: RunContext) -> MeasurementResult:
    opts = ctx.options("holder")
    alpha = opts.get("alpha")
    alpha = None if alpha is None else float(alpha)
    rep = holder_estimate(ctx.solution(), ctx.grid,
                          scales=_scales_opt(opts),
                          seed=ctx.rng.substream("holder").next_u64()
                          & 0xFFFFFFFF,
                          alpha=alpha)
    t = Table(columns=["alpha_fit", "alpha_used", "seminorm",
                       "window_lo", "window_hi", "fit_residual"])
    t.append({"alpha_fit": rep.alpha_fit,
              "alpha_used": rep.alpha_fit if alpha is None else alpha,
              "seminorm": rep.seminorm,
              "window_lo": rep.window[0], "window_hi": rep.window[1],
              "fit_residual": rep.fit_residual})
    return MeasurementResult(t, rep.seminorm, "<=",
                             f"alpha_fit={rep.alpha_fit:.3f}")


def _m_c1alpha(ctx: RunContext) -> MeasurementResult:
    opts = ctx.options("c1alpha")
    alpha = opts.get("alpha")
    alpha = None if alpha is None else float(alpha)
    rep = c1alpha_estimate(ctx.solution(), ctx.grid, ctx.weight,
                           scales=_scales_opt(opts),
                           seed=ctx.rng.substream("c1alpha").next_u64()
                           & 0xFFFFFFFF,
                           alpha=alpha)
    grad_exp = rep.alpha_fit - 1.0
    t = Table(columns=["alpha_fit", "gradient_exponent", "seminorm",
                       "window_lo", "window_hi", "fit_residual"])
    t.append({"alpha_fit": rep.alpha_fit, "gradient_exponent": grad_exp,
              "seminorm": rep.seminorm,
              "window_lo": rep.window[0], "window_hi": rep.window[1],
              "fit_residual": rep.fit_residual})
    expect = opts.get("expect_exponent")
    if expect is not None:
        score = abs(grad_exp - float(expect))
        note = f"exponent {grad_exp:.3f} vs {float(expect)}"
    else:
        score = rep.seminorm
        note = f"alpha_fit={rep.alpha_fit:.3f}"
    return MeasurementResult(t, score, "<=", note)


def _m_moser(ctx: RunContext) -> MeasurementResult:
    opts = ctx.options("moser")
    p = float(opts.get("p", 4.0))
    beta = float(opts.get("beta", 2.0))
    r = float(opts.get("r", 0.5))
    ratio = moser_ratio(ctx.solution(), ctx.rhs_cells(), ctx.grid,
                        ctx.weight, p, beta, r)
    t = Table(columns=["p", "beta", "r", "ratio"])
    t.append({"p": p, "beta": beta, "r": r, "ratio": ratio})
    return MeasurementResult(t, ratio, "<=")


def _m_frequency(ctx: RunContext) -> MeasurementResult:
    opts = ctx.options("frequency")
    count = int(opts.get("count", 16))
    radii = radius_ladder(ctx.grid, count)
    prof = compute_HE(ctx.solution(), ctx.grid, ctx.weight, radii=radii)
    dH = _ladder_derivative(prof.radii, prof.H)
    t = Table(columns=["r", "H", "E", "dH_dr", "two_E_over_r"])
    for k in range(len(prof)):
        t.append({"r": prof.radii[k], "H": prof.H[k], "E": prof.E[k],
                  "dH_dr": dH[k],
                  "two_E_over_r": 2.0 * prof.E[k] / prof.radii[k]})
    check = str(opts.get("check", "relation"))
    if check == "relation":
        gap = check_derivative_relation(prof)
        return MeasurementResult(t, gap, "<=", "derivative relation")
    slope = growth_exponent(prof)
    return MeasurementResult(t, slope, ">=", "H growth exponent")


def _m_rayleigh(ctx: RunContext) -> MeasurementResult:
    """Boundary quotients over the weight family.

    trace/minimize reports the minimized quotient per a and scores the
    worst relative gap to the sharp constant 1 - a.  trials modes draw
    seeded random admissible fields; trace scores the worst shortfall
    below 1 - a, hardy and stability report the smallest quotient seen
    (read with a >= tolerance).
    """
    opts = ctx.options("rayleigh")
    kind = str(opts.get("kind", "trace"))
    mode = str(opts.get("mode", "minimize"))
    a_values = opts.get("a_values", [ctx.scenario.a])
    if not isinstance(a_values, list):
        a_values = [a_values]
    trials = int(opts.get("trials", 200))
    stream = ctx.rng.substream(f"rayleigh:{kind}")
    t = Table(columns=["a", "eps", "quotient_min"])
    score = -math.inf
    qmins = []
    for av in a_values:
        av = float(av)
        wa = WeightParams(a=av, eps=ctx.weight.eps)
        if mode == "minimize":
            q = rayleigh_trace(wa, ctx.grid, mode="minimize")
            gap = abs(q / (1.0 - av) - 1.0)
            score = max(score, gap)
        else:
            sub = stream.substream(f"a={av!r}")
            qs = []
            for _ in range(trials):
                v = trial_field(ctx.grid, sub)
                if kind == "trace":
                    qs.append(rayleigh_trace(wa, ctx.grid, mode="test", u=v))
                elif kind == "hardy":
                    qs.append(rayleigh_hardy(wa, ctx.grid, v))
                else:
                    qs.append(stability_quotient(wa, ctx.grid, v))
            q = float(min(qs))
            if kind == "trace":
                score = max(score, (1.0 - av) - q)
        qmins.append(q)
        t.append({"a": av, "eps": ctx.weight.eps, "quotient_min": q})
    if kind != "trace" and mode == "trials":
        return MeasurementResult(t, float(min(qmins)), ">=",
                                 f"{kind} quotient floor")
    note = ("relative gap to 1 - a" if mode == "minimize"
            else "worst shortfall below 1 - a")
    return MeasurementResult(t, float(score), "<=", note)


def _m_duality(ctx: RunContext) -> MeasurementResult:
    opts = ctx.options("duality")
    source = str(opts.get("source", "solve"))
    if source == "solve":
        u = ctx.solution()
    else:
        u = ctx.grid.sample_centers(reference_field(source, ctx.weight))
    res = duality_transform(u, ctx.grid, ctx.weight)
    t = Table(columns=["source", "residual"])
    t.append({"source": source, "residual": res.residual})
    return MeasurementResult(t, res.residual, "<=")


def _m_identity(ctx: RunContext) -> MeasurementResult:
    """Interior defect of F_a u - a G u = d2u/dy2 on smooth even fields.

    Runs on the sharp weight regardless of the scenario eps: the
    identity is an algebraic fact about |y|^a.
    """
    opts = ctx.options("identity_secondyy")
    fields = opts.get("fields", ["ysq", "y4", "cos_even"])
    if not isinstance(fields, list):
        fields = [fields]
    w0 = WeightParams(a=ctx.scenario.a, eps=0.0)
    h2 = float(max(ctx.grid.h)) ** 2
    t = Table(columns=["field", "max_defect", "defect_over_h2"])
    score = 0.0
    for fname in fields:
        fname = str(fname)
        u = ctx.grid.sample_centers(reference_field(fname, w0))
        lhs = op_Fa(u, ctx.grid, w0) - w0.a * op_G(u, ctx.grid)
        defect = float(np.abs(lhs - second_dy(u, ctx.grid)).max())
        t.append({"field": fname, "max_defect": defect,
                  "defect_over_h2": defect / h2})
        score = max(score, defect / h2)
    return MeasurementResult(t, score, "<=", "defect / h^2")


_DEFAULT_DELTAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def _m_cutoff(ctx: RunContext) -> MeasurementResult:
    """Capacity of the degenerate line through the log-cutoff energies.

    At a = 1 the closed form is 1/log(1/delta); the score is the worst
    relative gap to that.  For a < 1 the energies must stay >= 1 and
    grow as delta shrinks, for a > 1 they must shrink; the score is the
    worst violation.
    """
    opts = ctx.options("cutoff_capacity")
    deltas = [float(d) for d in opts.get("deltas", list(_DEFAULT_DELTAS))]
    a = ctx.scenario.a
    energies = [cutoff_energy(a, d) for d in deltas]
    t = Table(columns=["delta", "energy"])
    for d, e in zip(deltas, energies):
        t.append({"delta": d, "energy": e})
    es = np.asarray(energies)
    if a == 1.0:
        gaps = [abs(e * math.log(1.0 / d) - 1.0)
                for d, e in zip(deltas, energies)]
        return MeasurementResult(t, float(max(gaps)), "<=",
                                 "gap to 1/log(1/delta)")
    if a < 1.0:
        mono = float(np.max(es[:-1] - es[1:], initial=0.0))
        short = max(0.0, 1.0 - float(es.min()))
        return MeasurementResult(t, max(mono, short), "<=",
                                 "must stay >= 1 and grow")
    mono = float(np.max(es[1:] - es[:-1], initial=0.0))
    return MeasurementResult(t, mono, "<=", "must shrink toward 0")


def _m_ode(ctx: RunContext) -> MeasurementResult:
    """Curvature normalization of the one-dimensional special solution.

    u''(0) = -1 exactly at every eps > 0, and u''(1/2) approaches
    a/(a+1) - 1 as eps -> 0; the score is the worst of the exact check
    and the relative gap at 1/2.
    """
    opts = ctx.options("ode_example")
    eps = float(opts.get("eps", 1e-4))
    a_values = opts.get("a_values", [ctx.scenario.a])
    if not isinstance(a_values, list):
        a_values = [a_values]
    t = Table(columns=["a", "eps", "u2_zero", "u2_half", "limit"])
    score = 0.0
    for av in a_values:
        av = float(av)
        p = WeightParams(a=av, eps=eps, normalized=False)
        _, _, d2_0 = ode_example(p, 0.0)
        _, _, d2_h = ode_example(p, 0.5)
        limit = av / (av + 1.0) - 1.0
        t.append({"a": av, "eps": eps, "u2_zero": d2_0, "u2_half": d2_h,
                  "limit": limit})
        score = max(score, abs(d2_0 + 1.0),
                    abs(d2_h - limit) / abs(limit))
    return MeasurementResult(t, score, "<=", "curvature checks")


MEASUREMENTS = {
    "solve_error_vs": _m_solve_error_vs,
    "holder": _m_holder,
    "c1alpha": _m_c1alpha,
    "moser": _m_moser,
    "frequency": _m_frequency,
    "rayleigh": _m_rayleigh,
    "duality": _m_duality,
    "identity_secondyy": _m_identity,
    "cutoff_capacity": _m_cutoff,
    "ode_example": _m_ode,
}


# -------------------------------------------------------- bundled configs


def bundled_names() -> tuple:
    """Names of the configs shipped inside the package."""
    root = resources.files(__package__) / "configs"
    return tuple(sorted(
        p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg")))


def bundled_config_text(name: str) -> str:
    path = resources.files(__package__) / "configs" / f"{name}.cfg"
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(
            f"no bundled config {name!r}; available: {bundled_names()}"
        ) from None
