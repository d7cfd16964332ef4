"""Weighted norms, oscillation exponent fits, Moser ratios, critical
exponents, and the trace / Hardy / stability Rayleigh quotients."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degenlab.analysis import (
    _oscillation,
    c1alpha_estimate,
    exponents,
    holder_estimate,
    moser_ratio,
    rayleigh_hardy,
    rayleigh_trace,
    stability_quotient,
    weighted_lp,
)
from degenlab.assembly import Dirichlet, ProblemSpec, VolumetricRhs, assemble, outer_faces
from degenlab.errors import WrongClassError
from degenlab.mesh import build_grid
from degenlab.solver import SolveOptions, solve
from degenlab.weights import WeightParams, catalog


def half_grid(nx=64, ny=128):
    return build_grid(1, (nx, ny), half=True, symmetry="even")


def sin_power(p):
    return float(mpmath.quad(lambda t: mpmath.sin(t) ** p, [0, mpmath.pi]))


# ----------------------------------------------------------- weighted norms


def test_weighted_lp_constant_unweighted_unit_square():
    grid = half_grid(32, 32)
    xx, _ = grid.centers()
    region = xx > 0.0  # [0,1] x [0,1], volume one
    val = weighted_lp(np.ones(grid.shape), grid, 2.0, WeightParams(0.0, 0.0),
                      region)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_weighted_lp_linear_weight_half_square():
    grid = half_grid(32, 32)
    xx, _ = grid.centers()
    region = xx > 0.0
    # midpoint sums are exact on the linear weight y
    val = weighted_lp(np.ones(grid.shape), grid, 1.0, WeightParams(1.0, 0.0),
                      region)
    assert val == pytest.approx(0.5, abs=1e-12)


def test_weighted_lp_y_in_l2():
    grid = half_grid(32, 32)
    xx, yy = grid.centers()
    region = xx > 0.0
    val = weighted_lp(yy, grid, 2.0, WeightParams(0.0, 0.0), region)
    assert val == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-3)


def test_weighted_lp_singular_weight_against_quadrature():
    grid = half_grid(32, 128)
    val = weighted_lp(np.ones(grid.shape), grid, 2.0,
                      WeightParams(-0.5, 0.0))
    exact = float(mpmath.sqrt(2 * mpmath.quad(
        lambda y: y ** -0.5, [0, 1])))
    # cell-center quadrature of the integrable singularity: O(sqrt(h)) slow
    assert val == pytest.approx(exact, rel=0.05)


def test_weighted_lp_rejects_p_below_one():
    grid = half_grid(8, 8)
    with pytest.raises(ValueError):
        weighted_lp(np.ones(grid.shape), grid, 0.5, WeightParams(0.0, 0.0))


# ------------------------------------------------------------ oscillation


def brute_pair_oscillation(u, grid, s, band):
    """Exhaustive center-pair maximum at distance within band of s, both
    endpoints graded away from Sigma, O(N^2) so small grids only."""
    pts = np.stack([c.ravel() for c in grid.centers()], axis=-1)
    vals = u.ravel()
    keep = np.abs(pts[:, -1]) >= 0.5 * s - 1e-12
    pts, vals = pts[keep], vals[keep]
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
    hit = np.abs(np.sqrt(d2) - s) <= band
    if not hit.any():
        return 0.0
    return float(np.abs(vals[:, None] - vals[None, :])[hit].max())


def test_oscillation_tracks_exhaustive_pair_oracle():
    grid = build_grid(1, (16, 32), half=True, symmetry="even")
    xx, yy = grid.centers()
    mask = np.ones(grid.shape, bool)
    for u in (yy ** 0.5, 0.5 * xx + yy ** 2, np.cos(2 * xx) * (1 + yy)):
        for s in (0.5, 0.25, 0.125):
            mine = _oscillation(u, grid, mask, s, np.random.default_rng(0))
            # the oracle roams distances within s/8, we pin exact distances
            # and interpolate off-center; agreement up to that geometry
            oracle = brute_pair_oscillation(u, grid, s, s / 8.0)
            assert mine >= 0.85 * oracle
            assert mine <= 1.2 * oracle + 1e-12


# --------------------------------------------------------------- holder fit


def test_holder_alpha_matches_power_exponent():
    grid = half_grid()
    _, yy = grid.centers()
    for s in (0.25, 0.5, 0.75):
        rep = holder_estimate(yy ** s, grid)
        assert rep.alpha_fit == pytest.approx(s, abs=0.03)
        assert rep.seminorm > 0.0


def test_holder_alpha_on_full_grid():
    grid = build_grid(1, (64, 128), half=False, symmetry="none")
    _, yy = grid.centers()
    rep = holder_estimate(np.abs(yy) ** 0.5, grid)
    assert rep.alpha_fit == pytest.approx(0.5, abs=0.03)


def test_holder_jump_is_scale_independent():
    grid = build_grid(1, (64, 128), half=False, symmetry="none")
    _, yy = grid.centers()
    rep = holder_estimate(catalog("jump", WeightParams(0.5, 0.0), yy), grid)
    assert rep.alpha_fit <= 0.05


def test_holder_affine_seminorm_is_gradient_magnitude():
    grid = half_grid()
    xx, yy = grid.centers()
    for gx, gy in ((0.3, 0.1), (0.0, 0.7), (1.2, -0.4)):
        rep = holder_estimate(gx * xx + gy * yy + 2.0, grid)
        assert rep.alpha_fit == pytest.approx(1.0, abs=1e-4)
        assert rep.seminorm == pytest.approx(math.hypot(gx, gy), rel=0.02)


def test_holder_constant_field_degenerate_path():
    grid = half_grid()
    rep = holder_estimate(np.full(grid.shape, 7.25), grid)
    assert rep.alpha_fit == 1.0
    assert rep.seminorm == 0.0
    assert rep.fit_residual == 0.0


def test_holder_rejects_starved_scale_window():
    grid = build_grid(1, (8, 8), half=True, symmetry="even")
    with pytest.raises(ValueError):
        holder_estimate(np.ones(grid.shape), grid)
    grid = half_grid(32, 32)
    with pytest.raises(ValueError):
        holder_estimate(np.ones(grid.shape), grid, scales=[0.5, 0.25, 0.1])
    with pytest.raises(ValueError):
        holder_estimate(np.ones(grid.shape), grid,
                        scales=[0.5, 0.25, 0.125, 0.01])


CHEAP_SCALES = (0.5, 0.25, 0.125, 0.0625)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-10.0, 10.0))
def test_holder_additive_constant_invariance(c):
    grid = half_grid(32, 32)
    xx, yy = grid.centers()
    u = np.cos(2 * xx) * (1 + yy ** 2) + 0.5 * yy
    base = holder_estimate(u, grid, scales=CHEAP_SCALES)
    moved = holder_estimate(u + c, grid, scales=CHEAP_SCALES)
    assert moved.alpha_fit == pytest.approx(base.alpha_fit, abs=1e-9)
    assert moved.seminorm == pytest.approx(base.seminorm, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(1e-3, 1e3))
def test_holder_scaling_covariance(lam):
    grid = half_grid(32, 32)
    xx, yy = grid.centers()
    u = np.sin(xx) + yy ** 0.5
    base = holder_estimate(u, grid, scales=CHEAP_SCALES)
    scaled = holder_estimate(lam * u, grid, scales=CHEAP_SCALES)
    assert scaled.alpha_fit == pytest.approx(base.alpha_fit, abs=1e-9)
    assert scaled.seminorm == pytest.approx(lam * base.seminorm, rel=1e-9)


def test_holder_translation_invariance():
    grid = half_grid()
    xx, yy = grid.centers()
    k = 5
    shift = k * grid.h[0]
    scales = (0.25, 0.125, 0.0625, 0.03125)

    def f(x, y):
        return np.cos(3 * x) * (1 + y) + y ** 0.5

    def box(center):
        return np.abs(xx - center) <= 0.4

    base = holder_estimate(f(xx, yy), grid, region=box(-0.3), scales=scales)
    moved = holder_estimate(f(xx - shift, yy), grid,
                            region=box(-0.3 + shift), scales=scales)
    assert moved.alpha_fit == base.alpha_fit
    assert moved.seminorm == base.seminorm


# ------------------------------------------------------------- c1alpha fit


def test_c1alpha_quadratic_caps_at_two():
    grid = half_grid()
    _, yy = grid.centers()
    rep = c1alpha_estimate(yy ** 2, grid, WeightParams(0.0, 0.0))
    assert rep.alpha_fit == pytest.approx(2.0, abs=1e-9)


def test_c1alpha_special_solution_gradient_exponent():
    grid = half_grid()
    w = WeightParams(-0.5, 0.0)
    _, yy = grid.centers()
    rep = c1alpha_estimate(catalog("neumann_special", w, yy), grid, w)
    # du/dy = y^{1/2}: the paper's sharp bound alpha <= -a
    assert rep.alpha_fit - 1.0 == pytest.approx(0.5, abs=0.05)


def test_c1alpha_odd_singular_reported_not_c1():
    grid = build_grid(1, (64, 128), half=True, symmetry="odd")
    w = WeightParams(0.5, 0.0)
    _, yy = grid.centers()
    rep = c1alpha_estimate(catalog("odd_singular", w, yy), grid, w)
    # gradient ~ |y|^{-a} is unbounded: total exponent stays below one
    assert rep.alpha_fit < 0.8
    assert rep.alpha_fit >= 0.0


# --------------------------------------------------------------- moser ratio


def test_moser_pure_normalization():
    grid = half_grid(32, 32)
    w = WeightParams(0.0, 0.0)
    u = np.ones(grid.shape)
    ratio = moser_ratio(u, np.zeros(grid.shape), grid, w, p=4.0, beta=2.0,
                        r=0.5)
    ball = grid.mask_ball(1.0)
    norm = math.sqrt(ball.sum() * np.prod(grid.h))
    assert ratio == pytest.approx(1.0 / norm, rel=1e-12)


def test_moser_rejects_p_at_threshold():
    grid = half_grid(8, 8)
    w = WeightParams(0.5, 0.0)
    u = np.ones(grid.shape)
    threshold = (grid.n + 1 + 0.5) / 2
    with pytest.raises(ValueError):
        moser_ratio(u, u, grid, w, p=threshold, beta=2.0, r=0.5)
    moser_ratio(u, u, grid, w, p=threshold + 0.01, beta=2.0, r=0.5)


def test_moser_ratio_stable_across_eps():
    grid = half_grid(32, 64)

    def f(x, y):
        return np.cos(0.5 * np.pi * x) * np.exp(-y)

    ratios = []
    for eps in (1.0, 0.1, 0.01, 0.0):
        w = WeightParams(0.5, eps)
        spec = ProblemSpec(
            weight=w,
            rhs=VolumetricRhs(f),
            bc={name: Dirichlet(0.0) for name in outer_faces(grid)},
            symmetry="even",
        )
        u = solve(assemble(spec, grid), SolveOptions(rel_tol=1e-10))
        fv = f(*grid.centers())
        ratios.append(moser_ratio(u, fv, grid, w, p=4.0, beta=2.0, r=0.5))
    assert max(ratios) <= 2.0 * min(ratios)


# ---------------------------------------------------------------- exponents


def test_exponents_examples():
    n_star, two_star, p_star = exponents(0.0, 2, 0.0)
    assert (n_star, two_star, p_star) == (3.0, 6.0, 4.0)
    n_star, two_star, _ = exponents(1.0, 2, 0.5)
    assert (n_star, two_star) == (4.0, 4.0)
    n_star, two_star, _ = exponents(-0.5, 2, 0.5)
    assert (n_star, two_star) == (3.0, 6.0)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-1.0, 3.0), n=st.integers(1, 3),
       t=st.floats(0.01, 1.0))
def test_exponents_match_printed_formulas(a, n, t):
    a_plus = max(a, 0.0)
    if abs(n + a_plus - 1) < 1e-3:
        return
    n_star, two_star, p_star = exponents(a, n, t)
    assert n_star == pytest.approx(n + 1 + a_plus, rel=1e-14)
    assert two_star == pytest.approx(
        2 * (n + 1 + a_plus) / (n + a_plus - 1), rel=1e-14)
    assert p_star == pytest.approx(2 * n / (n - 1 + t), rel=1e-14)


def test_exponents_error_cases():
    with pytest.raises(ValueError):
        exponents(0.5, 0, 0.5)
    with pytest.raises(ValueError):
        exponents(-0.5, 1, 0.5)  # n + a+ = 1, 2* undefined
    with pytest.raises(ValueError):
        exponents(0.5, 1, 0.0)  # p* pole at t = 1 - n


# ---------------------------------------------------------- trace quotient


def trace_oracle(a):
    """r-free closed form of the quotient at u = y: the half-disk energy
    over the boundary mass, both with weight |y|^a."""
    return sin_power(a) / ((2 + a) * sin_power(2 + a))


def test_trace_linear_trial_unit_constant():
    grid = build_grid(1, (64, 64), half=True, symmetry="even")
    _, yy = grid.centers()
    q = rayleigh_trace(WeightParams(0.0, 0.0), grid, mode="test", u=yy)
    assert q == pytest.approx(1.0, abs=0.02)


def test_trace_linear_trial_beta_oracle():
    grid = build_grid(1, (64, 64), half=True, symmetry="even")
    _, yy = grid.centers()
    for a, tol in ((-0.5, 0.05), (0.5, 0.02)):
        q = rayleigh_trace(WeightParams(a, 0.0), grid, mode="test", u=yy)
        assert q == pytest.approx(trace_oracle(a), rel=tol)


def random_admissible_trials(grid, count, seed):
    xx, yy = grid.centers()
    rng = np.random.default_rng(seed)
    for _ in range(count):
        c = rng.normal(size=6)
        yield yy * (c[0] + c[1] * xx + c[2] * yy
                    + c[3] * np.cos(2 * xx) + c[4] * np.sin(xx + yy)
                    + c[5] * xx * yy)


def test_trace_inequality_on_random_trials():
    grid = build_grid(1, (64, 64), half=True, symmetry="even")
    for a in (-0.5, 0.0, 0.5):
        for eps in (0.0, 0.1, 1.0):
            w = WeightParams(a, eps)
            worst = min(
                rayleigh_trace(w, grid, mode="test", u=u)
                for u in random_admissible_trials(grid, 200, seed=hash((a, eps)) % 2**32)
            )
            assert worst >= (1.0 - a) - 0.05


def test_trace_minimize_finds_sharp_constant():
    grid = build_grid(1, (64, 64), half=True, symmetry="even")
    for a in (-0.5, 0.0, 0.5):
        lam = rayleigh_trace(WeightParams(a, 0.0), grid, mode="minimize")
        assert lam == pytest.approx(1.0 - a, rel=0.10)


def test_trace_rejects_trial_not_vanishing_on_sigma():
    grid = build_grid(1, (32, 32), half=True, symmetry="even")
    _, yy = grid.centers()
    with pytest.raises(WrongClassError):
        rayleigh_trace(WeightParams(0.0, 0.0), grid, mode="test", u=1.0 + yy)


def test_trace_preconditions():
    grid = build_grid(1, (32, 32), half=True, symmetry="even")
    _, yy = grid.centers()
    with pytest.raises(ValueError):
        rayleigh_trace(WeightParams(1.0, 0.0), grid, mode="test", u=yy)
    full = build_grid(1, (32, 32), half=False, symmetry="none")
    with pytest.raises(ValueError):
        rayleigh_trace(WeightParams(0.0, 0.0), full, mode="minimize")
    with pytest.raises(ValueError):
        rayleigh_trace(WeightParams(0.0, 0.0), grid, mode="solve")
    with pytest.raises(ValueError):
        rayleigh_trace(WeightParams(0.0, 0.0), grid, mode="test")


# ---------------------------------------------------------- hardy quotient


def test_hardy_linear_trial_quarter_pi():
    grid = build_grid(1, (64, 64), half=True, symmetry="even")
    _, yy = grid.centers()
    q = rayleigh_hardy(WeightParams(0.0, 0.0), grid, yy)
    # E = pi r^2 / 2, boundary integral of y^2/y is 2 r^2: both r-free
    assert q == pytest.approx(math.pi / 4.0, rel=0.02)


def test_hardy_blows_up_when_trial_vanishes_near_boundary():
    grid = build_grid(1, (64, 64), half=True, symmetry="even")
    xx, yy = grid.centers()
    r2 = xx ** 2 + yy ** 2
    u = yy * np.clip(0.45 - r2, 0.0, None) ** 2
    q = rayleigh_hardy(WeightParams(0.0, 0.0), grid, u)
    assert np.isinf(q)


def test_hardy_bounded_below_across_eps():
    grid = build_grid(1, (64, 64), half=True, symmetry="even")
    _, yy = grid.centers()
    qs = [rayleigh_hardy(WeightParams(-0.5, eps), grid, yy)
          for eps in (0.0, 0.01, 0.1, 1.0)]
    assert min(qs) >= 0.5


# ------------------------------------------------------- stability quotient


def test_stability_quotient_above_mu():
    grid = build_grid(1, (64, 64), half=True, symmetry="even")
    xx, yy = grid.centers()
    trials = (yy, yy * (1.0 + 0.3 * np.cos(xx)), yy ** 2 + 0.2 * yy)
    for a in (-0.5, 0.5):
        mu = 1.0 - a - 0.1
        for eps in (0.01, 0.1):
            w = WeightParams(a, eps)
            for u in trials:
                assert stability_quotient(w, grid, u) >= mu
