"""Frequency profiles H and E, the derivative relation H' = 2E/r for the
class vanishing on Sigma, and growth-exponent floors for discrete
weighted harmonic fields."""

import csv

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degenlab.analysis import _gradient
from degenlab.assembly import Dirichlet, ProblemSpec, assemble, outer_faces
from degenlab.errors import WrongClassError
from degenlab.frequency import (
    FrequencyProfile,
    check_derivative_relation,
    compute_HE,
    growth_exponent,
    radius_ladder,
    write_csv,
)
from degenlab.mesh import build_grid
from degenlab.solver import SolveOptions, solve
from degenlab.weights import WeightParams, catalog, eval_weight


def odd_grid(nx=128, ny=128):
    return build_grid(1, (nx, ny), half=True, symmetry="odd")


def even_grid(nx=128, ny=128):
    return build_grid(1, (nx, ny), half=True, symmetry="even")


def discrete_harmonic(grid, w, gfun):
    """Solve the homogeneous problem with Dirichlet data on the outer box."""
    spec = ProblemSpec(weight=w,
                       bc={nm: Dirichlet(gfun) for nm in outer_faces(grid)},
                       symmetry=grid.symmetry)
    return solve(assemble(spec, grid), SolveOptions(rel_tol=1e-11))


# -------------------------------------------------------------- closed forms


def test_constant_field_half_circle_mass():
    grid = even_grid()
    p = compute_HE(np.full(grid.shape, 3.2), grid, WeightParams(0.0, 0.0))
    assert np.abs(p.H - 3.2**2 * np.pi).max() <= 1e-12 * np.pi
    assert p.E.max() == 0.0
    assert abs(growth_exponent(p)) <= 1e-12


def test_linear_field_h_and_e_quadratic():
    grid = odd_grid()
    u = grid.sample_centers(lambda x, y: y)
    p = compute_HE(u, grid, WeightParams(0.0, 0.0))
    ref = 0.5 * np.pi * p.radii**2
    assert np.abs(p.H / ref - 1.0).max() <= 1e-12
    assert np.abs(p.E / ref - 1.0).max() <= 1e-12
    assert growth_exponent(p) == pytest.approx(2.0, abs=1e-9)


def test_linear_field_derivative_relation_exact():
    grid = odd_grid()
    u = grid.sample_centers(lambda x, y: y)
    p = compute_HE(u, grid, WeightParams(0.0, 0.0))
    assert check_derivative_relation(p) <= 1e-10


def test_h_matches_quadrature_oracle_for_odd_singular():
    w = WeightParams(0.5, 0.0)
    grid = odd_grid()
    _, yy = grid.centers()
    p = compute_HE(catalog("odd_singular", w, yy), grid, w)
    # H(r) = r * integral of sin^{3/2} over the half circle
    oracle = float(mpmath.quad(lambda t: mpmath.sin(t) ** 1.5,
                               [0, mpmath.pi]))
    assert np.abs(p.H / (oracle * p.radii) - 1.0).max() <= 5e-3


def test_eps_one_weight_enters_h():
    grid = odd_grid(64, 64)
    u = grid.sample_centers(lambda x, y: y)
    w = WeightParams(-1.2, 1.0)
    p = compute_HE(u, grid, w, radii=np.array([0.5, 0.6, 0.7]))
    for rk, hk in zip(p.radii, p.H):
        ref = float(mpmath.quad(
            lambda t: (1 + (rk * mpmath.sin(t)) ** 2) ** (w.a / 2)
            * (rk * mpmath.sin(t)) ** 2 * rk,
            [0, mpmath.pi])) / rk ** (1 + w.a)
        assert hk == pytest.approx(ref, rel=1e-6)


# ------------------------------------------------------- growth exponents


def test_odd_singular_growth_exponent():
    w = WeightParams(0.5, 0.0)
    grid = odd_grid()
    _, yy = grid.centers()
    p = compute_HE(catalog("odd_singular", w, yy), grid, w)
    assert growth_exponent(p) == pytest.approx(1.0, abs=0.05)


def test_growth_floor_for_discrete_odd_harmonics():
    grid = odd_grid()
    for a in (-0.5, 0.0, 0.5):
        w = WeightParams(a, 0.0)
        u = discrete_harmonic(
            grid, w, lambda x, y: y + 0.7 * x * y + 0.3 * np.sin(2.0 * x) * y)
        slope = growth_exponent(compute_HE(u, grid, w))
        assert slope >= 2.0 * (1.0 - a) - 0.1


def test_gradient_transform_growth_floor():
    # even harmonic u, v = rho^a dy(u) is odd and harmonic for the
    # conjugate weight; its mass must grow at least like r^{2(1+a)}
    for a in (-0.5, 0.5):
        w = WeightParams(a, 0.0)
        grid = even_grid()
        u = discrete_harmonic(grid, w, lambda x, y: x * x)
        v = eval_weight(w, grid.centers()[-1]) * _gradient(u, grid)[-1]
        pv = compute_HE(v, odd_grid(), WeightParams(-a, 0.0))
        assert growth_exponent(pv) >= 2.0 * (1.0 + a) - 0.1


def test_growth_exponent_degenerate_and_short():
    grid = odd_grid(32, 32)
    with pytest.raises(ValueError, match="degenerate"):
        growth_exponent(compute_HE(np.zeros(grid.shape), grid,
                                   WeightParams(0.0, 0.0)))
    p = compute_HE(grid.sample_centers(lambda x, y: y), grid,
                   WeightParams(0.0, 0.0), radii=np.array([0.5, 0.6, 0.7]))
    with pytest.raises(ValueError, match="five"):
        growth_exponent(p)


# --------------------------------------------------- derivative relation


def test_discrete_harmonic_derivative_relation():
    w = WeightParams(0.5, 0.0)
    grid = odd_grid(256, 256)
    u = discrete_harmonic(grid, w,
                          lambda x, y: catalog("odd_singular", w, y))
    assert check_derivative_relation(compute_HE(u, grid, w)) <= 0.02


def test_relation_rejects_nonvanishing_trace():
    grid = even_grid(64, 64)
    p = compute_HE(np.ones(grid.shape), grid, WeightParams(0.0, 0.0))
    with pytest.raises(WrongClassError, match="Sigma"):
        check_derivative_relation(p)


def test_relation_rejects_eps_one_profiles():
    grid = odd_grid(64, 64)
    u = grid.sample_centers(lambda x, y: y)
    p = compute_HE(u, grid, WeightParams(0.5, 1.0))
    with pytest.raises(WrongClassError, match="eps"):
        check_derivative_relation(p)


# ---------------------------------------------------------- invariances


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0))
def test_scaling_moves_mass_not_exponents(log_lam):
    lam = 10.0**log_lam
    grid = build_grid(1, (32, 32), half=True, symmetry="odd")
    u = grid.sample_centers(lambda x, y: y + 0.3 * x * y)
    w = WeightParams(0.5, 0.0)
    base = compute_HE(u, grid, w)
    scaled = compute_HE(lam * u, grid, w)
    assert np.allclose(scaled.H, lam**2 * base.H, rtol=1e-12)
    assert np.allclose(scaled.E, lam**2 * base.E, rtol=1e-12)
    assert growth_exponent(scaled) == pytest.approx(
        growth_exponent(base), abs=1e-9)
    assert check_derivative_relation(scaled) == pytest.approx(
        check_derivative_relation(base), abs=1e-9)


# ------------------------------------------------- validation and errors


def test_compute_rejects_bad_radii_and_grids():
    grid = odd_grid(64, 64)
    u = grid.sample_centers(lambda x, y: y)
    w = WeightParams(0.0, 0.0)
    hmax = max(grid.h)
    with pytest.raises(ValueError, match="floor"):
        compute_HE(u, grid, w, radii=np.array([2.0 * hmax, 0.5]))
    with pytest.raises(ValueError, match="increasing"):
        compute_HE(u, grid, w, radii=np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="inside"):
        compute_HE(u, grid, w, radii=np.array([0.5, 1.0]))
    with pytest.raises(WrongClassError, match="normalization"):
        compute_HE(u, grid, WeightParams(0.0, 0.3))
    full = build_grid(1, (32, 64), half=False, symmetry="none")
    with pytest.raises(WrongClassError, match="half"):
        compute_HE(np.zeros(full.shape), full, w)


def test_profile_invariants_enforced():
    r = np.array([0.1, 0.2, 0.3])
    good = np.ones(3)
    with pytest.raises(ValueError, match="negative"):
        FrequencyProfile(r, -good, good, 0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError, match="increasing"):
        FrequencyProfile(r[::-1].copy(), good, good, 0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError, match="equal length"):
        FrequencyProfile(r, good[:2], good, 0.0, 0.0, 0.0, 1.0)


def test_radius_ladder_window():
    grid = odd_grid()
    r = radius_ladder(grid, count=12)
    assert len(r) == 12
    assert r[0] == pytest.approx(8.0 * max(grid.h))
    assert r[-1] == pytest.approx(0.8)
    with pytest.raises(ValueError, match="coarse"):
        radius_ladder(build_grid(1, (8, 8), half=True, symmetry="odd"))


# -------------------------------------------------------------- serialize


def test_write_csv_round_trip(tmp_path):
    grid = odd_grid(64, 64)
    u = grid.sample_centers(lambda x, y: y)
    p = compute_HE(u, grid, WeightParams(0.0, 0.0))
    path = tmp_path / "profile.csv"
    write_csv(p, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "H", "E", "dH_dr", "two_E_over_r"]
    assert len(rows) == 1 + len(p)
    body = np.array([[float(v) for v in row] for row in rows[1:]])
    assert np.allclose(body[:, 0], p.radii, rtol=1e-15)
    assert np.allclose(body[:, 4], 2.0 * p.E / p.radii, rtol=1e-15)
    # five-point derivative column agrees with the relation's two sides
    assert np.allclose(body[2:-2, 3], body[2:-2, 4], rtol=1e-8)
    again = tmp_path / "again.csv"
    write_csv(p, again)
    assert path.read_bytes() == again.read_bytes()
