"""Conjugate-gradient solves against manufactured solutions."""

import numpy as np
import pytest
from scipy import sparse

from degenlab.assembly import (
    Dirichlet,
    ProblemSpec,
    SparseSystem,
    VolumetricRhs,
    WeightedNeumann,
    assemble,
    outer_faces,
)
from degenlab.errors import SolverError
from degenlab.mesh import build_grid
from degenlab.solver import SolveOptions, solve
from degenlab.weights import WeightParams, eval_weight

# ----------------------------------------------------------------- oracles


def forcing_for_y2(a, eps):
    """f with -div(rho grad y^2) = rho f, from the product-rule identity."""
    def f(*coords):
        y = coords[-1]
        return -(2.0 + 2.0 * a * y**2 / (eps**2 + y**2))
    if eps == 0:
        return -2.0 * (1.0 + a)
    return f


def y2_error(a, eps, cells, half, symmetry):
    grid = build_grid(1, (4, cells), half=half, symmetry=symmetry)
    exact = lambda x, y: y**2
    bc = {name: Dirichlet(exact) for name in outer_faces(grid)}
    sys = assemble(
        ProblemSpec(weight=WeightParams(a=a, eps=eps),
                    rhs=VolumetricRhs(forcing_for_y2(a, eps)),
                    bc=bc, symmetry=symmetry),
        grid,
    )
    u = solve(sys, SolveOptions(rel_tol=1e-12))
    xx, yy = grid.centers()
    return np.abs(u - exact(xx, yy)).max()


# ------------------------------------------------------------------- tests


def test_identity_system_returns_rhs():
    grid = build_grid(1, (4, 4), half=True, symmetry="even")
    rng = np.random.default_rng(3)
    b = rng.standard_normal(16)
    sys = SparseSystem(
        matrix=sparse.identity(16, format="csr"),
        rhs=b,
        grid=grid,
        pure_neumann=False,
    )
    u = solve(sys)
    assert np.allclose(u.ravel(), b, atol=1e-12)


def test_poisson_quadratic_second_order():
    e16 = y2_error(0.0, 0.0, 16, half=False, symmetry="none")
    e32 = y2_error(0.0, 0.0, 32, half=False, symmetry="none")
    assert e32 < 5e-3
    assert e16 / e32 >= 3.5


def test_even_degenerate_quadratic():
    e16 = y2_error(0.5, 0.0, 16, half=True, symmetry="even")
    e32 = y2_error(0.5, 0.0, 32, half=True, symmetry="even")
    assert e32 < 5e-3
    assert e16 / e32 >= 2.0


def test_regularized_quadratic_second_order():
    e16 = y2_error(0.5, 0.5, 16, half=True, symmetry="even")
    e32 = y2_error(0.5, 0.5, 32, half=True, symmetry="even")
    assert e16 / e32 >= 3.5


def test_odd_linear_exact_through_sigma():
    grid = build_grid(1, (16, 16), half=True, symmetry="odd")
    bc = {
        "x1_lo": Dirichlet(lambda x, y: y),
        "x1_hi": Dirichlet(lambda x, y: y),
        "y_hi": Dirichlet(1.0),
    }
    sys = assemble(
        ProblemSpec(weight=WeightParams(a=0.0, eps=0.0), bc=bc,
                    symmetry="odd"),
        grid,
    )
    u = solve(sys, SolveOptions(rel_tol=1e-12))
    _, yy = grid.centers()
    assert np.abs(u - yy).max() < 1e-8


def test_pure_neumann_gauge_and_determinism():
    grid = build_grid(1, (16, 16), half=True, symmetry="even")
    p = WeightParams(a=0.5, eps=0.0)
    bc = {
        "x1_lo": WeightedNeumann(lambda x, y: -eval_weight(p, y)),
        "x1_hi": WeightedNeumann(lambda x, y: eval_weight(p, y)),
        "y_hi": WeightedNeumann(0.0),
    }
    sys = assemble(ProblemSpec(weight=p, bc=bc, symmetry="even"), grid)
    assert sys.pure_neumann

    u = solve(sys, SolveOptions(rel_tol=1e-12))
    xx, _ = grid.centers()
    assert abs(u.mean()) < 1e-13
    assert np.abs(u - xx).max() < 1e-8

    again = solve(sys, SolveOptions(rel_tol=1e-12))
    assert np.array_equal(u, again)


def test_mixed_neumann_top():
    def err(cells):
        grid = build_grid(1, (4, cells), half=True, symmetry="even")
        p = WeightParams(a=0.5, eps=0.0)
        bc = {
            "x1_lo": Dirichlet(lambda x, y: y**2),
            "x1_hi": Dirichlet(lambda x, y: y**2),
            "y_hi": WeightedNeumann(2.0),  # rho(1) * d_y(y^2) at y = 1
        }
        sys = assemble(
            ProblemSpec(weight=p, rhs=VolumetricRhs(forcing_for_y2(0.5, 0.0)),
                        bc=bc, symmetry="even"),
            grid,
        )
        u = solve(sys)
        _, yy = grid.centers()
        return np.abs(u - yy**2).max()

    e16, e32 = err(16), err(32)
    assert e32 < e16
    assert e16 / e32 >= 1.8


def test_zero_rhs_returns_zero_field():
    grid = build_grid(1, (8, 8), half=True, symmetry="even")
    sys = assemble(
        ProblemSpec(weight=WeightParams(a=0.5, eps=0.1),
                    bc={name: Dirichlet(0.0) for name in outer_faces(grid)},
                    symmetry="even"),
        grid,
    )
    u = solve(sys)
    assert np.all(u == 0.0)


def test_solver_error_reports_residual():
    sys_grid = build_grid(1, (16, 16), half=True, symmetry="even")
    sys = assemble(
        ProblemSpec(weight=WeightParams(a=0.0, eps=0.0),
                    rhs=VolumetricRhs(1.0), symmetry="even"),
        sys_grid,
    )
    with pytest.raises(SolverError, match="residual"):
        solve(sys, SolveOptions(max_iter=2))


def test_option_validation():
    with pytest.raises(ValueError):
        SolveOptions(rel_tol=0.0)
    with pytest.raises(ValueError):
        SolveOptions(max_iter=0)
    with pytest.raises(ValueError):
        SolveOptions(preconditioner="ilu")


def test_nonelliptic_diagonal_rejected():
    grid = build_grid(1, (4, 4), half=True, symmetry="even")
    sys = SparseSystem(
        matrix=-sparse.identity(16, format="csr"),
        rhs=np.ones(16),
        grid=grid,
        pure_neumann=False,
    )
    with pytest.raises(SolverError, match="diagonal"):
        solve(sys)
