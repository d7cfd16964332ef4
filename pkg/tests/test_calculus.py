"""Weighted derivative, G and F_a operators, duality, quadrature of Gu."""

import numpy as np
import pytest

from degenlab.assembly import Dirichlet, ProblemSpec, assemble, outer_faces
from degenlab.calculus import (
    G_from_rhs,
    StaggeredField,
    duality_transform,
    op_Fa,
    op_G,
    second_dy,
    weighted_dy,
)
from degenlab.errors import SingularFaceError
from degenlab.mesh import build_grid
from degenlab.solver import SolveOptions, solve
from degenlab.weights import WeightParams, u_bar

# -------------------------------------------------------- weighted derivative


def test_weighted_dy_quadratic_a0():
    grid = build_grid(1, (8, 8), half=True, symmetry="even")
    _, yy = grid.centers()
    s = weighted_dy(yy**2, grid, WeightParams(a=0.0, eps=0.0))
    # exact at every face, the y=0 face included (2y vanishes there)
    assert np.allclose(s.values, 2.0 * grid.y_faces, atol=1e-13)


def test_weighted_dy_even_sigma_face_is_zero():
    grid = build_grid(1, (8, 8), half=True, symmetry="even")
    _, yy = grid.centers()
    for a in (-0.5, 0.5, 1.5):
        s = weighted_dy(np.cos(yy), grid, WeightParams(a=a, eps=0.0))
        assert np.all(s.values[..., 0] == 0.0)


def test_weighted_dy_log_profile_is_unit():
    # rho^a d_y ln y = y * (1/y) = 1 for a = 1, eps = 0
    grid = build_grid(1, (4, 32), half=True, symmetry="odd")
    _, yy = grid.centers()
    s = weighted_dy(np.log(yy), grid, WeightParams(a=1.0, eps=0.0))
    assert np.allclose(s.values[..., 1:-1], 1.0, atol=1e-12)
    assert np.allclose(s.values[..., -1], 1.0, atol=1e-2)
    # dual half-cell integral diverges, so the Sigma face carries zero
    assert np.all(s.values[..., 0] == 0.0)


def test_weighted_dy_odd_linear_is_unit():
    grid = build_grid(1, (4, 8), half=True, symmetry="odd")
    _, yy = grid.centers()
    s = weighted_dy(yy, grid, WeightParams(a=0.0, eps=0.0))
    assert np.allclose(s.values, 1.0, atol=1e-13)


def test_weighted_dy_full_grid():
    grid = build_grid(1, (4, 8), half=False, symmetry="none")
    _, yy = grid.centers()
    s = weighted_dy(yy**2, grid, WeightParams(a=0.5, eps=0.0))
    mid = grid.shape[-1] // 2
    assert s.values[0, mid] == pytest.approx(0.0, abs=1e-13)

    with pytest.raises(SingularFaceError):
        weighted_dy(yy**2, grid, WeightParams(a=-0.5, eps=0.0))


def test_staggered_field_shape_check():
    grid = build_grid(1, (4, 8), half=True, symmetry="even")
    with pytest.raises(ValueError):
        StaggeredField(grid=grid, values=np.zeros((4, 8)))


# ----------------------------------------------------------------- G and F_a


def test_op_G_constant_and_quadratic():
    grid = build_grid(1, (8, 16), half=True, symmetry="even")
    _, yy = grid.centers()
    assert np.all(op_G(np.ones(grid.shape), grid) == 0.0)
    assert np.allclose(op_G(yy**2, grid), 2.0, atol=1e-12)


def test_op_G_quartic_error_is_exactly_4h2():
    # centered: ((y+h)^4 - (y-h)^4)/(2h) = 4y^3 + 4yh^2, so G - 4y^2 = 4h^2;
    # the even ghost at the first row gives the same 4h^2
    grid = build_grid(1, (4, 16), half=True, symmetry="even")
    _, yy = grid.centers()
    h = grid.h[-1]
    g = op_G(yy**4, grid)
    err = g - 4.0 * yy**2
    assert np.allclose(err[..., :-1], 4.0 * h**2, rtol=1e-9)
    assert np.abs(err[..., -1]).max() < 10.0 * h**2


def test_op_Fa_reduces_to_second_difference_at_a0():
    grid = build_grid(1, (6, 12), half=True, symmetry="even")
    xx, yy = grid.centers()
    u = np.sin(xx) * np.cos(yy)
    assert np.array_equal(
        op_Fa(u, grid, WeightParams(a=0.0, eps=0.0)), second_dy(u, grid)
    )


@pytest.mark.parametrize("a", [-0.5, 0.5, 1.5])
def test_op_Fa_quadratic_constant(a):
    # d(2 y^{1+a}) equals 2(1+a) integral(y^a) exactly, so the degenerate
    # weight gives the constant to rounding on every row, Sigma included
    grid = build_grid(1, (4, 32), half=True, symmetry="even")
    _, yy = grid.centers()
    f = op_Fa(yy**2, grid, WeightParams(a=a, eps=0.0))
    assert np.abs(f - 2.0 * (1.0 + a)).max() < 1e-10


@pytest.mark.parametrize("a", [-0.5, 0.5, 1.5])
def test_op_Fa_quadratic_regularized_rate(a):
    def err(cells):
        grid = build_grid(1, (4, cells), half=True, symmetry="even")
        _, yy = grid.centers()
        p = WeightParams(a=a, eps=0.3)
        target = 2.0 * (1.0 + a * yy**2 / (p.eps**2 + yy**2))
        return np.abs(op_Fa(yy**2, grid, p) - target).max()

    assert err(16) / err(32) > 3.0


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5, 1.5])
def test_operator_identity_second_derivative(a):
    grid = build_grid(1, (32, 32), half=True, symmetry="even")
    xx, yy = grid.centers()
    h = grid.h[-1]
    p = WeightParams(a=a, eps=0.0)
    for u in (yy**2, yy**4, np.cos(np.pi * xx) * (1.0 + yy**2)):
        gap = op_Fa(u, grid, p) - a * op_G(u, grid) - second_dy(u, grid)
        assert np.abs(gap).max() <= 5.0 * h**2


# ------------------------------------------------------------------- duality


def test_duality_u_bar_profile():
    for eps in (0.0, 0.5):
        p = WeightParams(a=0.5, eps=eps)
        grid = build_grid(1, (32, 32), half=True, symmetry="odd")
        _, yy = grid.centers()
        w = np.broadcast_to(u_bar(p, grid.y_centers), grid.shape)
        res = duality_transform(w, grid, p)
        assert res.residual < 1e-8
        # faces reproduce v = 1 exactly away from the top closure
        assert np.allclose(res.v[:, :-2], 1.0, atol=1e-10)


def test_duality_constant_field():
    grid = build_grid(1, (8, 8), half=True, symmetry="even")
    res = duality_transform(np.full(grid.shape, 3.0), grid,
                            WeightParams(a=0.5, eps=0.1))
    assert np.all(res.v == 0.0)
    assert res.residual == 0.0


def test_duality_residual_refines():
    p = WeightParams(a=0.5, eps=0.0)

    def residual(cells):
        grid = build_grid(1, (cells, cells), half=True, symmetry="even")
        bc = {name: Dirichlet(lambda x, y: np.cos(x) * (1.0 + y**2))
              for name in outer_faces(grid)}
        sys = assemble(ProblemSpec(weight=p, bc=bc, symmetry="even"), grid)
        w = solve(sys, SolveOptions(rel_tol=1e-12))
        return duality_transform(w, grid, p).residual

    r16, r32 = residual(16), residual(32)
    assert r32 < r16
    assert r16 / r32 > 1.7


# ------------------------------------------------------- quadrature of Gu


def test_G_from_rhs_constant():
    grid = build_grid(1, (4, 16), half=True, symmetry="even")
    for a in (-0.5, 1.0):
        out = G_from_rhs(np.full(grid.shape, 3.0), grid, a)
        assert np.allclose(out, 3.0 / (1.0 + a), atol=1e-13)


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.0])
def test_G_from_rhs_quadratic_source(a):
    def err(cells):
        grid = build_grid(1, (4, cells), half=True, symmetry="even")
        _, yy = grid.centers()
        out = G_from_rhs(yy**2, grid, a)
        return np.abs(out - yy**2 / (a + 3.0)).max(), grid.h[-1]

    e16, h16 = err(16)
    e32, _ = err(32)
    assert e16 < h16**2
    assert e16 / e32 > 3.5


def test_G_from_rhs_separable_source():
    grid = build_grid(1, (8, 32), half=True, symmetry="even")
    xx, yy = grid.centers()
    out = G_from_rhs((1.0 + xx**2) * (1.0 + yy**2), grid, 0.0)
    exact = (1.0 + xx**2) * (1.0 + yy**2 / 3.0)
    assert np.abs(out - exact).max() < 1e-3


def test_G_from_rhs_preconditions():
    grid = build_grid(1, (4, 8), half=True, symmetry="even")
    with pytest.raises(ValueError, match="a >"):
        G_from_rhs(np.ones(grid.shape), grid, -1.0)
    godd = build_grid(1, (4, 8), half=True, symmetry="odd")
    with pytest.raises(ValueError, match="even half"):
        G_from_rhs(np.ones(godd.shape), godd, 0.0)
    gfull = build_grid(1, (4, 8), half=False, symmetry="none")
    with pytest.raises(ValueError, match="even half"):
        G_from_rhs(np.ones(gfull.shape), gfull, 0.0)
