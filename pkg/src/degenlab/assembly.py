"""Flux-form discretization of -div(rho A grad u) on tensor grids.

The scheme is the conservative two-point stencil: each face carries a
transmissibility rho(face midpoint) * mu(face midpoint) * area / spacing,
rows are scaled by the cell volume so an interior row of the a = 0
Laplacian reads (-1/h^2 ... 4/h^2 ... -1/h^2).  Right-hand sides follow
the same scaling: volumetric data enters as rho * f, divergence data as
the discrete flux budget of rho * F, boundary flux data divided by the
cell width.

Across Sigma (the y = 0 face of a half grid):
  even symmetry: zero weighted flux, the face decouples;
  odd symmetry: homogeneous Dirichlet enforced through the exact
    one-dimensional flux factor area / integral(rho^{-1}) over the half
    cell, which vanishes as it should when the weight is non-integrable
    (eps = 0, a >= 1);
  full grid: midpoint weight, rejected when that value is infinite
    (eps = 0, a < 0).

The boundary flux datum on Sigma is the inward weighted derivative
g = lim_{y->0+} rho mu_y dy u, so g = 1 reproduces the half-space
profile y^{1-a}/(1-a).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .errors import SingularFaceError, WrongClassError
from .mesh import Grid
from .weights import WeightParams, dual_params, eval_weight, weight_integral

# ------------------------------------------------------------ coefficients


@dataclass(frozen=True)
class CoefficientSpec:
    """Diagonal coefficient A = diag(mu_x, ..., mu_x, mu_y) with ellipticity
    window [lam1, lam2]; identity when no fields are given.

    mu_x / mu_y are callables of the cell-center coordinates (x..., y),
    even in y, with values inside the ellipticity window.
    """

    mu_x: Callable | None = None
    mu_y: Callable | None = None
    lam1: float = 1.0
    lam2: float = 1.0

    def __post_init__(self):
        if not 0 < self.lam1 <= self.lam2:
            raise ValueError("need 0 < lam1 <= lam2")
        if (self.mu_x is None) != (self.mu_y is None):
            raise ValueError("give both mu_x and mu_y or neither")

    @property
    def kind(self) -> str:
        return "identity" if self.mu_x is None else "diagonal"

    def mu(self, axis: int, ndim: int, coords: Sequence[np.ndarray]):
        """Coefficient of the given axis at the given points."""
        if self.mu_x is None:
            return np.ones_like(coords[-1])
        fn = self.mu_y if axis == ndim - 1 else self.mu_x
        return np.asarray(fn(*coords), dtype=float)

    def validate_samples(self, vals: np.ndarray):
        if vals.size == 0:
            return
        if vals.min() < self.lam1 - 1e-12 or vals.max() > self.lam2 + 1e-12:
            raise ValueError(
                f"coefficient leaves ellipticity window "
                f"[{self.lam1}, {self.lam2}]: range "
                f"[{vals.min():.3g}, {vals.max():.3g}]"
            )


IDENTITY = CoefficientSpec()


# -------------------------------------------------------- problem structure


@dataclass(frozen=True)
class Dirichlet:
    g: Callable | float = 0.0


@dataclass(frozen=True)
class WeightedNeumann:
    """Outward weighted co-normal flux rho mu grad(u) . nu on an outer face."""

    g: Callable | float = 0.0


@dataclass(frozen=True)
class VolumetricRhs:
    f: Callable | np.ndarray | float


@dataclass(frozen=True)
class DivergenceRhs:
    F: tuple  # one cell-centered component per axis


@dataclass(frozen=True)
class NeumannRhs:
    """Inward weighted derivative data on Sigma: lim rho mu_y dy u = flux."""

    flux: Callable | np.ndarray | float


@dataclass(frozen=True)
class ProblemSpec:
    weight: WeightParams
    coeff: CoefficientSpec = IDENTITY
    rhs: VolumetricRhs | DivergenceRhs | NeumannRhs | None = None
    bc: dict = field(default_factory=dict)  # face name -> Dirichlet/WeightedNeumann
    symmetry: str = "even"


@dataclass
class SparseSystem:
    """CSR operator plus right-hand side; symmetric, and positive definite
    once any Dirichlet-type face is present (otherwise gauge by mean)."""

    matrix: sparse.csr_matrix
    rhs: np.ndarray
    grid: Grid
    pure_neumann: bool

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def row_offsets(self) -> np.ndarray:
        return self.matrix.indptr

    @property
    def column_indices(self) -> np.ndarray:
        return self.matrix.indices

    @property
    def values(self) -> np.ndarray:
        return self.matrix.data


def outer_faces(grid: Grid):
    """Names of the outer box sides: x<k>_lo/hi per x axis, y_hi, and y_lo
    only on full grids."""
    names = []
    for k in range(grid.n):
        names += [f"x{k + 1}_lo", f"x{k + 1}_hi"]
    if not grid.half:
        names.append("y_lo")
    names.append("y_hi")
    return names


def _face_name(ax: int, side: str, grid: Grid) -> str:
    return f"x{ax + 1}_{side}" if ax < grid.n else f"y_{side}"


def _eval_on(data, coords, shape):
    """Evaluate callable/array/scalar data on face or cell coordinates."""
    if callable(data):
        return np.broadcast_to(np.asarray(data(*coords), dtype=float),
                               shape).copy()
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 0:
        return np.full(shape, float(arr))
    if arr.size != int(np.prod(shape)):
        raise ValueError(f"data shape {arr.shape} != expected {shape}")
    return arr.reshape(shape)


def _face_coords(grid: Grid, ax: int, positions: np.ndarray):
    """Meshgrid coordinates of the faces of axis ax at the given positions
    along that axis (cell centers elsewhere)."""
    axes = [grid.axis_centers(k) for k in range(grid.ndim)]
    axes[ax] = positions
    return np.meshgrid(*axes, indexing="ij")


def _check_even_in_y(coeff: CoefficientSpec, grid: Grid):
    """Spot check mu(x, y) = mu(x, -y) for variable coefficients."""
    if coeff.mu_x is None:
        return
    rng = np.random.default_rng(0)
    pts = [rng.uniform(-1, 1, 32) for _ in range(grid.n)]
    yy = rng.uniform(0.05, 1.0, 32)
    for fn in (coeff.mu_x, coeff.mu_y):
        up = np.asarray(fn(*pts, yy), dtype=float)
        dn = np.asarray(fn(*pts, -yy), dtype=float)
        if not np.allclose(up, dn, rtol=1e-10, atol=1e-12):
            raise ValueError("coefficient fields must be even in y")


def sigma_dirichlet_factor(grid: Grid, p: WeightParams) -> float:
    """Transmissibility kernel of the odd-symmetry Sigma face: the exact
    one-dimensional flux factor 1 / integral(rho^{-1}, [0, h_y/2]),
    zero when the integral diverges."""
    gap = weight_integral(dual_params(p), 0.0, grid.h[-1] / 2)
    return 0.0 if np.isinf(gap) else 1.0 / gap


def assemble(spec: ProblemSpec, grid: Grid) -> SparseSystem:
    """Assemble the volume-scaled flux-form operator and right-hand side.

    Interior row sums vanish, the matrix is exactly symmetric, and the
    quadratic form is the weighted gradient energy (times cell volume).
    """
    if spec.symmetry != grid.symmetry:
        raise WrongClassError(
            f"spec symmetry {spec.symmetry!r} != grid {grid.symmetry!r}"
        )
    if isinstance(spec.rhs, NeumannRhs):
        return assemble_neumann(spec, grid)
    _check_even_in_y(spec.coeff, grid)
    p = spec.weight
    shape = grid.shape
    n_cells = int(np.prod(shape))
    idx = np.arange(n_cells).reshape(shape)
    vol = grid.cell_volume
    h = grid.h

    rows, cols, vals = [], [], []
    rhs = np.zeros(n_cells)
    diag = np.zeros(n_cells)

    def push(i, j, t):
        rows.append(i)
        cols.append(j)
        vals.append(t)

    any_dirichlet = False

    for ax in range(grid.ndim):
        lo_axis = grid.lo[ax]
        hi_axis = grid.hi[ax]
        cells_ax = shape[ax]
        inner_pos = lo_axis + np.arange(1, cells_ax) * h[ax]
        if (ax == grid.ndim - 1 and not grid.half
                and p.eps == 0 and p.a < 0):
            raise SingularFaceError(
                "full grid with eps=0, a<0 puts an infinite weight on the "
                "interior y=0 face; use a half grid with symmetry"
            )

        coords = _face_coords(grid, ax, inner_pos)
        mu = spec.coeff.mu(ax, grid.ndim, coords)
        spec.coeff.validate_samples(mu)
        rho = eval_weight(p, coords[-1])
        t_int = rho * mu / h[ax] ** 2

        sl_lo = tuple(slice(0, -1) if k == ax else slice(None)
                      for k in range(grid.ndim))
        sl_hi = tuple(slice(1, None) if k == ax else slice(None)
                      for k in range(grid.ndim))
        li = idx[sl_lo].ravel()
        ri = idx[sl_hi].ravel()
        tv = t_int.ravel()
        np.add.at(diag, li, tv)
        np.add.at(diag, ri, tv)
        push(li, ri, -tv)
        push(ri, li, -tv)

        for side, pos, cells_slice in (
            ("lo", lo_axis, tuple(0 if k == ax else slice(None)
                                  for k in range(grid.ndim))),
            ("hi", hi_axis, tuple(-1 if k == ax else slice(None)
                                  for k in range(grid.ndim))),
        ):
            cell_ids = idx[cells_slice].ravel()
            fcoords = _face_coords(grid, ax, np.array([pos]))
            fcoords = [c.reshape(-1) for c in fcoords]
            is_sigma = ax == grid.ndim - 1 and side == "lo" and grid.half
            if is_sigma:
                if grid.symmetry == "even":
                    continue  # zero weighted flux through Sigma
                # odd: homogeneous Dirichlet via the integrated factor
                mu_s = spec.coeff.mu(ax, grid.ndim, fcoords)
                spec.coeff.validate_samples(mu_s)
                t_sig = mu_s * sigma_dirichlet_factor(grid, p) / h[ax]
                np.add.at(diag, cell_ids, t_sig)
                any_dirichlet = any_dirichlet or np.any(t_sig > 0)
                continue
            bc = spec.bc.get(_face_name(ax, side, grid), Dirichlet(0.0))
            mu_b = spec.coeff.mu(ax, grid.ndim, fcoords)
            spec.coeff.validate_samples(mu_b)
            rho_b = eval_weight(p, fcoords[-1])
            gv = _eval_on(bc.g, fcoords, cell_ids.shape)
            if isinstance(bc, Dirichlet):
                t_b = 2.0 * rho_b * mu_b / h[ax] ** 2
                np.add.at(diag, cell_ids, t_b)
                np.add.at(rhs, cell_ids, t_b * gv)
                any_dirichlet = True
            elif isinstance(bc, WeightedNeumann):
                sign = 1.0  # datum is the outward flux on outer faces
                np.add.at(rhs, cell_ids, sign * gv / h[ax])
            else:
                raise TypeError(f"unknown bc {bc!r}")

    # interior y=0 face of a full grid is already covered by the interior
    # face loop (midpoint weight); the singular case was rejected above

    if isinstance(spec.rhs, VolumetricRhs):
        ccoords = grid.centers()
        fv = _eval_on(spec.rhs.f, ccoords, shape)
        if grid.symmetry == "odd":
            # odd class forces f(x, 0) = 0; catch even nonzero forcing
            trace = 1.5 * np.take(fv, 0, -1) - 0.5 * np.take(fv, 1, -1)
            scale = max(np.abs(fv).max(), 1e-30)
            if np.abs(trace).max() > 0.05 * scale + 1e-12:
                raise WrongClassError(
                    "odd symmetry needs forcing with f(x, 0) = 0"
                )
        rhs += (eval_weight(p, ccoords[-1]) * fv).ravel()
    elif isinstance(spec.rhs, DivergenceRhs):
        rhs += assemble_div_rhs(spec, grid)
    elif spec.rhs is not None:
        raise TypeError(f"unknown rhs {spec.rhs!r}")

    rows.append(np.arange(n_cells))
    cols.append(np.arange(n_cells))
    vals.append(diag)
    mat = sparse.csr_matrix(
        (np.concatenate(vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_cells, n_cells),
    )
    mat.sum_duplicates()
    _ = vol  # rows are volume-scaled already (area/h/vol = 1/h^2)
    return SparseSystem(matrix=mat, rhs=rhs, grid=grid,
                        pure_neumann=not any_dirichlet)


def assemble_div_rhs(spec: ProblemSpec, grid: Grid) -> np.ndarray:
    """Right-hand side for divergence data: the volume-scaled flux budget
    -(1/vol) sum_faces rho(face) (F . nu) area of the weighted field."""
    if not isinstance(spec.rhs, DivergenceRhs):
        raise TypeError("spec.rhs must be DivergenceRhs")
    F = spec.rhs.F
    if len(F) != grid.ndim:
        raise ValueError(f"need {grid.ndim} components, got {len(F)}")
    p = spec.weight
    shape = grid.shape
    comps = [grid.check_field(np.asarray(c, dtype=float)) for c in F]
    rhs = np.zeros(shape)

    for ax in range(grid.ndim):
        c = comps[ax]
        cells_ax = shape[ax]
        inner_pos = grid.lo[ax] + np.arange(1, cells_ax) * grid.h[ax]
        if (ax == grid.ndim - 1 and not grid.half
                and p.eps == 0 and p.a < 0):
            raise SingularFaceError(
                "full grid with eps=0, a<0 puts an infinite weight on the "
                "interior y=0 face; use a half grid with symmetry"
            )
        coords = _face_coords(grid, ax, inner_pos)
        rho = eval_weight(p, coords[-1])
        sl_lo = tuple(slice(0, -1) if k == ax else slice(None)
                      for k in range(grid.ndim))
        sl_hi = tuple(slice(1, None) if k == ax else slice(None)
                      for k in range(grid.ndim))
        fval = 0.5 * (c[sl_lo] + c[sl_hi]) * rho
        # flux budget: face flows out of the lower cell, into the upper
        rhs[sl_lo] -= fval / grid.h[ax]
        rhs[sl_hi] += fval / grid.h[ax]

        for side in ("lo", "hi"):
            pos = grid.lo[ax] if side == "lo" else grid.hi[ax]
            cells_slice = tuple(
                (0 if side == "lo" else -1) if k == ax else slice(None)
                for k in range(grid.ndim)
            )
            is_sigma = ax == grid.ndim - 1 and side == "lo" and grid.half
            if is_sigma:
                if grid.symmetry == "even":
                    # F_y continues oddly; its Sigma trace must vanish
                    trace = 1.5 * np.take(c, 0, -1) - 0.5 * np.take(c, 1, -1)
                    scale = max(np.abs(c).max(), 1e-30)
                    if np.abs(trace).max() > 0.05 * scale + 1e-12:
                        raise WrongClassError(
                            "even symmetry needs F_y(x, 0) = 0"
                        )
                    continue
                # odd symmetry: F_y is even across Sigma, nearest value
                fv = np.take(c, 0, -1) * sigma_face_weight(grid, p)
                rhs[cells_slice] += fv / grid.h[ax]
                continue
            fcoords = _face_coords(grid, ax, np.array([pos]))
            rho_b = eval_weight(p, fcoords[-1].reshape(-1)).reshape(
                rhs[cells_slice].shape
            )
            fv = c[cells_slice] * rho_b
            if side == "lo":
                rhs[cells_slice] += fv / grid.h[ax]
            else:
                rhs[cells_slice] -= fv / grid.h[ax]
    return rhs.ravel()


def sigma_face_weight(grid: Grid, p: WeightParams) -> float:
    """Midpoint weight on the y = 0 face, infinite cases rejected."""
    if p.eps == 0 and p.a < 0:
        raise SingularFaceError("weight diverges on the y = 0 face")
    return float(eval_weight(p, 0.0))


def assemble_neumann(spec: ProblemSpec, grid: Grid) -> SparseSystem:
    """Assembly for inhomogeneous weighted flux data on Sigma.

    Requires a in (-1, 1) (the flux datum is meaningful only when the
    weight is integrable and nontrivial) and a half grid.  The Sigma face
    carries zero transmissibility; the datum lands on the right-hand side.
    """
    if not isinstance(spec.rhs, NeumannRhs):
        raise TypeError("spec.rhs must be NeumannRhs")
    if not -1 < spec.weight.a < 1:
        raise ValueError(
            f"neumann data needs a in (-1, 1), got a={spec.weight.a}"
        )
    if not grid.half:
        raise ValueError("neumann data lives on Sigma: use a half grid")
    if grid.symmetry != "even":
        raise WrongClassError(
            "flux data replaces the even-class zero-flux face; build the "
            "grid with even symmetry"
        )
    base = ProblemSpec(weight=spec.weight, coeff=spec.coeff, rhs=None,
                       bc=spec.bc, symmetry=spec.symmetry)
    sys = assemble(base, grid)
    xs = [grid.axis_centers(k) for k in range(grid.n)]
    coords = np.meshgrid(*xs, indexing="ij") if xs else []
    gv = _eval_on(spec.rhs.flux, coords, grid.shape[:-1])
    idx = np.arange(sys.dimension).reshape(grid.shape)
    bottom = idx[..., 0].ravel()
    # inward datum g: outward flux is -g, budget adds -g/h_y to the rhs
    sys.rhs[bottom] -= gv.ravel() / grid.h[-1]
    return sys
