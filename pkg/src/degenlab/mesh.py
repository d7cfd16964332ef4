"""Cell-centered tensor grids on boxes and half-boxes.

Axes are x_1..x_n (each spanning [-1, 1]) plus y last.  Half grids span
y in [0, 1] and carry a symmetry mode describing how fields continue
across the hyperplane y = 0 (named Sigma throughout): `even` mirrors,
`odd` flips sign, `none` assumes nothing and is reserved for full grids,
which span y in [-1, 1].

Cell centers sit at half-integer multiples of the spacing, so no center
ever lies on Sigma; y = 0 is always a face.  Fields are plain ndarrays of
shape `grid.cells`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_MODES = ("even", "odd", "none")


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered tensor grid; immutable once built."""

    n: int                      # number of x axes (1 or 2)
    cells: tuple                # per-axis cell counts, y last
    half: bool                  # y in [0,1] if True else [-1,1]
    symmetry: str               # even | odd | none
    lo: tuple = field(init=False)
    hi: tuple = field(init=False)
    h: tuple = field(init=False)

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")
        if len(self.cells) != self.n + 1:
            raise ValueError("cells must list one count per axis, y last")
        if any(c < 4 for c in self.cells):
            raise ValueError(f"need >= 4 cells per axis, got {self.cells}")
        if self.symmetry not in SYMMETRY_MODES:
            raise ValueError(f"unknown symmetry {self.symmetry!r}")
        if self.half and self.symmetry == "none":
            raise ValueError("half grids require even or odd symmetry")
        if not self.half and self.symmetry != "none":
            raise ValueError(
                "inconsistent flags: symmetry on a full grid is expressed "
                "through the half-grid reduction, use half=True"
            )
        if not self.half and self.cells[-1] % 2:
            raise ValueError(
                "full grids need an even y cell count so that y = 0 is a "
                "face, not a center"
            )
        lo = (-1.0,) * self.n + (0.0 if self.half else -1.0,)
        hi = (1.0,) * self.n + (1.0,)
        h = tuple((b - a) / c for a, b, c in zip(lo, hi, self.cells))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "h", h)

    # ---------------------------------------------------------- geometry

    @property
    def ndim(self) -> int:
        return self.n + 1

    @property
    def shape(self) -> tuple:
        return tuple(self.cells)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def axis_centers(self, axis: int) -> np.ndarray:
        c = self.cells[axis]
        return self.lo[axis] + (np.arange(c) + 0.5) * self.h[axis]

    def centers(self):
        """Meshgrid of cell-center coordinates, one array per axis."""
        axes = [self.axis_centers(k) for k in range(self.ndim)]
        return np.meshgrid(*axes, indexing="ij")

    @property
    def y_centers(self) -> np.ndarray:
        return self.axis_centers(self.ndim - 1)

    @property
    def y_faces(self) -> np.ndarray:
        c = self.cells[-1]
        return self.lo[-1] + np.arange(c + 1) * self.h[-1]

    def radius(self) -> np.ndarray:
        """Distance of each cell center from the origin."""
        zs = self.centers()
        return np.sqrt(sum(z**2 for z in zs))

    # ------------------------------------------------------------- masks

    def mask_ball(self, r: float) -> np.ndarray:
        """Cells whose center lies in the (half-)ball of radius r."""
        return self.radius() <= r

    def mask_annulus(self, r1: float, r2: float) -> np.ndarray:
        rad = self.radius()
        return (rad > r1) & (rad <= r2)

    def sigma_faces(self, r: float | None = None) -> np.ndarray:
        """Bottom (y = 0) faces, as a mask over the x-grid; restricted to
        |x| < r when r is given.  Only meaningful on half grids."""
        if not self.half:
            raise ValueError("sigma_faces applies to half grids")
        xs = np.meshgrid(
            *[self.axis_centers(k) for k in range(self.n)], indexing="ij"
        )
        if r is None:
            return np.ones(self.cells[:-1], dtype=bool)
        return np.sqrt(sum(x**2 for x in xs)) < r

    # ------------------------------------------------------------ fields

    def sample_centers(self, fn) -> np.ndarray:
        """Evaluate fn(*coords) at every cell center."""
        return np.asarray(fn(*self.centers()), dtype=float)

    def check_field(self, u: np.ndarray):
        u = np.asarray(u)
        if u.shape != self.shape:
            raise ValueError(f"field shape {u.shape} != grid {self.shape}")
        return u

    def sample(self, u: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """Multilinear interpolation of a cell field at arbitrary points.

        Across Sigma the field continues by the grid's symmetry mode; all
        other sides clamp to the nearest cell (queries are expected to
        stay inside the box).
        """
        u = self.check_field(u)
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.ndim:
            raise ValueError(f"points must have {self.ndim} coordinates")
        # ghost-extend every axis: clamp copies, except a signed mirror
        # below Sigma on half grids
        ext = u
        for ax in range(self.ndim):
            first = np.take(ext, [0], axis=ax)
            last = np.take(ext, [-1], axis=ax)
            if ax == self.ndim - 1 and self.half and self.symmetry == "odd":
                first = -first
            ext = np.concatenate([first, ext, last], axis=ax)
        idx = []
        frac = []
        for ax in range(self.ndim):
            # ghost layer shifts indices by one; centers stay uniform
            t = (pts[:, ax] - (self.lo[ax] - 0.5 * self.h[ax])) / self.h[ax]
            t = np.clip(t, 0.0, self.cells[ax] + 1 - 1e-12)
            base = np.clip(np.floor(t), 0, self.cells[ax]).astype(int)
            idx.append(base)
            frac.append(t - base)
        out = np.zeros(len(pts))
        for corner in itertools.product((0, 1), repeat=self.ndim):
            w = np.ones(len(pts))
            ix = []
            for ax, c in enumerate(corner):
                w = w * (frac[ax] if c else 1.0 - frac[ax])
                ix.append(idx[ax] + c)
            out += w * ext[tuple(ix)]
        return out


def build_grid(n: int, cells, half: bool, symmetry: str) -> Grid:
    """Construct a grid; see Grid for the conventions enforced."""
    return Grid(n=n, cells=tuple(int(c) for c in cells), half=bool(half),
                symmetry=str(symmetry))


def reflect(u: np.ndarray, grid: Grid, mode: str | None = None) -> np.ndarray:
    """Extend a half-grid field to the full box by mirroring across Sigma.

    mode defaults to the grid's own symmetry; the result has twice the
    y cells and satisfies u(x, -y) = +-u(x, y) exactly at mirrored centers.
    """
    if not grid.half:
        raise ValueError("reflect expects a half-grid field")
    mode = grid.symmetry if mode is None else mode
    if mode not in ("even", "odd"):
        raise ValueError(f"reflect mode must be even or odd, got {mode!r}")
    u = grid.check_field(u)
    mirrored = np.flip(u, axis=-1)
    if mode == "odd":
        mirrored = -mirrored
    return np.concatenate([mirrored, u], axis=-1)


def reflect_grid(grid: Grid) -> Grid:
    """The full grid on which reflected fields live."""
    if not grid.half:
        raise ValueError("grid is already full")
    cells = grid.cells[:-1] + (2 * grid.cells[-1],)
    return Grid(n=grid.n, cells=cells, half=False, symmetry="none")


def restrict(u: np.ndarray, full_grid: Grid) -> np.ndarray:
    """Upper-half restriction, the inverse of reflect on its image."""
    if full_grid.half:
        raise ValueError("restrict expects a full-grid field")
    full_grid.check_field(u)
    m = full_grid.cells[-1] // 2
    return u[..., m:]
