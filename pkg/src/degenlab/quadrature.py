"""Quadrature rules for interval, half-circle and hemisphere integrals.

Angular rules use tanh-sinh (double-exponential) nodes: the weight y^a is
algebraically singular where the sphere meets y = 0 once eps = 0 and a < 0,
and tanh-sinh integrates such endpoint singularities to near machine
precision while never placing a node on y = 0 itself.  Radial and generic
interval integrals use composite Gauss-Legendre panels.
"""

from __future__ import annotations

import numpy as np


def gauss_panels(lo: float, hi: float, panels: int, order: int = 8):
    """Composite Gauss-Legendre nodes/weights on [lo, hi].

    Returns (nodes, weights), each of length panels * order.  No node lies
    on a panel edge, in particular not on lo or hi.
    """
    if panels < 1 or order < 1:
        raise ValueError("panels and order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def tanh_sinh(lo: float, hi: float, m: int = 192, t_max: float = 6.0):
    """Double-exponential rule on (lo, hi) with up to 2m + 1 nodes.

    Offsets from the lo endpoint are computed through a stable sigmoid, so
    distances to lo stay accurate down to the underflow threshold (put the
    singular end at lo).  Nodes whose weight underflows are dropped; their
    contribution is below 1e-60 for any integrable power singularity.
    """
    t = np.linspace(-t_max, t_max, 2 * m + 1)
    z = 0.5 * np.pi * np.sinh(t)
    # sigmoid form of (1 + tanh z)/2, stable for large |z|
    sig = 1.0 / (1.0 + np.exp(-2.0 * z))
    nodes = lo + (hi - lo) * sig
    step = t[1] - t[0]
    w = 0.5 * (hi - lo) * step * 0.5 * np.pi * np.cosh(t) / np.cosh(z) ** 2
    keep = (w > 1e-280) & (nodes > lo) & (nodes < hi)
    return nodes[keep], w[keep]


def half_circle_rule(r: float, m: int = 192):
    """Line-integral rule over the upper half circle of radius r.

    Built from a quarter-circle tanh-sinh rule mirrored in x, so the
    distance to y = 0 is exact near both rim points.  Returns
    (points, weights): points (count, 2) as (x, y), weights summing to
    pi * r.  All nodes have y > 0.
    """
    theta, w = tanh_sinh(0.0, np.pi / 2, m)
    x, y = r * np.cos(theta), r * np.sin(theta)
    pts = np.column_stack([np.concatenate([x, -x]), np.concatenate([y, y])])
    return pts, np.concatenate([w, w]) * r


def hemisphere_rule(r: float, m: int = 96, n_azimuth: int = 64):
    """Surface-integral rule over the upper hemisphere of radius r in three
    dimensions (two x axes plus y).

    Elevation from the equator gets tanh-sinh nodes (the y = 0 rim is the
    singular end and sits at the stable endpoint); the azimuth gets a
    periodic trapezoid.  Returns (points, weights) with points (count, 3)
    as (x1, x2, y), weights summing to 2 pi r^2.
    """
    elev, welev = tanh_sinh(0.0, np.pi / 2, m)
    psi = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    wpsi = 2 * np.pi / n_azimuth
    ring = np.cos(elev)
    x1 = r * np.outer(ring, np.cos(psi)).ravel()
    x2 = r * np.outer(ring, np.sin(psi)).ravel()
    y = np.repeat(r * np.sin(elev), n_azimuth)
    w = np.repeat(welev * ring, n_azimuth) * wpsi * r * r
    return np.column_stack([x1, x2, y]), w


def sphere_rule(n: int, r: float, m: int = 192):
    """Upper half-sphere rule for x-dimension n (1 or 2); at least 2m + 1
    angular nodes."""
    if n == 1:
        return half_circle_rule(r, m)
    if n == 2:
        return hemisphere_rule(r, m=max(m // 2, 48), n_azimuth=96)
    raise ValueError(f"n must be 1 or 2, got {n}")
