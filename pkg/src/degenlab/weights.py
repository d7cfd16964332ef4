"""Regularized weight family and its analytic special solutions.

The weight is rho(y) = (eps^2 + y^2)^(a/2), degenerate at y = 0 for a > 0
and singular there for a < 0 once eps = 0.  An optional normalization
multiplies by min(eps^-a, 1) for a >= 0 and max(eps^-a, 1) for a <= 0 so
that the family is monotone in eps; for eps <= 1 the factor is 1 and both
conventions agree.

Everything here is closed form or one-dimensional quadrature; the rest of
the package treats these functions as ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .errors import (
    DivergentIntegralError,
    SingularWeightError,
    UnknownSolutionError,
)

#: Solution names accepted by :func:`catalog`.
CATALOG_NAMES = (
    "u_bar",
    "odd_singular",
    "jump",
    "cutoff",
    "neumann_special",
    "constant",
)


@dataclass(frozen=True)
class WeightParams:
    """Exponent/regularization pair (a, eps) plus normalization flag."""

    a: float
    eps: float
    normalized: bool = False

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")

    @property
    def norm_factor(self) -> float:
        """Constant prefactor implied by the normalization convention."""
        if not self.normalized or self.a == 0 or self.eps <= 1:
            # min(eps^-a, 1) for a > 0 and max(eps^-a, 1) for a < 0 both
            # collapse to 1 when eps <= 1
            return 1.0
        return self.eps ** (-self.a)


def dual_params(p: WeightParams) -> WeightParams:
    """Parameters of the conjugate weight (exponent flipped in sign)."""
    return replace(p, a=-p.a)


def eval_weight(p: WeightParams, y):
    """Evaluate the weight at y (scalar or array).

    Raises SingularWeightError when eps = 0, a < 0 and y = 0, where the
    value would be infinite.
    """
    y = np.asarray(y, dtype=float)
    # hypot form of (eps^2 + y^2)^(a/2); avoids underflow when squaring
    r = np.hypot(p.eps, y)
    if p.a < 0 and np.any(r == 0):
        raise SingularWeightError(
            f"weight with a={p.a}, eps=0 diverges at y=0"
        )
    with np.errstate(over="ignore"):
        # extreme a with tiny r legitimately saturates to inf
        out = r**p.a * p.norm_factor
    return out if out.ndim else float(out)


def weight_integral(p: WeightParams, lo: float, hi: float) -> float:
    """Integral of the weight over [lo, hi].

    Closed forms cover a in {0, +-1, +-2} and every eps = 0 case; other
    parameters fall back to adaptive quadrature (relative tolerance 1e-12).
    Divergent integrals (eps = 0, a <= -1, interval reaching y = 0) return
    math.inf rather than raising, so callers can take reciprocals.
    """
    return p.norm_factor * _raw_integral(p.a, p.eps, float(lo), float(hi))


def _raw_integral(a: float, eps: float, lo: float, hi: float) -> float:
    if lo == hi:
        return 0.0
    if lo > hi:
        return -_raw_integral(a, eps, hi, lo)
    if a == 0:
        return hi - lo
    if eps == 0:
        # integral of |s|^a splits at the origin
        def prim(t):
            if t == 0:
                return 0.0 if a > -1 else math.inf
            return t ** (1 + a) / (1 + a) if a != -1 else math.log(t)

        if lo >= 0:
            if a <= -1 and lo == 0:
                return math.inf
            return prim(hi) - prim(lo)
        if hi <= 0:
            return _raw_integral(a, 0.0, -hi, -lo)
        if a <= -1:
            return math.inf
        return prim(-lo) + prim(hi)
    if a == 2:
        return eps**2 * (hi - lo) + (hi**3 - lo**3) / 3
    if a == -2:
        return (math.atan(hi / eps) - math.atan(lo / eps)) / eps
    if a == 1:

        def prim1(s):
            return 0.5 * (s * math.hypot(eps, s) + eps**2 * math.asinh(s / eps))

        return prim1(hi) - prim1(lo)
    if a == -1:
        return math.asinh(hi / eps) - math.asinh(lo / eps)

    def f(s):
        return (eps * eps + s * s) ** (a / 2)

    pts = [0.0] if lo < 0 < hi else None
    val, _, *_ = integrate.quad(
        f, lo, hi, points=pts, epsabs=1e-300, epsrel=1e-12, limit=200,
        full_output=1,
    )
    return val


def u_bar(p: WeightParams, y):
    """Antiderivative of the inverse weight from 0: the radial special
    solution of the one-dimensional weighted equation.

    Strictly increasing, vanishes at 0, extended oddly to y < 0.  Raises
    DivergentIntegralError for eps = 0, a >= 1 where the integral blows up.
    """
    if p.eps == 0 and p.a >= 1:
        raise DivergentIntegralError(
            f"u_bar diverges for eps=0, a={p.a} (needs a < 1)"
        )
    q = dual_params(p)
    y_arr = np.asarray(y, dtype=float)
    if p.eps == 0 and not p.normalized:
        out = np.sign(y_arr) * np.abs(y_arr) ** (1 - p.a) / (1 - p.a)
    else:
        out = np.array(
            [math.copysign(weight_integral(q, 0.0, abs(t)), t)
             for t in np.atleast_1d(y_arr)]
        ).reshape(y_arr.shape)
    return out if out.ndim else float(out)


def u_bar_profile(p: WeightParams, ys) -> np.ndarray:
    """u_bar sampled along an increasing sequence of nonnegative points.

    Computed cumulatively, one quadrature panel per gap, so consecutive
    differences agree with `weight_integral` of the conjugate weight over
    the same gap to machine precision.  Discrete derivative factors built
    from the same panels then see this profile as exactly harmonic.
    """
    ys = np.asarray(ys, dtype=float)
    if ys.ndim != 1 or np.any(np.diff(ys) <= 0) or ys[0] < 0:
        raise ValueError("ys must be increasing and nonnegative")
    if p.eps == 0 and p.a >= 1:
        raise DivergentIntegralError(
            f"u_bar diverges for eps=0, a={p.a} (needs a < 1)"
        )
    q = dual_params(p)
    vals = np.empty_like(ys)
    vals[0] = weight_integral(q, 0.0, ys[0])
    for j in range(1, len(ys)):
        vals[j] = vals[j - 1] + weight_integral(q, ys[j - 1], ys[j])
    return vals


def mu1(a: float, y):
    """Boundary trace weight y / (rho(y) * u_bar(y)) at eps = 1.

    Tends to 1 as y -> 0 and to 1 - a as y -> infinity; only defined for
    a < 1 where u_bar exists in the limit family as well.
    """
    if a >= 1:
        raise ValueError(f"mu1 requires a < 1, got a={a}")
    p = WeightParams(a=a, eps=1.0)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr < 0):
        raise ValueError("mu1 expects y >= 0")
    out = np.empty_like(y_arr)
    for i, t in enumerate(y_arr):
        if t == 0:
            out[i] = 1.0
        else:
            out[i] = t / (eval_weight(p, t) * u_bar(p, t))
    return out.reshape(np.shape(y)) if np.ndim(y) else float(out[0])


def ode_example(p: WeightParams, y):
    """Explicit solution of rho^{-a} (rho^a u')' = -1 with u(0) = 1, u'(0) = 0.

    Returns the triple (u, u', u'').  The second derivative comes from the
    closed formula

        u''(y) = a y I(y) / (eps^2 + y^2)^(a/2 + 1) - 1,
        I(y) = integral of rho^a over [0, y],

    never from numerical differentiation; in particular u''(0) = -1 exactly.
    Requires eps > 0, a > -1 and the raw convention.
    """
    if p.eps <= 0:
        raise ValueError("ode_example requires eps > 0")
    if p.a <= -1:
        raise ValueError("ode_example requires a > -1")
    if p.normalized:
        raise ValueError("ode_example is stated for the raw weight")
    a, eps = p.a, p.eps
    q = dual_params(p)

    def triple(t):
        if t == 0:
            return 1.0, 0.0, -1.0
        inner = weight_integral(p, 0.0, t)
        du = -inner / eval_weight(p, t)
        val, _, *_ = integrate.quad(
            lambda s: eval_weight(q, s) * weight_integral(p, 0.0, s),
            0.0, t, epsabs=1e-300, epsrel=1e-11, limit=200, full_output=1,
        )
        d2u = a * t * inner / (eps**2 + t**2) ** (a / 2 + 1) - 1.0
        return 1.0 - val, du, d2u

    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    u = np.empty_like(y_arr)
    du = np.empty_like(y_arr)
    d2u = np.empty_like(y_arr)
    for i, t in enumerate(y_arr):
        u[i], du[i], d2u[i] = triple(t)
    if np.ndim(y):
        shape = np.shape(y)
        return u.reshape(shape), du.reshape(shape), d2u.reshape(shape)
    return float(u[0]), float(du[0]), float(d2u[0])


def cutoff_value(delta: float, y):
    """Logarithmic cutoff: 0 up to delta^2, 1 from delta on, log-linear
    in between.  Even in y."""
    if not 0 < delta < 1:
        raise ValueError(f"cutoff needs 0 < delta < 1, got {delta}")
    t = np.abs(np.asarray(y, dtype=float))
    lo, hi = delta**2, delta
    with np.errstate(divide="ignore"):
        mid = np.log(np.maximum(t, lo) / lo) / math.log(1 / delta)
    out = np.clip(mid, 0.0, 1.0)
    out = np.where(t >= hi, 1.0, np.where(t <= lo, 0.0, out))
    return out if out.ndim else float(out)


def cutoff_energy(a: float, delta: float) -> float:
    """Weighted Dirichlet energy of the cutoff on [0, 1], in closed form.

    The derivative is 1/(y log(1/delta)) on [delta^2, delta] and zero
    elsewhere, so with L = log(1/delta)

        energy = (1/L^2) * { L                        for a = 1,
                             (d^{a-1} - d^{2(a-1)})/(a-1)  otherwise }.

    Tends to 0 as delta -> 0 exactly when a >= 1 (the degenerate line has
    zero capacity there) and blows up for a < 1.
    """
    if not 0 < delta < 1:
        raise ValueError(f"cutoff_energy needs 0 < delta < 1, got {delta}")
    L = math.log(1 / delta)
    if a == 1:
        return 1 / L
    return (delta ** (a - 1) - delta ** (2 * (a - 1))) / ((a - 1) * L**2)


def catalog(name: str, p: WeightParams, z, *, delta: float | None = None):
    """Pointwise values of a named analytic solution.

    Names: u_bar, odd_singular (sign(y)|y|^{1-a}), jump (sign), cutoff
    (needs delta), neumann_special (|y|^{1-a}/(1-a), a < 1), constant.
    z is the y-coordinate (scalar or array).
    """
    z_arr = np.asarray(z, dtype=float)
    if name == "u_bar":
        out = u_bar(p, z_arr)
    elif name == "odd_singular":
        out = np.sign(z_arr) * np.abs(z_arr) ** (1 - p.a)
    elif name == "jump":
        out = np.sign(z_arr)
    elif name == "cutoff":
        if delta is None:
            raise ValueError("cutoff requires delta")
        out = cutoff_value(delta, z_arr)
    elif name == "neumann_special":
        if p.a >= 1:
            raise ValueError(
                f"neumann_special needs a < 1, got a={p.a}"
            )
        out = np.abs(z_arr) ** (1 - p.a) / (1 - p.a)
    elif name == "constant":
        out = np.ones_like(z_arr)
    else:
        raise UnknownSolutionError(
            f"unknown solution {name!r}; choose from {CATALOG_NAMES}"
        )
    out = np.asarray(out)
    return out if out.ndim else float(out)
