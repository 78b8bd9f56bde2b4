"""Central B-splines and divided-difference operators.

The central B-spline of order ``l`` is the ``l``-fold convolution of the
unit indicator on ``[-1/2, 1/2)``.  It is evaluated here with the
two-term recurrence between consecutive orders, so every value is an
exact piecewise polynomial up to rounding.
"""

from dataclasses import dataclass
from math import comb

import numpy as np


@dataclass(frozen=True)
class CentralBSpline:
    """Order-``l`` central B-spline, degree ``l - 1``, support ``[-l/2, l/2)``."""

    order: int

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"B-spline order must be a positive integer, got {self.order!r}")

    @property
    def support(self):
        half = 0.5 * self.order
        return (-half, half)

    def knots(self):
        """Knot locations ``-l/2, -l/2 + 1, ..., l/2``."""
        return np.arange(self.order + 1) - 0.5 * self.order

    def __call__(self, x):
        return bspline_eval(self, x)


@dataclass(frozen=True)
class Direction2:
    ux: float
    uy: float

    @classmethod
    def from_angle(cls, theta):
        return cls(np.cos(theta), np.sin(theta))

    @property
    def norm(self):
        return float(np.hypot(self.ux, self.uy))

    def as_array(self):
        return np.array([self.ux, self.uy])


def _psi(order, x):
    # half-open indicator makes shifted splines tile without double counting
    if order == 1:
        return ((x >= -0.5) & (x < 0.5)).astype(float)
    m = order - 1
    return (
        (0.5 * order + x) * _psi(m, x + 0.5) + (0.5 * order - x) * _psi(m, x - 0.5)
    ) / m


def bspline_eval(spline, x):
    """Evaluate the central B-spline at ``x`` (scalar or array)."""
    if isinstance(spline, (int, np.integer)):
        spline = CentralBSpline(int(spline))
    xa = np.asarray(x, dtype=float)
    out = _psi(spline.order, xa)
    return float(out) if out.ndim == 0 else out


def unit_divided_difference(f, alpha, x):
    """``alpha``-fold divided difference with unit step, as a binomial sum."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for j in range(alpha + 1):
        total = total + (-1) ** j * comb(alpha, j) * f(x + 0.5 * alpha - j)
    return total


def bspline_derivative(spline, alpha, x):
    """``alpha``-th derivative of a central B-spline.

    Uses the identity that the derivative of order ``alpha`` of the
    order-``l`` spline is the unit divided difference of order ``alpha``
    applied to the order-``l - alpha`` spline.
    """
    if isinstance(spline, (int, np.integer)):
        spline = CentralBSpline(int(spline))
    if alpha < 0:
        raise ValueError("derivative order must be nonnegative")
    if alpha >= spline.order:
        raise ValueError("derivative order exceeds smoothness")
    if alpha == 0:
        return bspline_eval(spline, x)
    lower = spline.order - alpha
    out = unit_divided_difference(lambda s: _psi(lower, s), alpha, x)
    return float(out) if np.ndim(out) == 0 else out


def divided_difference_1d(f, h, alpha, x):
    """Scaled divided difference ``(f(x + h/2) - f(x - h/2)) / h`` applied ``alpha`` times."""
    if h <= 0:
        raise ValueError("step h must be positive")
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if alpha == 1:
        return (f(x + 0.5 * h) - f(x - 0.5 * h)) / h
    inner = lambda s: divided_difference_1d(f, h, alpha - 1, s)  # noqa: E731
    return (inner(x + 0.5 * h) - inner(x - 0.5 * h)) / h


def directional_divided_difference(f, u, H, alpha, p):
    """Scaled divided difference of ``f(x, y)`` along direction ``u``, ``alpha`` times."""
    if H <= 0:
        raise ValueError("scaling H must be positive")
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if not isinstance(u, Direction2):
        u = Direction2(*u)
    x, y = p
    sx, sy = 0.5 * H * u.ux, 0.5 * H * u.uy
    if alpha == 1:
        return (f(x + sx, y + sy) - f(x - sx, y - sy)) / H

    def inner(a, b):
        return directional_divided_difference(f, u, H, alpha - 1, (a, b))

    return (inner(x + sx, y + sy) - inner(x - sx, y - sy)) / H


def directional_dd_binomial_expansion(f, theta, H, alpha, p):
    """Split a divided difference along ``(cos t, sin t)`` into axis pieces.

    Returns ``sum_m C(alpha, m) d_x^(alpha-m) d_y^m f`` evaluated at
    ``(x - m H cos t / 2, y + (alpha - m) H sin t / 2)``, where ``d_x`` and
    ``d_y`` are the scaled divided differences along ``(cos t, 0)`` and
    ``(0, sin t)``.  Equal to ``directional_divided_difference`` for any
    ``f``; kept separate so the identity can be checked.
    """
    if H <= 0:
        raise ValueError("scaling H must be positive")
    c, s = np.cos(theta), np.sin(theta)
    ux, uy = Direction2(c, 0.0), Direction2(0.0, s)
    x, y = p
    total = 0.0
    for m in range(alpha + 1):
        q = (x - 0.5 * m * H * c, y + 0.5 * (alpha - m) * H * s)
        g = f
        if m > 0:
            g = _partial(g, uy, H, m)
        if alpha - m > 0:
            g = _partial(g, ux, H, alpha - m)
        total += comb(alpha, m) * g(*q)
    return total


def _partial(f, u, H, alpha):
    # a zero direction gives an identically zero difference
    if u.ux == 0.0 and u.uy == 0.0:
        return lambda a, b: 0.0 * f(a, b)
    return lambda a, b: directional_divided_difference(f, u, H, alpha, (a, b))


def line_bspline(order, theta, H=1.0, tol=1e-9):
    """Scaled B-spline living on the line through the origin at angle ``theta``.

    The returned callable gives ``psi(t / H) / H`` at points on the line,
    with ``t = x cos(theta) + y sin(theta)`` the arc parameter, and zero
    off the line (distance above ``tol`` times the point scale).
    """
    spline = CentralBSpline(order)
    c, s = np.cos(theta), np.sin(theta)

    def f(x, y):
        t = x * c + y * s
        off = -x * s + y * c
        on = np.abs(off) <= tol * max(1.0, abs(x), abs(y))
        return np.where(on, bspline_eval(spline, t / H) / H, 0.0)

    return f


def central_moments(order, qmax):
    """Exact raw moments ``int psi(t) t^q dt`` for ``q = 0..qmax`` as Fractions.

    Built from the convolution structure: the spline is the density of a
    sum of ``order`` independent uniforms on ``[-1/2, 1/2]``.
    """
    from fractions import Fraction

    unif = [Fraction(1, (2 ** q) * (q + 1)) if q % 2 == 0 else Fraction(0) for q in range(qmax + 1)]
    mom = list(unif)
    for _ in range(order - 1):
        mom = [sum(comb(q, j) * mom[j] * unif[q - j] for j in range(q + 1)) for q in range(qmax + 1)]
    return mom
