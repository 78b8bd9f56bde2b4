"""Symmetric SIAC kernel and its rotated line form.

The kernel is ``K(t) = sum_g c_g psi(t - g)`` over ``g = -k..k`` with
``psi`` the central B-spline of order ``k + 1``; scaled by ``H`` it reads
``K_H(t) = K(t / H) / H``.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .splines import CentralBSpline, Direction2, bspline_eval, central_moments


def solve_kernel_coefficients(k):
    """Weights ``c_{-k..k}`` so the kernel reproduces polynomials to degree ``2k``.

    Equivalent to the moment conditions ``int K(t) t^q dt = delta_{q0}``
    for ``q = 0..2k``.  The moment matrix is assembled from exact central
    spline moments and solved with LU (partial pivoting).
    """
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k!r}")
    k = int(k)
    n = 2 * k + 1
    mom = central_moments(k + 1, 2 * k)
    gammas = range(-k, k + 1)
    A = np.empty((n, n))
    for q in range(n):
        for col, g in enumerate(gammas):
            # int psi(t - g) t^q dt = sum_j C(q, j) g^(q-j) M_j
            A[q, col] = float(sum(comb(q, j) * g ** (q - j) * mom[j] for j in range(q + 1)))
    rhs = np.zeros(n)
    rhs[0] = 1.0
    try:
        coeffs = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"singular moment system for k={k}") from exc
    # enforce exact symmetry lost to rounding
    return 0.5 * (coeffs + coeffs[::-1])


@dataclass(frozen=True)
class SiacKernel:
    """Symmetric kernel built from ``2k + 1`` central B-splines of order ``k + 1``."""

    k: int
    scaling: float = 1.0
    coefficients: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.scaling <= 0:
            raise ValueError("kernel scaling H must be positive")
        if self.coefficients is None:
            object.__setattr__(self, "coefficients", solve_kernel_coefficients(self.k))
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.shape != (2 * self.k + 1,):
            raise ValueError("need 2k+1 kernel coefficients")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def num_splines(self):
        return 2 * self.k + 1

    @property
    def spline_order(self):
        return self.k + 1

    @property
    def half_width(self):
        """Half of the scaled support, ``(3k + 1) H / 2``."""
        return 0.5 * (3 * self.k + 1) * self.scaling

    def rescaled(self, H):
        return SiacKernel(self.k, H, self.coefficients)

    def __call__(self, t):
        return kernel_eval(self, t)


def kernel_eval(kernel, t):
    """Scaled kernel value ``(1/H) sum_g c_g psi(t/H - g)``."""
    ta = np.asarray(t, dtype=float) / kernel.scaling
    spline = CentralBSpline(kernel.spline_order)
    out = np.zeros_like(ta)
    for c, g in zip(kernel.coefficients, range(-kernel.k, kernel.k + 1)):
        out = out + c * bspline_eval(spline, ta - g)
    out = out / kernel.scaling
    return float(out) if out.ndim == 0 else out


def kernel_breakpoints(kernel, tol=1e-12):
    """Sorted knots of all shifted splines, scaled by ``H`` and merged."""
    k, H = kernel.k, kernel.scaling
    raw = sorted((g + j - 0.5 * (k + 1)) * H for g in range(-k, k + 1) for j in range(k + 2))
    return merge_sorted(raw, tol * H)


def merge_sorted(values, tol):
    """Drop entries closer than ``tol`` to the previously kept one."""
    out = []
    for v in values:
        if not out or v - out[-1] > tol:
            out.append(v)
    return np.array(out)


def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def integrate_against_kernel(kernel, f, x, n=None):
    """``int K_H(t) f(x - t) dt`` by Gauss quadrature on each polynomial piece.

    Exact when ``f`` is a polynomial of degree below ``2n - k``.
    """
    n = n or 2 * kernel.k + 2
    nodes, weights = _gauss(n)
    br = kernel_breakpoints(kernel)
    a, b = br[:-1], br[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return float(np.sum(w * kernel_eval(kernel, t) * f(x - t)))


def reproduction_residual(kernel, p, samples=None):
    """Max over sample points of ``|(K_H * t^p)(x) - x^p|``."""
    if not 0 <= p <= 2 * kernel.k:
        raise ValueError(f"reproduction only holds for 0 <= p <= 2k, got p={p}")
    if samples is None:
        samples = np.linspace(-1.0, 1.0, 10)
    return max(
        abs(integrate_against_kernel(kernel, lambda s: s ** p, x) - x ** p) for x in samples
    )


@dataclass(frozen=True)
class LineKernel:
    """SIAC kernel laid along the line ``t (cos theta, sin theta)``."""

    base: SiacKernel
    theta: float

    @property
    def direction(self):
        return Direction2.from_angle(self.theta)

    def arc_parameter(self, x, y):
        return x * np.cos(self.theta) + y * np.sin(self.theta)

    def __call__(self, x, y):
        return line_kernel_eval(self, x, y)


def line_kernel_eval(lk, x, y):
    """Kernel value at a Cartesian point on the line (caller guarantees on-line)."""
    return kernel_eval(lk.base, lk.arc_parameter(x, y))


def change_of_basis(theta, p, direction="to_rotated"):
    """Coordinates of ``p`` in the frame ``{(c, s), (-s, c)}``, or back to Cartesian.

    ``to_rotated`` returns ``(p . k_x, p . k_y)`` for the rotated unit
    vectors ``k_x = (cos, sin)`` and ``k_y = (-sin, cos)``.
    """
    c, s = np.cos(theta), np.sin(theta)
    if direction == "to_rotated":
        P = np.array([[c, s], [-s, c]])
    elif direction == "to_cartesian":
        P = np.array([[c, -s], [s, c]])
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return P @ np.asarray(p, dtype=float)
