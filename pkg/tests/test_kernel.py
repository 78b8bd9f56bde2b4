import math

import numpy as np
import pytest

from siacline.kernel import (
    LineKernel,
    SiacKernel,
    change_of_basis,
    integrate_against_kernel,
    kernel_breakpoints,
    kernel_eval,
    line_kernel_eval,
    reproduction_residual,
    solve_kernel_coefficients,
)
from siacline.splines import bspline_eval

rng = np.random.default_rng(7)


def brute_coefficients(k, n=200_000):
    """Moment system assembled from midpoint sums instead of exact moments."""
    half = 0.5 * (3 * k + 1)
    dt = 2 * half / n
    t = -half + (np.arange(n) + 0.5) * dt
    A = np.array([[dt * np.sum(bspline_eval(k + 1, t - g) * t ** q) for g in range(-k, k + 1)]
                  for q in range(2 * k + 1)])
    rhs = np.zeros(2 * k + 1)
    rhs[0] = 1.0
    return np.linalg.solve(A, rhs)


class TestCoefficients:
    def test_k0(self):
        assert np.allclose(solve_kernel_coefficients(0), [1.0], atol=1e-15)

    def test_k1(self):
        c = solve_kernel_coefficients(1)
        assert np.max(np.abs(c - [-1 / 12, 7 / 6, -1 / 12])) < 1e-12

    def test_k2_known_values(self):
        c = solve_kernel_coefficients(2)
        ref = [37 / 1920, -97 / 480, 437 / 320, -97 / 480, 37 / 1920]
        assert np.max(np.abs(c - ref)) < 1e-12

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_against_quadrature_moments(self, k):
        assert np.max(np.abs(solve_kernel_coefficients(k) - brute_coefficients(k))) < 1e-6

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_symmetric_unit_sum(self, k):
        c = solve_kernel_coefficients(k)
        assert abs(c.sum() - 1.0) < 1e-12
        assert np.max(np.abs(c - c[::-1])) < 1e-12

    @pytest.mark.parametrize("k", [-1, 1.5])
    def test_bad_degree(self, k):
        with pytest.raises(ValueError):
            solve_kernel_coefficients(k)


class TestKernel:
    def test_fields(self):
        K = SiacKernel(2, 0.5)
        assert (K.num_splines, K.spline_order) == (5, 3)
        assert K.half_width == pytest.approx(3.5 * 0.5)

    def test_invalid(self):
        with pytest.raises(ValueError):
            SiacKernel(1, 0.0)
        with pytest.raises(ValueError):
            SiacKernel(1, 1.0, coefficients=[1.0, 2.0])

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_outside_support(self, k):
        K = SiacKernel(k, 0.3)
        R = K.half_width
        t = np.concatenate([R + rng.uniform(0, 2, 20), -R - rng.uniform(0, 2, 20), [R]])
        assert np.all(K(t) == 0.0)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_symmetry(self, k):
        K = SiacKernel(k, 0.7)
        t = rng.uniform(-3, 3, 100)
        assert np.max(np.abs(K(t) - K(-t))) < 1e-14

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_unit_mass(self, k):
        K = SiacKernel(k, 0.4)
        assert abs(integrate_against_kernel(K, lambda s: np.ones_like(s), 0.0) - 1.0) < 1e-12

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_scaling_consistency(self, k):
        base, H = SiacKernel(k), 0.37
        t = rng.uniform(-4, 4, 100)
        assert np.max(np.abs(kernel_eval(base.rescaled(H), t) - kernel_eval(base, t / H) / H)) < 1e-14

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_continuous_at_breakpoints(self, k):
        K = SiacKernel(k, 1.0)
        for b in kernel_breakpoints(K):
            assert abs(K(b - 1e-12) - K(b + 1e-12)) < 1e-10

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_reproduction(self, k):
        for p in range(2 * k + 1):
            assert reproduction_residual(SiacKernel(k, 0.5), p) < 1e-9

    def test_reproduction_constants_tight(self):
        for k in range(4):
            assert reproduction_residual(SiacKernel(k), 0) < 1e-13

    def test_reproduction_degree_out_of_range(self):
        with pytest.raises(ValueError):
            reproduction_residual(SiacKernel(1), 3)

    def test_reproduction_fails_beyond_2k(self):
        # degree 2k+2 is not reproduced (odd 2k+1 is, by symmetry)
        K = SiacKernel(1)
        err = max(abs(integrate_against_kernel(K, lambda s: s ** 4, x) - x ** 4)
                  for x in np.linspace(-1, 1, 10))
        assert err > 1e-3


class TestBreakpoints:
    def test_k0(self):
        assert np.allclose(kernel_breakpoints(SiacKernel(0, 2.0)), [-1.0, 1.0])

    def test_k1(self):
        assert np.allclose(kernel_breakpoints(SiacKernel(1, 0.5)), [-1.0, -0.5, 0.0, 0.5, 1.0])

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_bound_and_order(self, k):
        K = SiacKernel(k, 0.3)
        bp = kernel_breakpoints(K)
        assert len(bp) <= (2 * k + 1) * (k + 2)
        assert np.all(np.diff(bp) > 0)
        assert bp[0] == pytest.approx(-K.half_width) and bp[-1] == pytest.approx(K.half_width)

    def test_polynomial_between_breaks(self):
        # kernel is a single polynomial of degree k on each piece
        K = SiacKernel(2, 1.0)
        bp = kernel_breakpoints(K)
        for a, b in zip(bp[:-1], bp[1:]):
            t = np.linspace(a, b, 9)[1:-1]
            fit = np.polynomial.polynomial.polyfit(t, K(t), 2)
            assert np.max(np.abs(np.polynomial.polynomial.polyval(t, fit) - K(t))) < 1e-13


class TestLineKernel:
    def test_axis(self):
        lk = LineKernel(SiacKernel(1, 0.5), 0.0)
        for x in rng.uniform(-1, 1, 10):
            assert line_kernel_eval(lk, x, 0.0) == kernel_eval(lk.base, x)

    @pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 4, 2.5, -1.0])
    def test_unit_arc(self, theta):
        lk = LineKernel(SiacKernel(1), theta)
        assert lk.arc_parameter(math.cos(theta), math.sin(theta)) == pytest.approx(1.0, abs=1e-15)
        assert abs(lk.direction.norm - 1.0) < 1e-12

    def test_diagonal(self):
        lk = LineKernel(SiacKernel(2, 0.8), math.pi / 4)
        r = math.sqrt(0.5)
        for t in rng.uniform(-2, 2, 10):
            assert lk(t * r, t * r) == pytest.approx(kernel_eval(lk.base, t), rel=1e-13, abs=1e-15)


class TestChangeOfBasis:
    def test_identity_at_zero(self):
        p = np.array([0.3, -1.7])
        assert np.allclose(change_of_basis(0.0, p), p, atol=0)

    def test_quarter_turn(self):
        assert np.allclose(change_of_basis(math.pi / 2, (1.0, 0.0)), (0.0, -1.0), atol=1e-15)

    def test_round_trip(self):
        for theta in rng.uniform(-4, 4, 20):
            p = rng.normal(size=2)
            q = change_of_basis(theta, change_of_basis(theta, p, "to_rotated"), "to_cartesian")
            assert np.max(np.abs(q - p)) < 1e-14

    def test_first_rotated_coordinate_is_arc_parameter(self):
        theta, p = 1.1, np.array([0.4, 2.0])
        lk = LineKernel(SiacKernel(1), theta)
        assert change_of_basis(theta, p)[0] == pytest.approx(lk.arc_parameter(*p))

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            change_of_basis(0.1, (1, 0), "sideways")
