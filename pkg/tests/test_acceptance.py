"""Acceptance criteria 1-9.

Each criterion is evaluated once (cached) and split into named parts so a
magnitude miss does not hide an order pass.  One PASS/FAIL line per
criterion is printed in the pytest terminal summary, or directly with
``python3 tests/test_acceptance.py``.
"""

import functools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES, solved  # noqa: E402

from siacline.dg import l2_error  # noqa: E402
from siacline.filtering import (  # noqa: E402
    FilterConfig,
    brute_force_filter_point,
    filter_point,
    filtered_l2_error,
    midpoint_error_bound,
)
from siacline.harness import exact_solution, run_counts_timing, run_slices, total_variation  # noqa: E402
from siacline.kernel import SiacKernel, reproduction_residual, solve_kernel_coefficients  # noqa: E402
from siacline.splines import (  # noqa: E402
    CentralBSpline,
    Direction2,
    bspline_eval,
    directional_dd_binomial_expansion,
    directional_divided_difference,
    divided_difference_1d,
    line_bspline,
)

SQ2 = math.sqrt(2.0)
LINE_3PI4 = FilterConfig("line", 3 * math.pi / 4, SQ2)
# published reference values used for magnitude checks
REF_UNFILTERED_N20 = {1: 9.7e-03, 2: 2.4e-04, 3: 4.5e-06}
REF_LINE_3PI4_N40 = {1: 1.9e-04, 2: 4.7e-08, 3: 6.9e-12}
REF_TENSOR_K1_N40 = 2.0e-04


def _emit(n, parts):
    ok = all(p[0] for p in parts.values())
    detail = "; ".join(f"{name} {'ok' if p[0] else 'MISS'} ({p[1]})" for name, p in parts.items())
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return parts


def _gauss_integral(f, breaks, n=8):
    s, w = np.polynomial.legendre.leggauss(n)
    return sum(0.5 * (b - a) * np.sum(w * f(0.5 * (a + b) + 0.5 * (b - a) * s))
               for a, b in zip(breaks[:-1], breaks[1:]))


def _errors(ic, k, N, cfg=None):
    uh = solved(ic, k, N)
    exact = exact_solution(ic, 2.0)
    return l2_error(uh, exact) if cfg is None else filtered_l2_error(uh, cfg, exact)


def _order(ic, k, cfg=None):
    e20, e40 = _errors(ic, k, 20, cfg), _errors(ic, k, 40, cfg)
    return e20, e40, math.log2(e20 / e40)


def _ratio_text(got, ref):
    # the area-normalised (RMS) norm divides by the domain side 2 pi
    return f"got {got:.2e} vs {ref:.1e}, x{got / ref:.2f}; RMS-norm x{got / (2 * math.pi) / ref:.2f}"


@functools.lru_cache(maxsize=None)
def criterion_1():
    t0 = time.perf_counter()
    parts = {}
    v = bspline_eval(3, 0.0)
    parts["psi3(0)"] = (abs(v - 0.75) < 1e-12, f"{v!r}")
    worst = max(abs(_gauss_integral(lambda x, l=l: bspline_eval(l, x), CentralBSpline(l).knots()) - 1.0)
                for l in range(1, 6))
    parts["unit mass l<=5"] = (worst < 1e-12, f"max dev {worst:.1e}")
    c = solve_kernel_coefficients(1)
    dev = float(np.max(np.abs(c - [-1 / 12, 7 / 6, -1 / 12])))
    parts["k=1 coefficients"] = (dev < 1e-12, f"dev {dev:.1e}")
    res = max(reproduction_residual(SiacKernel(k), p) for k in (1, 2, 3) for p in range(2 * k + 1))
    parts["reproduction"] = (res < 1e-9, f"max residual {res:.1e}")
    dt = time.perf_counter() - t0
    parts["runtime"] = (dt < 1.0, f"{dt:.2f}s")
    return _emit(1, parts)


@functools.lru_cache(maxsize=None)
def criterion_2():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst_line = 0.0
    for order in (2, 3, 4):
        for alpha in (1, 2, 3):
            for _ in range(50):
                theta = rng.uniform(0, 2 * math.pi)
                H = rng.uniform(0.1, 1.0)
                t = rng.uniform(-order / 2, order / 2) * H
                u = Direction2.from_angle(theta)
                lhs = float(directional_divided_difference(line_bspline(order, theta, H), u, H, alpha,
                                                           (t * u.ux, t * u.uy)))
                rhs = float(divided_difference_1d(lambda s: bspline_eval(order, s / H) / H, H, alpha, t))
                worst_line = max(worst_line, abs(lhs - rhs) / max(abs(rhs), 1.0))
    funcs = [lambda x, y: np.sin(x) * np.cos(y), lambda x, y: np.exp(0.5 * x - 0.2 * y),
             lambda x, y: (x ** 3 * y - 2 * x * y ** 2 + 1) / (1 + 0.1 * x * x)]
    worst_binom = 0.0
    for f in funcs:
        for alpha in (1, 2, 3, 4):
            for _ in range(10):
                theta, H, p = rng.uniform(0, 2 * math.pi), rng.uniform(0.2, 1.0), tuple(rng.uniform(-2, 2, 2))
                lhs = directional_dd_binomial_expansion(f, theta, H, alpha, p)
                rhs = directional_divided_difference(f, Direction2.from_angle(theta), H, alpha, p)
                worst_binom = max(worst_binom, abs(lhs - rhs) / max(abs(rhs), 1e-3))
    dt = time.perf_counter() - t0
    return _emit(2, {
        "line-spline identity": (worst_line < 1e-10, f"max rel {worst_line:.1e}"),
        "binomial expansion": (worst_binom < 1e-10, f"max rel {worst_binom:.1e}"),
        "runtime": (dt < 1.0, f"{dt:.2f}s"),
    })


@functools.lru_cache(maxsize=None)
def criterion_3():
    fields = {1: solved("sinxy", 1, 40), 2: solved("sinxy", 2, 20)}
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = {"line": 0.0, "tensor": 0.0}
    ok = True
    for k, uh in fields.items():
        for _ in range(20):
            p = rng.uniform(0, 2 * math.pi, 2)
            for cfg in (FilterConfig("line", rng.uniform(0, math.pi)), FilterConfig("tensor")):
                gap = abs(filter_point(uh, p, cfg) - brute_force_filter_point(uh, p, cfg))
                bound = midpoint_error_bound(uh, p, cfg)
                ok &= gap <= bound
                worst[cfg.kind] = max(worst[cfg.kind], gap / bound)
    dt = time.perf_counter() - t0
    # fixed-threshold spot checks on the k=1, N=40 field
    uh, p = fields[1], (1.3, 4.1)
    gl = abs(filter_point(uh, p, LINE_3PI4) - brute_force_filter_point(uh, p, LINE_3PI4))
    tcfg = FilterConfig("tensor")
    gt = abs(filter_point(uh, p, tcfg) - brute_force_filter_point(uh, p, tcfg))
    return _emit(3, {
        "within bound at 20 points, k=1,2": (ok, f"worst gap/bound line {worst['line']:.2f}, "
                                                 f"tensor {worst['tensor']:.2f}"),
        "line gap < 1e-6": (gl < 1e-6, f"{gl:.1e}"),
        "tensor gap < 1e-5": (gt < 1e-5, f"{gt:.1e}"),
        "runtime": (dt < 60.0, f"{dt:.1f}s"),
    })


@functools.lru_cache(maxsize=None)
def criterion_4():
    orders, mags = {}, {}
    for k in (1, 2, 3):
        e20, e40, q = _order("sinxy", k, None)
        orders[k] = (abs(q - (k + 1)) <= 0.2, f"k={k} order {q:.2f}")
        mags[k] = (e20 <= 2 * REF_UNFILTERED_N20[k] and e20 >= REF_UNFILTERED_N20[k] / 2,
                   f"k={k} " + _ratio_text(e20, REF_UNFILTERED_N20[k]))
    return _emit(4, {
        "orders k+1+-0.2": (all(v[0] for v in orders.values()), ", ".join(v[1] for v in orders.values())),
        "N=20 magnitudes within x2": (all(v[0] for v in mags.values()), ", ".join(v[1] for v in mags.values())),
    })


@functools.lru_cache(maxsize=None)
def criterion_5():
    floor = {1: 2.7, 2: 4.5, 3: 6.0}
    orders, mags = {}, {}
    for k in (1, 2, 3):
        _, e40, q = _order("sinxy", k, LINE_3PI4)
        orders[k] = (q >= floor[k], f"k={k} order {q:.2f} (>= {floor[k]})")
        ref = REF_LINE_3PI4_N40[k]
        mags[k] = (ref / 3 <= e40 <= 3 * ref, f"k={k} " + _ratio_text(e40, ref))
    return _emit(5, {
        "orders": (all(v[0] for v in orders.values()), ", ".join(v[1] for v in orders.values())),
        "N=40 magnitudes within x3": (all(v[0] for v in mags.values()), ", ".join(v[1] for v in mags.values())),
    })


@functools.lru_cache(maxsize=None)
def criterion_6():
    _, _, q0 = _order("sinxcosy", 2, FilterConfig("line", 0.0, 1.0))
    _, _, q45 = _order("sinxcosy", 2, FilterConfig("line", math.pi / 4, SQ2))
    return _emit(6, {
        "theta=0 stuck at 3.0+-0.3": (abs(q0 - 3.0) <= 0.3, f"order {q0:.2f}"),
        "theta=pi/4 >= 5.4": (q45 >= 5.4, f"order {q45:.2f}"),
    })


@functools.lru_cache(maxsize=None)
def criterion_7():
    _, e40, q = _order("sinxy", 1, FilterConfig("tensor", 0.0, 1.0))
    return _emit(7, {
        "order >= 2.8": (q >= 2.8, f"order {q:.2f}"),
        "N=40 magnitude within x3": (REF_TENSOR_K1_N40 / 3 <= e40 <= 3 * REF_TENSOR_K1_N40,
                                     _ratio_text(e40, REF_TENSOR_K1_N40)),
    })


@functools.lru_cache(maxsize=None)
def criterion_8():
    cfgs = (FilterConfig("tensor", 0.0, 1.0), LINE_3PI4)
    rows = run_counts_timing((0.3, 0.7), [1, 2, 3], cfgs, N=20, repeats=5)
    by = {(r.k, r.filter.kind): r for r in rows}
    share = by[1, "line"].quadrature_evals / by[1, "tensor"].quadrature_evals
    ratios = [by[k, "tensor"].seconds / by[k, "line"].seconds for k in (1, 2, 3)]
    faster = all(by[k, "line"].seconds < by[k, "tensor"].seconds for k in (1, 2, 3))
    return _emit(8, {
        "k=1 evals share <= 5%": (share <= 0.05, f"{by[1, 'line'].quadrature_evals}/"
                                                 f"{by[1, 'tensor'].quadrature_evals} = {100 * share:.1f}%"),
        "line faster": (faster, "tensor/line time " + ", ".join(f"{r:.1f}x" for r in ratios)),
        "ratio non-decreasing in k": (ratios[0] <= ratios[1] <= ratios[2], "k=1,2,3"),
    })


@functools.lru_cache(maxsize=None)
def criterion_9():
    uh = solved("sinxy", 3, 20)
    filters = [FilterConfig("line", 0.0, 1.0), FilterConfig("line", math.pi / 4, SQ2), LINE_3PI4]
    profiles = run_slices(uh, exact_solution("sinxy", 2.0), filters)
    names = list(profiles[0].errors)
    zero, rot = names[1], names[3]
    tv = {p.cut: {n: total_variation(e) for n, e in p.errors.items()} for p in profiles}
    rot_ratios = {c: tv[c][rot] / tv[c]["dg"] for c in tv}
    zero_vertical = tv["vertical"][zero] / tv["vertical"]["dg"]
    return _emit(9, {
        "3pi/4 TV <= 50% of DG on all cuts": (all(r <= 0.5 for r in rot_ratios.values()),
                                              ", ".join(f"{c} {r:.1e}" for c, r in rot_ratios.items())),
        "theta=0 fails on vertical cut": (zero_vertical > 0.5, f"vertical {zero_vertical:.2f}"),
    })


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]
CASES = [("1", "psi3(0)"), ("1", "unit mass l<=5"), ("1", "k=1 coefficients"), ("1", "reproduction"),
         ("1", "runtime"),
         ("2", "line-spline identity"), ("2", "binomial expansion"), ("2", "runtime"),
         ("3", "within bound at 20 points, k=1,2"), ("3", "line gap < 1e-6"), ("3", "tensor gap < 1e-5"),
         ("3", "runtime"),
         ("4", "orders k+1+-0.2"), ("4", "N=20 magnitudes within x2"),
         ("5", "orders"), ("5", "N=40 magnitudes within x3"),
         ("6", "theta=0 stuck at 3.0+-0.3"), ("6", "theta=pi/4 >= 5.4"),
         ("7", "order >= 2.8"), ("7", "N=40 magnitude within x3"),
         ("8", "k=1 evals share <= 5%"), ("8", "line faster"), ("8", "ratio non-decreasing in k"),
         ("9", "3pi/4 TV <= 50% of DG on all cuts"), ("9", "theta=0 fails on vertical cut")]


@pytest.mark.parametrize("criterion,part", CASES, ids=[f"c{c}-{p}" for c, p in CASES])
def test_acceptance(criterion, part):
    ok, detail = CRITERIA[int(criterion) - 1]()[part]
    assert ok, f"criterion {criterion} / {part}: {detail}"


if __name__ == "__main__":
    for fn in CRITERIA:
        fn()
