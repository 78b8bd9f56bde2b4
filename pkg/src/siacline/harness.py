"""Experiment drivers: convergence tables, error slices, contours, cost reports.

Everything here writes plain CSV; plotting is left to external tools.
"""

import ast
import csv
import math
import operator
import re
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dg import UniformMesh2D, l2_error, project_initial, solve_advection
from .filtering import (FilterConfig, filter_at, filter_field, filter_point, filtered_l2_error,
                        uniform_grid)

TFINAL = 2.0
CFL = 0.05
ROUNDOFF_FLOOR = 1e-13

INITIAL_CONDITIONS = {
    "sinxy": lambda x, y: np.sin(x + y),
    "sinxcosy": lambda x, y: np.sin(x) * np.cos(y),
}


def initial_condition(name):
    try:
        return INITIAL_CONDITIONS[name]
    except KeyError:
        raise ValueError(f"unknown initial condition {name!r}; choose from {sorted(INITIAL_CONDITIONS)}") from None


def exact_solution(ic, t, velocity=(1.0, 1.0)):
    """Exact advected profile ``u0(x - a t, y - b t)``."""
    u0 = initial_condition(ic) if isinstance(ic, str) else ic
    a, b = velocity
    return lambda x, y: u0(x - a * t, y - b * t)


# -- parsing ---------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "sqrt2": math.sqrt(2.0), "e": math.e}


def parse_number(text):
    """Parse ``"0.5"``, ``"3pi/4"``, ``"pi/4"``, ``"sqrt2"``, ``"1/sqrt(2)"`` and friends."""
    src = re.sub(r"(\d)\s*(pi|sqrt)", r"\1*\2", str(text).strip())

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id == "sqrt" and len(node.args) == 1):
            return math.sqrt(ev(node.args[0]))
        raise ValueError(f"cannot parse number {text!r}")

    try:
        return ev(ast.parse(src, mode="eval"))
    except SyntaxError:
        raise ValueError(f"cannot parse number {text!r}") from None


def parse_filter(text):
    """``line:THETA[:MU]`` or ``tensor[:MU]``; omitted ``MU`` uses the default scaling."""
    parts = [p.strip() for p in text.strip().split(":")]
    kind = parts[0]
    if kind == "line":
        if len(parts) not in (2, 3):
            raise ValueError(f"line filter needs line:THETA[:MU], got {text!r}")
        mu = parse_number(parts[2]) if len(parts) == 3 else None
        return FilterConfig("line", parse_number(parts[1]), mu)
    if kind == "tensor":
        if len(parts) > 2:
            raise ValueError(f"tensor filter takes tensor[:MU], got {text!r}")
        return FilterConfig("tensor", 0.0, parse_number(parts[1]) if len(parts) == 2 else None)
    raise ValueError(f"unknown filter kind in {text!r}")


def parse_filters(text):
    return [parse_filter(p) for p in re.split(r"[;\s]+", text.strip()) if p]


def parse_int_list(text):
    return [int(v) for v in re.split(r"[,\s]+", str(text).strip()) if v]


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key] = value
    return {
        "ic": cfg.get("ic", "sinxy"),
        "ks": parse_int_list(cfg.get("k", "1")),
        "Ns": parse_int_list(cfg.get("N", "20,40")),
        "filters": parse_filters(cfg.get("filters", "")),
        "tfinal": parse_number(cfg.get("tfinal", TFINAL)),
        "cfl": parse_number(cfg.get("cfl", CFL)),
    }


# -- convergence studies ---------------------------------------------------

@dataclass
class ConvergenceRow:
    k: int
    N: int
    filter: str
    theta: float
    mu: float
    l2_error: float
    order: float = None
    ic: str = ""
    tfinal: float = TFINAL
    cfl: float = CFL

    @property
    def descriptor(self):
        return (self.k, self.filter, round(self.theta, 12), round(self.mu, 12))

    @property
    def flag(self):
        return "near_roundoff" if self.l2_error < ROUNDOFF_FLOOR else ""


STUDY_HEADER = ["k", "N", "filter", "theta", "mu", "l2_error", "order", "ic", "tfinal", "cfl", "flag"]


@dataclass
class ConvergenceReport:
    rows: list = field(default_factory=list)

    def fill_orders(self):
        """Order against the next coarser row with the same descriptor."""
        last = {}
        for row in sorted(self.rows, key=lambda r: (r.descriptor, r.N)):
            prev = last.get(row.descriptor)
            row.order = None
            if prev is not None and prev.N < row.N and prev.l2_error > 0 and row.l2_error > 0:
                row.order = math.log(prev.l2_error / row.l2_error) / math.log(row.N / prev.N)
            last[row.descriptor] = row
        return self

    def find(self, k, N, kind, theta=0.0, mu=None):
        for r in self.rows:
            if r.k == k and r.N == N and r.filter == kind and abs(r.theta - theta) < 1e-9 \
                    and (mu is None or abs(r.mu - mu) < 1e-9):
                return r
        raise KeyError((k, N, kind, theta, mu))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(STUDY_HEADER)
            for r in self.rows:
                w.writerow([
                    r.k, r.N, r.filter, f"{r.theta:.12g}", f"{r.mu:.12g}", f"{r.l2_error:.5e}",
                    "" if r.order is None else f"{r.order:.4f}", r.ic, f"{r.tfinal:.12g}",
                    f"{r.cfl:.12g}", r.flag,
                ])


def solve_case(ic, k, N, tfinal=TFINAL, cfl=CFL):
    mesh = UniformMesh2D(N, N)
    return solve_advection(project_initial(mesh, k, initial_condition(ic)), tfinal, cfl=cfl)


def run_convergence_study(ic, ks, Ns, filters, tfinal=TFINAL, cfl=CFL, solver=None):
    """Unfiltered and filtered L2 errors for every ``(k, N)`` and filter.

    ``solver(ic, k, N, tfinal, cfl)`` may be supplied to reuse solved fields.
    """
    solver = solver or solve_case
    exact = exact_solution(ic, tfinal)
    report = ConvergenceReport()
    for k in ks:
        for N in Ns:
            try:
                uh = solver(ic, k, N, tfinal, cfl)
                report.rows.append(ConvergenceRow(k, N, "dg", 0.0, 0.0, l2_error(uh, exact),
                                                  ic=ic, tfinal=tfinal, cfl=cfl))
                for cfg in filters:
                    err = filtered_l2_error(uh, cfg, exact)
                    report.rows.append(ConvergenceRow(k, N, cfg.kind, cfg.theta, cfg.mu, err,
                                                      ic=ic, tfinal=tfinal, cfl=cfl))
            except Exception as exc:
                raise RuntimeError(f"case ic={ic} k={k} N={N} failed: {exc}") from exc
    return report.fill_orders()


# -- slices and contours ---------------------------------------------------

@dataclass
class SliceProfile:
    cut: str
    position: np.ndarray
    errors: dict  # name -> pointwise |error| along the cut

    def write_csv(self, path):
        names = list(self.errors)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s"] + names)
            for i, s in enumerate(self.position):
                w.writerow([f"{s:.12g}"] + [f"{self.errors[n][i]:.6e}" for n in names])


def cut_points(mesh, cut, samples=1000):
    """Sample points along a cut: ``horizontal[:Y]``, ``vertical[:X]`` or ``diagonal``.

    Horizontal and vertical cuts default to the middle of the central
    element row/column so they do not run along a mesh line.  Samples sit
    at the midpoints of ``samples`` equal pieces.
    """
    name, _, arg = cut.partition(":")
    u = (np.arange(samples) + 0.5) / samples
    if name == "horizontal":
        c = parse_number(arg) if arg else mesh.ymin + (mesh.ny // 2 + 0.5) * mesh.hy
        x = mesh.xmin + u * mesh.lx
        return x - mesh.xmin, x, np.full_like(x, c)
    if name == "vertical":
        c = parse_number(arg) if arg else mesh.xmin + (mesh.nx // 2 + 0.5) * mesh.hx
        y = mesh.ymin + u * mesh.ly
        return y - mesh.ymin, np.full_like(y, c), y
    if name == "diagonal":
        x = mesh.xmin + u * mesh.lx
        y = mesh.ymin + u * mesh.ly
        return u * math.hypot(mesh.lx, mesh.ly), x, y
    raise ValueError(f"unknown cut {cut!r}")


def filter_name(cfg):
    if cfg.kind == "tensor":
        return f"tensor_mu{cfg.mu:.4g}"
    return f"line_theta{cfg.theta:.4g}_mu{cfg.mu:.4g}"


def run_slices(uh, exact, filters, cuts=("horizontal", "vertical", "diagonal"), samples=1000):
    """Pointwise error profiles of the DG field and each filter along each cut."""
    out = []
    for cut in cuts:
        s, x, y = cut_points(uh.mesh, cut, samples)
        ref = exact(x, y)
        errors = {"dg": np.abs(uh(x, y) - ref)}
        for cfg in filters:
            vals, _ = filter_at(uh, cfg, x, y)
            errors[filter_name(cfg)] = np.abs(vals - ref)
        out.append(SliceProfile(cut, s, errors))
    return out


def total_variation(values):
    return float(np.sum(np.abs(np.diff(np.asarray(values)))))


LOG_FLOOR = 1e-300


def log_error(err):
    """log10 of pointwise error, ``-inf`` where the error is below 1e-300."""
    err = np.asarray(err, float)
    with np.errstate(divide="ignore"):
        return np.where(err < LOG_FLOOR, -np.inf, np.log10(np.maximum(err, LOG_FLOOR)))


def run_contours(uh, exact, filters, grid):
    """log10 pointwise error on a uniform ``nx_s x ny_s`` grid for DG and each filter."""
    nx_s, ny_s = grid
    out = {}
    X, Y = uniform_grid(uh.mesh, nx_s, ny_s)
    ref = exact(X, Y)
    out["dg"] = (X, Y, log_error(np.abs(uh(X, Y) - ref)))
    for cfg in filters:
        res = filter_field(uh, cfg, ("uniform", nx_s, ny_s))
        out[filter_name(cfg)] = (X, Y, log_error(np.abs(res.values - ref)))
    return out


def write_grid_csv(path, X, Y, Z):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "log10_error"])
        for x, y, z in zip(X.ravel(), Y.ravel(), Z.ravel()):
            w.writerow([f"{x:.12g}", f"{y:.12g}", "-inf" if np.isneginf(z) else f"{z:.6f}"])


# -- cost accounting -------------------------------------------------------

DEFAULT_COST_FILTERS = (FilterConfig("tensor", 0.0, 1.0), FilterConfig("line", 3 * math.pi / 4))


@dataclass
class CostRow:
    k: int
    filter: FilterConfig
    intersection_scans: int
    integrals: int
    quadrature_evals: int
    seconds: float


def run_counts_timing(point, ks, filters=DEFAULT_COST_FILTERS, N=20, repeats=5, inner=10):
    """Operation counts and median wall time to post-process one point.

    Each timing sample runs the point filter ``inner`` times; the reported
    time is the median over ``repeats`` samples divided by ``inner``.
    """
    rows = []
    for k in ks:
        uh = project_initial(UniformMesh2D(N, N), k, initial_condition("sinxy"))
        for cfg in filters:
            _, reg = filter_point(uh, point, cfg, return_regions=True)
            samples = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                for _ in range(inner):
                    filter_point(uh, point, cfg)
                samples.append((time.perf_counter() - t0) / inner)
            c = reg.counters
            rows.append(CostRow(k, cfg, c.intersection_scans, c.integrals, c.quadrature_evals,
                                statistics.median(samples)))
    return rows


def write_cost_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "filter", "theta", "mu", "intersection_scans", "integrals",
                    "quadrature_evals", "seconds"])
        for r in rows:
            w.writerow([r.k, r.filter.kind, f"{r.filter.theta:.12g}", f"{r.filter.mu:.12g}",
                        r.intersection_scans, r.integrals, r.quadrature_evals, f"{r.seconds:.6e}"])
