"""Tensor-product and line SIAC convolution of modal DG fields.

Both filters split the convolution footprint at every point where the
integrand stops being a single polynomial (kernel knots and mesh-line
crossings) and integrate each piece with Gauss-Legendre quadrature, so
the result is exact up to rounding.  The footprint is laid out in
unwrapped coordinates; only the field evaluation points are wrapped.

Each point filter reduces to a *stencil*: displacements ``d_q`` and
weights ``w_q`` with ``u*(p) = sum_q w_q u(p - d_q)``.  On a uniform
periodic mesh the stencil depends only on where ``p`` sits inside its
element, which ``filter_field`` exploits to filter whole grids at once.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dg import legendre_basis, gauss
from .kernel import SiacKernel, kernel_breakpoints, kernel_eval, merge_sorted


class FilterConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FilterConfig:
    """Which filter to apply and how large.

    ``mu`` multiplies the mesh size to give the kernel scaling.  When
    omitted it defaults to ``|cos theta| + |sin theta|`` for line filters
    and to 1 for the tensor filter.
    """

    kind: str
    theta: float = 0.0
    mu: float = None
    k: int = None

    def __post_init__(self):
        if self.kind not in ("tensor", "line"):
            raise FilterConfigError(f"unknown filter kind {self.kind!r}")
        if self.mu is None:
            mu = abs(math.cos(self.theta)) + abs(math.sin(self.theta)) if self.kind == "line" else 1.0
            object.__setattr__(self, "mu", mu)
        if not self.mu > 0:
            raise FilterConfigError("mu must be positive")

    def label(self):
        if self.kind == "tensor":
            return f"tensor(mu={self.mu:.6g})"
        return f"line(theta={self.theta:.6g},mu={self.mu:.6g})"


@dataclass
class OpCounters:
    intersection_scans: int = 0
    integrals: int = 0
    quadrature_evals: int = 0

    def __add__(self, other):
        return OpCounters(
            self.intersection_scans + other.intersection_scans,
            self.integrals + other.integrals,
            self.quadrature_evals + other.quadrature_evals,
        )

    def __mul__(self, n):
        return OpCounters(self.intersection_scans * n, self.integrals * n, self.quadrature_evals * n)

    __rmul__ = __mul__

    def as_dict(self):
        return {
            "intersection_scans": self.intersection_scans,
            "integrals": self.integrals,
            "quadrature_evals": self.quadrature_evals,
        }


@dataclass
class RegionDecomposition:
    """Break points of a footprint plus the work needed to integrate it.

    ``breakpoints`` is one sorted array of arc parameters for a line
    footprint, or a pair of per-axis arrays for a tensor footprint.
    """

    breakpoints: object
    counters: OpCounters = field(default_factory=OpCounters)

    @property
    def is_tensor(self):
        return isinstance(self.breakpoints, tuple)

    @property
    def num_regions(self):
        if self.is_tensor:
            bx, by = self.breakpoints
            return (len(bx) - 1) * (len(by) - 1)
        return len(self.breakpoints) - 1


def quadrature_points(k):
    """Gauss points per 1D piece: ``2k + 2``, exact for degree ``4k + 3``."""
    return 2 * k + 2


def mesh_scale(mesh):
    """Reference length for ``H = mu h``; equals ``h`` on square meshes.

    For ``hx != hy`` this is ``sqrt((hx^2 + hy^2) / 2)`` so that ``mu =
    sqrt(2)`` gives ``H = hx cos(t) + hy sin(t)`` at ``t = arctan(hy/hx)``.
    """
    if math.isclose(mesh.hx, mesh.hy, rel_tol=1e-12):
        return mesh.hx
    return math.sqrt(0.5 * (mesh.hx ** 2 + mesh.hy ** 2))


def kernels_for(config, mesh, k):
    """Scaled kernel(s) for a configuration: one for line, ``(kx, ky)`` for tensor."""
    k = config.k if config.k is not None else k
    base = SiacKernel(k)
    if config.kind == "line":
        return base.rescaled(config.mu * mesh_scale(mesh))
    return base.rescaled(config.mu * mesh.hx), base.rescaled(config.mu * mesh.hy)


def _check_fits(half_width, extent, what):
    if 2 * half_width > extent * (1 + 1e-12):
        raise FilterConfigError(
            f"{what} support {2 * half_width:.6g} exceeds domain extent {extent:.6g}")


def _crossings(p, direction, lo, h, R):
    """Arc parameters ``t`` in ``(-R, R)`` where ``p - t*direction`` meets ``lo + i*h``.

    Returns the crossings and the number of candidate lines tested.
    """
    if abs(direction) < 1e-12:
        return [], 0
    a, b = p - R * abs(direction), p + R * abs(direction)
    first = math.ceil((a - lo) / h)
    last = math.floor((b - lo) / h)
    out = []
    for i in range(first, last + 1):
        t = (p - (lo + i * h)) / direction
        if -R < t < R:
            out.append(t)
    return out, max(0, last - first + 1)


def line_footprint(point, kernel, theta, mesh, extra_breaks=()):
    """Break points of the line convolution around ``point``.

    The arc parameter runs over ``[-R, R]`` with ``R = (3k+1) H / 2`` and
    evaluation points ``point - t (cos theta, sin theta)``.
    """
    R = kernel.half_width
    _check_fits(R, min(mesh.lx, mesh.ly), "line kernel")
    c, s = math.cos(theta), math.sin(theta)
    px, py = float(point[0]), float(point[1])
    tx, nx_scan = _crossings(px, c, mesh.xmin, mesh.hx, R)
    ty, ny_scan = _crossings(py, s, mesh.ymin, mesh.hy, R)
    knots = list(kernel_breakpoints(kernel))
    extra = [t for t in extra_breaks if -R < t < R]
    bp = merge_sorted(sorted(knots + tx + ty + extra), 1e-12 * kernel.scaling)
    n = quadrature_points(kernel.k)
    nreg = len(bp) - 1
    return RegionDecomposition(bp, OpCounters(nx_scan + ny_scan, nreg, nreg * n))


def _axis_breaks(p, kernel, lo, h, extent, what):
    R = kernel.half_width
    _check_fits(R, extent, what)
    cross, scans = _crossings(p, 1.0, lo, h, R)
    bp = merge_sorted(sorted(list(kernel_breakpoints(kernel)) + cross), 1e-12 * kernel.scaling)
    return bp, scans


def tensor_footprint(point, kernel_x, kernel_y, mesh):
    """Per-axis break points of the tensor-product convolution around ``point``."""
    bx, sx = _axis_breaks(float(point[0]), kernel_x, mesh.xmin, mesh.hx, mesh.lx, "x kernel")
    by, sy = _axis_breaks(float(point[1]), kernel_y, mesh.ymin, mesh.hy, mesh.ly, "y kernel")
    n = quadrature_points(kernel_x.k)
    nreg = (len(bx) - 1) * (len(by) - 1)
    return RegionDecomposition((bx, by), OpCounters(sx + sy, nreg, nreg * n * n))


def _piecewise_gauss(bp, n):
    nodes, weights = gauss(n)
    a, b = bp[:-1], bp[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    t = (mid[:, None] + half[:, None] * nodes).ravel()
    w = (half[:, None] * weights).ravel()
    return t, w


def line_stencil(point, kernel, theta, mesh, extra_breaks=()):
    """Displacements ``(Q, 2)``, weights ``(Q,)`` and decomposition for a line filter."""
    reg = line_footprint(point, kernel, theta, mesh, extra_breaks)
    t, w = _piecewise_gauss(reg.breakpoints, quadrature_points(kernel.k))
    wk = w * kernel_eval(kernel, t)
    D = np.stack([t * math.cos(theta), t * math.sin(theta)], axis=1)
    return D, wk, reg


def tensor_stencil(point, kernel_x, kernel_y, mesh):
    reg = tensor_footprint(point, kernel_x, kernel_y, mesh)
    n = quadrature_points(kernel_x.k)
    bx, by = reg.breakpoints
    sx, wx = _piecewise_gauss(bx, n)
    sy, wy = _piecewise_gauss(by, n)
    wx = wx * kernel_eval(kernel_x, sx)
    wy = wy * kernel_eval(kernel_y, sy)
    D = np.stack(np.broadcast_arrays(sx[:, None], sy[None, :]), axis=-1).reshape(-1, 2)
    W = np.outer(wx, wy).ravel()
    return D, W, reg


def filter_point_line(field, point, kernel, theta, return_regions=False):
    """Line-filtered value ``int K_H(t) u(point - t (cos, sin)) dt``."""
    D, W, reg = line_stencil(point, kernel, theta, field.mesh)
    vals = field(point[0] - D[:, 0], point[1] - D[:, 1])
    out = float(np.dot(W, vals))
    return (out, reg) if return_regions else out


def filter_point_tensor(field, point, kernel_x, kernel_y, return_regions=False):
    """Tensor-product filtered value at ``point``."""
    D, W, reg = tensor_stencil(point, kernel_x, kernel_y, field.mesh)
    vals = field(point[0] - D[:, 0], point[1] - D[:, 1])
    out = float(np.dot(W, vals))
    return (out, reg) if return_regions else out


def filter_point(field, point, config, return_regions=False):
    kern = kernels_for(config, field.mesh, field.degree)
    if config.kind == "line":
        return filter_point_line(field, point, kern, config.theta, return_regions)
    return filter_point_tensor(field, point, *kern, return_regions=return_regions)


def brute_force_filter_point(field, point, config, slots=None):
    """Same convolution by blind composite midpoint sums, ignoring break points.

    ``slots`` defaults to 20000 along the line, or 2000 per axis for the
    tensor filter.  Accuracy is limited by the sampling; use only as a
    cross-check.
    """
    kern = kernels_for(config, field.mesh, field.degree)
    px, py = float(point[0]), float(point[1])
    if config.kind == "line":
        n = slots or 20000
        R = kern.half_width
        dt = 2 * R / n
        t = -R + (np.arange(n) + 0.5) * dt
        vals = field(px - t * math.cos(config.theta), py - t * math.sin(config.theta))
        return float(dt * np.sum(kernel_eval(kern, t) * vals))
    n = slots or 2000
    kx, ky = kern
    sx = -kx.half_width + (np.arange(n) + 0.5) * (2 * kx.half_width / n)
    sy = -ky.half_width + (np.arange(n) + 0.5) * (2 * ky.half_width / n)
    wx = kernel_eval(kx, sx) * (2 * kx.half_width / n)
    wy = kernel_eval(ky, sy) * (2 * ky.half_width / n)
    total = 0.0
    ys = py - sy
    for lo in range(0, n, 200):
        block = slice(lo, lo + 200)
        vals = field((px - sx[block])[:, None], ys[None, :])
        total += float(wx[block] @ vals @ wy)
    return total


def _field_bounds(field, npts=None):
    """Sampled maxima of ``|u|``, ``|grad u|``, ``|hess u|`` and of interface jumps."""
    from .dg import legendre_basis_derivative

    k, mesh, C = field.degree, field.mesh, field.coeffs
    s = np.linspace(-1.0, 1.0, npts or 2 * k + 5)
    B = legendre_basis(k, s)
    dB = legendre_basis_derivative(k, s)
    d2B = np.zeros_like(B)
    for m in range(2, k + 1):
        c = np.zeros(m + 1)
        c[m] = math.sqrt(m + 0.5)
        d2B[:, m] = np.polynomial.legendre.legval(s, np.polynomial.legendre.legder(c, 2))
    sx, sy = 2.0 / mesh.hx, 2.0 / mesh.hy
    ev = lambda A, Bm: np.einsum("ijmn,am,bn->ijab", C, A, Bm)  # noqa: E731
    u = ev(B, B)
    ux, uy = sx * ev(dB, B), sy * ev(B, dB)
    uxx, uyy, uxy = sx * sx * ev(d2B, B), sy * sy * ev(B, d2B), sx * sy * ev(dB, dB)
    U0 = np.abs(u).max()
    U1 = np.sqrt(ux ** 2 + uy ** 2).max()
    U2 = np.sqrt(uxx ** 2 + uyy ** 2 + 2 * uxy ** 2).max()
    jx = np.abs(u[:, :, -1, :] - np.roll(u[:, :, 0, :], -1, axis=0)).max()
    jy = np.abs(u[:, :, :, -1] - np.roll(u[:, :, :, 0], -1, axis=1)).max()
    return U0, U1, U2, max(jx, jy)


def _kernel_bounds(kernel, samples=4001):
    from .splines import bspline_derivative

    H, k = kernel.scaling, kernel.k
    t = np.linspace(-kernel.half_width, kernel.half_width, samples) / H
    gam = range(-k, k + 1)

    def deriv(a):
        if a >= k + 1:
            return 0.0
        vals = sum(c * np.asarray(bspline_derivative(k + 1, a, t - g)) for c, g in zip(kernel.coefficients, gam))
        return float(np.abs(vals).max()) / H ** (a + 1)

    K0, K1, K2 = deriv(0), deriv(1), deriv(2)
    L1 = float(np.abs(kernel_eval(kernel, t * H)).sum() * (t[1] - t[0]) * H)
    return K0, K1, K2, L1


def _lines_hit(lo_coord, hi_coord, origin, h):
    return max(0, math.floor((hi_coord - origin) / h) - math.ceil((lo_coord - origin) / h) + 1)


def midpoint_error_bound(field, point, config, slots=None):
    """A priori error bound for ``brute_force_filter_point``, with safety factor 2.

    Jump discontinuities of the integrand cost at most ``|jump| * step / 2``
    each; smooth pieces cost ``step^2 / 24`` times the integrated second
    derivative; slope breaks cost ``|slope jump| * step^2 / 8``.  Field
    maxima come from dense per-element sampling, the number of jumps from
    the mesh lines meeting the footprint's bounding box.
    """
    mesh = field.mesh
    U0, U1, U2, J = _field_bounds(field)
    kern = kernels_for(config, mesh, field.degree)
    px, py = float(point[0]), float(point[1])
    if config.kind == "line":
        n = slots or 20000
        K0, K1, K2, _ = _kernel_bounds(kern)
        R = kern.half_width
        step = 2 * R / n
        c, s = abs(math.cos(config.theta)), abs(math.sin(config.theta))
        ncross = (_lines_hit(px - R * c, px + R * c, mesh.xmin, mesh.hx) if c > 1e-12 else 0) + \
                 (_lines_hit(py - R * s, py + R * s, mesh.ymin, mesh.hy) if s > 1e-12 else 0)
        nknots = (2 * kern.k + 1) * (kern.k + 2)
        g2 = K2 * U0 + 2 * K1 * U1 + K0 * U2
        slope = 2 * (K1 * U0 + K0 * U1)
        est = ncross * J * K0 * step / 2 + step ** 2 * (2 * R * g2 / 24 + (nknots + ncross) * slope / 8)
        return 2.0 * est
    n = slots or 2000
    (kx, ky) = kern
    Kx0, Kx1, Kx2, Lx = _kernel_bounds(kx)
    Ky0, Ky1, Ky2, Ly = _kernel_bounds(ky)
    Rx, Ry = kx.half_width, ky.half_width
    dx, dy = 2 * Rx / n, 2 * Ry / n
    nx_lines = _lines_hit(px - Rx, px + Rx, mesh.xmin, mesh.hx)
    ny_lines = _lines_hit(py - Ry, py + Ry, mesh.ymin, mesh.hy)
    nknots = (2 * kx.k + 1) * (kx.k + 2)
    first = nx_lines * J * Kx0 * Ly * dx / 2 + ny_lines * J * Ky0 * Lx * dy / 2
    g2x = (Kx2 * U0 + 2 * Kx1 * U1 + Kx0 * U2) * Ly
    g2y = (Ky2 * U0 + 2 * Ky1 * U1 + Ky0 * U2) * Lx
    second = (dx ** 2 * 2 * Rx * g2x + dy ** 2 * 2 * Ry * g2y) / 24 + \
        (dx ** 2 * (nknots + nx_lines) * 2 * (Kx1 * U0 + Kx0 * U1) * Ly
         + dy ** 2 * (nknots + ny_lines) * 2 * (Ky1 * U0 + Ky0 * U1) * Lx) / 8
    return 2.0 * (first + second)


def filter_point_1d(coeffs, xmin, h, kernel, x):
    """1D SIAC filter of a periodic modal Legendre field.

    ``coeffs`` has shape ``(n_elem, k+1)`` in the orthonormal basis.  Kept
    deliberately independent of the 2D machinery.
    """
    coeffs = np.asarray(coeffs, float)
    nel, p = coeffs.shape
    length = nel * h
    R = kernel.half_width
    cross = [x - (xmin + i * h) for i in range(math.ceil((x - R - xmin) / h), math.floor((x + R - xmin) / h) + 1)]
    bp = merge_sorted(sorted(list(kernel_breakpoints(kernel)) + [c for c in cross if -R < c < R]),
                      1e-12 * kernel.scaling)
    t, w = _piecewise_gauss(bp, 2 * kernel.k + 2)
    s = np.mod(x - t - xmin, length) / h
    idx = np.floor(s).astype(int) % nel
    xi = 2 * (s - np.floor(s)) - 1
    vals = np.sum(coeffs[idx] * legendre_basis(p - 1, xi), axis=1)
    return float(np.sum(w * kernel_eval(kernel, t) * vals))


@dataclass
class FilteredSamples:
    """Filtered values at sample points plus summed operation counters.

    For ``error_grid`` sampling ``values``, ``x``, ``y`` and ``weights`` have
    shape ``(nx, ny, n, n)`` matching ``dg.element_quadrature``; for uniform
    sampling they have shape ``(nx_s, ny_s)`` and ``weights`` is None.
    """

    values: np.ndarray
    x: np.ndarray
    y: np.ndarray
    counters: OpCounters
    weights: np.ndarray = None


def error_grid(mesh, k):
    """Gauss points (``k + 3`` per direction) used for L2 errors."""
    from .dg import element_quadrature

    return element_quadrature(mesh, k + 3)


def uniform_grid(mesh, nx_s, ny_s):
    """Periodic sample grid starting at the lower-left corner."""
    xs = mesh.xmin + np.arange(nx_s) * (mesh.lx / nx_s)
    ys = mesh.ymin + np.arange(ny_s) * (mesh.ly / ny_s)
    return np.meshgrid(xs, ys, indexing="ij")


def _stencil_for(config, field, point):
    kern = kernels_for(config, field.mesh, field.degree)
    if config.kind == "line":
        return line_stencil(point, kern, config.theta, field.mesh)
    return tensor_stencil(point, *kern, field.mesh)


def filter_at(field, config, x, y):
    """Filter ``field`` at arbitrary sample points (any matching shapes)."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    I, J, XI, ETA = field.mesh.locate(x, y)
    out, counters = filter_located(field, config, I.ravel(), J.ravel(), XI.ravel(), ETA.ravel(),
                                   group_decimals=12)
    return out.reshape(x.shape), counters


def filter_located(field, config, I, J, XI, ETA, group_decimals=None):
    """Filter at points given as element indices plus reference coordinates.

    Points are grouped by their position inside the element; one stencil
    per group is built and applied to every element of the group.  With
    ``group_decimals`` set, positions equal after rounding share a group
    (and the stencil of its first member).
    """
    mesh = field.mesh
    local = np.stack([XI, ETA], axis=1)
    key = local if group_decimals is None else np.round(local, group_decimals)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    out = np.empty(I.size)
    total = OpCounters()
    p = field.degree + 1
    C = field.coeffs
    for g, f0 in enumerate(first):
        xi0, eta0 = local[f0]
        members = np.nonzero(inverse == g)[0]
        p0 = (mesh.xmin + 0.5 * (xi0 + 1) * mesh.hx, mesh.ymin + 0.5 * (eta0 + 1) * mesh.hy)
        D, W, reg = _stencil_for(config, field, p0)
        total = total + reg.counters * members.size
        sx = (p0[0] - D[:, 0] - mesh.xmin) / mesh.hx
        sy = (p0[1] - D[:, 1] - mesh.ymin) / mesh.hy
        di, dj = np.floor(sx), np.floor(sy)
        bx = legendre_basis(field.degree, 2 * (sx - di) - 1)
        by = legendre_basis(field.degree, 2 * (sy - dj) - 1)
        offsets, which = np.unique(np.stack([di, dj], axis=1).astype(np.int64), axis=0,
                                   return_inverse=True)
        which = which.ravel()
        P = np.zeros((len(offsets), p, p))
        np.add.at(P, which, W[:, None, None] * bx[:, :, None] * by[:, None, :])
        ii = np.mod(I[members, None] + offsets[None, :, 0], mesh.nx)
        jj = np.mod(J[members, None] + offsets[None, :, 1], mesh.ny)
        out[members] = np.einsum("gomn,omn->g", C[ii, jj], P)
    return out, total


def filter_field(field, config, sampling="error_grid"):
    """Apply a filter at every sample point.

    ``sampling`` is ``"error_grid"`` (the per-element Gauss points used by
    ``l2_error``) or ``("uniform", nx_s, ny_s)``.
    """
    mesh = field.mesh
    if sampling == "error_grid":
        n = field.degree + 3
        X, Y, W = error_grid(mesh, field.degree)
        s, _ = gauss(n)
        I, J, XI, ETA = np.broadcast_arrays(
            np.arange(mesh.nx)[:, None, None, None], np.arange(mesh.ny)[None, :, None, None],
            s[None, None, :, None], s[None, None, None, :])
        vals, counters = filter_located(field, config, I.ravel(), J.ravel(), XI.ravel(), ETA.ravel())
        return FilteredSamples(vals.reshape(X.shape), X, Y, counters, W)
    kind, nx_s, ny_s = sampling
    if kind != "uniform" or nx_s < 1 or ny_s < 1:
        raise FilterConfigError(f"bad sampling {sampling!r}")
    X, Y = uniform_grid(field.mesh, nx_s, ny_s)
    vals, counters = filter_at(field, config, X, Y)
    return FilteredSamples(vals, X, Y, counters)


def filtered_l2_error(field, config, exact):
    res = filter_field(field, config, "error_grid")
    return float(np.sqrt(np.sum(res.weights * (res.values - exact(res.x, res.y)) ** 2)))
