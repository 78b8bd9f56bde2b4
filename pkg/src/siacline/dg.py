"""Modal discontinuous Galerkin solver for 2D linear advection.

Fields live on a periodic uniform quadrilateral mesh.  Each element
carries a ``(k+1) x (k+1)`` block of coefficients in the orthonormal
tensor Legendre basis on ``[-1, 1]^2``; index ``[i, j, m, n]`` is element
``(i, j)``, x-mode ``m``, y-mode ``n``.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg


class UnstableTimeStep(RuntimeError):
    pass


class FieldFormatError(ValueError):
    pass


@dataclass(frozen=True)
class UniformMesh2D:
    nx: int
    ny: int
    xmin: float = 0.0
    xmax: float = 2 * math.pi
    ymin: float = 0.0
    ymax: float = 2 * math.pi

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 1 or self.ny < 1:
            raise ValueError(f"element counts must be positive integers, got nx={self.nx}, ny={self.ny}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("domain box must have positive extent")

    @property
    def lx(self):
        return self.xmax - self.xmin

    @property
    def ly(self):
        return self.ymax - self.ymin

    @property
    def hx(self):
        return self.lx / self.nx

    @property
    def hy(self):
        return self.ly / self.ny

    def wrap(self, x, y):
        return (
            self.xmin + np.mod(np.asarray(x, float) - self.xmin, self.lx),
            self.ymin + np.mod(np.asarray(y, float) - self.ymin, self.ly),
        )

    def locate(self, x, y):
        """Element indices and reference coordinates of (wrapped) points.

        Cells are half-open ``[x_i, x_{i+1})`` so a point on an interior
        edge belongs to the element on its + side.
        """
        x, y = np.asarray(x, float), np.asarray(y, float)
        sx = (x - self.xmin) / self.hx
        sy = (y - self.ymin) / self.hy
        fi, fj = np.floor(sx), np.floor(sy)
        xi = 2.0 * (sx - fi) - 1.0
        eta = 2.0 * (sy - fj) - 1.0
        i = np.mod(fi.astype(np.int64), self.nx)
        j = np.mod(fj.astype(np.int64), self.ny)
        return i, j, xi, eta


def legendre_basis(k, s):
    """Orthonormal Legendre values ``sqrt((2m+1)/2) P_m(s)``, shape ``s.shape + (k+1,)``."""
    s = np.asarray(s, float)
    norms = np.sqrt(np.arange(k + 1) + 0.5)
    return npleg.legvander(s, k).reshape(s.shape + (k + 1,)) * norms


def legendre_basis_derivative(k, s):
    s = np.asarray(s, float)
    out = np.zeros(s.shape + (k + 1,))
    for m in range(1, k + 1):
        c = np.zeros(m + 1)
        c[m] = math.sqrt(m + 0.5)
        out[..., m] = npleg.legval(s, npleg.legder(c))
    return out


def gauss(n):
    return npleg.leggauss(n)


@dataclass(frozen=True, eq=False)
class ModalField2D:
    mesh: UniformMesh2D
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        p = self.degree + 1
        expected = (self.mesh.nx, self.mesh.ny, p, p)
        if c.shape != expected:
            raise ValueError(f"coefficient array has shape {c.shape}, expected {expected}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x, y):
        return evaluate_field(self, x, y)

    def mean(self):
        """Domain average; only the constant mode contributes."""
        return float(self.coeffs[..., 0, 0].mean()) * 0.5


def project_initial(mesh, k, u0, npts=None):
    """Element-wise L2 projection of ``u0(x, y)`` onto the tensor basis."""
    n = npts or k + 2
    s, w = gauss(n)
    B = legendre_basis(k, s)  # (n, k+1)
    xc = mesh.xmin + (np.arange(mesh.nx) + 0.5) * mesh.hx
    yc = mesh.ymin + (np.arange(mesh.ny) + 0.5) * mesh.hy
    X = xc[:, None, None, None] + 0.5 * mesh.hx * s[None, None, :, None]
    Y = yc[None, :, None, None] + 0.5 * mesh.hy * s[None, None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    vals = np.broadcast_to(np.asarray(u0(X, Y), dtype=float), X.shape)
    coeffs = np.einsum("ijab,a,b,am,bn->ijmn", vals, w, w, B, B)
    return ModalField2D(mesh, k, coeffs)


def evaluate_field(field, x, y):
    """Field values at arbitrary points, wrapped periodically into the box."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    i, j, xi, eta = field.mesh.locate(x, y)
    bx = legendre_basis(field.degree, xi)
    by = legendre_basis(field.degree, eta)
    c = field.coeffs[i, j]
    out = np.einsum("...mn,...m,...n->...", c, bx, by)
    return float(out) if out.ndim == 0 else out


def element_quadrature(mesh, npts):
    """Physical Gauss points and weights for every element.

    Returns ``X, Y, W`` with shape ``(nx, ny, npts, npts)``.
    """
    s, w = gauss(npts)
    xc = mesh.xmin + (np.arange(mesh.nx) + 0.5) * mesh.hx
    yc = mesh.ymin + (np.arange(mesh.ny) + 0.5) * mesh.hy
    X = np.broadcast_to(xc[:, None, None, None] + 0.5 * mesh.hx * s[None, None, :, None],
                        (mesh.nx, mesh.ny, npts, npts))
    Y = np.broadcast_to(yc[None, :, None, None] + 0.5 * mesh.hy * s[None, None, None, :],
                        (mesh.nx, mesh.ny, npts, npts))
    W = np.broadcast_to(0.25 * mesh.hx * mesh.hy * np.outer(w, w), X.shape)
    return X, Y, W


def field_at_quadrature(field, npts):
    s, _ = gauss(npts)
    B = legendre_basis(field.degree, s)
    return np.einsum("ijmn,am,bn->ijab", field.coeffs, B, B)


def l2_error(field, exact, npts=None):
    """Global L2 error with ``k + 3`` Gauss points per direction per element."""
    n = npts or field.degree + 3
    X, Y, W = element_quadrature(field.mesh, n)
    diff = field_at_quadrature(field, n) - exact(X, Y)
    return float(np.sqrt(np.sum(W * diff ** 2)))


def weighted_l2(values, exact_values, W):
    return float(np.sqrt(np.sum(W * (values - exact_values) ** 2)))


class AdvectionOperator:
    """Upwind DG right-hand side for ``u_t + a u_x + b u_y = 0``."""

    def __init__(self, mesh, k, velocity=(1.0, 1.0)):
        self.mesh = mesh
        self.k = k
        self.a, self.b = map(float, velocity)
        s, w = gauss(k + 1)
        B = legendre_basis(k, s)
        dB = legendre_basis_derivative(k, s)
        # stiff[p, m] = int phi_p phi_m' ds, exact with k+1 points
        self.stiff = np.einsum("q,qp,qm->pm", w, B, dB)
        self.right = legendre_basis(k, 1.0)
        self.left = legendre_basis(k, -1.0)

    def __call__(self, c):
        nx, ny, p, _ = c.shape
        # x sweep: contract the x-mode axis against the 1D operators
        flat = np.ascontiguousarray(c.transpose(0, 1, 3, 2)).reshape(-1, p)
        vol = (flat @ self.stiff).reshape(nx, ny, p, p)
        fx = self._face(flat, self.a, axis=0, shape=(nx, ny, p))
        rhs = ((2.0 * self.a / self.mesh.hx) * (vol - fx)).transpose(0, 1, 3, 2)
        flat = c.reshape(-1, p)
        vol = (flat @ self.stiff).reshape(nx, ny, p, p)
        fy = self._face(flat, self.b, axis=1, shape=(nx, ny, p))
        return rhs + (2.0 * self.b / self.mesh.hy) * (vol - fy)

    def _face(self, flat, speed, axis, shape):
        R, L = self.right, self.left
        if speed >= 0:
            tr = (flat @ R).reshape(shape)  # outflow trace at the right face
            up_right, up_left = tr, np.roll(tr, 1, axis=axis)
        else:
            tl = (flat @ L).reshape(shape)
            up_right, up_left = np.roll(tl, -1, axis=axis), tl
        return up_right[..., None] * R - up_left[..., None] * L


def default_time_step(mesh, k, cfl=0.05):
    """``cfl * h^max(1, (2k+1)/4)`` with ``h`` the smaller element size."""
    h = min(mesh.hx, mesh.hy)
    return cfl * h ** max(1.0, (2 * k + 1) / 4.0)


def solve_advection(field0, T, cfl=0.05, dt=None, velocity=(1.0, 1.0)):
    """Advance ``field0`` to time ``T`` with classical RK4.

    The step is ``dt`` if given, else ``default_time_step``; it is shrunk
    slightly so an integer number of steps lands on ``T``.
    """
    if T <= 0:
        raise ValueError("final time must be positive")
    mesh, k = field0.mesh, field0.degree
    op = AdvectionOperator(mesh, k, velocity)
    step = dt if dt is not None else default_time_step(mesh, k, cfl)
    nsteps = max(1, math.ceil(T / step - 1e-12))
    h = T / nsteps
    c = np.array(field0.coeffs)
    norm0 = np.linalg.norm(c)
    limit = 10.0 * max(norm0, 1e-300)
    for n in range(nsteps):
        k1 = op(c)
        k2 = op(c + 0.5 * h * k1)
        k3 = op(c + 0.5 * h * k2)
        k4 = op(c + h * k3)
        c = c + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if n % 16 == 0 or n == nsteps - 1:
            nrm = np.linalg.norm(c)
            if not np.isfinite(nrm) or (norm0 > 0 and nrm > limit):
                raise UnstableTimeStep(f"time step too large (dt={h:.3e}, step {n + 1}/{nsteps})")
    return ModalField2D(mesh, k, c)


def save_field(field, path):
    """Write the line-oriented text format; coefficients at 17 significant digits."""
    m = field.mesh
    p = field.degree + 1
    lines = [f"SIACFIELD v1 {m.nx} {m.ny} {field.degree} "
             f"{m.xmin!r} {m.xmax!r} {m.ymin!r} {m.ymax!r}"]
    for j in range(m.ny):
        for i in range(m.nx):
            block = field.coeffs[i, j].T.reshape(p * p)  # x-mode fastest
            lines.append(" ".join(f"{v:.17g}" for v in block))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path):
    with open(path) as fh:
        text = fh.read().splitlines()
    if not text:
        raise FieldFormatError(f"{path}:1: unexpected end of data")
    head = text[0].split()
    if len(head) != 9 or head[0] != "SIACFIELD" or head[1] != "v1":
        raise FieldFormatError(f"{path}:1: malformed header {text[0]!r}")
    try:
        nx, ny, k = int(head[2]), int(head[3]), int(head[4])
        box = [float(v) for v in head[5:9]]
    except ValueError as exc:
        raise FieldFormatError(f"{path}:1: malformed header ({exc})") from None
    if nx < 1 or ny < 1 or k < 0:
        raise FieldFormatError(f"{path}:1: invalid dimensions nx={nx} ny={ny} k={k}")
    if not all(math.isfinite(v) for v in box):
        raise FieldFormatError(f"{path}:1: non-finite domain bounds")
    try:
        mesh = UniformMesh2D(nx, ny, *box)
    except ValueError as exc:
        raise FieldFormatError(f"{path}:1: {exc}") from None
    p = k + 1
    coeffs = np.empty((nx, ny, p, p))
    body = text[1:]
    for row in range(nx * ny):
        lineno = row + 2
        if row >= len(body):
            raise FieldFormatError(f"{path}:{lineno}: unexpected end of data")
        parts = body[row].split()
        if len(parts) != p * p:
            raise FieldFormatError(
                f"{path}:{lineno}: expected {p * p} coefficients, found {len(parts)}")
        try:
            vals = np.array([float(v) for v in parts])
        except ValueError as exc:
            raise FieldFormatError(f"{path}:{lineno}: {exc}") from None
        if not np.all(np.isfinite(vals)):
            raise FieldFormatError(f"{path}:{lineno}: non-finite coefficient")
        j, i = divmod(row, nx)
        coeffs[i, j] = vals.reshape(p, p).T
    extra = [ln for ln in body[nx * ny:] if ln.strip()]
    if extra:
        raise FieldFormatError(f"{path}:{nx * ny + 2}: trailing data after {nx * ny} element rows")
    return ModalField2D(mesh, k, coeffs)
