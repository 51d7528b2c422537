"""Strictly convex bodies given by gauge functions.

Every body is the unit sublevel set ``{x : F(x) <= 1}`` of a gauge

    F(x) = F0(L^{-1} (x - c))

where ``F0`` is one of three base gauges centred at the origin (ellipsoid,
p-ball, perturbed ball) and ``(L, c)`` is an invertible affine frame.  All
the algorithms (support points, chords, ray exits) work in the base frame,
where the family kernels live, and map results back.

Point arguments are rows: arrays of shape ``(..., n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import ClassVar, Sequence

import numpy as np
from scipy import optimize
from scipy.linalg import null_space
from scipy.stats import norm

from .errors import BracketError, ConvergenceError, GeometryError, SpecError

GAUGE_TOL = 1e-12
TANGENCY_TOL = 1e-8
SUPPORT_TOL = 1e-13
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# direction grids


def sphere_points(u: np.ndarray, n: int) -> np.ndarray:
    """Map points of the unit cube to the unit sphere ``S^{n-1}``.

    ``u`` has ``n - 1`` columns for ``n <= 3`` (area-preserving maps) and
    ``n`` columns otherwise (normalised Gaussian quantiles).
    """
    u = np.atleast_2d(np.asarray(u, float))
    if n == 2:
        th = 2.0 * np.pi * u[:, 0]
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        z = 2.0 * u[:, 0] - 1.0
        ph = 2.0 * np.pi * u[:, 1]
        s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        return np.column_stack([s * np.cos(ph), s * np.sin(ph), z])
    g = norm.ppf(np.clip(u[:, :n], 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_cube_dim(n: int) -> int:
    return n - 1 if n <= 3 else n


def uniform_directions(n: int, m: int) -> np.ndarray:
    """Deterministic quasi-uniform unit vectors (equal angles in 2D,
    Fibonacci lattice in 3D, Halton-Gaussian above)."""
    k = np.arange(m) + 0.5
    if n == 2:
        return sphere_points((k / m)[:, None], 2)
    if n == 3:
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        return sphere_points(np.column_stack([k / m, (k / golden) % 1.0]), 3)
    from scipy.stats import qmc

    u = qmc.Halton(d=n, scramble=False).random(m + 1)[1:]
    return sphere_points(u, n)


def _orthonormal_complement(w: np.ndarray) -> np.ndarray:
    return null_space(w[None, :])


# ---------------------------------------------------------------------------
# bodies


@dataclass(frozen=True, eq=False, kw_only=True)
class GaugeBody:
    """Base class: an affine frame ``(linear, center)`` around a base gauge.

    Subclasses provide ``_gauge0``, ``_grad0``, ``_radius0`` and optionally
    closed forms ``_support0``, ``_chord_t0`` and ``_exit_t0``.
    """

    linear: np.ndarray | None = None
    center: np.ndarray | None = None

    family: ClassVar[str] = "abstract"

    def __post_init__(self):
        n = self._base_dim()
        if n < 2:
            raise SpecError("dim", f"bodies need dimension >= 2, got {n}")
        L = np.eye(n) if self.linear is None else np.array(self.linear, dtype=float)
        c = np.zeros(n) if self.center is None else np.array(self.center, dtype=float)
        if L.shape != (n, n):
            raise SpecError("linear", f"expected shape {(n, n)}, got {L.shape}")
        if c.shape != (n,):
            raise SpecError("center", f"expected length {n}, got {c.shape}")
        if not np.all(np.isfinite(L)) or abs(np.linalg.det(L)) < 1e-14:
            raise SpecError("linear", "frame matrix must be finite and invertible")
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "center", c)

    # -- family hooks -------------------------------------------------------
    def _base_dim(self) -> int:
        raise NotImplementedError

    def _gauge0(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _grad0(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _radius0(self) -> float:
        """Upper bound on ``|y|`` over the base body."""
        raise NotImplementedError

    def _support0(self, w: np.ndarray) -> np.ndarray:
        return _support_by_hyperplane_newton(self, w)

    def _chord_t0(self, y: np.ndarray, d: np.ndarray) -> float | None:
        return None

    def _exit_t0(self, y: np.ndarray, d: np.ndarray) -> float | None:
        return None

    # -- frame --------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @cached_property
    def linear_inv(self) -> np.ndarray:
        return np.linalg.inv(self.linear)

    def to_base(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) @ self.linear_inv.T

    def from_base(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float) @ self.linear.T + self.center

    def transformed(self, A, b=None) -> "GaugeBody":
        """Image of the body under ``x -> A x + b``."""
        A = np.asarray(A, dtype=float)
        b = np.zeros(self.dim) if b is None else np.asarray(b, dtype=float)
        return replace(self, linear=A @ self.linear, center=A @ self.center + b)

    def translated(self, b) -> "GaugeBody":
        return self.transformed(np.eye(self.dim), b)

    @cached_property
    def _seed_grid(self) -> np.ndarray:
        omega = uniform_directions(self.dim, 720 if self.dim == 2 else 600)
        return omega / self._gauge0(omega)[:, None]

    @cached_property
    def extent(self) -> float:
        """Upper bound on ``|x - center|`` over the body."""
        return float(np.linalg.norm(self.linear, 2) * self._radius0())

    # -- evaluation ---------------------------------------------------------
    def gauge(self, x) -> np.ndarray | float:
        val = self._gauge0(self.to_base(x))
        return float(val) if np.ndim(val) == 0 else val

    def gradient(self, x) -> np.ndarray:
        return self._grad0(self.to_base(x)) @ self.linear_inv

    def radial_point(self, omega) -> np.ndarray:
        """Boundary point on the base-frame ray ``t * omega``, mapped out."""
        omega = np.asarray(omega, dtype=float)
        f = self._gauge0(omega)
        return self.from_base(omega / np.asarray(f)[..., None])

    def spec(self) -> dict:
        """JSON-ready description (inverse of :func:`body_from_spec`)."""
        out = {"dim": self.dim, "family": self.family}
        out.update(self._spec_params())
        if not np.allclose(self.linear, np.eye(self.dim)):
            out["linear"] = self.linear.tolist()
        if np.any(self.center != 0):
            out["center"] = self.center.tolist()
        return out

    def _spec_params(self) -> dict:
        return {}


@dataclass(frozen=True, eq=False)
class Ellipsoid(GaugeBody):
    """``{y : y^T A y <= 1}``, gauge ``sqrt(y^T A y)``."""

    matrix: np.ndarray
    family: ClassVar[str] = "ellipsoid"

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise SpecError("matrix", f"expected a square matrix, got shape {A.shape}")
        if not np.allclose(A, A.T, rtol=1e-12, atol=1e-14):
            raise SpecError("matrix", "matrix must be symmetric")
        A = 0.5 * (A + A.T)
        try:
            np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            raise SpecError("matrix", "matrix must be positive definite") from None
        object.__setattr__(self, "matrix", A)
        super().__post_init__()

    def _base_dim(self):
        return np.shape(self.matrix)[0]

    @cached_property
    def _ainv(self):
        return np.linalg.inv(self.matrix)

    def _gauge0(self, y):
        q = np.einsum("...i,ij,...j->...", y, self.matrix, y)
        return np.sqrt(np.maximum(q, 0.0))

    def _grad0(self, y):
        return (y @ self.matrix) / self._gauge0(y)[..., None]

    def _radius0(self):
        return 1.0 / math.sqrt(np.linalg.eigvalsh(self.matrix)[0])

    def _support0(self, w):
        aw = self._ainv @ w
        return aw / math.sqrt(w @ aw)

    def _chord_t0(self, y, d):
        return -2.0 * (d @ self.matrix @ y) / (d @ self.matrix @ d)

    def _exit_t0(self, y, d):
        a = d @ self.matrix @ d
        b = d @ self.matrix @ y
        c = y @ self.matrix @ y - 1.0
        disc = math.sqrt(b * b - a * c)
        # c < 0 inside, so the product of the roots is negative
        return -c / (b + disc) if b >= 0 else (-b + disc) / a

    def quadratic_form(self) -> np.ndarray:
        """Matrix ``M`` with ``F(x)^2 = (x - c)^T M (x - c)``."""
        Li = self.linear_inv
        return Li.T @ self.matrix @ Li

    def _spec_params(self):
        return {"matrix": self.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class PBall(GaugeBody):
    """Scaled l^p ball: gauge ``(sum |y_i / s_i|^p)^{1/p}``, ``p > 1``."""

    p: float
    scale: Sequence[float] = None
    family: ClassVar[str] = "pball"

    def __post_init__(self):
        p = float(self.p)
        if not p > 1.0 or not math.isfinite(p):
            raise SpecError("p", f"need 1 < p < inf, got {self.p}")
        s = np.array([1.0, 1.0] if self.scale is None else self.scale, dtype=float)
        if s.ndim != 1 or np.any(s <= 0) or not np.all(np.isfinite(s)):
            raise SpecError("scale", "scale must be a list of positive reals")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "scale", s)
        super().__post_init__()

    def _base_dim(self):
        return len(self.scale)

    def _gauge0(self, y):
        z = np.abs(y / self.scale)
        m = np.max(z, axis=-1)
        safe = np.where(m > 0, m, 1.0)
        r = np.sum((z / safe[..., None]) ** self.p, axis=-1) ** (1.0 / self.p)
        return np.where(m > 0, m * r, 0.0)

    def _grad0(self, y):
        z = y / self.scale
        f = self._gauge0(y)[..., None]
        return np.sign(z) * (np.abs(z) / f) ** (self.p - 1.0) / self.scale

    def _radius0(self):
        return float(np.linalg.norm(self.scale))

    def _support0(self, w):
        ws = w * self.scale
        q = self.p / (self.p - 1.0)
        a = np.abs(ws) / np.max(np.abs(ws))
        z = np.sign(ws) * a ** (q - 1.0) / np.sum(a**q) ** ((q - 1.0) / q)
        return z * self.scale

    def _spec_params(self):
        return {"p": self.p, "scale": self.scale.tolist()}


@dataclass(frozen=True, eq=False)
class PerturbedBall(GaugeBody):
    """Ball with a polynomial perturbation of its gauge.

    ``F0(y) = (|y| + sum_k a_k Re((y_1 + i y_2)^k) / |y|^(k-1)) / radius``.
    In 2D the angular factor is ``1 + sum_k a_k cos(k theta)``.  Amplitudes
    are validated for strict convexity at construction.
    """

    radius: float = 1.0
    harmonics: Sequence[Sequence[float]] = ()
    dimension: int = 2
    family: ClassVar[str] = "perturbed_ball"

    def __post_init__(self):
        r = float(self.radius)
        if not r > 0 or not math.isfinite(r):
            raise SpecError("radius", f"radius must be positive, got {self.radius}")
        try:
            harm = tuple((int(k), float(a)) for k, a in self.harmonics)
        except (TypeError, ValueError):
            raise SpecError("harmonics", "expected a list of [frequency, amplitude] pairs") from None
        for k, _ in harm:
            if k < 1:
                raise SpecError("harmonics", f"frequencies must be >= 1, got {k}")
        if sum(abs(a) for _, a in harm) >= 1.0:
            raise SpecError("harmonics", "sum of |amplitudes| must stay below 1")
        object.__setattr__(self, "radius", r)
        object.__setattr__(self, "harmonics", harm)
        object.__setattr__(self, "dimension", int(self.dimension))
        super().__post_init__()
        if not self._strictly_convex():
            raise SpecError("harmonics", "amplitudes break strict convexity")

    def _base_dim(self):
        return self.dimension

    def _gauge0(self, y):
        r = np.linalg.norm(y, axis=-1)
        z = y[..., 0] + 1j * y[..., 1]
        safe = np.where(r > 0, r, 1.0)
        acc = r.astype(float)
        for k, a in self.harmonics:
            acc = acc + a * np.real(z**k) / safe ** (k - 1)
        return np.where(r > 0, acc, 0.0) / self.radius

    def _grad0(self, y):
        r = np.linalg.norm(y, axis=-1)[..., None]
        z = y[..., 0] + 1j * y[..., 1]
        g = y / r
        for k, a in self.harmonics:
            dz = k * z ** (k - 1)
            dpoly = np.zeros_like(y)
            dpoly[..., 0] = np.real(dz)
            dpoly[..., 1] = -np.imag(dz)
            poly = np.real(z**k)[..., None]
            g = g + a * (dpoly / r ** (k - 1) + (1 - k) * poly * y / r ** (k + 1))
        return g / self.radius

    def _radius0(self):
        return self.radius / (1.0 - sum(abs(a) for _, a in self.harmonics))

    def _strictly_convex(self) -> bool:
        if self.dimension == 2:
            # gauge restricted to the circle is h(theta) / radius; the body is
            # strictly convex iff h + h'' > 0
            th = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
            curv = np.ones_like(th)
            for k, a in self.harmonics:
                curv += a * (1 - k * k) * np.cos(k * th)
            return bool(np.min(curv) > 1e-9)
        rng = np.random.default_rng(0)
        omega = sphere_points(rng.random((200, sphere_cube_dim(self.dimension))), self.dimension)
        y = omega / self._gauge0(omega)[:, None]
        grads = self._grad0(y)
        t = rng.standard_normal(y.shape)
        t -= np.sum(t * grads, axis=1, keepdims=True) * grads / np.sum(grads**2, axis=1, keepdims=True)
        t /= np.linalg.norm(t, axis=1, keepdims=True)
        h = 1e-3 * self.radius
        second = self._gauge0(y + h * t) + self._gauge0(y - h * t) - 2.0
        return bool(np.min(second) / h**2 > 1e-6 / self.radius)

    def _spec_params(self):
        return {"radius": self.radius, "harmonics": [list(h) for h in self.harmonics]}


# ---------------------------------------------------------------------------
# boundary objects


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """A boundary point and the unit outward conormal ``dF / |dF|`` there."""

    position: np.ndarray
    conormal: np.ndarray


@dataclass(frozen=True, eq=False)
class Chord:
    endpoint_a: BoundaryPoint
    endpoint_b: BoundaryPoint
    direction: np.ndarray
    tangent_flag: bool
    t: float = 0.0


def boundary_point(body: GaugeBody, x, tol: float = 1e-9) -> BoundaryPoint:
    x = np.asarray(x, dtype=float)
    f = body.gauge(x)
    if not abs(f - 1.0) <= tol:
        raise GeometryError(f"point is not on the boundary: |F - 1| = {abs(f - 1.0):.3e}")
    g = body.gradient(x)
    return BoundaryPoint(x, g / np.linalg.norm(g))


def project_to_boundary(body: GaugeBody, x) -> BoundaryPoint:
    """Radial projection of ``x`` (not the center) onto the boundary."""
    x = np.asarray(x, dtype=float)
    f = body.gauge(x)
    if not f > 0:
        raise GeometryError("cannot project the body center to the boundary")
    y = body.center + (x - body.center) / f
    return boundary_point(body, y)


def boundary_samples(body: GaugeBody, m: int) -> np.ndarray:
    """``m`` boundary points along quasi-uniform base-frame rays."""
    return body.radial_point(uniform_directions(body.dim, m))


# ---------------------------------------------------------------------------
# operations


def gauge(body: GaugeBody, v) -> float | np.ndarray:
    return body.gauge(v)


def gauge_gradient(body: GaugeBody, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v - body.center) < 1e-12 * body.extent:
        raise ValueError("gauge gradient is undefined at the body center")
    return body.gradient(v)


def gauge_gradient_fd(body: GaugeBody, v) -> np.ndarray:
    """Central finite-difference gradient, step ``eps^(1/3) |v|``."""
    v = np.asarray(v, dtype=float)
    h = _EPS ** (1.0 / 3.0) * max(np.linalg.norm(v - body.center), 1e-300)
    e = np.eye(body.dim) * h
    return np.array([(body.gauge(v + e[i]) - body.gauge(v - e[i])) / (2 * h) for i in range(body.dim)])


def support_point(body: GaugeBody, u) -> BoundaryPoint:
    """Boundary point maximising ``u . x`` over the body.

    The gauge differential there is a positive multiple of ``u``.
    """
    u = np.asarray(u, dtype=float)
    nu = np.linalg.norm(u)
    if not nu > 0:
        raise ValueError("support direction must be nonzero")
    w = body.linear.T @ (u / nu)
    y = body._support0(w / np.linalg.norm(w))
    x = body.from_base(y)
    # one radial rescale absorbs rounding of the kernel
    return boundary_point(body, body.center + (x - body.center) / body.gauge(x))


def _support_by_hyperplane_newton(body: GaugeBody, w: np.ndarray) -> np.ndarray:
    """Maximise ``w . y`` over ``F0 <= 1`` for a unit ``w``.

    Equivalent to minimising ``F0`` over the hyperplane ``w . y = 1``, a
    smooth strictly convex problem in ``n - 1`` variables; solved by damped
    Newton with a finite-difference Hessian of the analytic gradient,
    started from the best point of a boundary grid.
    """
    n = body.dim
    B = _orthonormal_complement(w)
    grid = body._seed_grid
    best = grid[np.argmax(grid @ w)]
    z = B.T @ (best / (best @ w))

    def f(z):
        return float(body._gauge0(w + B @ z))

    def grad(z):
        g = body._grad0(w + B @ z)
        return B.T @ g, g

    fz = f(z)
    for _ in range(100):
        gz, full = grad(z)
        res = np.linalg.norm(gz) / np.linalg.norm(full)
        if res < SUPPORT_TOL:
            break
        h = 1e-6 * (1.0 + np.linalg.norm(z))
        H = np.empty((n - 1, n - 1))
        for j in range(n - 1):
            H[:, j] = (grad(z + h * np.eye(n - 1)[j])[0] - grad(z - h * np.eye(n - 1)[j])[0]) / (2 * h)
        H = 0.5 * (H + H.T)
        try:
            step = -np.linalg.solve(H, gz)
        except np.linalg.LinAlgError:
            step = -gz
        if step @ gz >= 0:
            step = -gz
        lam = 1.0
        gnorm = np.linalg.norm(gz)
        while lam > 1e-12:
            zn = z + lam * step
            fn = f(zn)
            # near the optimum the decrease of F drops below rounding, so a
            # shrinking gradient also counts as progress
            if fn <= fz + 1e-4 * lam * (step @ gz) or np.linalg.norm(grad(zn)[0]) < gnorm:
                break
            lam *= 0.5
        else:
            break
        if np.linalg.norm(zn - z) < 1e-17 * (1 + np.linalg.norm(z)):
            z, fz = zn, fn
            break
        z, fz = zn, fn
    gz, full = grad(z)
    res = np.linalg.norm(gz) / np.linalg.norm(full)
    x = w + B @ z
    y = x / f(z)
    if res > 1e-10:
        raise ConvergenceError("support point iteration did not converge", best=y, residual=res)
    return y


def _polish(phi, dphi, t: float, steps: int = 3) -> float:
    """A few guarded Newton steps on ``phi(t) = 0``."""
    val = phi(t)
    for _ in range(steps):
        d = dphi(t)
        if d == 0 or not math.isfinite(d):
            break
        tn = t - val / d
        vn = phi(tn)
        if not abs(vn) < abs(val):
            break
        t, val = tn, vn
        if val == 0:
            break
    return t


def _check_finite(value):
    if not np.all(np.isfinite(value)):
        raise GeometryError("non-finite gauge value")
    return value


def _second_root_t(body: GaugeBody, y: np.ndarray, s: np.ndarray) -> float:
    """Nonzero root of ``F0(y + t s) = 1`` with ``F0(y) = 1``, ``dF0_y(s) < 0``."""
    t = body._chord_t0(y, s)
    if t is None:
        slope = float(body._grad0(y) @ s)
        t_hi = 2.02 * body._radius0() / np.linalg.norm(s)

        def psi(t):
            if t == 0.0:
                return slope
            return (_check_finite(float(body._gauge0(y + t * s))) - 1.0) / t

        if not psi(t_hi) > 0:
            raise BracketError("chord root bracket failed")
        t = optimize.brentq(psi, 0.0, t_hi, xtol=1e-300, rtol=4 * _EPS, maxiter=300)
    return _polish(lambda t: float(body._gauge0(y + t * s)) - 1.0,
                   lambda t: float(body._grad0(y + t * s) @ s), t)


def chord_second_intersection(body: GaugeBody, p: BoundaryPoint, direction,
                              tol: float = GAUGE_TOL) -> Chord:
    """Second intersection of the line ``p + t * direction`` with the boundary.

    When the direction is tangent at ``p`` (relative slope below
    ``TANGENCY_TOL``) the chord degenerates and both endpoints are ``p``.
    """
    d = np.asarray(direction, dtype=float)
    nd = np.linalg.norm(d)
    if not nd > 0:
        raise ValueError("chord direction must be nonzero")
    x = np.asarray(p.position, dtype=float)
    if abs(body.gauge(x) - 1.0) > 1e-9:
        raise GeometryError("chord start is not on the boundary")
    g = body.gradient(x)
    slope = float(g @ d)
    unit = d / nd
    if abs(slope) < TANGENCY_TOL * np.linalg.norm(g) * nd:
        return Chord(p, p, unit, True, 0.0)
    sign = -1.0 if slope > 0 else 1.0
    y = body.to_base(x)
    s = sign * (body.linear_inv @ d)
    t = sign * _second_root_t(body, y, s)
    q = x + t * d
    if abs(body.gauge(q) - 1.0) > max(tol, 4 * _EPS):
        raise ConvergenceError("chord endpoint misses the boundary", best=q,
                               residual=abs(body.gauge(q) - 1.0))
    return Chord(p, boundary_point(body, q), unit, False, float(t))


def ray_exit(body: GaugeBody, x0, direction, tol: float = GAUGE_TOL) -> BoundaryPoint:
    """Exit point ``x0 + t d`` (``t > 0``) of a ray started inside the body."""
    x0 = np.asarray(x0, dtype=float)
    d = np.asarray(direction, dtype=float)
    if not np.linalg.norm(d) > 0:
        raise ValueError("ray direction must be nonzero")
    f0 = _check_finite(body.gauge(x0))
    if not f0 < 1.0:
        raise GeometryError(f"ray start must be interior, F(x0) = {f0}")
    y = body.to_base(x0)
    s = body.linear_inv @ d
    t = body._exit_t0(y, s)
    if t is None:
        t_hi = 1.01 * (body._radius0() + np.linalg.norm(y)) / np.linalg.norm(s)
        t_lo = 0.0
        step = t_hi * 1e-3
        # exponential bracketing, capped by the guaranteed exterior point t_hi
        while step < t_hi:
            if _check_finite(float(body._gauge0(y + step * s))) > 1.0:
                t_hi = step
                break
            t_lo = step
            step *= 2.0
        phi = lambda t: float(body._gauge0(y + t * s)) - 1.0  # noqa: E731
        if not (phi(t_lo) < 0 < phi(t_hi)):
            raise BracketError("ray exit bracket failed")
        t = optimize.brentq(phi, t_lo, t_hi, xtol=1e-300, rtol=4 * _EPS, maxiter=300)
    t = _polish(lambda t: float(body._gauge0(y + t * s)) - 1.0,
                lambda t: float(body._grad0(y + t * s) @ s), t)
    q = x0 + t * d
    if abs(body.gauge(q) - 1.0) > max(tol, 4 * _EPS):
        raise ConvergenceError("ray exit misses the boundary", best=q,
                               residual=abs(body.gauge(q) - 1.0))
    return boundary_point(body, q)


# ---------------------------------------------------------------------------
# spec files

_COMMON_KEYS = {"dim", "family", "center", "linear"}
_FAMILY_KEYS = {
    "ellipsoid": {"matrix"},
    "pball": {"p", "scale"},
    "perturbed_ball": {"radius", "harmonics"},
}


def body_from_spec(spec: dict) -> GaugeBody:
    """Build a body from its JSON description.

    ``{"dim": 2, "family": "ellipsoid", "matrix": [[...], [...]]}``,
    ``{"family": "pball", "p": 4.0, "scale": [1.0, 1.0]}`` or
    ``{"family": "perturbed_ball", "radius": 1.0, "harmonics": [[3, 0.05]]}``;
    optional ``center`` and ``linear`` (frame matrix) for all families.
    """
    if not isinstance(spec, dict):
        raise SpecError("body", "a body spec must be a JSON object")
    fam = spec.get("family")
    if fam not in _FAMILY_KEYS:
        raise SpecError("family", f"unknown family {fam!r}")
    extra = set(spec) - _COMMON_KEYS - _FAMILY_KEYS[fam]
    if extra:
        raise SpecError(sorted(extra)[0], "unexpected field")
    frame = {"linear": spec.get("linear"), "center": spec.get("center")}
    try:
        if fam == "ellipsoid":
            if "matrix" not in spec:
                raise SpecError("matrix", "required for the ellipsoid family")
            body = Ellipsoid(spec["matrix"], **frame)
        elif fam == "pball":
            if "p" not in spec:
                raise SpecError("p", "required for the pball family")
            scale = spec.get("scale", [1.0] * int(spec.get("dim", 2)))
            body = PBall(spec["p"], scale, **frame)
        else:
            body = PerturbedBall(spec.get("radius", 1.0), spec.get("harmonics", []),
                                 int(spec.get("dim", 2)), **frame)
    except SpecError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecError(fam, str(exc)) from None
    if "dim" in spec and int(spec["dim"]) != body.dim:
        raise SpecError("dim", f"declared {spec['dim']} but the data has dimension {body.dim}")
    return body
