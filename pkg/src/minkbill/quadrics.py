"""Least-squares conic and quadric fitting, classification and plane sections.

A quadric is ``z^T Q z + 2 l^T z + c = 0``, stored normalized so that
``||Q||_F^2 + |l|^2 + c^2 = 1`` with a sign fixed by the first nonzero
monomial coefficient.  Monomials are ordered graded-lexicographically:
``x1^2, x1 x2, ..., xn^2, x1, ..., xn, 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy import optimize

from .bodies import GaugeBody
from .errors import DegenerateFitError, GeometryError
from .patches import BodyPatch

QUADRIC_TOL = 1e-7  # "is a quadric" threshold on the scaled residual
CLASSIFY_TOL = 1e-10
_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Quadric:
    Q: np.ndarray
    l: np.ndarray  # noqa: E741
    c: float

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        Q = np.triu(Q) + np.triu(Q, 1).T  # exactly symmetric
        l = np.asarray(self.l, dtype=float)  # noqa: E741
        norm = np.sqrt(np.sum(Q**2) + l @ l + float(self.c) ** 2)
        if not norm > 0:
            raise ValueError("all quadric coefficients vanish")
        vec = _to_vector(Q, l, float(self.c)) / norm + 0.0  # no negative zeros
        nz = np.flatnonzero(np.abs(vec) > 1e-14)
        if vec[nz[0]] < 0:
            vec = -vec
        Q, l, c = _from_vector(vec, len(l))
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return len(self.l)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.einsum("...i,ij,...j->...", z, self.Q, z) + 2.0 * z @ self.l + self.c

    def gradient(self, z) -> np.ndarray:
        return 2.0 * (np.asarray(z, dtype=float) @ self.Q + self.l)

    def homogeneous(self) -> np.ndarray:
        n = self.dim
        A = np.empty((n + 1, n + 1))
        A[:n, :n] = self.Q
        A[:n, n] = A[n, :n] = self.l
        A[n, n] = self.c
        return A

    def monomial_coefficients(self) -> np.ndarray:
        """Coefficients of the monomials in graded-lexicographic order."""
        n = self.dim
        quad = [self.Q[i, j] * (1.0 if i == j else 2.0) for i, j in _pairs(n)]
        return np.concatenate([quad, 2.0 * self.l, [self.c]])

    def affine_pullback(self, A, b) -> "Quadric":
        """The quadric ``{x : self(A x + b) = 0}``."""
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        return Quadric(A.T @ self.Q @ A, A.T @ (self.Q @ b + self.l), float(self(b)))

    def record(self) -> dict:
        return {"monomials": monomial_names(self.dim),
                "coefficients": self.monomial_coefficients().tolist()}


def _pairs(n: int):
    return list(combinations_with_replacement(range(n), 2))


def monomial_names(n: int) -> list[str]:
    names = [f"x{i}" for i in range(n)]
    quad = [f"{names[i]}^2" if i == j else f"{names[i]}*{names[j]}" for i, j in _pairs(n)]
    return quad + names + ["1"]


def _to_vector(Q, l, c) -> np.ndarray:  # noqa: E741
    """Coordinates in which the Euclidean norm is the quadric norm."""
    n = len(l)
    quad = [Q[i, j] * (1.0 if i == j else _SQRT2) for i, j in _pairs(n)]
    return np.concatenate([quad, l, [c]])


def _from_vector(v: np.ndarray, n: int):
    Q = np.zeros((n, n))
    for k, (i, j) in enumerate(_pairs(n)):
        if i == j:
            Q[i, i] = v[k]
        else:
            Q[i, j] = Q[j, i] = v[k] / _SQRT2
    m = len(_pairs(n))
    return Q, v[m:m + n].copy(), float(v[-1])


def _design(Z: np.ndarray) -> np.ndarray:
    """Rows evaluate ``_to_vector`` coordinates at the points."""
    n = Z.shape[1]
    quad = [Z[:, i] * Z[:, j] * (1.0 if i == j else _SQRT2) for i, j in _pairs(n)]
    return np.column_stack(quad + [2.0 * Z, np.ones(len(Z))])


@dataclass(frozen=True, eq=False)
class QuadricFit:
    quadric: Quadric
    residual: float
    degenerate: bool
    scaled: Quadric  # the fit in centred, unit-RMS coordinates
    center: np.ndarray
    scale: float
    singular_values: np.ndarray

    def is_quadric(self, tol: float = QUADRIC_TOL) -> bool:
        return self.residual <= tol

    def __iter__(self):
        return iter((self.quadric, self.residual))


def fit_quadric(points) -> QuadricFit:
    """Algebraic least-squares quadric through ``points``.

    The points are centred and scaled to unit RMS radius; the coefficient
    vector is the right singular vector of the design matrix for its smallest
    singular value, and ``residual`` is that singular value over ``sqrt(N)``.
    ``degenerate`` flags clouds lying on a lower-degree variety (a second
    vanishing singular value), in which case the fitted quadric is one of
    many.
    """
    X = np.asarray(points, dtype=float)
    N, n = X.shape
    need = (n + 1) * (n + 2) // 2 + 3
    if N < need:
        raise DegenerateFitError(f"need at least {need} points in dimension {n}, got {N}")
    mu = X.mean(axis=0)
    s = float(np.sqrt(np.mean(np.sum((X - mu) ** 2, axis=1))))
    if not s > 0:
        raise DegenerateFitError("all points coincide")
    Z = (X - mu) / s
    _, sv, Vt = np.linalg.svd(_design(Z), full_matrices=False)
    v = Vt[-1]
    degenerate = bool(sv[-2] <= 1e-8 * sv[0])
    Qs, ls, cs = _from_vector(v, n)
    scaled = Quadric(Qs, ls, cs)
    # undo z = (x - mu) / s
    quadric = scaled.affine_pullback(np.eye(n) / s, -mu / s)
    return QuadricFit(quadric, float(sv[-1] / np.sqrt(N)), degenerate, scaled, mu, s, sv)


def classify_conic(conic: Quadric, tol: float = CLASSIFY_TOL) -> str:
    """Real affine type of a plane conic."""
    if conic.dim != 2:
        raise ValueError("classify_conic needs a plane conic")
    A = conic.homogeneous()
    sv = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(sv > tol * sv[0]))
    q = np.linalg.eigvalsh(conic.Q)
    qscale = max(np.max(np.abs(q)), 1e-300)
    qrank = int(np.sum(np.abs(q) > tol * max(sv[0], qscale)))
    if qrank == 2:
        delta = 1 if q[0] * q[1] > 0 else -1
    else:
        delta = 0
    if rank == 3:
        if delta > 0:
            return "ellipse" if np.trace(conic.Q) * np.linalg.det(A) < 0 else "empty"
        return "hyperbola" if delta < 0 else "parabola"
    if rank == 2:
        if delta < 0:
            return "line_pair"
        if delta > 0:
            return "point"
        if qrank == 0:
            return "single_line"  # a linear equation
        # parallel lines: in the eigenbasis of Q the equation is lam u^2 + 2 m u + c
        w, V = np.linalg.eigh(conic.Q)
        k = int(np.argmax(np.abs(w)))
        m = V[:, k] @ conic.l
        disc = m * m - w[k] * conic.c
        return "line_pair" if disc > 0 else "empty"
    if rank == 1:
        return "single_line" if qrank > 0 else "empty"
    return "empty"


def conic_type_from_discriminant(conic: Quadric, tol: float = CLASSIFY_TOL) -> str:
    """Elliptic, hyperbolic or parabolic type of the quadratic part."""
    d = np.linalg.det(conic.Q)
    if abs(d) <= tol:
        return "parabolic"
    return "elliptic" if d > 0 else "hyperbolic"


def planar_section(surface, point, u, v, lines: int = 24, nodes: int = 400,
                   half_width: float | None = None) -> np.ndarray:
    """Points of ``surface  cap  {point + s u + t v}`` in plane coordinates ``(s, t)``.

    ``surface`` is a :class:`GaugeBody` (its boundary) or a
    :class:`BodyPatch` (points beyond the patch radius are discarded).  The
    parameter square is cut by ``lines`` lines of constant ``t`` and of
    constant ``s``; on each, sign changes of ``F - 1`` over ``nodes`` samples
    are refined with Brent's method.
    """
    patch = surface if isinstance(surface, BodyPatch) else None
    body: GaugeBody = patch.body if patch else surface
    o = np.asarray(point, dtype=float)
    B = np.column_stack([np.asarray(u, dtype=float), np.asarray(v, dtype=float)])
    pinv = np.linalg.pinv(B)
    anchor = patch.base if patch else body.center
    centre = pinv @ (anchor - o)
    if half_width is None:
        reach = patch.radius if patch else body.extent
        half_width = 1.05 * reach / np.linalg.svd(B, compute_uv=False)[-1]
    f = lambda st: body.gauge(o + st @ B.T) - 1.0  # noqa: E731
    grid = np.linspace(-half_width, half_width, nodes)
    levels = np.linspace(-half_width, half_width, lines + 2)[1:-1]
    out = []
    for axis in (0, 1):
        for lev in levels:
            st = np.empty((nodes, 2))
            st[:, axis] = centre[axis] + grid
            st[:, 1 - axis] = centre[1 - axis] + lev
            vals = f(st)
            for k in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
                a, b = st[k], st[k + 1]
                g = lambda r: f((1.0 - r) * a + r * b)  # noqa: E731
                r = optimize.brentq(g, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
                out.append((1.0 - r) * a + r * b)
    pts = np.array(out).reshape(-1, 2)
    if patch is not None and len(pts):
        pts = pts[np.linalg.norm(o + pts @ B.T - patch.base, axis=1) <= patch.radius]
    if len(pts) == 0:
        raise GeometryError("the plane does not meet the surface")
    return pts
