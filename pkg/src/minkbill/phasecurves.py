"""Divergence-free linear planar fields ``v(z) = M z + b`` and their phase curves.

Since ``trace M = 0`` the field is Hamiltonian: with

    H(x, y) = (a x^2 + 2 c x y + d y^2) / 2 + e x + f y,
    a = -M[1,0], c = M[0,0], d = M[0,1], e = -b[1], f = b[0],

one has ``(dH/dy, -dH/dx) = v``, so every orbit lies on a level set of a
quadratic polynomial: a conic or a line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, SpecError
from .quadrics import Quadric

TRACE_TOL = 1e-14
EIG_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PlanarLinearField:
    M: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if M.shape != (2, 2) or b.shape != (2,):
            raise ValueError("need a 2x2 matrix M and a 2-vector b")
        if abs(np.trace(M)) > TRACE_TOL:
            raise ValueError(f"field is not divergence-free: trace M = {np.trace(M):.3e}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)

    def __call__(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) @ self.M.T + self.b


@dataclass(frozen=True)
class Hamiltonian:
    a: float
    c: float
    d: float
    e: float
    f: float

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        x, y = z[..., 0], z[..., 1]
        return 0.5 * (self.a * x * x + 2 * self.c * x * y + self.d * y * y) + self.e * x + self.f * y

    def gradient(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        x, y = z[..., 0], z[..., 1]
        return np.stack([self.a * x + self.c * y + self.e, self.c * x + self.d * y + self.f], axis=-1)

    def rotated_gradient(self, z) -> np.ndarray:
        """``(dH/dy, -dH/dx)``."""
        g = self.gradient(z)
        return np.stack([g[..., 1], -g[..., 0]], axis=-1)

    def level_set(self, h: float) -> Quadric:
        """The conic ``H = h`` (in ``z^T Q z + 2 l^T z + c = 0`` form)."""
        Q = 0.5 * np.array([[self.a, self.c], [self.c, self.d]])
        return Quadric(Q, 0.5 * np.array([self.e, self.f]), -float(h))


def hamiltonian_of(field: PlanarLinearField) -> Hamiltonian:
    M, b = field.M, field.b
    return Hamiltonian(a=-M[1, 0] + 0.0, c=M[0, 0] + 0.0, d=M[0, 1] + 0.0, e=-b[1] + 0.0,
                       f=b[0] + 0.0)


@dataclass(frozen=True)
class FieldClass:
    tag: str  # saddle_hyperbolas | center_circles | shear_parabolas_or_lines | constant_lines
    case: int
    detail: str
    parameter: float  # lambda for cases 1-2, the shear constant c for case 3, |b| for case 4


def classify_field(field: PlanarLinearField, tol: float = EIG_TOL) -> FieldClass:
    """Conjugacy class of ``M`` relative to ``||M||``."""
    M, b = field.M, field.b
    norm = np.linalg.norm(M, 2)
    if norm == 0.0:
        return FieldClass("constant_lines", 4, "lines", float(np.linalg.norm(b)))
    det = float(np.linalg.det(M))  # eigenvalues are +-sqrt(-det)
    if -det > (tol * norm) ** 2:
        return FieldClass("saddle_hyperbolas", 1, "hyperbolas", math.sqrt(-det))
    if det > (tol * norm) ** 2:
        return FieldClass("center_circles", 2, "ellipses", math.sqrt(det))
    # nilpotent: image = kernel = a line; rotate it onto the first axis so
    # that M becomes mu [[0, 1], [0, 0]] and the field (mu y + b1', b2')
    col = M[:, np.argmax(np.linalg.norm(M, axis=0))]
    k = col / np.linalg.norm(col)
    n = np.array([-k[1], k[0]])
    mu = float(k @ M @ n)
    shear = float(n @ b) / mu  # the normal form is (y, shear) up to scale
    detail = "parabolas" if abs(n @ b) > tol * max(np.linalg.norm(b), norm) else "lines"
    return FieldClass("shear_parabolas_or_lines", 3, detail, shear)


def phase_conic(field: PlanarLinearField, z0) -> Quadric:
    """Level set of the Hamiltonian through ``z0``."""
    z0 = np.asarray(z0, dtype=float)
    v = field(z0)
    scale = np.linalg.norm(field.M, 2) * np.linalg.norm(z0) + np.linalg.norm(field.b)
    if np.linalg.norm(v) <= 1e-14 * max(scale, 1.0):
        raise GeometryError(f"z0 = {z0.tolist()} is a singular point of the field")
    H = hamiltonian_of(field)
    return H.level_set(float(H(z0)))


def integrate_orbit(field: PlanarLinearField, z0, t_end: float, dt: float) -> np.ndarray:
    """Classical Runge-Kutta polyline with ``ceil(t_end / dt)`` equal steps."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    steps = max(1, math.ceil(t_end / dt - 1e-12))
    h = t_end / steps
    z = np.asarray(z0, dtype=float).copy()
    out = np.empty((steps + 1, 2))
    out[0] = z
    for i in range(steps):
        k1 = field(z)
        k2 = field(z + 0.5 * h * k1)
        k3 = field(z + 0.5 * h * k2)
        k4 = field(z + h * k3)
        z = z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = z
    return out


def field_from_spec(spec: dict) -> PlanarLinearField:
    if not isinstance(spec, dict):
        raise SpecError("field", "a field spec must be a JSON object")
    for key in spec:
        if key not in ("M", "b"):
            raise SpecError(key, "unknown key in field spec")
    for key in ("M", "b"):
        if key not in spec:
            raise SpecError(key, "required in field spec")
    try:
        M = np.asarray(spec["M"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError("M", f"not a numeric matrix: {exc}") from exc
    try:
        b = np.asarray(spec["b"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError("b", f"not a numeric vector: {exc}") from exc
    if M.shape != (2, 2):
        raise SpecError("M", "must be 2x2")
    if b.shape != (2,):
        raise SpecError("b", "must have length 2")
    if abs(np.trace(M)) > TRACE_TOL:
        raise SpecError("M", "trace must vanish")
    return PlanarLinearField(M, b)
