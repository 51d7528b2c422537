"""Billiard reflection laws and orbit iteration.

Conventions: ``v_in`` is the arrival velocity at a boundary point ``q``
(it points out of the table, ``dF_q(v_in) > 0``) and ``v_out`` points back
in.  The Minkowski law only fixes the direction of ``v_out``; it is scaled
to the Euclidean length of ``v_in``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .bodies import (
    BoundaryPoint,
    Ellipsoid,
    GaugeBody,
    boundary_point,
    boundary_samples,
    chord_second_intersection,
    support_point,
)
from .errors import GeometryError, TransversalityError

TRANSVERSAL_TOL = 1e-8


class TrajectoryError(GeometryError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"bounce {index}: {cause}")
        self.index = index
        self.cause = cause


# ---------------------------------------------------------------------------
# projective billiards


@dataclass(frozen=True, eq=False)
class InvolutionField:
    """Transversal line field ``q -> nu_q`` on the boundary of a table.

    It induces at each ``q`` the involution
    ``H_q(v) = v - 2 dF_q(v) / dF_q(nu_q) * nu_q`` which fixes the tangent
    hyperplane and negates ``nu_q``.  ``transversal`` receives the boundary
    point and returns ``nu_q``.
    """

    table: GaugeBody
    transversal: Callable[[BoundaryPoint], np.ndarray]
    rule: str = "custom"
    check_points: np.ndarray | None = None

    def __post_init__(self):
        pts = boundary_samples(self.table, 256) if self.check_points is None else self.check_points
        for x in np.atleast_2d(pts):
            if len(x):
                self._checked_nu(boundary_point(self.table, x))

    @classmethod
    def euclidean_normal(cls, table: GaugeBody) -> "InvolutionField":
        return cls(table, lambda q: q.conormal, "euclidean_normal")

    @classmethod
    def metric_normal(cls, table: GaugeBody, metric) -> "InvolutionField":
        """Normals of the Euclidean structure with Gram matrix ``metric``."""
        ginv = np.linalg.inv(np.asarray(metric, dtype=float))
        return cls(table, lambda q: ginv @ q.conormal, "metric_normal")

    @classmethod
    def constant(cls, table: GaugeBody, vector, check_points=None) -> "InvolutionField":
        """A fixed vector; it is tangent somewhere on any closed table, so
        the construction check runs on ``check_points`` only (none by default)."""
        nu = np.asarray(vector, dtype=float)
        pts = np.empty((0, table.dim)) if check_points is None else np.asarray(check_points, float)
        return cls(table, lambda q: nu, "constant_vector", pts)

    def _checked_nu(self, q: BoundaryPoint) -> np.ndarray:
        nu = np.asarray(self.transversal(q), dtype=float)
        c = q.conormal
        if abs(c @ nu) < TRANSVERSAL_TOL * np.linalg.norm(c) * np.linalg.norm(nu):
            raise TransversalityError(f"transversal vector is tangent at q = {q.position}")
        return nu

    def matrix(self, q: BoundaryPoint) -> np.ndarray:
        nu = self._checked_nu(q)
        return np.eye(self.table.dim) - 2.0 * np.outer(nu, q.conormal) / (q.conormal @ nu)


def projective_reflect(field: InvolutionField, q: BoundaryPoint, v_in) -> np.ndarray:
    v = np.asarray(v_in, dtype=float)
    nu = field._checked_nu(q)
    c = q.conormal
    return v - 2.0 * (c @ v) / (c @ nu) * nu


# ---------------------------------------------------------------------------
# Minkowski billiards


def _minkowski(table: GaugeBody, dual: GaugeBody, q: BoundaryPoint, v_in):
    v = np.asarray(v_in, dtype=float)
    c = table.gradient(q.position)
    if not c @ v > 0:
        raise GeometryError("v_in must leave the table at q (dF_q(v_in) > 0)")
    p1 = support_point(dual, v)
    chord = chord_second_intersection(dual, p1, c)
    if chord.tangent_flag:
        return v.copy(), True
    g = dual.gradient(chord.endpoint_b.position)
    return g * (np.linalg.norm(v) / np.linalg.norm(g)), False


def minkowski_reflect(table: GaugeBody, dual: GaugeBody, q: BoundaryPoint, v_in) -> np.ndarray:
    """Reflection of the billiard in ``table`` defined by the dual body.

    ``p1`` is the support point of ``dual`` for the functional ``v_in``; the
    chord of ``dual`` through ``p1`` parallel to ``dF_q`` ends at ``p2`` and
    ``v_out`` is the gauge differential of ``dual`` at ``p2``.  A tangent
    chord leaves ``v_in`` unchanged.
    """
    return _minkowski(table, dual, q, v_in)[0]


def mirror(v, conormal, metric=None) -> np.ndarray:
    """Equal-angle reflection of ``v`` in the metric with Gram matrix ``metric``."""
    v = np.asarray(v, dtype=float)
    c = np.asarray(conormal, dtype=float)
    n = c if metric is None else np.linalg.solve(np.asarray(metric, dtype=float), c)
    return v - 2.0 * (c @ v) / (c @ n) * n


class Law(Protocol):
    table: GaugeBody

    def reflect(self, q: BoundaryPoint, v_in: np.ndarray) -> tuple[np.ndarray, bool]: ...


@dataclass(frozen=True, eq=False)
class MinkowskiLaw:
    table: GaugeBody
    dual: GaugeBody
    name = "minkowski"

    def reflect(self, q, v_in):
        return _minkowski(self.table, self.dual, q, v_in)


@dataclass(frozen=True, eq=False)
class ProjectiveLaw:
    field: InvolutionField
    name = "projective"

    @property
    def table(self):
        return self.field.table

    def reflect(self, q, v_in):
        return projective_reflect(self.field, q, v_in), False


@dataclass(frozen=True, eq=False)
class StandardLaw:
    table: GaugeBody
    metric: np.ndarray | None = None
    name = "standard"

    def reflect(self, q, v_in):
        out = mirror(v_in, q.conormal, self.metric)
        return out * (np.linalg.norm(v_in) / np.linalg.norm(out)), False


# ---------------------------------------------------------------------------
# orbits


@dataclass(frozen=True, eq=False)
class Bounce:
    q: BoundaryPoint
    v_in: np.ndarray
    v_out: np.ndarray
    tangent: bool
    gauge_residual: float


@dataclass(eq=False)
class Trajectory:
    table: GaugeBody
    start: BoundaryPoint
    v0: np.ndarray
    bounces: list[Bounce] = field(default_factory=list)

    def points(self) -> np.ndarray:
        return np.array([b.q.position for b in self.bounces]).reshape(-1, self.table.dim)


def trajectory(table: GaugeBody, law: Law, q0: BoundaryPoint, v0, n: int) -> Trajectory:
    """Iterate straight segments and reflections ``n`` times from ``q0``."""
    v = np.asarray(v0, dtype=float)
    if not table.gradient(q0.position) @ v < 0:
        raise GeometryError("v0 must point into the table at q0")
    traj = Trajectory(table, q0, v.copy())
    q = q0
    for i in range(n):
        try:
            chord = chord_second_intersection(table, q, v)
            if chord.tangent_flag:
                raise GeometryError("orbit grazes the boundary")
            q = chord.endpoint_b
            v_out, tangent = law.reflect(q, v)
            if not tangent and not table.gradient(q.position) @ v_out < 0:
                raise GeometryError("reflected velocity does not re-enter the table")
        except GeometryError as exc:
            raise TrajectoryError(i, exc) from exc
        traj.bounces.append(Bounce(q, v, v_out, tangent, abs(table.gauge(q.position) - 1.0)))
        v = v_out
    return traj


def push_trajectory(traj: Trajectory, P) -> Trajectory:
    """Image of an orbit under the linear map ``P`` (table mapped along)."""
    P = np.asarray(P, dtype=float)
    table = traj.table.transformed(P)

    def bp(x):
        return boundary_point(table, P @ x)

    out = Trajectory(table, bp(traj.start.position), P @ traj.v0)
    for b in traj.bounces:
        x = P @ b.q.position
        out.bounces.append(Bounce(bp(b.q.position), P @ b.v_in, P @ b.v_out, b.tangent,
                                  abs(table.gauge(x) - 1.0)))
    return out


def standard_reflection_residual(traj: Trajectory, metric=None) -> float:
    """Largest angular deviation of ``v_out`` from the equal-angle law.

    Directions are compared as unit vectors, since the reflection laws agree
    only up to reparametrisation of the orbit.
    """
    if not traj.bounces:
        raise ValueError("trajectory has no bounces")
    worst = 0.0
    for b in traj.bounces:
        m = mirror(b.v_in, b.q.conormal, metric)
        d = b.v_out / np.linalg.norm(b.v_out) - m / np.linalg.norm(m)
        worst = max(worst, float(np.linalg.norm(d)))
    return worst


@dataclass(frozen=True)
class EquivalenceMap:
    """``B`` maps the dual ellipsoid to a ball; ``dual_inv = (B*)^{-1}``
    carries Minkowski orbits to equal-angle orbits."""

    B: np.ndarray
    B_inv: np.ndarray
    dual: np.ndarray
    dual_inv: np.ndarray


def ellipsoid_equivalence_map(dual: GaugeBody) -> EquivalenceMap:
    if not isinstance(dual, Ellipsoid):
        raise TypeError(f"need an ellipsoid, got family {dual.family!r}")
    M = dual.quadratic_form()
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    B = (V * np.sqrt(w)) @ V.T
    B_inv = (V / np.sqrt(w)) @ V.T
    # in coordinates the dual map of B is its transpose
    return EquivalenceMap(B, B_inv, B.T.copy(), B_inv.T.copy())


def format_trajectory(traj: Trajectory) -> str:
    """CSV table, one row per bounce."""
    n = traj.table.dim
    cols = (["index"] + [f"q{i}" for i in range(n)] + [f"vin{i}" for i in range(n)]
            + [f"vout{i}" for i in range(n)] + ["gauge_residual", "tangent"])
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for i, b in enumerate(traj.bounces):
        vals = [str(i)] + [repr(float(x)) for x in (*b.q.position, *b.v_in, *b.v_out)]
        vals += [repr(float(b.gauge_residual)), str(int(b.tangent))]
        buf.write(",".join(vals) + "\n")
    return buf.getvalue()
