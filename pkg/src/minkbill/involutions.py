"""Chord involutions and how far they are from being affine.

For a direction ``alpha`` the chord involution ``I_alpha`` swaps the two
boundary points of every line parallel to ``alpha``; its fixed points form
the equator.  On an ellipsoid ``I_alpha`` is the restriction of an affine
involution (the reflection along ``alpha`` across the conjugate diametral
hyperplane); on a body that is not an ellipsoid, some direction breaks this.
The *projectivity defect* measures the misfit of the best affine map.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.spatial.distance import pdist
from scipy.stats import qmc

from .bodies import (
    GaugeBody,
    boundary_point,
    boundary_samples,
    chord_second_intersection,
    sphere_cube_dim,
    sphere_points,
    support_point,
    uniform_directions,
)
from .blmetric import IntegrationConfig, bl_matrix, bl_sphericity_defect
from .errors import DegenerateFitError, GeometryError, PatchEscapeError, TransversalityError
from .patches import Patch, intersect_patch

HEMISPHERE_MARGIN = 0.05
MAX_DROP_FRACTION = 0.2


@dataclass(frozen=True, eq=False)
class AffineMap:
    linear: np.ndarray
    translation: np.ndarray

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.linear.T + self.translation

    def compose(self, other: "AffineMap") -> "AffineMap":
        """``self o other``."""
        return AffineMap(self.linear @ other.linear, self.linear @ other.translation + self.translation)

    def inverse(self) -> "AffineMap":
        Li = np.linalg.inv(self.linear)
        return AffineMap(Li, -Li @ self.translation)


@dataclass(eq=False)
class ChordPairSample:
    alpha: np.ndarray
    p: np.ndarray  # (m, n)
    q: np.ndarray  # (m, n), q[i] = I_alpha(p[i])
    equator: np.ndarray  # (k, n)
    dropped: int = 0
    seed: int | None = None
    diameter: float | None = None  # body diameter; None means use the sample set

    def __len__(self):
        return len(self.p)


@dataclass(eq=False)
class DefectReport:
    alpha: np.ndarray
    fitted: AffineMap
    fit_rms: float
    involution_residual: float
    eigenstructure_residual: float
    n_pairs: int
    dropped: int = 0
    seed: int | None = None
    equator_discrepancy: float | None = None

    def record(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "fit_rms": self.fit_rms,
            "involution_residual": self.involution_residual,
            "eigenstructure_residual": self.eigenstructure_residual,
            "equator_discrepancy": self.equator_discrepancy,
            "n_pairs": self.n_pairs,
            "dropped": self.dropped,
            "seed": self.seed,
            "linear": self.fitted.linear.tolist(),
            "translation": self.fitted.translation.tolist(),
        }


@dataclass(frozen=True)
class DefectConfig:
    samples: int | None = None  # chord pairs; default 64 (2D) / 128 (higher)
    seed: int = 0
    margin: float = HEMISPHERE_MARGIN
    offset_radius: float = 0.5  # two-patch mode, fraction of the smaller patch radius


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _default_samples(n: int) -> int:
    return 64 if n == 2 else 128


def direction_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Per-direction stream derived from a master seed."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


# ---------------------------------------------------------------------------
# sampling


def _body_pairs(body: GaugeBody, alpha: np.ndarray, m: int, rng, margin: float):
    n = body.dim
    a0 = body.linear_inv @ alpha
    a0 /= np.linalg.norm(a0)
    halton = qmc.Halton(d=sphere_cube_dim(n), scramble=True, seed=rng)
    ps, qs = [], []
    tries = 0
    while len(ps) < m and tries < 50:
        tries += 1
        omega = sphere_points(halton.random(4 * m), n)
        y = omega / body._gauge0(omega)[:, None]
        g = body._grad0(y)
        # northern hemisphere, in the base frame so the sampling is affinely covariant
        slope = (g @ a0) / np.linalg.norm(g, axis=1)
        for yi in y[slope < -margin]:
            p = boundary_point(body, body.from_base(yi))
            chord = chord_second_intersection(body, p, alpha)
            if chord.tangent_flag:
                continue
            ps.append(p.position)
            qs.append(chord.endpoint_b.position)
            if len(ps) == m:
                break
    if len(ps) < m:
        raise GeometryError("could not sample enough chords")
    return np.array(ps), np.array(qs)


def body_diameter(body: GaugeBody, m: int = 400) -> float:
    return float(np.max(pdist(boundary_samples(body, m))))


def _equator(body: GaugeBody, alpha: np.ndarray) -> np.ndarray:
    """Support points for covectors annihilating ``alpha``."""
    basis = null_space(alpha[None, :]).T
    dirs = np.vstack([basis, -basis])
    return np.array([support_point(body, u).position for u in dirs])


def _patch_pairs(s1: Patch, s2: Patch, alpha: np.ndarray, m: int, rng, offset_radius: float):
    n = s1.dim
    basis = null_space(alpha[None, :])
    r = offset_radius * min(s1.radius, s2.radius)
    u = qmc.Halton(d=n - 1, scramble=True, seed=rng).random(m)
    if n == 2:
        offsets = (2.0 * u - 1.0) * r
    else:
        # uniform in the (n-1)-ball via normalised Gaussians and a radial power
        g = np.random.default_rng(rng.integers(2**63)).standard_normal((m, n - 1))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        offsets = g * (r * u[:, :1] ** (1.0 / (n - 1)))
    mid = 0.5 * (s1.base + s2.base)
    ps, qs = [], []
    dropped = 0
    for off in offsets:
        # lines are anchored at the midpoint so tilted directions drift least
        y = mid + basis @ off
        try:
            p = intersect_patch(s1, y, alpha)
            q = intersect_patch(s2, p, alpha)
        except PatchEscapeError:
            dropped += 1
            continue
        ps.append(p)
        qs.append(q)
    if dropped > MAX_DROP_FRACTION * m:
        raise PatchEscapeError(f"{dropped} of {m} chords escaped the patches")
    return np.array(ps).reshape(-1, n), np.array(qs).reshape(-1, n), dropped


def chord_involution(target, alpha, m: int | None = None, seed: int | np.random.SeedSequence = 0,
                     margin: float = HEMISPHERE_MARGIN, offset_radius: float = 0.5) -> ChordPairSample:
    """Sample pairs ``(p, I_alpha(p))``.

    ``target`` is a :class:`GaugeBody` (pairs drawn from the northern
    hemisphere, where lines along ``alpha`` enter the body, plus equator
    points) or a pair of patches ``(S1, S2)`` (``p`` on ``S1``, its partner
    on ``S2``).
    """
    alpha = _unit(alpha)
    rng = np.random.default_rng(seed)
    if isinstance(target, GaugeBody):
        m = m or _default_samples(target.dim)
        p, q = _body_pairs(target, alpha, m, rng, margin)
        return ChordPairSample(alpha, p, q, _equator(target, alpha), 0, _seed_int(seed),
                               body_diameter(target))
    s1, s2 = target
    m = m or _default_samples(s1.dim)
    for s, base in ((s1, s1.base), (s2, s2.base)):
        c = s.conormal(base)
        if abs(c @ alpha) < 1e-3:
            raise TransversalityError("chord direction is tangent to a patch")
    p, q, dropped = _patch_pairs(s1, s2, alpha, m, rng, offset_radius)
    return ChordPairSample(alpha, p, q, np.empty((0, s1.dim)), dropped, _seed_int(seed))


def _seed_int(seed):
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.entropy)
    return int(seed)


# ---------------------------------------------------------------------------
# fitting


def fit_affine_map(sample: ChordPairSample, symmetric: bool = True):
    """Least-squares affine map ``A`` with ``A(p_i) ~ q_i``.

    With ``symmetric`` the reversed pairs ``(q_i, p_i)`` are fitted too, as
    an involution must explain both orientations.  Returns ``(A, fit_rms)``
    where ``fit_rms`` is the RMS misfit divided by the body diameter (or,
    for patch pairs, the diameter of the sampled point set).
    """
    P, Q = sample.p, sample.q
    n = P.shape[1]
    if len(P) < n * n + n + 5:
        raise DegenerateFitError(f"need at least {n * n + n + 5} pairs, got {len(P)}")
    X = np.vstack([P, Q]) if symmetric else P
    Y = np.vstack([Q, P]) if symmetric else Q
    mu = X.mean(axis=0)
    sc = np.sqrt(np.mean(np.sum((X - mu) ** 2, axis=1)))
    Z = np.column_stack([(X - mu) / sc, np.ones(len(X))])
    cond = np.linalg.cond(Z)
    if not cond <= 1e8:
        raise DegenerateFitError(f"sample set is rank deficient (condition number {cond:.2e})")
    coef, *_ = np.linalg.lstsq(Z, Y, rcond=None)
    L = coef[:n].T / sc
    b = coef[n] - L @ mu
    A = AffineMap(L, b)
    res = A(X) - Y
    diam = sample.diameter or float(np.max(pdist(np.vstack([P, Q]))))
    rms = float(np.sqrt(np.mean(np.sum(res**2, axis=1)))) / diam
    return A, rms


def involution_residual(A: AffineMap) -> float:
    n = len(A.translation)
    return float(np.linalg.norm(A.linear @ A.linear - np.eye(n), 2)
                 + np.linalg.norm(A.linear @ A.translation + A.translation))


def eigenstructure_residual(A: AffineMap) -> float:
    """Distance of the spectrum from ``{-1, +1 (n-1 times)}``."""
    ev = np.linalg.eigvals(A.linear)
    ev = ev[np.argsort(ev.real)]
    target = np.ones(len(ev))
    target[0] = -1.0
    return float(np.max(np.abs(ev - target)))


def reflection_axis(A: AffineMap) -> np.ndarray:
    """Unit eigenvector of the linear part for the eigenvalue nearest -1."""
    ev, V = np.linalg.eig(A.linear)
    k = int(np.argmin(np.abs(ev + 1.0)))
    v = np.real(V[:, k])
    return v / np.linalg.norm(v)


def projectivity_defect(target, alpha, cfg: DefectConfig | None = None,
                        seed: int | np.random.SeedSequence | None = None) -> DefectReport:
    cfg = cfg or DefectConfig()
    seed = cfg.seed if seed is None else seed
    sample = chord_involution(target, alpha, cfg.samples, seed, cfg.margin, cfg.offset_radius)
    A, rms = fit_affine_map(sample)
    eq = None
    if len(sample.equator):
        # the map x -> L x - L p + p built from an equator point p
        p = sample.equator
        eq = float(np.max(np.linalg.norm(p - p @ A.linear.T - A.translation, axis=1)))
    return DefectReport(sample.alpha, A, rms, involution_residual(A), eigenstructure_residual(A),
                        len(sample), sample.dropped, sample.seed, eq)


# ---------------------------------------------------------------------------
# sweeps


def direction_grid(n: int, count: int) -> np.ndarray:
    """Quasi-uniform unoriented directions: angles in ``[0, pi)`` in 2D, a
    Fibonacci lattice on the upper hemisphere in 3D."""
    if n == 2:
        th = np.pi * np.arange(count) / count
        return np.column_stack([np.cos(th), np.sin(th)])
    d = uniform_directions(n, 2 * count)
    return d[d[:, -1] > 0][:count]


@dataclass(eq=False)
class Verdict:
    is_ellipsoid_like: bool
    max_defect: float
    argmax_direction: np.ndarray
    bl_cross_check: float
    tol: float
    reports: list[DefectReport] = field(default_factory=list)
    skipped: list[tuple[list[float], str]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "verdict": self.is_ellipsoid_like,
            "max_defect": self.max_defect,
            "argmax_alpha": self.argmax_direction.tolist(),
            "bl_sphericity_defect": self.bl_cross_check,
            "tol": self.tol,
            "directions": len(self.reports),
            "skipped": self.skipped,
        }


def _defect_task(args):
    target, alpha, cfg, k = args
    try:
        return projectivity_defect(target, alpha, cfg, direction_seed(cfg.seed, k)), None
    except (GeometryError, DegenerateFitError) as exc:
        return None, str(exc)


def sweep_defects(target, directions, cfg: DefectConfig, workers: int = 1):
    """Defect report per direction; failed directions are returned separately."""
    tasks = [(target, a, cfg, k) for k, a in enumerate(directions)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_defect_task, tasks))
    else:
        results = [_defect_task(t) for t in tasks]
    reports, skipped = [], []
    for a, (rep, err) in zip(directions, results):
        if rep is None:
            skipped.append((np.asarray(a).tolist(), err))
        else:
            reports.append(rep)
    return reports, skipped


def ellipsoid_verdict(body: GaugeBody, directions: int | None = None, tol: float = 1e-5,
                      cfg: DefectConfig | None = None, bl_cfg: IntegrationConfig | None = None,
                      workers: int = 1) -> Verdict:
    """Sweep chord directions and cross-check with the Binet-Legendre test.

    The body is judged ellipsoid-like when every chord involution is affine
    to within ``tol`` and the body is a sphere of its Binet-Legendre metric
    to within ``tol``.
    """
    cfg = cfg or DefectConfig()
    n = body.dim
    count = max(directions or 0, 40 if n == 2 else 200)
    grid = direction_grid(n, count)
    reports, skipped = sweep_defects(body, grid, cfg, workers)
    if not reports:
        raise GeometryError("no direction produced a defect report")
    k = int(np.argmax([r.fit_rms for r in reports]))
    if bl_cfg is None:
        bl_cfg = IntegrationConfig(mode="cubature" if n <= 3 else "mc", seed=cfg.seed)
    bl = bl_matrix(body, bl_cfg)
    sph = bl_sphericity_defect(body, bl)
    max_defect = reports[k].fit_rms
    return Verdict(bool(max_defect < tol and sph < tol), max_defect, reports[k].alpha, sph, tol,
                   reports, skipped)


def cone_directions(alpha0, cone: float, count: int) -> np.ndarray:
    """Directions within angle ``cone`` of ``alpha0`` (``alpha0`` first)."""
    a0 = _unit(alpha0)
    n = len(a0)
    basis = null_space(a0[None, :])
    if n == 2:
        angles = np.linspace(-cone, cone, count)
        angles = np.concatenate([[0.0], angles[angles != 0.0]])
        return np.array([np.cos(t) * a0 + np.sin(t) * basis[:, 0] for t in angles])
    out = [a0]
    ring = uniform_directions(n - 1, max(count - 1, 1))
    for i, w in enumerate(ring):
        t = cone * (0.5 + 0.5 * (i % 2))
        out.append(np.cos(t) * a0 + np.sin(t) * basis @ w)
    return np.array(out)


def two_patch_defect(s1: Patch, s2: Patch, alpha0=None, cone: float = 0.2, count: int = 9,
                     cfg: DefectConfig | None = None, workers: int = 1):
    """Projectivity defects of the two-germ involution over a cone of directions.

    ``alpha0`` defaults to the direction from the base of ``s1`` to that of
    ``s2``.  Returns ``(reports, skipped)``.
    """
    cfg = cfg or DefectConfig()
    line = s2.base - s1.base
    a0 = _unit(line if alpha0 is None else alpha0)
    if np.linalg.norm(line - (line @ a0) * a0) > 1e-9 * np.linalg.norm(line):
        raise ValueError("alpha0 must be parallel to the line through the two base points")
    for s in (s1, s2):
        if abs(s.conormal(s.base) @ a0) < 0.05:
            raise TransversalityError("base line is not transversal to a patch")
    return sweep_defects((s1, s2), cone_directions(a0, cone, count), cfg, workers)


def reports_to_jsonl(reports) -> str:
    return "".join(json.dumps(r.record()) + "\n" for r in reports)
