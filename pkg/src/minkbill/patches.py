"""Local boundary patches (germs of hypersurfaces) for the two-germ mode.

A patch is the part of a hypersurface inside the ball of radius ``radius``
around a base point.  Two kinds are supported: pieces of a body boundary
and pieces of hyperplanes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .bodies import GaugeBody, body_from_spec, ray_exit
from .errors import PatchEscapeError, SpecError


@dataclass(frozen=True, eq=False)
class BodyPatch:
    body: GaugeBody
    base: np.ndarray
    radius: float

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        if abs(self.body.gauge(base) - 1.0) > 1e-9:
            raise SpecError("base", "patch base point must lie on the body boundary")
        if not self.radius > 0:
            raise SpecError("radius", "patch radius must be positive")
        object.__setattr__(self, "base", base)

    @property
    def dim(self) -> int:
        return self.body.dim

    def conormal(self, x) -> np.ndarray:
        g = self.body.gradient(x)
        return g / np.linalg.norm(g)

    def line_hits(self, y, d) -> list[np.ndarray]:
        y = np.asarray(y, dtype=float)
        d = np.asarray(d, dtype=float)
        f = lambda t: self.body.gauge(y + t * d)  # noqa: E731
        t0 = d @ (self.body.center - y) / (d @ d)
        if f(t0) >= 1.0:
            span = 2.0 * self.body.extent / np.linalg.norm(d)
            res = optimize.minimize_scalar(f, bounds=(t0 - span, t0 + span), method="bounded",
                                           options={"xatol": 1e-14})
            if res.fun >= 1.0:
                return []
            t0 = res.x
        x0 = y + t0 * d
        return [ray_exit(self.body, x0, -d).position, ray_exit(self.body, x0, d).position]


@dataclass(frozen=True, eq=False)
class HyperplanePatch:
    point: np.ndarray
    normal: np.ndarray
    radius: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if not np.linalg.norm(n) > 0:
            raise SpecError("normal", "hyperplane normal must be nonzero")
        if not self.radius > 0:
            raise SpecError("radius", "patch radius must be positive")
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "normal", n / np.linalg.norm(n))

    @property
    def base(self) -> np.ndarray:
        return self.point

    @property
    def dim(self) -> int:
        return self.point.shape[0]

    def conormal(self, x) -> np.ndarray:
        return self.normal

    def line_hits(self, y, d) -> list[np.ndarray]:
        y = np.asarray(y, dtype=float)
        d = np.asarray(d, dtype=float)
        nd = self.normal @ d
        if abs(nd) < 1e-14 * np.linalg.norm(d):
            return []
        return [y + (self.normal @ (self.point - y) / nd) * d]


Patch = BodyPatch | HyperplanePatch


def intersect_patch(patch: Patch, y, d) -> np.ndarray:
    """Intersection of the line ``y + t d`` with the patch.

    Among the line's hits on the full hypersurface the one closest to the
    patch base is taken; it must lie within the patch radius.
    """
    hits = patch.line_hits(y, d)
    if not hits:
        raise PatchEscapeError("line misses the patch surface")
    x = min(hits, key=lambda h: np.linalg.norm(h - patch.base))
    if np.linalg.norm(x - patch.base) > patch.radius:
        raise PatchEscapeError("line leaves the patch")
    return x


def patch_from_spec(spec: dict) -> Patch:
    """``{"body": {...}, "base": [...], "radius": r}`` or
    ``{"family": "hyperplane", "point": [...], "normal": [...], "radius": r}``."""
    if not isinstance(spec, dict):
        raise SpecError("patch", "a patch spec must be a JSON object")
    if "radius" not in spec:
        raise SpecError("radius", "required for patches")
    if spec.get("family") == "hyperplane":
        for key in ("point", "normal"):
            if key not in spec:
                raise SpecError(key, "required for hyperplane patches")
        return HyperplanePatch(spec["point"], spec["normal"], float(spec["radius"]))
    for key in ("body", "base"):
        if key not in spec:
            raise SpecError(key, "required for body patches")
    return BodyPatch(body_from_spec(spec["body"]), spec["base"], float(spec["radius"]))


def patch_spec(patch: Patch) -> dict:
    if isinstance(patch, HyperplanePatch):
        return {"family": "hyperplane", "point": patch.point.tolist(),
                "normal": patch.normal.tolist(), "radius": patch.radius}
    return {"body": patch.body.spec(), "base": patch.base.tolist(), "radius": patch.radius}
