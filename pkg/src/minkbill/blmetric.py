"""Binet-Legendre inner product of a convex body.

For a body ``T`` in the dual space the inner product of two vectors is

    <v1, v2> = (n + 2) / vol(T) * integral over T of a(v1) a(v2) da

with the origin moved to the barycentre of ``T``.  Its Gram matrix is
``(n + 2)`` times the covariance of the uniform distribution on ``T``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bodies import GaugeBody, boundary_samples, support_point
from .errors import IntegrationError


@dataclass(frozen=True)
class IntegrationConfig:
    mode: str = "cubature"  # or "mc"
    samples: int = 2_000_000  # accepted Monte Carlo samples
    seed: int = 0
    block_size: int = 1 << 18
    angular_nodes: int = 4096  # 2D cubature
    sphere_grid: tuple[int, int] = (50, 100)  # 3D: Gauss-Legendre in z x trapezoid in phi
    max_rel_se: float = 1e-2
    max_draw_factor: int = 20
    workers: int = 1


@dataclass(frozen=True, eq=False)
class BLMatrix:
    primal: np.ndarray
    dual: np.ndarray
    barycenter: np.ndarray
    volume: float
    mode: str
    n_samples: int
    std_error: np.ndarray
    seed: int | None = None

    def record(self) -> dict:
        return {
            "primal": self.primal.tolist(),
            "dual": self.dual.tolist(),
            "barycenter": self.barycenter.tolist(),
            "volume": self.volume,
            "mode": self.mode,
            "n_samples": self.n_samples,
            "std_error": self.std_error.tolist(),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.record())


def _spd_inverse(G: np.ndarray) -> np.ndarray:
    G = 0.5 * (G + G.T)
    np.linalg.cholesky(G)
    inv = np.linalg.inv(G)
    return 0.5 * (inv + inv.T)


def _polar_moments(body: GaugeBody, cfg: IntegrationConfig):
    """Volume, first and second moments of the base body about its origin.

    The radial integrals are exact: over the ray in direction ``w`` the body
    ends at ``R(w) = 1 / F0(w)`` and ``int_0^R r^(n-1+k) dr = R^(n+k)/(n+k)``.
    """
    n = body.dim
    if n == 2:
        m = cfg.angular_nodes
        th = 2.0 * np.pi * np.arange(m) / m
        w = np.column_stack([np.cos(th), np.sin(th)])
        wt = np.full(m, 2.0 * np.pi / m)
    elif n == 3:
        nz, nphi = cfg.sphere_grid
        z, wz = np.polynomial.legendre.leggauss(nz)
        phi = 2.0 * np.pi * np.arange(nphi) / nphi
        Z, PH = np.meshgrid(z, phi, indexing="ij")
        s = np.sqrt(1.0 - Z**2)
        w = np.column_stack([(s * np.cos(PH)).ravel(), (s * np.sin(PH)).ravel(), Z.ravel()])
        wt = np.outer(wz, np.full(nphi, 2.0 * np.pi / nphi)).ravel()
    else:
        raise ValueError("cubature is available in dimensions 2 and 3; use mode='mc'")
    R = 1.0 / body._gauge0(w)
    vol = np.sum(wt * R**n) / n
    first = (wt * R ** (n + 1)) @ w / (n + 1)
    second = (w * (wt * R ** (n + 2))[:, None]).T @ w / (n + 2)
    return vol, first, second, len(wt)


def _cubature(body: GaugeBody, cfg: IntegrationConfig) -> BLMatrix:
    n = body.dim
    vol0, first, second, nodes = _polar_moments(body, cfg)
    b0 = first / vol0
    cov0 = second / vol0 - np.outer(b0, b0)
    L = body.linear
    G = (n + 2) * L @ cov0 @ L.T
    G = 0.5 * (G + G.T)
    return BLMatrix(G, _spd_inverse(G), body.from_base(b0), float(vol0 * abs(np.linalg.det(L))),
                    "cubature", nodes, np.zeros((n, n)), None)


def _bounding_box(body: GaugeBody):
    n = body.dim
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        e = np.eye(n)[i]
        hi[i] = support_point(body, e).position[i]
        lo[i] = support_point(body, -e).position[i]
    pad = 1e-9 * (hi - lo)
    return lo - pad, hi + pad


def _monte_carlo(body: GaugeBody, cfg: IntegrationConfig) -> BLMatrix:
    n = body.dim
    lo, hi = _bounding_box(body)
    box_vol = float(np.prod(hi - lo))
    root = np.random.SeedSequence(cfg.seed)
    accepted: list[np.ndarray] = []
    count = 0
    draws = 0
    block = 0
    max_draws = cfg.max_draw_factor * cfg.samples

    def run(k):
        seq = np.random.SeedSequence(entropy=root.entropy, spawn_key=(k,))
        x = lo + (hi - lo) * np.random.default_rng(seq).random((cfg.block_size, n))
        return x[body.gauge(x) <= 1.0]

    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while count < cfg.samples and draws < max_draws:
            width = max(1, cfg.workers)
            ks = list(range(block, block + width))
            results = list(pool.map(run, ks)) if pool else [run(k) for k in ks]
            for x in results:
                accepted.append(x)
                count += len(x)
                draws += cfg.block_size
            block += width
    finally:
        if pool:
            pool.shutdown()
    X = np.concatenate(accepted)[: cfg.samples]
    N = len(X)
    if N < n + 2:
        raise IntegrationError("too few accepted samples")
    bary = X.mean(axis=0)
    Y = X - bary
    prods = Y[:, :, None] * Y[:, None, :]
    G = (n + 2) * prods.mean(axis=0)
    se = (n + 2) * prods.std(axis=0, ddof=1) / math.sqrt(N)
    G = 0.5 * (G + G.T)
    rel = float(np.max(se) / np.linalg.norm(G, 2))
    if rel > cfg.max_rel_se:
        raise IntegrationError(f"sample budget exhausted: relative standard error {rel:.2e} "
                               f"with {N} accepted samples")
    volume = box_vol * count / draws
    return BLMatrix(G, _spd_inverse(G), bary, volume, "mc", N, se, cfg.seed)


def bl_matrix(body: GaugeBody, cfg: IntegrationConfig | None = None) -> BLMatrix:
    """Gram matrix of the Binet-Legendre inner product of ``body``."""
    cfg = cfg or IntegrationConfig()
    if cfg.mode == "cubature":
        return _cubature(body, cfg)
    if cfg.mode == "mc":
        return _monte_carlo(body, cfg)
    raise ValueError(f"unknown integration mode {cfg.mode!r}")


def bl_sphericity_defect(body: GaugeBody, bl: BLMatrix, m: int = 2000) -> float:
    """``max |p^T D p - 1|`` over boundary samples ``p`` (taken from the
    barycentre), ``D`` the dual matrix.  Zero iff the body is a sphere of
    its own Binet-Legendre metric."""
    p = boundary_samples(body, m) - bl.barycenter
    q = np.einsum("ij,jk,ik->i", p, bl.dual, p)
    return float(np.max(np.abs(q - 1.0)))
