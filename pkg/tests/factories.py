"""Random test bodies."""

import numpy as np
from scipy.stats import special_ortho_group

from minkbill import Ellipsoid, PBall, PerturbedBall


def random_spd(rng, n, cond=10.0):
    R = special_ortho_group.rvs(n, random_state=rng)
    lam = np.exp(rng.uniform(0.0, np.log(cond), n))
    lam[0], lam[-1] = 1.0, cond ** rng.uniform(0.5, 1.0)
    return (R * lam) @ R.T


def random_ellipsoid(rng, n, cond=10.0, offset=0.5):
    return Ellipsoid(matrix=random_spd(rng, n, cond), center=rng.uniform(-offset, offset, n))


def random_body(rng, n=2):
    """One of the three families with random parameters."""
    kind = rng.integers(3)
    if kind == 0:
        return random_ellipsoid(rng, n)
    if kind == 1:
        return PBall(p=float(rng.uniform(1.5, 6.0)), scale=rng.uniform(0.5, 2.0, n).tolist(),
                     center=rng.uniform(-0.3, 0.3, n))
    k = int(rng.integers(2, 5))
    amp = float(rng.uniform(0.0, 0.9 / (k * k - 1)))
    return PerturbedBall(radius=float(rng.uniform(0.5, 2.0)), harmonics=((k, amp),), dimension=n,
                         center=rng.uniform(-0.3, 0.3, n))


def random_direction(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)
