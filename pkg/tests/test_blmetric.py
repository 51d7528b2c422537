import numpy as np
import pytest

from factories import random_ellipsoid, random_spd
from oracles import bl_moments_2d, perturbed_gauge

from minkbill import Ellipsoid, IntegrationConfig, PBall, PerturbedBall, bl_matrix, bl_sphericity_defect
from minkbill.errors import IntegrationError

MC = IntegrationConfig(mode="mc", samples=400_000, seed=11)


def test_disk_identity_exact():
    assert np.max(np.abs(bl_matrix(Ellipsoid(matrix=np.eye(2))).primal - np.eye(2))) <= 1e-10


def test_sphericity_disk_and_ellipse():
    for body in (Ellipsoid(matrix=np.eye(2)), Ellipsoid(matrix=np.diag([0.25, 1.0]))):
        assert bl_sphericity_defect(body, bl_matrix(body)) <= 1e-8


def test_perturbed_against_dblquad():
    body = PerturbedBall(harmonics=((3, 0.05),))
    vol, bary, G = bl_moments_2d(lambda x: perturbed_gauge(x, 3, 0.05))
    bl = bl_matrix(body)
    assert bl.volume == pytest.approx(vol, rel=1e-9)
    np.testing.assert_allclose(bl.barycenter, bary, atol=1e-9)
    np.testing.assert_allclose(bl.primal, G, atol=1e-9)


def test_invariants(rng):
    body = random_ellipsoid(rng, 3)
    bl = bl_matrix(body)
    np.testing.assert_allclose(bl.primal, bl.primal.T, atol=1e-12)
    np.linalg.cholesky(bl.primal)
    np.testing.assert_allclose(bl.primal @ bl.dual, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(bl.barycenter, body.center, atol=1e-12)


def test_affine_equivariance_and_scaling(rng):
    body = PBall(p=3.0, scale=[1.0, 0.7])
    A = rng.standard_normal((2, 2)) + 2 * np.eye(2)
    G = bl_matrix(body).primal
    np.testing.assert_allclose(bl_matrix(body.transformed(A, [0.4, -1.0])).primal, A @ G @ A.T, atol=1e-10)
    np.testing.assert_allclose(bl_matrix(body.transformed(3.0 * np.eye(2))).primal, 9.0 * G, atol=1e-10)


@pytest.mark.parametrize("body", [PBall(p=4.0), PerturbedBall(harmonics=((3, 0.05),)),
                                  PBall(p=4.0, scale=[1.0, 1.0, 1.0]),
                                  Ellipsoid(matrix=random_spd(np.random.default_rng(2), 3))],
                         ids=["pball2", "harmonic", "pball3", "ellipsoid3"])
def test_monte_carlo_agrees_with_cubature(body):
    mc = bl_matrix(body, MC)
    cub = bl_matrix(body)
    assert np.all(np.abs(mc.primal - cub.primal) <= 4 * mc.std_error)


def test_monte_carlo_is_seeded():
    body = PBall(p=4.0)
    a = bl_matrix(body, MC)
    b = bl_matrix(body, MC)
    np.testing.assert_array_equal(a.primal, b.primal)
    c = bl_matrix(body, IntegrationConfig(mode="mc", samples=400_000, seed=12))
    assert not np.array_equal(a.primal, c.primal)


def test_monte_carlo_threads_match_serial():
    body = PBall(p=4.0)
    cfg = IntegrationConfig(mode="mc", samples=300_000, seed=5, block_size=1 << 16)
    threaded = IntegrationConfig(mode="mc", samples=300_000, seed=5, block_size=1 << 16, workers=4)
    np.testing.assert_array_equal(bl_matrix(body, cfg).primal, bl_matrix(body, threaded).primal)


def test_budget_exhaustion():
    cfg = IntegrationConfig(mode="mc", samples=10_000, seed=0, block_size=1024, max_rel_se=1e-6)
    with pytest.raises(IntegrationError):
        bl_matrix(PBall(p=4.0), cfg)


def test_unknown_mode():
    with pytest.raises(ValueError):
        bl_matrix(PBall(p=4.0), IntegrationConfig(mode="simpson"))


def test_record_round_trip():
    import json

    rec = json.loads(bl_matrix(PBall(p=4.0)).to_json())
    assert rec["mode"] == "cubature"
    assert len(rec["primal"]) == 2
