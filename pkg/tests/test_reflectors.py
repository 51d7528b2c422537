import math

import numpy as np
import pytest

from factories import random_ellipsoid
from oracles import p4_line_roots, pball_gauge

from minkbill import (
    Ellipsoid,
    InvolutionField,
    PBall,
    PerturbedBall,
    boundary_point,
    ellipsoid_equivalence_map,
    minkowski_reflect,
    projective_reflect,
    standard_reflection_residual,
    trajectory,
)
from minkbill.bodies import boundary_samples, ray_exit
from minkbill.errors import GeometryError, TransversalityError
from minkbill.reflectors import (
    MinkowskiLaw,
    ProjectiveLaw,
    StandardLaw,
    TrajectoryError,
    format_trajectory,
    mirror,
    push_trajectory,
)

DISK = Ellipsoid(matrix=np.eye(2))
S2 = 1.0 / math.sqrt(2.0)


class TestMinkowski:
    def test_round_dual_is_mirror(self):
        q = boundary_point(DISK, [1.0, 0.0])
        np.testing.assert_allclose(minkowski_reflect(DISK, DISK, q, [S2, S2]), [-S2, S2], atol=1e-15)

    def test_tangent_chord_keeps_velocity(self):
        # grazing v_in: p1 lies on the equator of dF_q, where the chord is tangent to T
        q = boundary_point(DISK, [1.0, 0.0])
        v = np.array([1e-12, 1.0])
        np.testing.assert_array_equal(minkowski_reflect(DISK, DISK, q, v), v)

    def test_ellipse_dual_matches_conjugated_mirror(self):
        T = Ellipsoid(matrix=np.diag([1.0, 4.0]))
        q = boundary_point(DISK, [1.0, 0.0])
        v = np.array([S2, S2])
        out = minkowski_reflect(DISK, T, q, v)
        P = ellipsoid_equivalence_map(T).dual_inv
        # standard reflection of P v at the pushed table, pulled back
        pushed = DISK.transformed(P)
        ref = np.linalg.solve(P, mirror(P @ v, boundary_point(pushed, P @ q.position).conormal))
        assert np.linalg.norm(out / np.linalg.norm(out) - ref / np.linalg.norm(ref)) <= 1e-9

    def test_requires_outgoing_velocity(self):
        with pytest.raises(GeometryError):
            minkowski_reflect(DISK, DISK, boundary_point(DISK, [1.0, 0.0]), [-1.0, 0.2])

    def test_sign_contract(self, rng):
        T = PBall(p=3.0, scale=[1.0, 0.5])
        K = PerturbedBall(harmonics=((2, 0.1),))
        for x in boundary_samples(K, 60):
            q = boundary_point(K, x)
            v = q.conormal + rng.normal(scale=0.8, size=2)
            if q.conormal @ v <= 1e-3:
                continue
            assert q.conormal @ minkowski_reflect(K, T, q, v) < 0

    def test_pball_dual_against_brute_force(self):
        # dense-grid support point, quartic chord root, closed-form gradient
        th = np.linspace(0, 2 * np.pi, 400000, endpoint=False)
        w = np.column_stack([np.cos(th), np.sin(th)])
        bnd = w / pball_gauge(w)[:, None]
        T = PBall(p=4.0)
        for ang in (0.3, 1.1, 2.5):
            q = boundary_point(DISK, [math.cos(ang), math.sin(ang)])
            v = q.conormal + np.array([0.3, -0.5])
            p1 = bnd[np.argmax(bnd @ v)]
            roots = p4_line_roots(p1, q.conormal)
            p2 = p1 + roots[np.argmax(np.abs(roots))] * q.conormal
            g = p2**3
            out = minkowski_reflect(DISK, T, q, v)
            assert np.linalg.norm(out / np.linalg.norm(out) - g / np.linalg.norm(g)) <= 1e-4


class TestProjective:
    def test_euclidean_normal_is_mirror(self):
        f = InvolutionField.euclidean_normal(DISK)
        out = projective_reflect(f, boundary_point(DISK, [1.0, 0.0]), [S2, S2])
        np.testing.assert_allclose(out, [-S2, S2], atol=1e-15)

    def test_fixes_tangent_and_negates_transversal(self, rng):
        body = PBall(p=3.0)
        f = InvolutionField(body, lambda q: q.conormal + np.array([0.3, 0.1]))
        for x in boundary_samples(body, 20):
            q = boundary_point(body, x)
            t = np.array([-q.conormal[1], q.conormal[0]])
            assert np.linalg.norm(projective_reflect(f, q, t) - t) <= 1e-12
            nu = f.transversal(q)
            assert np.linalg.norm(projective_reflect(f, q, nu) + nu) <= 1e-12
            H = f.matrix(q)
            assert np.linalg.norm(H @ H - np.eye(2)) <= 1e-12

    def test_constant_field_checks_transversality(self):
        f = InvolutionField.constant(DISK, [1.0, 0.0])
        with pytest.raises(TransversalityError):
            projective_reflect(f, boundary_point(DISK, [0.0, 1.0]), [1.0, 1.0])
        with pytest.raises(TransversalityError):
            InvolutionField.constant(DISK, [1.0, 0.0], check_points=[[0.0, 1.0]])

    def test_metric_normal_law_equals_standard_in_metric(self):
        G = np.array([[2.0, 0.3], [0.3, 1.0]])
        K = Ellipsoid(matrix=np.diag([1.0, 0.5]))
        traj = trajectory(K, ProjectiveLaw(InvolutionField.metric_normal(K, G)),
                          boundary_point(K, [1.0, 0.0]), [-1.0, 0.4], 20)
        assert standard_reflection_residual(traj, G) <= 1e-12


class TestTrajectory:
    def test_square_orbit(self):
        traj = trajectory(DISK, StandardLaw(DISK), boundary_point(DISK, [1.0, 0.0]), [-S2, S2], 4)
        np.testing.assert_allclose(traj.points(), [[0, 1], [-1, 0], [0, -1], [1, 0]], atol=1e-14)
        assert standard_reflection_residual(traj) <= 1e-12

    def test_zero_bounces(self):
        traj = trajectory(DISK, StandardLaw(DISK), boundary_point(DISK, [1.0, 0.0]), [-S2, S2], 0)
        assert traj.bounces == []
        with pytest.raises(ValueError):
            standard_reflection_residual(traj)

    def test_ellipse_table_minkowski_self_check(self):
        K = Ellipsoid(matrix=np.diag([0.5, 1.0]), center=[0.1, 0.0])
        T = Ellipsoid(matrix=[[1.0, 0.3], [0.3, 2.0]])
        traj = trajectory(K, MinkowskiLaw(K, T), boundary_point(K, K.radial_point(np.array([1.0, 0.0]))),
                          [-1.0, 0.3], 50)
        assert max(b.gauge_residual for b in traj.bounces) <= 1e-9
        # consecutive bounces are joined by chords inside K
        prev = traj.start.position
        for b in traj.bounces:
            mid = 0.5 * (prev + b.q.position)
            hit = ray_exit(K, mid, b.q.position - prev).position
            assert np.linalg.norm(hit - b.q.position) <= 1e-9
            prev = b.q.position

    def test_round_dual_equals_standard(self):
        K = PerturbedBall(harmonics=((3, 0.05),))
        traj = trajectory(K, MinkowskiLaw(K, DISK), boundary_point(K, K.radial_point(np.array([1.0, 0.0]))),
                          [-1.0, 0.5], 40)
        assert standard_reflection_residual(traj) <= 1e-9

    def test_pball_dual_is_not_standard(self):
        # brute-force oracle on 20 random reflections: up to 0.48 in direction
        traj = trajectory(DISK, MinkowskiLaw(DISK, PBall(p=4.0)), boundary_point(DISK, [1.0, 0.0]),
                          [-1.0, 0.3], 30)
        assert standard_reflection_residual(traj) > 1e-3

    def test_requires_inward_start(self):
        with pytest.raises(GeometryError):
            trajectory(DISK, StandardLaw(DISK), boundary_point(DISK, [1.0, 0.0]), [1.0, 0.0], 3)

    def test_failure_reports_index(self):
        # the constant field (0, 1) is tangent at (-1, 0), the first bounce
        law = ProjectiveLaw(InvolutionField.constant(DISK, [0.0, 1.0]))
        with pytest.raises(TrajectoryError) as info:
            trajectory(DISK, law, boundary_point(DISK, [1.0, 0.0]), [-1.0, 0.0], 3)
        assert info.value.index == 0
        assert isinstance(info.value.cause, TransversalityError)

    def test_csv(self):
        traj = trajectory(DISK, StandardLaw(DISK), boundary_point(DISK, [1.0, 0.0]), [-S2, S2], 4)
        lines = format_trajectory(traj).splitlines()
        assert lines[0] == "index,q0,q1,vin0,vin1,vout0,vout1,gauge_residual,tangent"
        assert len(lines) == 5


class TestEquivalenceMap:
    def test_unit_ball(self):
        m = ellipsoid_equivalence_map(DISK)
        np.testing.assert_allclose(m.B, np.eye(2))
        np.testing.assert_allclose(m.dual_inv, np.eye(2))

    def test_diagonal(self):
        m = ellipsoid_equivalence_map(Ellipsoid(matrix=np.diag([0.25, 1.0])))
        np.testing.assert_allclose(m.B, np.diag([0.5, 1.0]), atol=1e-15)
        np.testing.assert_allclose(m.dual, np.diag([0.5, 1.0]), atol=1e-15)
        np.testing.assert_allclose(m.dual_inv, np.diag([2.0, 1.0]), atol=1e-15)

    def test_duality_identity_and_round_trip(self, rng):
        T = random_ellipsoid(rng, 3, offset=0.0)
        m = ellipsoid_equivalence_map(T)
        a, v = rng.standard_normal(3), rng.standard_normal(3)
        assert (m.B @ a) @ v == pytest.approx(a @ (m.dual @ v))
        pts = boundary_samples(T, 100) @ m.B.T
        assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) <= 1e-12

    def test_rejects_non_ellipsoid(self):
        with pytest.raises(TypeError):
            ellipsoid_equivalence_map(PBall(p=4.0))

    def test_conjugation_3d(self, rng):
        T = random_ellipsoid(rng, 3, offset=0.0)
        K = random_ellipsoid(rng, 3, offset=0.2)
        q0 = boundary_point(K, K.radial_point(np.array([1.0, 0.0, 0.0])))
        traj = trajectory(K, MinkowskiLaw(K, T), q0, K.center - q0.position + [0.0, 0.2, 0.1], 40)
        pushed = push_trajectory(traj, ellipsoid_equivalence_map(T).dual_inv)
        assert standard_reflection_residual(pushed) <= 1e-8
        assert standard_reflection_residual(traj, np.linalg.inv(T.quadratic_form())) <= 1e-8
