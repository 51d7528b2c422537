import math

import numpy as np
import pytest

from minkbill import PlanarLinearField, classify_field, fit_quadric, hamiltonian_of, integrate_orbit, phase_conic
from minkbill.errors import GeometryError, SpecError
from minkbill.phasecurves import field_from_spec
from minkbill.quadrics import Quadric, classify_conic, conic_type_from_discriminant


def field(M, b=(0.0, 0.0)):
    return PlanarLinearField(np.array(M, float), np.array(b, float))


ROTATION = field([[0, 1], [-1, 0]])
SADDLE = field([[1, 0], [0, -1]])
SHEAR = field([[0, 1], [0, 0]], [0, 1])


def same_conic(a: Quadric, b: Quadric, tol=1e-12):
    return np.allclose(a.monomial_coefficients(), b.monomial_coefficients(), atol=tol)


class TestHamiltonian:
    def test_rotation_circles(self):
        H = hamiltonian_of(ROTATION)
        assert (H.a, H.c, H.d, H.e, H.f) == (1.0, 0.0, 1.0, 0.0, 0.0)

    def test_saddle_hyperbolas(self):
        H = hamiltonian_of(SADDLE)
        assert (H.a, H.c, H.d, H.e, H.f) == (0.0, 1.0, 0.0, 0.0, 0.0)  # H = xy

    def test_shear_parabolas(self):
        H = hamiltonian_of(SHEAR)
        assert (H.a, H.c, H.d, H.e, H.f) == (0.0, 0.0, 1.0, -1.0, 0.0)  # H = y^2/2 - x

    def test_trace_enforced(self):
        with pytest.raises(ValueError):
            field([[1, 0], [0, 1]])

    def test_affine_closure(self, rng):
        # conjugating by an area-preserving affine map z = S w + t substitutes into H
        a, b, c = rng.standard_normal(3)
        f = field([[a, b], [c, -a]], rng.standard_normal(2))
        S = rng.standard_normal((2, 2))
        S /= math.sqrt(abs(np.linalg.det(S)))
        if np.linalg.det(S) < 0:
            S[:, 0] *= -1
        t = rng.standard_normal(2)
        Si = np.linalg.inv(S)
        g = PlanarLinearField(Si @ f.M @ S, Si @ (f.M @ t + f.b))
        w = rng.standard_normal((20, 2))
        Hf, Hg = hamiltonian_of(f), hamiltonian_of(g)
        diff = Hg(w) - Hf(w @ S.T + t)
        assert np.ptp(diff) <= 1e-10  # equal up to an additive constant


class TestClassify:
    @pytest.mark.parametrize("f, tag, detail", [
        (SADDLE, "saddle_hyperbolas", "hyperbolas"),
        (ROTATION, "center_circles", "ellipses"),
        (SHEAR, "shear_parabolas_or_lines", "parabolas"),
        (field([[0, 1], [0, 0]]), "shear_parabolas_or_lines", "lines"),
        (field([[0, 0], [0, 0]], [1, 2]), "constant_lines", "lines"),
    ])
    def test_cases(self, f, tag, detail):
        cls = classify_field(f)
        assert (cls.tag, cls.detail) == (tag, detail)

    def test_rotated_shear_constant(self):
        th = 0.77
        R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        f = PlanarLinearField(R @ (2.0 * np.array([[0.0, 1.0], [0.0, 0.0]])) @ R.T, R @ np.array([0.3, 1.5]))
        cls = classify_field(f)
        assert cls.detail == "parabolas"
        assert cls.parameter == pytest.approx(0.75)  # field 2 (y, 0.75) + const along the kernel

    def test_conic_type_matches_classification(self, rng):
        expect = {"saddle_hyperbolas": "hyperbolic", "center_circles": "elliptic",
                  "shear_parabolas_or_lines": "parabolic"}
        for _ in range(50):
            a, b, c = rng.standard_normal(3)
            f = field([[a, b], [c, -a]], rng.standard_normal(2))
            cls = classify_field(f)
            conic = phase_conic(f, rng.standard_normal(2))
            assert conic_type_from_discriminant(conic) == expect[cls.tag]


class TestPhaseConic:
    def test_circle(self):
        assert same_conic(phase_conic(ROTATION, [1, 0]), Quadric(np.eye(2), [0, 0], -1.0))

    def test_hyperbola(self):
        c = phase_conic(SADDLE, [1, 1])
        assert same_conic(c, Quadric([[0, 0.5], [0.5, 0]], [0, 0], -1.0))
        assert classify_conic(c) == "hyperbola"

    def test_parabola(self):
        c = phase_conic(SHEAR, [0, 0])
        assert same_conic(c, Quadric([[0, 0], [0, 1]], [-1, 0], 0.0))  # y^2 = 2x
        assert classify_conic(c) == "parabola"

    def test_tangency(self, rng):
        for _ in range(20):
            a, b, c = rng.standard_normal(3)
            f = field([[a, b], [c, -a]], rng.standard_normal(2))
            z0 = rng.standard_normal(2)
            conic = phase_conic(f, z0)
            assert abs(conic(z0)) <= 1e-12
            assert abs(conic.gradient(z0) @ f(z0)) <= 1e-12 * np.linalg.norm(conic.gradient(z0)) * (
                1 + np.linalg.norm(f(z0)))

    def test_singular_point(self):
        with pytest.raises(GeometryError):
            phase_conic(ROTATION, [0, 0])

    def test_matches_fit_of_orbit(self, rng):
        for _ in range(5):
            a, b, c = rng.uniform(-1, 1, 3)
            f = field([[a, b], [c, -a]], rng.uniform(-1, 1, 2))
            z0 = rng.uniform(-1, 1, 2)
            orbit = integrate_orbit(f, z0, 1.0, 1e-3)[::25][:40]
            fit = fit_quadric(orbit)
            if fit.degenerate:
                continue
            assert same_conic(fit.quadric, phase_conic(f, z0), tol=1e-8)


class TestIntegrate:
    def test_period(self):
        orbit = integrate_orbit(ROTATION, [1, 0], 2 * math.pi, 1e-3)
        np.testing.assert_allclose(orbit[-1], [1, 0], atol=1e-8)

    def test_constant(self):
        orbit = integrate_orbit(field([[0, 0], [0, 0]], [1, 0]), [0, 0], 1.0, 0.1)
        np.testing.assert_allclose(orbit[-1], [1, 0], atol=1e-15)
        assert len(orbit) == 11

    def test_bad_step(self):
        with pytest.raises(ValueError):
            integrate_orbit(ROTATION, [1, 0], 1.0, 0.0)


class TestSpec:
    def test_round_trip(self):
        f = field_from_spec({"M": [[1, 2], [3, -1]], "b": [0, 1]})
        np.testing.assert_array_equal(f.M, [[1, 2], [3, -1]])

    @pytest.mark.parametrize("spec, name", [
        ({"M": [[1, 0], [0, 1]], "b": [0, 0]}, "M"),
        ({"M": [[1, 0], [0, -1]]}, "b"),
        ({"M": [[1, 0], [0, -1]], "b": [0, 0, 0]}, "b"),
        ({"M": [[1, 0], [0, -1]], "b": [0, 0], "c": 1}, "c"),
    ])
    def test_errors_name_field(self, spec, name):
        with pytest.raises(SpecError) as info:
            field_from_spec(spec)
        assert info.value.field == name
