import math
import unittest
import logging

import numpy as np

from isorb.exceptions import (
    BasePointMismatch,
    DegenerateFrame,
    DimensionMismatch,
    InvalidSpaceParams,
    NotOnSphere,
    NotTangent,
    NotUnitScalar,
    SingularPoint,
)
from isorb.jmap import JMap, TorusVector
from isorb.sphere import (
    S1,
    T2,
    MetricSpec,
    SpaceParams,
    SpherePoint,
    TangentVector,
    fundamental_vector,
    horizontal_project,
    kappa_eval,
    kappa_star,
    metric_eval,
    metric_gram,
    random_frame,
    random_regular_point,
    random_tangent,
    real_inner,
    s1_act,
    s1_orbit_length,
    s1_push,
    s1_vertical,
    s1_vertical_norm_sq,
    t2_act,
    t2_push,
    vertical_vectors,
    volume_density_ratio,
)


class Test_Sphere(unittest.TestCase):
    def setUp(self):
        logging.basicConfig(
            format="%(asctime)s - %(name)s - %(levelname)s: %(message)s",
            level=logging.DEBUG,
        )
        self.rng = np.random.default_rng(2024)
        self.params = SpaceParams(4, 2, 3)
        self.j = JMap.random(3, self.rng)

    def test_space_params_validation(self):
        for args in ((3, 1, 1), (4, 0, 1), (4, 2, 4), (4, True, 1), (4.0, 1, 1)):
            with self.subTest(args=args):
                with self.assertRaises(InvalidSpaceParams):
                    SpaceParams(*args)
        self.assertEqual(SpaceParams(6, 3, 2).m, 5)

    def test_point_must_be_on_sphere(self):
        with self.assertRaises(NotOnSphere):
            SpherePoint([1, 0, 0], [1, 0])
        with self.assertRaises(DimensionMismatch):
            SpherePoint([1, 0, 0], [0, 0, 0])
        x = SpherePoint.normalized([1, 1j, 0, 1, 1], 3)
        self.assertAlmostEqual(float(np.linalg.norm(x.coords)), 1.0, places=15)

    def test_regularity(self):
        x = SpherePoint([1, 0, 0], [0, 0])
        self.assertFalse(x.is_regular())
        with self.assertRaises(SingularPoint):
            x.require_regular()
        self.assertTrue(random_regular_point(self.params, self.rng).is_regular())

    def test_tangent_vectors(self):
        x = random_regular_point(self.params, self.rng)
        with self.assertRaises(NotTangent):
            TangentVector.from_coords(x, x.coords)
        y = random_regular_point(self.params, self.rng)
        with self.assertRaises(BasePointMismatch):
            random_tangent(x, self.rng) + random_tangent(y, self.rng)
        X = random_tangent(x, self.rng)
        self.assertAlmostEqual((X - X).norm(), 0.0)
        self.assertAlmostEqual((2 * X).norm(), 2 * X.norm())

    def test_actions_need_unit_scalars(self):
        x = random_regular_point(self.params, self.rng)
        with self.assertRaises(NotUnitScalar):
            s1_act(self.params, 1.1, x)
        with self.assertRaises(NotUnitScalar):
            t2_act(1.0, 0.5j, x)

    def test_circle_action_preserves_moduli(self):
        x = random_regular_point(self.params, self.rng)
        y = s1_act(self.params, np.exp(0.7j), x)
        self.assertAlmostEqual(y.u_norm_sq(), x.u_norm_sq(), places=14)
        np.testing.assert_allclose(y.v_abs_sq(), x.v_abs_sq(), atol=1e-14)
        np.testing.assert_allclose(y.u, np.exp(1.4j) * x.u, atol=1e-14)
        np.testing.assert_allclose(y.v, np.exp(2.1j) * x.v, atol=1e-14)

    def test_generators_are_tangent(self):
        x = random_regular_point(self.params, self.rng)
        for vector in vertical_vectors(self.params, S1, x) + vertical_vectors(
            self.params, T2, x
        ):
            self.assertAlmostEqual(real_inner(vector.coords, x.coords), 0.0, places=14)
        with self.assertRaises(ValueError):
            vertical_vectors(self.params, "T3", x)

    def test_circle_generator_has_unit_h0_length(self):
        x = random_regular_point(self.params, self.rng)
        w = s1_vertical(self.params, x)
        self.assertAlmostEqual(
            metric_eval(self.params, MetricSpec.round(), w, w),
            s1_vertical_norm_sq(self.params, x),
            places=12,
        )
        self.assertAlmostEqual(metric_eval(self.params, MetricSpec.h0(), w, w), 1.0, places=12)

    def test_h0_is_round_on_horizontal_vectors(self):
        x = random_regular_point(self.params, self.rng)
        X = horizontal_project(self.params, S1, random_tangent(x, self.rng))
        Y = horizontal_project(self.params, S1, random_tangent(x, self.rng))
        self.assertAlmostEqual(
            metric_eval(self.params, MetricSpec.h0(), X, Y),
            metric_eval(self.params, MetricSpec.round(), X, Y),
            places=12,
        )

    def test_horizontal_projection_is_orthogonal(self):
        x = random_regular_point(self.params, self.rng)
        for group in (S1, T2):
            with self.subTest(group=group):
                X = horizontal_project(self.params, group, random_tangent(x, self.rng))
                for vector in vertical_vectors(self.params, group, x):
                    self.assertAlmostEqual(
                        real_inner(X.coords, vector.coords), 0.0, places=12
                    )

    def test_metric_grams_are_symmetric_and_positive(self):
        x = random_regular_point(self.params, self.rng)
        frame = random_frame(x, self.rng)
        for spec in (MetricSpec.round(), MetricSpec.h0(), MetricSpec.hkappa(self.j)):
            with self.subTest(spec=spec):
                g = metric_gram(self.params, spec, frame)
                np.testing.assert_array_equal(g, g.T)
                self.assertGreater(np.linalg.eigvalsh(g)[0], 0.0)

    def test_metric_spec_arguments(self):
        with self.assertRaises(ValueError):
            MetricSpec("Flat")
        with self.assertRaises(ValueError):
            MetricSpec(MetricSpec.HKAPPA)
        with self.assertRaises(ValueError):
            MetricSpec(MetricSpec.H0, self.j)

    def test_kappa_vanishes_on_generators(self):
        x = random_regular_point(self.params, self.rng)
        for vector in vertical_vectors(self.params, S1, x) + vertical_vectors(
            self.params, T2, x
        ):
            np.testing.assert_allclose(
                kappa_eval(self.j, x, vector).as_array(), [0.0, 0.0], atol=1e-13
            )

    def test_kappa_is_invariant(self):
        x = random_regular_point(self.params, self.rng)
        X = random_tangent(x, self.rng)
        reference = kappa_eval(self.j, x, X).as_array()
        pushed = s1_push(self.params, np.exp(1.3j), X)
        np.testing.assert_allclose(
            kappa_eval(self.j, pushed.base, pushed).as_array(), reference, atol=1e-12
        )
        pushed = t2_push(np.exp(0.4j), np.exp(-2.2j), X)
        np.testing.assert_allclose(
            kappa_eval(self.j, pushed.base, pushed).as_array(), reference, atol=1e-12
        )

    def test_kappa_star_is_a_torus_field(self):
        x = random_regular_point(self.params, self.rng)
        X = random_tangent(x, self.rng)
        z = kappa_eval(self.j, x, X)
        np.testing.assert_allclose(
            kappa_star(self.j, X).coords, fundamental_vector(z, x).coords, atol=1e-15
        )

    def test_kappa_needs_matching_dimension(self):
        x = random_regular_point(SpaceParams(5, 1, 1), self.rng)
        with self.assertRaises(DimensionMismatch):
            kappa_eval(self.j, x, random_tangent(x, self.rng))

    def test_volume_density_is_one(self):
        for _ in range(5):
            x = random_regular_point(self.params, self.rng)
            ratio = volume_density_ratio(self.params, self.j, x, random_frame(x, self.rng))
            self.assertAlmostEqual(ratio, 1.0, places=9)

    def test_degenerate_frame(self):
        x = random_regular_point(self.params, self.rng)
        frame = random_frame(x, self.rng)
        frame[1] = frame[0]
        with self.assertRaises(DegenerateFrame):
            volume_density_ratio(self.params, self.j, x, frame)
        with self.assertRaises(DimensionMismatch):
            volume_density_ratio(self.params, self.j, x, frame[:-1])

    def test_circle_orbit_length(self):
        x = random_regular_point(self.params, self.rng)
        self.assertAlmostEqual(
            s1_orbit_length(self.params, MetricSpec.h0(), x), 2 * math.pi, places=10
        )
        self.assertAlmostEqual(
            s1_orbit_length(self.params, MetricSpec.round(), x),
            2 * math.pi * math.sqrt(s1_vertical_norm_sq(self.params, x)),
            places=10,
        )
        self.assertAlmostEqual(
            s1_orbit_length(self.params, MetricSpec.hkappa(self.j), x),
            2 * math.pi,
            places=10,
        )

    def test_fundamental_vector_is_linear(self):
        x = random_regular_point(self.params, self.rng)
        a = fundamental_vector(TorusVector(1.0, 2.0), x)
        b = fundamental_vector(TorusVector(1.0, 0.0), x) + fundamental_vector(
            TorusVector(0.0, 2.0), x
        )
        np.testing.assert_allclose(a.coords, b.coords, atol=1e-15)

    def test_fundamental_vector_differentiates_the_torus_action(self):
        eps = 1e-6
        for k in range(5):
            with self.subTest(k=k):
                x = random_regular_point(self.params, self.rng)
                z = TorusVector(*self.rng.normal(size=2))
                forward = t2_act(np.exp(1j * eps * z.z1), np.exp(1j * eps * z.z2), x)
                backward = t2_act(np.exp(-1j * eps * z.z1), np.exp(-1j * eps * z.z2), x)
                fd = (forward.coords - backward.coords) / (2 * eps)
                np.testing.assert_allclose(
                    fundamental_vector(z, x).coords, fd, atol=1e-8
                )

    def test_torus_action_composes(self):
        x = random_regular_point(self.params, self.rng)
        a1, a2, b1, b2 = np.exp(1j * self.rng.uniform(0, 2 * math.pi, size=4))
        np.testing.assert_allclose(
            t2_act(a1, a2, t2_act(b1, b2, x)).coords,
            t2_act(a1 * b1, a2 * b2, x).coords,
            atol=1e-14,
        )

    def test_zero_map_gives_h0(self):
        spec = MetricSpec.hkappa(JMap.zero(3))
        for k in range(5):
            with self.subTest(k=k):
                x = random_regular_point(self.params, self.rng)
                X = random_tangent(x, self.rng)
                Y = random_tangent(x, self.rng)
                self.assertAlmostEqual(
                    metric_eval(self.params, spec, X, Y),
                    metric_eval(self.params, MetricSpec.h0(), X, Y),
                    places=13,
                )

    def test_metrics_are_bilinear(self):
        x = random_regular_point(self.params, self.rng)
        X, Y, W = (random_tangent(x, self.rng) for _ in range(3))
        a, b = 0.7, -1.9
        for spec in (MetricSpec.round(), MetricSpec.h0(), MetricSpec.hkappa(self.j)):
            with self.subTest(spec=spec):
                self.assertAlmostEqual(
                    metric_eval(self.params, spec, X * a + Y * b, W),
                    a * metric_eval(self.params, spec, X, W)
                    + b * metric_eval(self.params, spec, Y, W),
                    places=12,
                )
                self.assertAlmostEqual(
                    metric_eval(self.params, spec, X, W),
                    metric_eval(self.params, spec, W, X),
                    places=13,
                )


if __name__ == "__main__":
    unittest.main()
