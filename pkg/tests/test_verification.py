import json
import math
import os
import unittest
import logging

import numpy as np

from isorb.documentation import ReportDocumentation
from isorb.exceptions import DimensionMismatch, DomainError
from isorb.jmap import JMap, read_jmap
from isorb.orbit import OrbitStratum
from isorb.settings import RunConfig
from isorb.sphere import SpaceParams
from isorb.verification import (
    ReportEntry,
    VerificationReport,
    check_curvature_closed_form,
    check_dkappa_closed_form,
    check_intertwining,
    check_isospectrality,
    check_kahler_components,
    check_kappa_admissibility,
    check_vertical_metric,
    check_volume_preservation,
    dkappa_closed_form,
    lattice_direction,
    mu_window,
    random_lift_tangent,
    verify_pair,
)

EXAMPLE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "example")

# finite-difference step for the closed-form checks
FD_STEP = 2.5e-4
SETTINGS = {"samples": 2, "mu_range": 1, "tolerances": {"fd_step": FD_STEP}}


def example(name):
    return os.path.join(EXAMPLE_DIR, name)


class Test_Checks(unittest.TestCase):
    def setUp(self):
        logging.basicConfig(
            format="%(asctime)s - %(name)s - %(levelname)s: %(message)s",
            level=logging.DEBUG,
        )
        self.rng = np.random.default_rng(8)
        self.params = SpaceParams(4, 2, 3)
        self.j = JMap.random(3, self.rng)
        self.stratum = OrbitStratum(0.4, 0.4)

    def test_lift_tangent_keeps_the_stratum(self):
        x = self.stratum.sample_point(self.params, self.rng)
        X = random_lift_tangent(x, self.rng)
        self.assertAlmostEqual(X.norm(), 1.0, places=14)
        self.assertAlmostEqual(np.vdot(x.u, X.U).real, 0.0, places=14)
        for k in range(2):
            self.assertAlmostEqual((X.V[k] * np.conj(x.v[k])).real, 0.0, places=14)

    def test_dkappa_closed_form(self):
        entry = check_dkappa_closed_form(
            self.j, self.params, self.stratum, 4, 0, h=FD_STEP
        )
        self.assertTrue(entry.passed, entry)
        self.assertEqual(entry.name, "closed_forms.dkappa[j]")
        self.assertEqual(entry.sample_count, 4)

    def test_dkappa_of_zero_map(self):
        x = self.stratum.sample_point(self.params, self.rng)
        X1 = random_lift_tangent(x, self.rng)
        X2 = random_lift_tangent(x, self.rng)
        np.testing.assert_array_equal(dkappa_closed_form(JMap.zero(3), x, X1, X2), [0.0, 0.0])

    def test_closed_forms_need_diagonal_stratum(self):
        with self.assertRaises(DomainError):
            check_dkappa_closed_form(self.j, self.params, OrbitStratum(0.3, 0.4), 1, 0)
        with self.assertRaises(DomainError):
            check_curvature_closed_form(self.params, OrbitStratum(0.3, 0.4), 1, 0)

    def test_curvature_closed_form(self):
        entry = check_curvature_closed_form(self.params, self.stratum, 4, 0, h=FD_STEP)
        self.assertTrue(entry.passed, entry)
        self.assertGreater(entry.details["max_abs_value"], 0.0)
        self.assertTrue(
            check_kahler_components(self.params, self.stratum, 4, 0, h=FD_STEP).passed
        )

    def test_admissibility(self):
        entries = check_kappa_admissibility(self.j, self.params, 5, 0, 1e-11)
        self.assertEqual(
            [e.name for e in entries],
            [
                "admissibility.t2_horizontal[j]",
                "admissibility.t2_invariant[j]",
                "admissibility.s1_horizontal[j]",
                "admissibility.s1_invariant[j]",
            ],
        )
        for entry in entries:
            with self.subTest(name=entry.name):
                self.assertTrue(entry.passed, entry)

    def test_volume(self):
        entry = check_volume_preservation(self.j, self.params, 5, 0, 1e-9, label="j2")
        self.assertEqual(entry.name, "volume[j2]")
        self.assertTrue(entry.passed, entry)

    def test_vertical_metric(self):
        j2 = JMap.random(3, self.rng)
        entries = check_vertical_metric(self.j, j2, self.params, 3, 0, 1e-9, 1e-10, 10.0)
        self.assertEqual(len(entries), 5)
        for entry in entries:
            with self.subTest(name=entry.name):
                self.assertTrue(entry.passed, entry)

    def test_mu_window(self):
        window = mu_window(1)
        self.assertEqual(len(window), 8)
        self.assertNotIn((0, 0), window)
        self.assertEqual(len(mu_window(2)), 24)

    def test_lattice_direction(self):
        z = lattice_direction(self.params, (0, 1))
        self.assertAlmostEqual(z.z1, 0.0)
        self.assertAlmostEqual(z.z2, 2 / (2 * math.pi))

    def test_intertwining_of_conjugated_pair(self):
        a = read_jmap(example("jmap_a.json"))
        a_conj = read_jmap(example("jmap_a_conjugated.json"))
        params = SpaceParams()
        for mu in ((1, 0), (1, 1), (-2, 1)):
            with self.subTest(mu=mu):
                entry = check_intertwining(a, a_conj, params, mu, 4, 0, 1e-8)
                self.assertTrue(entry.passed, entry)
                self.assertEqual(entry.name, "intertwining[{},{}]".format(*mu))


class Test_Report(unittest.TestCase):
    maxDiff = None

    def setUp(self):
        logging.basicConfig(
            format="%(asctime)s - %(name)s - %(levelname)s: %(message)s",
            level=logging.DEBUG,
        )
        self.a = read_jmap(example("jmap_a.json"))
        self.a_conj = read_jmap(example("jmap_a_conjugated.json"))
        self.b = read_jmap(example("jmap_b.json"))
        self.config = RunConfig(settings=SETTINGS)

    def test_entry_serialization(self):
        entry = ReportEntry("x", "anchor", "group", 0, float("inf"), 1e-8, ["note"])
        self.assertFalse(entry.passed)
        dic = entry.return_JSON()
        self.assertIsNone(dic["max_residual"])
        self.assertEqual(dic["notes"], ["note"])
        self.assertNotIn("details", dic)

    def test_entry_keys(self):
        dic = ReportEntry("x", "property", "group", 3, 1e-12, 1e-8).return_JSON()
        self.assertEqual(
            set(dic),
            {"name", "paper_anchor", "sample_count", "max_residual", "tolerance", "passed"},
        )
        self.assertEqual(dic["paper_anchor"], "property")

    def test_report_is_sorted(self):
        report = VerificationReport()
        report.add(ReportEntry("b", "", "g2", 1, 0.0, 1.0))
        report.add(ReportEntry("a", "", "g1", 1, 2.0, 1.0))
        self.assertEqual([e.name for e in report.checks], ["a", "b"])
        self.assertEqual(report.groups(), ["g1", "g2"])
        self.assertFalse(report.passed)
        self.assertEqual(report.failed(), [report.entry("a")])
        with self.assertRaises(KeyError):
            report.entry("c")

    def test_isospectrality_entry(self):
        self.assertTrue(check_isospectrality(self.a, self.a_conj, 1e-8).passed)
        self.assertFalse(check_isospectrality(self.a, self.b, 1e-8).passed)

    def test_conjugated_pair_passes(self):
        report = verify_pair(self.a, self.a_conj, self.config.params, self.config)
        self.assertTrue(report.passed, [e.name for e in report.failed()])
        self.assertEqual(
            report.groups(),
            [
                "admissibility",
                "closed_forms",
                "intertwining",
                "isospectrality",
                "vertical_metric",
                "volume",
            ],
        )
        self.assertEqual(
            len([e for e in report.checks if e.group == "intertwining"]), 8
        )
        self.assertEqual(report.info["nonisometry"]["certificate"]["outcome"], "inconclusive")
        self.assertFalse(report.info["nonisometry"]["non_isometric"])
        self.assertIsNone(report.metadata["timestamp"])

    def test_report_is_reproducible(self):
        first = verify_pair(self.a, self.a_conj, self.config.params, self.config)
        second = verify_pair(self.a, self.a_conj, self.config.params, self.config)
        self.assertEqual(first.to_string(), second.to_string())

    def test_workers_do_not_change_results(self):
        serial = verify_pair(self.a, self.a_conj, self.config.params, self.config)
        parallel_config = RunConfig(settings=dict(SETTINGS, workers=3))
        parallel = verify_pair(self.a, self.a_conj, parallel_config.params, parallel_config)
        self.assertEqual(serial.return_JSON()["checks"], parallel.return_JSON()["checks"])

    def test_swapped_pair_gives_the_same_verdicts(self):
        pairs = {"conjugated": (self.a, self.a_conj), "unrelated": (self.a, self.b)}
        for name, (first, second) in pairs.items():
            forward = verify_pair(first, second, self.config.params, self.config)
            backward = verify_pair(second, first, self.config.params, self.config)
            with self.subTest(pair=name):
                self.assertEqual(
                    [(e.name, e.passed) for e in forward.checks],
                    [(e.name, e.passed) for e in backward.checks],
                )

    def test_unrelated_pair_fails(self):
        report = verify_pair(self.a, self.b, self.config.params, self.config)
        self.assertFalse(report.passed)
        self.assertFalse(report.entry("isospectrality").passed)
        self.assertFalse(report.entry("intertwining[1,0]").passed)
        self.assertIn("spectra differ", report.entry("intertwining[1,0]").notes[0])
        self.assertTrue(report.entry("volume[j2]").passed)
        self.assertEqual(report.info["nonisometry"]["certificate"]["outcome"], "inequivalent")
        json.loads(report.to_string())

    def test_dimension_must_match_space(self):
        params = SpaceParams(5, 1, 1)
        with self.assertRaises(DimensionMismatch):
            verify_pair(self.a, self.a_conj, params, self.config)

    def test_tex_documentation(self):
        report = verify_pair(self.a, self.a_conj, self.config.params, self.config)
        tex = ReportDocumentation(report).return_tex_documentation(test_version="9.9.9")
        self.assertTrue(tex.startswith(r"\documentclass{article}"))
        self.assertIn("isorb 9.9.9", tex)
        self.assertIn("All {} checks passed.".format(len(report.checks)), tex)
        self.assertTrue(tex.endswith("\\end{document}\n"))


if __name__ == "__main__":
    unittest.main()
