import json
import math
import os
import shutil
import tempfile
import unittest
import logging
from unittest import mock

from docopt import docopt

import isorb.__main__ as cli
from isorb.exceptions import ContinuationDiverged, SchemaError
from isorb.settings import RunConfig
from isorb.sphere import SpaceParams
from isorb.utils import compare_JSON, json_parser

EXAMPLE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "example")


def example(name):
    return os.path.join(EXAMPLE_DIR, name)


class Test_Settings(unittest.TestCase):
    def test_defaults(self):
        config = RunConfig()
        self.assertEqual(config.samples, 200)
        self.assertEqual(config.mu_range, 3)
        self.assertEqual(config.tolerance("closed_form"), 1e-5)
        self.assertEqual(config.tolerance("fd_step"), 1e-3)
        self.assertEqual(config.params, SpaceParams(4, 1, 1))
        self.assertFalse(config.timestamp)

    def test_example_config(self):
        path = example("example_config.json")
        config = RunConfig(path, json_parser(path))
        self.assertEqual(config.seed, 7)
        self.assertEqual(config.workers, 2)
        self.assertEqual(config.tolerance("fd_step"), 0.00025)
        self.assertEqual(config.tolerance("volume"), 1e-9)

    def test_schema_errors(self):
        cases = {
            "colour": {"colour": "red"},
            "tolerances.foo": {"tolerances": {"foo": 1e-3}},
            "tolerances.gram": {"tolerances": {"gram": -1.0}},
            "samples": {"samples": 0},
            "seed": {"seed": "seven"},
            "n/p/q": {"n": 4, "p": 2, "q": 4},
            "timestamp": {"timestamp": "yes"},
        }
        for field, settings in cases.items():
            with self.subTest(field=field):
                with self.assertRaises(SchemaError) as cm:
                    RunConfig("config.json", settings)
                self.assertEqual(cm.exception.field, field)

    def test_root_must_be_an_object(self):
        with self.assertRaises(SchemaError):
            RunConfig("config.json", [1, 2])

    def test_override(self):
        config = RunConfig()
        config.override(seed=5, samples=None, cutoff=None)
        self.assertEqual(config.seed, 5)
        self.assertEqual(config.samples, 200)
        with self.assertRaises(SchemaError):
            config.override(mu_range=0)
        with self.assertRaises(SchemaError):
            config.override(colour="red")

    def test_return_JSON(self):
        dic = RunConfig(settings={"n": 5}).return_JSON()
        self.assertEqual(list(dic)[:3], ["n", "p", "q"])
        self.assertEqual(dic["n"], 5)
        self.assertEqual(dic["tolerances"]["rank"], 1e-8)


class Test_CommandLine(unittest.TestCase):
    maxDiff = None

    def setUp(self):
        logging.basicConfig(
            format="%(asctime)s - %(name)s - %(levelname)s: %(message)s",
            level=logging.DEBUG,
        )
        self.tmp = tempfile.mkdtemp()
        self.config = example("example_config.json")

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def run_cli(self, *argv):
        return cli.run(docopt(cli.__doc__, argv=list(argv)))

    def out(self, name):
        return os.path.join(self.tmp, name)

    def test_verify_conjugated_pair(self):
        code = self.run_cli(
            "verify",
            example("jmap_a.json"),
            example("jmap_a_conjugated.json"),
            "--config",
            self.config,
            "--samples",
            "2",
            "--mu-range",
            "1",
            "--tex",
            "--out",
            self.out("report.json"),
        )
        self.assertEqual(code, 0)
        report = json_parser(self.out("report.json"))
        self.assertTrue(report["passed"])
        self.assertEqual(report["metadata"]["seed"], 7)
        self.assertEqual(report["metadata"]["config"]["samples"], 2)
        self.assertTrue(os.path.isfile(self.out("report.tex")))

    def test_verify_is_reproducible(self):
        outputs = []
        for _ in range(2):
            self.run_cli(
                "verify",
                example("jmap_a.json"),
                example("jmap_a_conjugated.json"),
                "--config",
                self.config,
                "--samples",
                "2",
                "--mu-range",
                "1",
                "--out",
                self.out("report.json"),
            )
            with open(self.out("report.json")) as f:
                outputs.append(f.read())
        self.assertTrue(compare_JSON(outputs[0], outputs[1]))
        self.assertEqual(outputs[0], outputs[1])

    def test_verify_unrelated_pair_fails(self):
        code = self.run_cli(
            "verify",
            example("jmap_a.json"),
            example("jmap_b.json"),
            "--config",
            self.config,
            "--samples",
            "2",
            "--mu-range",
            "1",
            "--out",
            self.out("report.json"),
        )
        self.assertEqual(code, 2)
        self.assertFalse(json_parser(self.out("report.json"))["passed"])

    def test_input_errors(self):
        broken = self.out("broken.json")
        with open(broken, "w") as f:
            f.write("{not json")
        bad_config = self.out("bad_config.json")
        with open(bad_config, "w") as f:
            json.dump({"colour": "red"}, f)
        cases = [
            ("verify", example("jmap_a.json"), self.out("missing.json"), "--out", self.out("r.json")),
            ("verify", example("jmap_a.json"), broken, "--out", self.out("r.json")),
            ("certify", example("jmap_a.json"), example("jmap_b.json"), "--config", bad_config),
            ("verify", example("jmap_a.json"), example("jmap_b.json"), "--samples", "many"),
            ("generate", "2", "3", "--out", self.out("family")),
            ("generate", "3", "three", "--out", self.out("family")),
            ("orbit", "stratum", "0.9", "0.9", "--out", self.out("orbit.json")),
        ]
        for argv in cases:
            with self.subTest(argv=argv):
                self.assertEqual(self.run_cli(*argv), 1)

    def test_verify_rejects_wrong_dimension(self):
        config = self.out("n5.json")
        with open(config, "w") as f:
            json.dump({"n": 5}, f)
        code = self.run_cli(
            "verify",
            example("jmap_a.json"),
            example("jmap_a_conjugated.json"),
            "--config",
            config,
            "--out",
            self.out("report.json"),
        )
        self.assertEqual(code, 1)

    def test_orbit_point(self):
        code = self.run_cli("orbit", "point", example("point.json"), "--out", self.out("orbit.json"))
        self.assertEqual(code, 0)
        summary = json_parser(self.out("orbit.json"))
        self.assertAlmostEqual(summary["area"], math.pi ** 2 / math.sqrt(2), places=12)
        self.assertAlmostEqual(summary["angle"], math.acos(-1 / 3), places=12)
        self.assertAlmostEqual(summary["gram_angle"], math.acos(-1 / 3), places=12)
        self.assertAlmostEqual(summary["area_identity"], 1 / 32, places=14)
        self.assertEqual(summary["stratum"], {"a": 0.5, "b": 0.5})
        self.assertEqual(summary["spectrum"][0], 0.0)

    def test_orbit_stratum(self):
        code = self.run_cli(
            "orbit", "stratum", "0.5", "0.5", "--cutoff", "20", "--out", self.out("orbit.json")
        )
        self.assertEqual(code, 0)
        summary = json_parser(self.out("orbit.json"))
        self.assertNotIn("point", summary)
        self.assertEqual(summary["cutoff"], 20.0)
        self.assertAlmostEqual(summary["gram"][0][1], -1 / 16, places=14)
        self.assertLessEqual(summary["spectrum"][-1], 20.0)

    def test_generate(self):
        family_dir = self.out("family")
        code = self.run_cli(
            "generate", "3", "2", "--step-size", "0.02", "--seed", "1", "--out", family_dir
        )
        self.assertEqual(code, 0)
        manifest = json_parser(os.path.join(family_dir, "manifest.json"))
        self.assertEqual(manifest["members"], ["jmap_000.json", "jmap_001.json", "jmap_002.json"])
        self.assertEqual(manifest["seed"], 1)
        self.assertEqual(manifest["steps"], 2)
        self.assertFalse(manifest["trivial"])
        self.assertEqual(len(manifest["pairwise"]), 3)
        for pair in manifest["pairwise"]:
            self.assertTrue(pair["isospectral"])
        for name in manifest["members"]:
            self.assertTrue(os.path.isfile(os.path.join(family_dir, name)))

    def test_generate_writes_steps_plus_one_members(self):
        family_dir = self.out("family")
        code = self.run_cli(
            "generate", "3", "4", "--step-size", "0.02", "--seed", "1", "--out", family_dir
        )
        self.assertEqual(code, 0)
        written = sorted(f for f in os.listdir(family_dir) if f.startswith("jmap_"))
        self.assertEqual(len(written), 5)
        manifest = json_parser(os.path.join(family_dir, "manifest.json"))
        self.assertEqual(manifest["isospectral_tolerance"], 1e-8)

    def test_generate_uses_configured_tolerance(self):
        config = self.out("loose.json")
        with open(config, "w") as f:
            json.dump({"tolerances": {"isospectral": 1e-6}}, f)
        family_dir = self.out("family")
        code = self.run_cli(
            "generate",
            "3",
            "1",
            "--step-size",
            "0.02",
            "--seed",
            "1",
            "--config",
            config,
            "--out",
            family_dir,
        )
        self.assertEqual(code, 0)
        manifest = json_parser(os.path.join(family_dir, "manifest.json"))
        self.assertEqual(manifest["isospectral_tolerance"], 1e-6)
        for pair in manifest["pairwise"]:
            self.assertEqual(pair["isospectral"], pair["deviation"] <= 1e-6)

    def test_generate_diverged(self):
        family_dir = self.out("family")
        with mock.patch(
            "isorb.continuation.newton_correct", side_effect=ContinuationDiverged(1, 1.0)
        ):
            code = self.run_cli(
                "generate", "3", "2", "--step-size", "0.02", "--seed", "1", "--out", family_dir
            )
        self.assertEqual(code, 2)
        manifest = json_parser(os.path.join(family_dir, "manifest.json"))
        self.assertTrue(manifest["diverged"])
        self.assertTrue(manifest["trivial"])
        self.assertEqual(len(manifest["members"]), 3)

    def test_verify_file_against_itself(self):
        code = self.run_cli(
            "verify",
            example("jmap_a.json"),
            example("jmap_a.json"),
            "--config",
            self.config,
            "--samples",
            "2",
            "--mu-range",
            "1",
            "--out",
            self.out("report.json"),
        )
        self.assertEqual(code, 0)
        self.assertTrue(json_parser(self.out("report.json"))["passed"])

    def test_verify_generated_pair(self):
        family_dir = self.out("family")
        self.run_cli(
            "generate", "3", "2", "--step-size", "0.02", "--seed", "1", "--out", family_dir
        )
        code = self.run_cli(
            "verify",
            os.path.join(family_dir, "jmap_000.json"),
            os.path.join(family_dir, "jmap_002.json"),
            "--config",
            self.config,
            "--samples",
            "2",
            "--mu-range",
            "1",
            "--out",
            self.out("report.json"),
        )
        self.assertEqual(code, 0)
        report = json_parser(self.out("report.json"))
        self.assertTrue(report["passed"])
        self.assertGreaterEqual(len(report["groups"]), 6)

    def test_certify(self):
        code = self.run_cli(
            "certify", example("jmap_a.json"), example("jmap_b.json"), "--out", self.out("cert.json")
        )
        self.assertEqual(code, 0)
        result = json_parser(self.out("cert.json"))
        self.assertFalse(result["isospectral"])
        self.assertEqual(result["nonisometry"]["certificate"]["outcome"], "inequivalent")
        self.assertEqual(result["generic"][1], False)
        self.assertAlmostEqual(result["trace_invariant"][0], 130.0, places=10)


if __name__ == "__main__":
    unittest.main()
