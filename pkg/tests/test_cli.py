import unittest
from unittest.mock import patch, MagicMock
import argparse
import json
import os
import shutil
import sys
import tempfile
from importlib import resources
from io import StringIO

from probgames.cli import (
    EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, EXIT_UNSUPPORTED, handle_check, handle_demo, handle_laws,
    handle_solve, main,
)
from probgames.laws import LawReport, LawResult

# The second stage is itself a composite, so a mixed first move needs a witness.
NESTED_GAME = """\
game g1 decision moves=E,NE payoff=0
game pass identity states=E,NE
game g2 conditioned obs=E,NE moves=E,NE payoff=1
compose (seq g1 (seq pass g2))
utility (E, E) = (-10, -10)
utility (E, NE) = (5, 0)
utility (NE, E) = (5, 5)
utility (NE, NE) = (0, 0)
"""


def bundled(name):
    return str(resources.files("probgames") / "games" / f"{name}.game")


class CLITestCase(unittest.TestCase):
    def setUp(self):
        self.config = {
            "PROBGAMES_LOG_LEVEL": "INFO",
            "PROBGAMES_LOG_FILE": "",
            "GRID_RESOLUTION": 12,
            "GRID_EPSILON": 1e-9,
            "MAX_GRID_POINTS": 1000000,
            "MAX_CONDITIONED_TABLE": 16,
            "MAX_SUPPORT_ENUM_MOVES": 4,
            "LAW_SEED": 7,
            "LAW_CASES": 2,
            "LAW_MAX_SET_SIZE": 3,
            "LAW_MAX_PAYOFF_ABS": 3,
        }
        self.logger = MagicMock()
        self.temp_dir = tempfile.mkdtemp()
        self.stdout = StringIO()
        sys.stdout = self.stdout

    def tearDown(self):
        sys.stdout = sys.__stdout__
        shutil.rmtree(self.temp_dir)

    def write(self, name, text):
        path = os.path.join(self.temp_dir, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    def check(self, file, profile=None, joint=None, witness=None, format="text"):
        args = argparse.Namespace(file=file, profile=profile, joint=joint, witness=witness, format=format)
        return handle_check(args, self.config, self.logger)

    def solve(self, file, method="support-enum", resolution=None, epsilon=None, format="text"):
        args = argparse.Namespace(file=file, method=method, resolution=resolution, epsilon=epsilon, format=format)
        return handle_solve(args, self.config, self.logger)


class TestCheck(CLITestCase):
    def test_mixed_equilibrium(self):
        result = self.check(bundled("matching_pennies"), "p1: H=1/2, T=1/2; p2: H=1/2, T=1/2")
        self.assertEqual(result, EXIT_OK)
        self.assertEqual(self.stdout.getvalue().strip(), "EQUILIBRIUM")

    def test_rejection_names_reason_and_component(self):
        result = self.check(bundled("matching_pennies"), "p1: H=1; p2: H=1/2, T=1/2")
        self.assertEqual(result, EXIT_NEGATIVE)
        output = self.stdout.getvalue()
        self.assertIn("NOT AN EQUILIBRIUM", output)
        self.assertIn("reason: best-response", output)
        self.assertIn("component: p2", output)

    def test_correlated_joint_is_rejected(self):
        result = self.check(bundled("matching_pennies"), joint="(H, H)=1/2; (T, T)=1/2", format="json")
        self.assertEqual(result, EXIT_NEGATIVE)
        output = json.loads(self.stdout.getvalue())
        self.assertEqual(output["result"], "not-equilibrium")
        self.assertEqual(output["reason"], "independence")

    def test_sequential_profile(self):
        self.assertEqual(self.check(bundled("market_entry"), "g1: E=1; g2: swap=1"), EXIT_OK)
        self.assertEqual(self.check(bundled("market_entry"), "g1: NE=1; g2: const_E=1"), EXIT_NEGATIVE)
        self.assertIn("component: g2", self.stdout.getvalue())

    def test_undecidable_lifting_asks_for_a_witness(self):
        path = self.write("nested.game", NESTED_GAME)
        result = self.check(path, "g1: E=1/2, NE=1/2; g2: swap=1", format="json")
        self.assertEqual(result, EXIT_UNSUPPORTED)
        output = json.loads(self.stdout.getvalue())
        self.assertEqual(output["result"], "unsupported")
        self.assertEqual(output["provenance"], "(seq pass g2)")

    def test_witness_decides_the_lifting(self):
        path = self.write("nested.game", NESTED_GAME)
        witness = self.write("witness.json", '{"E": {"swap": "1"}, "NE": {"swap": "1"}}')
        self.assertEqual(self.check(path, "g1: E=1/2, NE=1/2; g2: swap=1", witness=witness), EXIT_OK)
        inline = '{"E": {"swap": "1"}, "NE": {"swap": "1"}}'
        self.assertEqual(self.check(path, "g1: E=1/2, NE=1/2; g2: swap=1", witness=inline), EXIT_OK)

    def test_invalid_witness_is_an_input_error(self):
        path = self.write("nested.game", NESTED_GAME)
        wrong = '{"E": {"const_E": "1"}, "NE": {"const_E": "1"}}'
        self.assertEqual(self.check(path, "g1: E=1/2, NE=1/2; g2: swap=1", witness=wrong), EXIT_INPUT)

    def test_input_errors(self):
        self.assertEqual(self.check(bundled("matching_pennies")), EXIT_INPUT)
        self.assertEqual(self.check(os.path.join(self.temp_dir, "missing.game"), "p1: H=1; p2: H=1"), EXIT_INPUT)

    def test_file_errors_carry_their_location(self):
        broken = self.write("broken.game", "game p1 decision moves=H,T payoff=0\ncompose (par p1 p3)\n")
        self.assertEqual(self.check(broken, "p1: H=1", format="json"), EXIT_INPUT)
        output = json.loads(self.stdout.getvalue())
        self.assertEqual(output["result"], "error")
        self.assertTrue(output["reason"].startswith("line 2, column 17:"))


class TestSolve(CLITestCase):
    def test_support_enumeration(self):
        result = self.solve(bundled("matching_pennies"), format="json")
        self.assertEqual(result, EXIT_OK)
        output = json.loads(self.stdout.getvalue())
        self.assertEqual(output["result"], "found")
        self.assertFalse(output["approximate"])
        self.assertEqual(output["equilibria"], ["p1: {H: 1/2, T: 1/2}; p2: {H: 1/2, T: 1/2}"])

    def test_backward_induction(self):
        result = self.solve(bundled("market_entry"), method="backward-induction")
        self.assertEqual(result, EXIT_OK)
        self.assertEqual(self.stdout.getvalue().strip(), "g1: {E: 1}; g2: {swap: 1}")

    def test_grid_is_labelled_approximate(self):
        result = self.solve(bundled("matching_pennies"), method="grid", resolution=2)
        self.assertEqual(result, EXIT_OK)
        lines = self.stdout.getvalue().splitlines()
        self.assertTrue(lines[0].startswith("approximate (grid resolution 2"))
        self.assertEqual(lines[1:], ["p1: {H: 1/2, T: 1/2}; p2: {H: 1/2, T: 1/2}"])

    def test_unsupported_shape(self):
        self.assertEqual(self.solve(bundled("market_entry")), EXIT_UNSUPPORTED)
        self.assertEqual(self.solve(bundled("matching_pennies"), method="backward-induction"), EXIT_UNSUPPORTED)

    def test_grid_limit(self):
        self.config["MAX_GRID_POINTS"] = 10
        self.assertEqual(self.solve(bundled("matching_pennies"), method="grid", resolution=4), EXIT_UNSUPPORTED)


class TestLaws(CLITestCase):
    def test_zero_cases_warn_about_vacuity(self):
        args = argparse.Namespace(seed=None, cases=0, format="text")
        self.assertEqual(handle_laws(args, self.config, self.logger), EXIT_OK)
        self.assertIn("vacuous", self.stdout.getvalue())

    @patch("probgames.cli.run_law_suite")
    def test_arguments_override_config(self, mock_suite):
        mock_suite.return_value = LawReport(seed=3, cases=5, laws={"monad": LawResult("monad", cases=5, comparisons=9)})
        args = argparse.Namespace(seed=3, cases=5, format="json")
        self.assertEqual(handle_laws(args, self.config, self.logger), EXIT_OK)
        cfg = mock_suite.call_args[0][0]
        self.assertEqual((cfg.seed, cfg.cases, cfg.max_set_size), (3, 5, 3))
        self.assertEqual(json.loads(self.stdout.getvalue())["comparisons"], 9)

    @patch("probgames.cli.run_law_suite")
    def test_failures_exit_negative(self, mock_suite):
        failing = LawResult("monad", cases=1, comparisons=1, failures=[{"case": 0}])
        mock_suite.return_value = LawReport(seed=7, cases=1, laws={"monad": failing})
        args = argparse.Namespace(seed=None, cases=None, format="text")
        self.assertEqual(handle_laws(args, self.config, self.logger), EXIT_NEGATIVE)
        self.assertTrue(self.stdout.getvalue().strip().endswith("FAIL"))


class TestDemo(CLITestCase):
    def demo(self, name, format="text"):
        return handle_demo(argparse.Namespace(name=name, format=format), self.config, self.logger)

    def test_market_entry(self):
        self.assertEqual(self.demo("market-entry"), EXIT_OK)
        output = self.stdout.getvalue()
        self.assertIn("composition: (seq g1 g2)", output)
        self.assertIn("g1: {E: 1}; g2: {swap: 1}", output)
        self.assertIn("expected payoff: (5, 0)", output)

    def test_matching_pennies(self):
        self.assertEqual(self.demo("matching-pennies", format="json"), EXIT_OK)
        output = json.loads(self.stdout.getvalue())
        self.assertEqual(output["method"], "support enumeration")
        self.assertEqual(output["expected_payoff"], ["(0, 0)"])

    def test_unknown_demo(self):
        self.assertEqual(self.demo("prisoners"), EXIT_UNSUPPORTED)


class TestMain(unittest.TestCase):
    @patch("probgames.cli.load_config")
    @patch("probgames.cli.validate_config")
    @patch("probgames.cli.setup_logger")
    @patch("argparse.ArgumentParser.parse_args")
    def test_main_dispatches_demo(self, mock_args, mock_logger, mock_validate, mock_load):
        mock_args.return_value = argparse.Namespace(command="demo", name="market-entry", format="text")
        mock_load.return_value = {"PROBGAMES_LOG_FILE": "", "PROBGAMES_LOG_LEVEL": "INFO", "MAX_CONDITIONED_TABLE": 16}
        mock_validate.return_value = True
        mock_logger.return_value = MagicMock()

        stdout = StringIO()
        sys.stdout = stdout
        try:
            self.assertEqual(main(), EXIT_OK)
            self.assertIn("expected payoff", stdout.getvalue())
        finally:
            sys.stdout = sys.__stdout__

    @patch("probgames.cli.load_config")
    @patch("probgames.cli.validate_config")
    @patch("argparse.ArgumentParser.parse_args")
    def test_invalid_config(self, mock_args, mock_validate, mock_load):
        mock_args.return_value = argparse.Namespace(command="laws", seed=None, cases=None, format="text")
        mock_load.return_value = {}
        mock_validate.side_effect = ValueError("LAW_CASES must be an integer")

        stderr = StringIO()
        sys.stderr = stderr
        try:
            self.assertEqual(main(), EXIT_INPUT)
            self.assertIn("LAW_CASES must be an integer", stderr.getvalue())
        finally:
            sys.stderr = sys.__stderr__

    @patch("probgames.cli.load_config")
    @patch("probgames.cli.validate_config")
    @patch("probgames.cli.setup_logger")
    @patch("argparse.ArgumentParser.parse_args")
    def test_unexpected_errors_are_logged(self, mock_args, mock_logger, mock_validate, mock_load):
        mock_args.return_value = argparse.Namespace(command="laws", seed=None, cases=None, format="text")
        mock_load.return_value = {"PROBGAMES_LOG_FILE": "", "PROBGAMES_LOG_LEVEL": "INFO"}
        mock_validate.return_value = True
        logger = MagicMock()
        mock_logger.return_value = logger

        with patch("probgames.cli.handle_laws", side_effect=RuntimeError("boom")):
            stderr = StringIO()
            sys.stderr = stderr
            try:
                self.assertEqual(main(), EXIT_INPUT)
            finally:
                sys.stderr = sys.__stderr__
        logger.error.assert_called_once()


if __name__ == "__main__":
    unittest.main()
