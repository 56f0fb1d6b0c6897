import json
import logging
import os
import sys
import tempfile
import unittest
from fractions import Fraction
from unittest.mock import MagicMock

from probgames.dist import ell, eta, uniform
from probgames.game import Verdict
from probgames.logger import (
    JsonFormatter, log_error, log_info, log_verdict, log_warning, loggable, setup_logger,
)


def record(message, level=logging.INFO, exc_info=None, **attrs):
    rec = logging.LogRecord("probgames.compose", level, "compose.py", 1, message, (), exc_info)
    for key, value in attrs.items():
        setattr(rec, key, value)
    return rec


class TestLoggable(unittest.TestCase):
    def test_fractions_stay_exact(self):
        self.assertEqual(loggable(Fraction(2, 3)), "2/3")
        self.assertEqual(loggable(Fraction(4, 2)), "2")

    def test_distributions_become_objects(self):
        self.assertEqual(loggable(uniform(["H", "T"])), {"H": "1/2", "T": "1/2"})
        joint = ell(eta("E"), eta("swap"))
        self.assertEqual(loggable(joint), {"(E, swap)": "1"})

    def test_sets_are_sorted(self):
        self.assertEqual(loggable({"NE", "E"}), ["E", "NE"])
        self.assertEqual(loggable(frozenset()), [])

    def test_plain_values_pass_through(self):
        payload = {"rule": "flow", "holds": True, "skipped": None, "epsilon": 1e-9, "laws": ["par-unit"]}
        self.assertEqual(loggable(payload), payload)


class TestJsonFormatter(unittest.TestCase):
    def test_fields(self):
        entry = json.loads(JsonFormatter().format(record("liftpred rule flow for g2")))
        self.assertEqual(set(entry), {"timestamp", "level", "logger", "message"})
        self.assertEqual(entry["level"], "INFO")
        self.assertEqual(entry["logger"], "probgames.compose")
        self.assertEqual(entry["message"], "liftpred rule flow for g2")

    def test_payload_is_made_loggable(self):
        rec = record("Checking profile", data={"profile": uniform(["H", "T"]), "weight": Fraction(1, 3)})
        entry = json.loads(JsonFormatter().format(rec))
        self.assertEqual(entry["data"], {"profile": {"H": "1/2", "T": "1/2"}, "weight": "1/3"})

    def test_exception_text(self):
        try:
            raise ValueError("Not a rational number: 'x'")
        except ValueError:
            rec = record("bad profile", logging.ERROR, sys.exc_info())
        entry = json.loads(JsonFormatter().format(rec))
        self.assertEqual(entry["level"], "ERROR")
        self.assertIn("ValueError: Not a rational number", entry["exception"])


class TestSetupLogger(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.log_file = os.path.join(self.temp_dir.name, "probgames.log")
        self.logger = None

    def tearDown(self):
        if self.logger is not None:
            for handler in self.logger.handlers[:]:
                handler.close()
                self.logger.removeHandler(handler)
        self.temp_dir.cleanup()

    def test_console_only(self):
        self.logger = setup_logger("probgames_console")
        self.assertEqual(self.logger.level, logging.INFO)
        self.assertFalse(self.logger.propagate)
        [handler] = self.logger.handlers
        self.assertIs(handler.stream, sys.stderr)
        self.assertIsInstance(handler.formatter, JsonFormatter)

    def test_level_names(self):
        self.logger = setup_logger("probgames_level", level="debug")
        self.assertEqual(self.logger.level, logging.DEBUG)
        self.logger = setup_logger("probgames_level", level="chatty")
        self.assertEqual(self.logger.level, logging.INFO)

    def test_repeated_setup_keeps_one_console_handler(self):
        setup_logger("probgames_twice")
        self.logger = setup_logger("probgames_twice")
        self.assertEqual(len(self.logger.handlers), 1)

    def test_children_write_to_the_file(self):
        self.logger = setup_logger("probgames_file", self.log_file, level="DEBUG")
        self.assertEqual(len(self.logger.handlers), 2)
        child = logging.getLogger("probgames_file.solver")
        child.info("grid oracle finished", extra={"data": {"members": 2, "resolution": 2}})
        for handler in self.logger.handlers:
            handler.flush()
        with open(self.log_file) as f:
            entry = json.loads(f.readline())
        self.assertEqual(entry["logger"], "probgames_file.solver")
        self.assertEqual(entry["data"], {"members": 2, "resolution": 2})


class TestLogHelpers(unittest.TestCase):
    def test_info_and_warning(self):
        logger = MagicMock()
        log_info(logger, "Running law suite", {"seed": 7, "cases": 100})
        logger.info.assert_called_once_with("Running law suite", extra={"data": {"seed": 7, "cases": 100}})
        log_warning(logger, "Law suite ran no comparisons")
        logger.warning.assert_called_once_with("Law suite ran no comparisons", extra={})

    def test_error_without_traceback(self):
        logger = MagicMock()
        log_error(logger, "Unknown demo: chess", exc_info=False)
        logger.error.assert_called_once_with("Unknown demo: chess", exc_info=False, extra={})

    def test_verdicts(self):
        logger = MagicMock()
        log_verdict(logger, "(seq g1 g2)", Verdict(True))
        logger.info.assert_called_once_with(
            "Profile is an equilibrium", extra={"data": {"game": "(seq g1 g2)", "holds": True}})
        log_verdict(logger, "(par p1 p2)", Verdict(False, "best-response", "p2"))
        logger.warning.assert_called_once_with("Profile rejected", extra={"data": {
            "game": "(par p1 p2)", "holds": False, "reason": "best-response", "component": "p2"}})


if __name__ == "__main__":
    unittest.main()
