#!/usr/bin/env python
"""
Unittest-based tests for the `run` subcommand.
"""
import json
import os
import sys
import unittest

from click.testing import CliRunner

# Add the parent directory to the path so we can import the modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from specshield.cli import build_cli
from tests import test_helper  # noqa: F401
from tests.utils.test_utils import cleanup_mock_environment, create_mock_environment, exit_program, write_file

MISPREDICT = """\
main:
	call f
	li a0, 1
	li a7, 93
	ecall
f:
	la ra, other
	ret
other:
	li a0, 2
	li a7, 93
	ecall
"""


class TestRunCommand(unittest.TestCase):
    """Tests for `specshield run`."""

    def setUp(self):
        self.env = create_mock_environment()
        self.runner = CliRunner()
        self.cli = build_cli()

    def tearDown(self):
        cleanup_mock_environment(self.env)

    def path(self, name):
        return os.path.join(self.env['test_dir'], name)

    def test_exit_code_is_reported(self):
        program = write_file(self.env, "exit.s", exit_program(7))
        result = self.runner.invoke(self.cli, ["run", program])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("exit=7", result.output)
        self.assertIn("spec_events=0", result.output)

    def test_trace(self):
        program = write_file(self.env, "ras.s", MISPREDICT)
        result = self.runner.invoke(self.cli, ["run", program, "--trace", self.path("trace.json")])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("exit=2", result.output)
        with open(self.path("trace.json"), encoding="utf-8") as fh:
            trace = json.load(fh)
        self.assertEqual(trace["status"], "halted")
        self.assertEqual(trace["isa"], "rv64gc")
        self.assertEqual(trace["spec_events"][0]["kind"], "ras")

    def test_no_speculation(self):
        program = write_file(self.env, "ras.s", MISPREDICT)
        result = self.runner.invoke(self.cli, ["run", program, "--no-speculation"])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("spec_events=0", result.output)

    def test_timeout_writes_the_trace_and_exits_1(self):
        program = write_file(self.env, "loop.s", "main:\n\tj main\n")
        trace_path = self.path("trace.json")
        result = self.runner.invoke(self.cli, ["run", program, "--max-steps", "50", "--trace", trace_path])
        self.assertEqual(result.exit_code, 1)
        self.assertIn("step budget", result.output)
        with open(trace_path, encoding="utf-8") as fh:
            self.assertEqual(json.load(fh)["status"], "timeout")

    def test_fault_exits_1(self):
        program = write_file(self.env, "fault.s", "main:\n\tli a7, 1\n\tecall\n")
        result = self.runner.invoke(self.cli, ["run", program])
        self.assertEqual(result.exit_code, 1)
        self.assertIn("faulted", result.output)

    def test_machine_config(self):
        program = write_file(self.env, "exit.s", exit_program(0))
        good = write_file(self.env, "good.json", json.dumps({"spec_window": 4}))
        bad = write_file(self.env, "bad.json", json.dumps({"l2_sets": 4}))
        self.assertEqual(self.runner.invoke(self.cli, ["run", program, "--config", good]).exit_code, 0)
        result = self.runner.invoke(self.cli, ["run", program, "--config", bad])
        self.assertEqual(result.exit_code, 1)
        self.assertIn("l2_sets", result.output)

    def test_isa_from_environment(self):
        program = write_file(self.env, "exit.s", exit_program(0))
        result = self.runner.invoke(self.cli, ["run", program, "--trace", self.path("t.json")],
                                    env={"SPECSHIELD_ISA": "rv64g"})
        self.assertEqual(result.exit_code, 0, result.output)
        with open(self.path("t.json"), encoding="utf-8") as fh:
            self.assertEqual(json.load(fh)["isa"], "rv64g")


if __name__ == '__main__':
    unittest.main()
