#!/usr/bin/env python
"""
Unittest-based tests for the subcommand plugin registry.
"""
import os
import sys
import unittest
from unittest.mock import patch

import click

# Add the parent directory to the path so we can import the modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from specshield.plugin_system import SubcommandPlugin, SubcommandRegistry, load_plugins
from tests import test_helper  # noqa: F401


@click.command("probe")
def probe_command():
    click.echo("probe")


class ProbePlugin(SubcommandPlugin):
    plugin_name = "probe_command"
    is_required = False
    is_enabled = False

    def build_command(self):
        return probe_command


class TestSubcommandRegistry(unittest.TestCase):
    """Registration rules and discovery."""

    def setUp(self):
        SubcommandRegistry.clear()

    def tearDown(self):
        SubcommandRegistry.clear()
        load_plugins()

    def test_rejects_non_plugins(self):
        with self.assertRaises(TypeError):
            SubcommandRegistry.register(object())

    def test_optional_plugin_disabled_by_default(self):
        SubcommandRegistry.register(ProbePlugin())
        self.assertIsNone(SubcommandRegistry.find("probe_command"))

    def test_optional_plugin_enabled_by_environment(self):
        with patch.dict(os.environ, {"SPECSHIELD_PLUGIN_PROBE_COMMAND_ENABLED": "yes"}):
            plugin = ProbePlugin()
        SubcommandRegistry.register(plugin)
        self.assertIs(SubcommandRegistry.find("probe_command"), plugin)

    def test_duplicates_are_ignored(self):
        with patch.dict(os.environ, {"SPECSHIELD_PLUGIN_PROBE_COMMAND_ENABLED": "1"}):
            first, second = ProbePlugin(), ProbePlugin()
        SubcommandRegistry.register(first)
        SubcommandRegistry.register(second)
        self.assertEqual(SubcommandRegistry.plugins(), [first])

    def test_load_plugins_finds_every_subcommand(self):
        load_plugins()
        names = [plugin.plugin_name for plugin in SubcommandRegistry.plugins()]
        self.assertEqual(names, ["attack_command", "harden_command", "run_command", "version_command"])
        commands = {plugin.build_command().name for plugin in SubcommandRegistry.plugins()}
        self.assertEqual(commands, {"attack", "harden", "run", "version"})

    def test_debug_output(self):
        with patch.dict(os.environ, {"SPECSHIELD_DEBUG": "true"}), patch('click.echo') as mock_echo:
            load_plugins()
        messages = [str(call.args[0]) for call in mock_echo.call_args_list]
        self.assertTrue(any("Loaded plugin module: harden_command" in m for m in messages))


if __name__ == '__main__':
    unittest.main()
