#!/usr/bin/env python3
"""
SpecShield command line.

Subcommands come from plugins; the group maps SpecShield errors to the
exit-status contract:

    0  success
    1  usage, configuration, assembly or simulation error
    2  hardening refused (unrecognized prologue in an indirect callee)
    3  attack expectation failed (`attack --expect`)
"""
import sys

import click

from specshield.errors import SpecShieldError
from specshield.plugin_system import SubcommandRegistry, load_plugins
from specshield.settings import load_env_file
from specshield.utils import echo_error, silence_stdout


class SpecShieldGroup(click.Group):
    """click.Group that reports usage errors with exit 1 and maps SpecShieldError."""

    def parse_args(self, ctx, args):
        try:
            return super().parse_args(ctx, args)
        except click.UsageError as e:
            e.exit_code = 1
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = 1
            raise
        except SpecShieldError as e:
            echo_error(str(e))
            ctx.exit(e.exit_code)


def build_cli():
    """
    Build the top-level command group from the registered plugins.

    Returns:
        click.Group: The `specshield` command
    """

    @click.group(cls=SpecShieldGroup)
    def cli():
        """SpecShield - Spectre-BTI/RSB hardening for RISC-V assembly."""

    with silence_stdout():
        load_plugins()
    for plugin in SubcommandRegistry.plugins():
        cli.add_command(plugin.build_command())
    return cli


def main(argv=None):
    """Console entry point."""
    load_env_file()
    return build_cli().main(args=argv, prog_name="specshield")


if __name__ == "__main__":
    sys.exit(main())
