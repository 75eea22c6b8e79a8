"""
Plugin for displaying SpecShield version information.
"""
import click

from specshield.plugin_system import SubcommandPlugin, SubcommandRegistry
from specshield.version import VERSION_NAME, __version__


@click.command("version")
def version_command():
    """Show the SpecShield version."""
    click.echo(click.style(f"SpecShield v{__version__}", fg="green", bold=True))
    click.echo(click.style(f"{VERSION_NAME}", fg="green"))


class VersionPlugin(SubcommandPlugin):
    """Command plugin for displaying version information."""

    plugin_name = "version_command"
    is_required = False  # Can be turned off with SPECSHIELD_PLUGIN_VERSION_COMMAND_ENABLED
    is_enabled = True

    def build_command(self):
        return version_command


plugin = VersionPlugin()
SubcommandRegistry.register(plugin)
