"""
Plugin for the `harden` subcommand: rewrite an assembly file with the
selected mitigations and report the code-size overhead.
"""
import click

from specshield.asm.parser import parse_file
from specshield.asm.printer import print_unit
from specshield.hardener import HardenConfig, harden_unit
from specshield.hardener.config import RSB_FORMS
from specshield.plugin_system import SubcommandPlugin, SubcommandRegistry
from specshield.settings import resolve_isa
from specshield.utils import echo_diagnostics, write_json


def summarize(report, source, err=False):
    """Print per-category counts and deltas."""
    click.echo(click.style(f"Hardened {source} ({report.isa.value})", fg="blue", bold=True), err=err)
    for name, stats in report.categories.items():
        if not stats.count:
            continue
        per_site = f"{stats.delta_bytes:+d} bytes/site" if stats.delta_bytes is not None else "mixed"
        click.echo(f"  {name}: {stats.count} site(s), {per_site}, {stats.total_delta:+d} bytes", err=err)
    if report.unchanged_prologues:
        click.echo(f"  unchanged prologues: {report.unchanged_prologues}", err=err)
    color = "green" if report.site_count else "yellow"
    click.echo(
        click.style(
            f"text: {report.total_before} -> {report.total_after} bytes ({report.total_delta:+d})",
            fg=color,
        ),
        err=err,
    )


@click.command("harden")
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Write hardened assembly here (default: stdout)")
@click.option("--isa", type=click.Choice(["rv64g", "rv64gc"], case_sensitive=False), help="Size model")
@click.option("--mitigate", default="all", show_default=True, help="jumps,calls,rsb or all")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Write the overhead report as JSON")
@click.option("--force", is_flag=True, help="Harden even if an indirect callee has an unrecognized prologue")
@click.option("--rsb-form", type=click.Choice(RSB_FORMS), default="resume", show_default=True)
@click.option("--label-seed", type=click.IntRange(min=0), default=0, show_default=True)
def harden_command(source, output, isa, mitigate, report_path, force, rsb_form, label_seed):
    """Rewrite indirect jumps, indirect calls and direct calls in SOURCE."""
    config = HardenConfig.from_flag(
        mitigate, isa=resolve_isa(isa), force=force, rsb_form=rsb_form, label_seed=label_seed
    )
    unit = parse_file(source)
    hardened, report, diagnostics = harden_unit(unit, config)
    echo_diagnostics(diagnostics)

    # An untouched unit is copied byte for byte
    if hardened is unit:
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = print_unit(hardened).encode("utf-8")
    if output:
        with open(output, "wb") as fh:
            fh.write(data)
    else:
        click.echo(data.decode("utf-8"), nl=False)

    if report_path:
        write_json(report_path, report.to_dict())
    summarize(report, source, err=not output)


class HardenPlugin(SubcommandPlugin):
    """Command plugin for the assembly hardener."""

    plugin_name = "harden_command"
    is_required = True

    def build_command(self):
        return harden_command


plugin = HardenPlugin()
SubcommandRegistry.register(plugin)
