"""
Plugin for the `run` subcommand: execute an assembly program on the
simulated core and summarize the run.
"""
import click

from specshield.asm.layout import layout
from specshield.asm.parser import parse_file
from specshield.errors import SimulationError, SimulationTimeout
from specshield.plugin_system import SubcommandPlugin, SubcommandRegistry
from specshield.settings import resolve_isa
from specshield.sim.config import MachineConfig
from specshield.sim.machine import load
from specshield.utils import debug_echo, write_json


@click.command("run")
@click.argument("program", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Machine config JSON")
@click.option("--isa", type=click.Choice(["rv64g", "rv64gc"], case_sensitive=False), help="Size model")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), help="Write the run trace as JSON")
@click.option("--max-steps", type=click.IntRange(min=1), help="Override the step budget")
@click.option("--no-speculation", is_flag=True, help="Never open a speculative window")
def run_command(program, config_path, isa, trace_path, max_steps, no_speculation):
    """Run PROGRAM until it exits or the step budget is exhausted."""
    config = MachineConfig.load(config_path)
    if max_steps is not None:
        config = config.replace(max_steps=max_steps)
    if no_speculation:
        config = config.replace(speculation=False)
    profile = resolve_isa(isa)

    unit = parse_file(program)
    amap = layout(unit, profile, config.base_text, config.base_data)
    machine = load(unit, amap, config)
    debug_echo(f"loaded {program}: {len(machine.program)} instructions, entry {machine.pc:#x}")
    result = machine.run()

    if trace_path:
        trace = result.to_dict()
        trace["isa"] = profile.value
        write_json(trace_path, trace)
    if result.status == "timeout":
        raise SimulationTimeout(result.steps)
    if result.status != "halted":
        raise SimulationError(f"program faulted at pc {machine.pc:#x} after {result.steps} steps")

    click.echo(
        click.style(
            f"exit={result.exit_code} cycles={result.cycles} spec_events={len(result.spec_events)}",
            fg="green",
        )
    )


class RunPlugin(SubcommandPlugin):
    """Command plugin for the simulator."""

    plugin_name = "run_command"
    is_required = True

    def build_command(self):
        return run_command


plugin = RunPlugin()
SubcommandRegistry.register(plugin)
