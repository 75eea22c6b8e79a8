"""
Plugin for the `attack` subcommand: reproduce a Spectre PoC on the
simulated core, optionally against hardened code.
"""
import click

from specshield.errors import AttackExpectationError
from specshield.hardener import HardenConfig
from specshield.lab.attack import format_transcript, run_attack
from specshield.lab.fixtures import DEFAULT_MISTRAIN, DEFAULT_SECRET, DEFAULT_TRIALS, PocKind, PocVariant
from specshield.plugin_system import SubcommandPlugin, SubcommandRegistry
from specshield.settings import default_jobs, resolve_isa
from specshield.sim.config import MachineConfig
from specshield.utils import echo_diagnostics, write_json

VARIANTS = ("v2-call", "v2-jump", "v5")


def check_expectation(outcome, expect):
    """
    Raises:
        AttackExpectationError: when the outcome contradicts `expect`
    """
    if expect == "leak" and not outcome.leaked:
        raise AttackExpectationError(
            f"expected the secret to leak, recovered '{outcome.recovered}' instead of '{outcome.secret}'"
        )
    if expect == "no-leak" and not outcome.blocked:
        raise AttackExpectationError(f"expected no leak, recovered '{outcome.recovered}'")


@click.command("attack")
@click.option("--variant", type=click.Choice(VARIANTS), required=True, help="Which PoC to run")
@click.option("--mitigated", is_flag=True, help="Harden the PoC before running it")
@click.option("--mitigate", help="Mitigations to apply (default: the one matching the variant)")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Machine config JSON")
@click.option("--isa", type=click.Choice(["rv64g", "rv64gc"], case_sensitive=False), help="Size model")
@click.option("--trials", type=click.IntRange(min=0), default=DEFAULT_TRIALS, show_default=True)
@click.option("--mistrain", type=click.IntRange(min=1), default=DEFAULT_MISTRAIN, show_default=True)
@click.option("--secret", default=DEFAULT_SECRET, show_default=True)
@click.option("--expect", type=click.Choice(["leak", "no-leak"]), help="Fail with exit 3 unless this holds")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Write the outcome as JSON")
@click.option("--jobs", type=click.IntRange(min=0), help="Worker processes (0 = one per physical core)")
def attack_command(variant, mitigated, mitigate, config_path, isa, trials, mistrain, secret, expect,
                   report_path, jobs):
    """Run a Spectre PoC and print what the attacker recovered."""
    config = MachineConfig.load(config_path)
    poc = PocVariant(kind=PocKind.from_name(variant), secret=secret, mistrain_count=mistrain,
                     trials_per_char=trials)
    profile = resolve_isa(isa)
    harden = None
    if mitigated or mitigate:
        harden = HardenConfig.from_flag(mitigate or poc.kind.matching_mitigation, isa=profile)

    heading = f"Spectre {variant}" + (f" against {', '.join(sorted(harden.enable))}" if harden else "")
    click.echo(click.style(heading, fg="blue", bold=True))
    outcome = run_attack(poc, config, harden=harden, isa=profile,
                         jobs=default_jobs() if jobs is None else jobs)
    echo_diagnostics(outcome.diagnostics)
    for line in format_transcript(outcome):
        click.echo(line)

    if report_path:
        write_json(report_path, outcome.to_dict())
    check_expectation(outcome, expect)
    if expect:
        click.echo(click.style(f"expectation '{expect}' holds", fg="green"))


class AttackPlugin(SubcommandPlugin):
    """Command plugin for the attack lab."""

    plugin_name = "attack_command"
    is_required = True

    def build_command(self):
        return attack_command


plugin = AttackPlugin()
SubcommandRegistry.register(plugin)
