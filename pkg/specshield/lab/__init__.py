"""
attack-lab: Spectre-BTI and Spectre-RSB proof-of-concept fixtures and the
Flush&Reload harness that drives them on the simulator.
"""
from specshield.lab.attack import (
    AttackOutcome,
    CharResult,
    format_transcript,
    prepare_fixture,
    run_attack,
    run_trial,
    trap_violations,
)
from specshield.lab.fixtures import PocKind, PocVariant, build_poc, render_poc
from specshield.lab.probe import guess_from_timings, read_reload_timings, threshold

__all__ = [
    "AttackOutcome",
    "CharResult",
    "PocKind",
    "PocVariant",
    "build_poc",
    "format_transcript",
    "guess_from_timings",
    "prepare_fixture",
    "read_reload_timings",
    "render_poc",
    "run_attack",
    "run_trial",
    "threshold",
    "trap_violations",
]
