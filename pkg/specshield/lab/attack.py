"""
Attack driver: run trials of a PoC fixture and recover the secret.

Every trial is a fresh Machine, so caches and predictors start cold and
the guest does its own mistraining. Trials are independent and may run in
a process pool; counts are aggregated per position, so the outcome does
not depend on completion order.
"""
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import psutil

from specshield.asm.isa import IsaProfile
from specshield.asm.layout import AddressMap, layout
from specshield.asm.model import AsmUnit
from specshield.errors import SimulationError, SimulationTimeout
from specshield.hardener import HardenConfig, harden_unit
from specshield.hardener.config import Diagnostic
from specshield.lab.fixtures import PocKind, PocVariant, build_poc
from specshield.lab.probe import guess_from_timings, read_reload_timings, threshold
from specshield.sim.config import MachineConfig
from specshield.sim.machine import Machine, SpecEvent, load
from specshield.utils import debug_echo

PLACEHOLDER = "?"
CAPTURE_PREFIX = "capture_spec_"


@dataclass
class CharResult:
    """Histogram of guesses for one secret position."""

    expected: str
    guesses: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.guesses.values())

    def modal(self) -> Optional[Tuple[int, int]]:
        """(byte, count) of the most frequent guess; ties go to the lower byte."""
        if not self.guesses:
            return None
        byte = min(self.guesses, key=lambda b: (-self.guesses[b], b))
        return byte, self.guesses[byte]

    @property
    def correct(self) -> int:
        return self.guesses.get(ord(self.expected), 0)

    def to_dict(self) -> dict:
        return {
            "expected": self.expected,
            "guesses": {str(byte): count for byte, count in sorted(self.guesses.items())},
        }


@dataclass
class AttackOutcome:
    variant: PocKind
    mitigated: bool
    trials_per_char: int
    per_char: List[CharResult] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)
    spec_events: int = 0
    trap_violations: int = 0

    @property
    def recovered(self) -> str:
        """Modal guess per position when it wins a strict majority, else '?'."""
        out = []
        for result in self.per_char:
            modal = result.modal()
            if modal and modal[1] * 2 > self.trials_per_char and 0x20 <= modal[0] <= 0x7E:
                out.append(chr(modal[0]))
            else:
                out.append(PLACEHOLDER)
        return "".join(out)

    @property
    def secret(self) -> str:
        return "".join(result.expected for result in self.per_char)

    @property
    def leaked(self) -> bool:
        return self.recovered == self.secret

    @property
    def blocked(self) -> bool:
        """No position recovered and no correct byte guessed more than once."""
        recovered = self.recovered
        return all(
            recovered[pos] != result.expected and result.correct <= 1
            for pos, result in enumerate(self.per_char)
        )

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value.replace("_", "-"),
            "mitigated": self.mitigated,
            "trials_per_char": self.trials_per_char,
            "per_char": [result.to_dict() for result in self.per_char],
            "recovered": self.recovered,
            "spec_events": self.spec_events,
            "trap_violations": self.trap_violations,
        }


def trap_violations(machine: Machine) -> List[SpecEvent]:
    """
    Speculation windows opened at synthesized indirect jumps that did not
    predict a capture label, or that filled the cache.
    """
    captures = {addr for name, addr in machine.symbols.items() if name.startswith(CAPTURE_PREFIX)}
    bad = []
    for event in machine.spec_events:
        op = machine.program.get(event.pc)
        if op is None or not op.synthesized or op.kind != "jalr":
            continue
        if event.predicted not in captures or event.cache_fills:
            bad.append(event)
    return bad


@dataclass
class TrialResult:
    position: int
    guess: Optional[int]
    timings: List[int]
    spec_events: int
    trap_violations: int


def run_trial(unit: AsmUnit, amap: AddressMap, config: MachineConfig, position: int) -> TrialResult:
    """
    Run one simulation with `target_pos` set to `position`.

    Raises:
        SimulationTimeout: if the step budget runs out
        SimulationError: if the guest faults
    """
    machine = load(unit, amap, config)
    machine.write_u64(machine.symbol("target_pos"), position)
    result = machine.run()
    if result.status == "timeout":
        raise SimulationTimeout(result.steps)
    if result.status != "halted":
        raise SimulationError(f"attack fixture faulted at pc {machine.pc:#x}")
    timings = read_reload_timings(machine)
    return TrialResult(
        position=position,
        guess=guess_from_timings(timings, threshold(config)),
        timings=timings,
        spec_events=len(result.spec_events),
        trap_violations=len(trap_violations(machine)),
    )


def _trial_worker(task) -> Tuple[int, Optional[int], int, int]:
    trial = run_trial(*task)
    return trial.position, trial.guess, trial.spec_events, trial.trap_violations


def resolve_jobs(jobs: int) -> int:
    """0 means one worker per physical core."""
    if jobs == 0:
        return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return max(1, jobs)


def prepare_fixture(
    variant: PocVariant,
    config: MachineConfig,
    harden: Optional[HardenConfig] = None,
    isa: IsaProfile = IsaProfile.RV64GC,
) -> Tuple[AsmUnit, AddressMap, List[Diagnostic]]:
    """Build, optionally harden, and lay out a fixture."""
    unit = build_poc(variant, config)
    diagnostics: List[Diagnostic] = []
    if harden is not None:
        unit, report, diagnostics = harden_unit(unit, harden)
        isa = harden.isa
        debug_echo(f"hardened {unit.name}: {report.site_count} site(s), +{report.total_delta} bytes")
    amap = layout(unit, isa, config.base_text, config.base_data)
    return unit, amap, diagnostics


def run_attack(
    variant: PocVariant,
    config: Optional[MachineConfig] = None,
    harden: Optional[HardenConfig] = None,
    isa: IsaProfile = IsaProfile.RV64GC,
    jobs: int = 1,
) -> AttackOutcome:
    """
    Run `trials_per_char` trials for every secret position.

    Args:
        variant: Attack and secret
        config: Simulated core; defaults apply when None
        harden: Pass the fixture through harden_unit first
        isa: Size model for layout (the hardening profile wins when given)
        jobs: Worker processes; 1 runs in-process, 0 uses every physical core

    Returns:
        AttackOutcome: Deterministic for a given (variant, config, harden)

    Raises:
        SimulationTimeout: if a trial exhausts its step budget
        HardenRefusedError: propagated from harden_unit
    """
    config = config or MachineConfig()
    unit, amap, diagnostics = prepare_fixture(variant, config, harden, IsaProfile.from_name(isa))
    tasks = [
        (unit, amap, config, position)
        for position in range(len(variant.secret))
        for _ in range(variant.trials_per_char)
    ]
    workers = resolve_jobs(jobs)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_worker, tasks))
    else:
        results = [_trial_worker(task) for task in tasks]

    histograms = [Counter() for _ in variant.secret]
    outcome = AttackOutcome(
        variant=variant.kind,
        mitigated=harden is not None,
        trials_per_char=variant.trials_per_char,
        diagnostics=diagnostics,
    )
    for position, guess, events, violations in results:
        if guess is not None:
            histograms[position][guess] += 1
        outcome.spec_events += events
        outcome.trap_violations += violations
    outcome.per_char = [
        CharResult(expected, dict(histogram))
        for expected, histogram in zip(variant.secret, histograms)
    ]
    return outcome


def _printable(byte: int) -> str:
    return chr(byte) if 0x20 <= byte <= 0x7E else f"\\x{byte:02x}"


def format_transcript(outcome: AttackOutcome) -> List[str]:
    """One line per secret position, then the recovered secret."""
    lines = []
    for result in outcome.per_char:
        modal = result.modal()
        if modal is None:
            lines.append(f"The attacker guessed character {PLACEHOLDER} 0 times.")
        else:
            lines.append(f"The attacker guessed character {_printable(modal[0])} {modal[1]} times.")
    lines.append(f"The guessed secret is {outcome.recovered}")
    return lines
