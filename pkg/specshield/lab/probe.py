"""
Flush&Reload readout.

The guest side lives in every fixture: `evict_array2` walks an eviction
buffer so each probed set is refilled several times over, and
`reload_probe` times `array2[c * block_bytes]` for every candidate byte,
storing the rdcycle deltas at `results`. This module reads them back.
"""
from typing import List, Optional, Sequence

from specshield.lab.fixtures import PROBE_CANDIDATES
from specshield.sim.config import MachineConfig
from specshield.sim.machine import Machine


def threshold(config: MachineConfig) -> int:
    """
    Cache-hit threshold in cycles: `hit_threshold` when configured, else
    the midpoint of hit and miss latency, rounded down.
    """
    if config.hit_threshold is not None:
        return config.hit_threshold
    return (config.hit_latency + config.miss_latency) // 2


def read_reload_timings(machine: Machine) -> List[int]:
    """Per-candidate reload times stored by `reload_probe`."""
    base = machine.symbol("results")
    return [machine.read_u64(base + 8 * candidate) for candidate in range(PROBE_CANDIDATES)]


def guess_from_timings(timings: Sequence[int], cutoff: int) -> Optional[int]:
    """
    The fastest candidate if it reloaded below the cutoff, else None.
    Ties go to the lowest byte value.
    """
    if not timings:
        return None
    best = min(range(len(timings)), key=lambda candidate: timings[candidate])
    return best if timings[best] < cutoff else None
