"""
uarch-sim: deterministic RV64 interpreter with BTB, RAS, L1 cache and
bounded speculative windows.
"""
from specshield.sim.cache import Cache, CacheSet, cache_access
from specshield.sim.config import MachineConfig
from specshield.sim.machine import (
    Machine,
    RunResult,
    SpecContext,
    SpecEvent,
    StepEvent,
    load,
    load_program,
)
from specshield.sim.predictors import Btb, Ras

__all__ = [
    "Btb",
    "Cache",
    "CacheSet",
    "Machine",
    "MachineConfig",
    "Ras",
    "RunResult",
    "SpecContext",
    "SpecEvent",
    "StepEvent",
    "cache_access",
    "load",
    "load_program",
]
