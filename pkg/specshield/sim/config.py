"""
Micro-architecture parameters for the simulator.
"""
import json
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

from specshield.errors import ConfigError


def _is_pow2(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


@dataclass(frozen=True)
class MachineConfig:
    """
    Geometry and timing of the simulated core. Every field is optional in
    JSON; unknown keys are rejected.
    """

    cache_sets: int = 64
    cache_ways: int = 4
    block_bytes: int = 64
    hit_latency: int = 2
    miss_latency: int = 40
    btb_sets: int = 64
    btb_ways: int = 4
    ras_depth: int = 8
    spec_window: int = 32
    max_steps: int = 10_000_000
    hit_threshold: Optional[int] = None
    speculation: bool = True
    stack_top: int = 0x80_0000
    stack_size: int = 0x1_0000
    base_text: int = 0x1_0000
    base_data: int = 0x2_0000

    def __post_init__(self):
        for name in ("block_bytes", "cache_sets", "btb_sets"):
            if not _is_pow2(getattr(self, name)):
                raise ConfigError(f"{name} must be a power of two, got {getattr(self, name)}")
        for name in ("cache_ways", "btb_ways", "ras_depth", "max_steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.miss_latency <= self.hit_latency:
            raise ConfigError("miss_latency must be greater than hit_latency")
        if self.hit_latency < 0:
            raise ConfigError("hit_latency must be non-negative")
        if self.spec_window < 1:
            raise ConfigError("spec_window must be at least 1")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MachineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown machine config key(s): {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(str(e))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def load(cls, path: Optional[str]) -> "MachineConfig":
        """
        Read a JSON file; None yields the defaults.

        Raises:
            ConfigError: on unreadable files, bad JSON or invalid values
        """
        if path is None:
            return cls()
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read machine config {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"machine config {path} must be a JSON object")
        return cls.from_dict(data)

    def replace(self, **changes) -> "MachineConfig":
        data = self.to_dict()
        data.update(changes)
        return MachineConfig.from_dict(data)
