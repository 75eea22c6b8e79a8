"""
Hardening configuration and diagnostics.
"""
from dataclasses import dataclass, field
from typing import FrozenSet, Optional

from specshield.asm.isa import IsaProfile
from specshield.errors import ConfigError

MITIGATIONS = ("jumps", "calls", "rsb")
RSB_FORMS = ("resume", "literal")


def parse_mitigations(flag: str) -> FrozenSet[str]:
    """
    Parse a `--mitigate` value such as "all" or "jumps,rsb".

    Raises:
        ConfigError: for unknown names or an empty selection
    """
    names = {part.strip().lower() for part in flag.split(",") if part.strip()}
    if "all" in names:
        names = (names - {"all"}) | set(MITIGATIONS)
    unknown = names - set(MITIGATIONS)
    if unknown:
        raise ConfigError(
            f"unknown mitigation(s): {', '.join(sorted(unknown))} "
            f"(expected {', '.join(MITIGATIONS)} or all)"
        )
    if not names:
        raise ConfigError("no mitigation selected")
    return frozenset(names)


@dataclass(frozen=True)
class HardenConfig:
    enable: FrozenSet[str] = frozenset(MITIGATIONS)
    isa: IsaProfile = IsaProfile.RV64GC
    label_seed: int = 0
    force: bool = False
    rsb_form: str = "resume"

    def __post_init__(self):
        object.__setattr__(self, "enable", frozenset(self.enable))
        object.__setattr__(self, "isa", IsaProfile.from_name(self.isa))
        if not self.enable:
            raise ConfigError("at least one mitigation must be enabled")
        unknown = self.enable - set(MITIGATIONS)
        if unknown:
            raise ConfigError(f"unknown mitigation(s): {', '.join(sorted(unknown))}")
        if self.rsb_form not in RSB_FORMS:
            raise ConfigError(f"rsb form must be one of {', '.join(RSB_FORMS)}")
        if self.label_seed < 0:
            raise ConfigError("label seed must be non-negative")

    @classmethod
    def from_flag(cls, flag: str = "all", **kwargs) -> "HardenConfig":
        return cls(enable=parse_mitigations(flag), **kwargs)

    def enabled(self, name: str) -> bool:
        return name in self.enable


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "warning" or "error"
    message: str
    function: Optional[str] = None
    line: Optional[int] = field(default=None, compare=False)

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line else ""
        return f"{self.level}: {where}{self.message}"
