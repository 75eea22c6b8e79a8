"""
Base classes for the mitigation pass system.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from specshield.asm.model import AsmUnit, Symbol, synth, synth_label
from specshield.asm.registers import Register
from specshield.hardener.config import Diagnostic, HardenConfig


class SiteKind(str, Enum):
    INDIRECT_JUMP = "indirect_jump"
    INDIRECT_CALL = "indirect_call"
    DIRECT_CALL = "direct_call"
    PROLOGUE = "prologue"


@dataclass(frozen=True)
class RewriteSite:
    """
    One place the hardener rewrites. `index` refers to the unit after
    expansion of its original pseudo-instructions; `span` is the number of
    items the rewrite replaces.
    """

    kind: SiteKind
    index: int
    register: Optional[Register] = None
    callee: Optional[str] = None
    function: Optional[str] = None
    frame: Optional[Tuple[int, int]] = None  # (N, K) for prologues
    span: int = 1


class FreshLabels:
    """
    Hands out label suffixes `_N`, increasing from a seed and skipping any
    number whose labels already exist in the unit.
    """

    PREFIXES = ("capture_spec", "set_up_target", "end", "far")

    def __init__(self, seed: int = 0, taken: Optional[Set[str]] = None):
        self._next = seed
        self._taken = set(taken or ())

    def next(self) -> int:
        while any(f"{prefix}_{self._next}" in self._taken for prefix in self.PREFIXES):
            self._next += 1
        number = self._next
        self._next += 1
        return number


def trampoline_head(number: int) -> list:
    """`jal set_up_target_N`, the capture loop and the set-up label."""
    return [
        synth("jal", Symbol(f"set_up_target_{number}")),
        synth_label(f"capture_spec_{number}"),
        synth("j", Symbol(f"capture_spec_{number}")),
        synth_label(f"set_up_target_{number}"),
    ]


class Mitigation(ABC):
    """
    Abstract base class for a rewrite pass. Each pass is switched on by one
    `--mitigate` name and produces sites of one kind.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry key."""

    @property
    @abstractmethod
    def flag(self) -> str:
        """The `--mitigate` name that enables this pass."""

    @property
    @abstractmethod
    def category(self) -> str:
        """OverheadReport category the sites are counted in."""

    @property
    @abstractmethod
    def description(self) -> str:
        pass

    @abstractmethod
    def find_sites(
        self, unit: AsmUnit, config: HardenConfig, diagnostics: List[Diagnostic]
    ) -> List[RewriteSite]:
        """
        Find the original-origin sites of this pass in an expanded unit.
        """

    @abstractmethod
    def rewrite(self, site: RewriteSite, unit: AsmUnit, config: HardenConfig, fresh: FreshLabels,
                diagnostics: List[Diagnostic]) -> Tuple[list, str]:
        """
        Produce the replacement items for one site.

        Returns:
            tuple: (items, report category)
        """


class MitigationRegistry:
    """
    Registry of rewrite passes, kept in application order.
    """

    _mitigations: Dict[str, Mitigation] = {}

    @classmethod
    def register(cls, mitigation: Mitigation):
        if not isinstance(mitigation, Mitigation):
            raise TypeError("Mitigation must be an instance of Mitigation")
        cls._mitigations[mitigation.name] = mitigation

    @classmethod
    def enabled(cls, config: HardenConfig) -> List[Mitigation]:
        return [m for m in cls._mitigations.values() if config.enabled(m.flag)]
