"""
Code-size overhead accounting.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from specshield.asm.isa import IsaProfile
from specshield.asm.layout import item_size
from specshield.asm.model import Instruction

CATEGORIES = (
    "indirect_jumps", "indirect_calls", "prologues", "direct_calls", "direct_calls_far", "direct_calls_literal",
)


def items_size(items, isa: IsaProfile) -> int:
    return sum(item_size(item, isa) for item in items if isinstance(item, Instruction))


@dataclass
class CategoryStats:
    deltas: List[int] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.deltas)

    @property
    def total_delta(self) -> int:
        return sum(self.deltas)

    @property
    def delta_bytes(self) -> Optional[int]:
        """Per-site delta; None if sites of this category differ."""
        if not self.deltas:
            return 0
        if len(set(self.deltas)) > 1:
            return None
        return self.deltas[0]

    def to_dict(self) -> dict:
        return {"count": self.count, "delta_bytes": self.delta_bytes, "total_delta": self.total_delta}


@dataclass
class OverheadReport:
    isa: IsaProfile
    categories: Dict[str, CategoryStats] = field(
        default_factory=lambda: {name: CategoryStats() for name in CATEGORIES}
    )
    total_before: int = 0
    total_after: int = 0
    unchanged_prologues: int = 0
    diagnostics: int = 0

    def record(self, category: str, delta: int) -> None:
        self.categories.setdefault(category, CategoryStats()).deltas.append(delta)

    @property
    def total_delta(self) -> int:
        return sum(stats.total_delta for stats in self.categories.values())

    @property
    def site_count(self) -> int:
        return sum(stats.count for stats in self.categories.values())

    def to_dict(self) -> dict:
        return {
            "isa": self.isa.value,
            "categories": {name: stats.to_dict() for name, stats in self.categories.items()},
            "total_before": self.total_before,
            "total_after": self.total_after,
            "unchanged_prologues": self.unchanged_prologues,
            "diagnostics": self.diagnostics,
        }
