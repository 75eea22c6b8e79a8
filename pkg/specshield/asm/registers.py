"""
RV64 integer register file names.
"""
from dataclasses import dataclass
from typing import Dict

# Preferred ABI name per index; x8 prints as fp.
ABI_NAMES = (
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2",
    "fp", "s1", "a0", "a1", "a2", "a3", "a4", "a5",
    "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7",
    "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6",
)

_ALIASES: Dict[str, int] = {name: index for index, name in enumerate(ABI_NAMES)}
_ALIASES.update({f"x{index}": index for index in range(32)})
_ALIASES["s0"] = 8


@dataclass(frozen=True)
class Register:
    index: int

    def __post_init__(self):
        if not 0 <= self.index <= 31:
            raise ValueError(f"register index out of range: {self.index}")

    @property
    def abi_name(self) -> str:
        return ABI_NAMES[self.index]

    @property
    def is_compact(self) -> bool:
        """True for x8..x15, the registers reachable from 3-bit RVC fields."""
        return 8 <= self.index <= 15

    @property
    def is_argument(self) -> bool:
        return 10 <= self.index <= 17

    def __str__(self) -> str:
        return self.abi_name


def is_register_name(text: str) -> bool:
    return text.lower() in _ALIASES


def reg(name: str) -> Register:
    """
    Look up a register by ABI or numeric name.

    Raises:
        KeyError: if the name is not a register
    """
    return Register(_ALIASES[name.lower()])


ZERO = Register(0)
RA = Register(1)
SP = Register(2)
FP = Register(8)
