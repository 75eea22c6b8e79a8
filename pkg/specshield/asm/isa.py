"""
Mnemonic signatures and the RV64G / RV64GC instruction size model.

Operand kind letters used by the signature table:
    r  register
    i  12-bit style immediate: integer, %lo(sym) or a symbol difference
    u  upper immediate: integer or %hi(sym)
    s  plain symbol (branch/jump/call target or address)
    m  memory reference offset(base)
"""
from enum import Enum
from typing import Dict, Tuple

from specshield.asm.model import Immediate, Instruction, MemRef, Symbol, SymbolDiff
from specshield.asm.registers import Register
from specshield.errors import AsmError, ConfigError, UnknownMnemonicError


class IsaProfile(str, Enum):
    RV64G = "rv64g"
    RV64GC = "rv64gc"

    @classmethod
    def from_name(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ConfigError(f"unknown ISA profile '{name}' (expected rv64g or rv64gc)")


_R_TYPE = ("add", "sub", "and", "or", "xor", "sll", "srl", "sra", "slt", "sltu", "mul", "addw", "subw")
_I_TYPE = ("addi", "andi", "ori", "xori", "slli", "srli", "srai", "slti", "sltiu", "addiw")
_LOADS = ("ld", "lw", "lwu", "lh", "lhu", "lb", "lbu")
_STORES = ("sd", "sw", "sh", "sb")
_BRANCHES = ("beq", "bne", "blt", "bge", "bltu", "bgeu")

CANONICAL: Dict[str, Tuple[str, ...]] = {}
CANONICAL.update({m: ("rrr",) for m in _R_TYPE})
CANONICAL.update({m: ("rri",) for m in _I_TYPE})
CANONICAL.update({m: ("rm",) for m in _LOADS + _STORES})
CANONICAL.update({m: ("rrs",) for m in _BRANCHES})
CANONICAL.update(
    {
        "lui": ("ru",),
        "auipc": ("ru",),
        "jal": ("rs",),
        "jalr": ("rri",),
        "csrrs": ("rir",),
        "ecall": ("",),
    }
)

PSEUDO: Dict[str, Tuple[str, ...]] = {
    "j": ("s",),
    "jal": ("s",),
    "jr": ("r",),
    "jalr": ("r", "rm"),
    "ret": ("",),
    "call": ("s",),
    "tail": ("s",),
    "la": ("rs",),
    "lla": ("rs",),
    "li": ("ri",),
    "mv": ("rr",),
    "nop": ("",),
    "rdcycle": ("r",),
    "beqz": ("rs",),
    "bnez": ("rs",),
}

LOAD_MNEMONICS = frozenset(_LOADS)
STORE_MNEMONICS = frozenset(_STORES)
BRANCH_MNEMONICS = frozenset(_BRANCHES)


def operand_kind(op) -> str:
    if isinstance(op, Register):
        return "r"
    if isinstance(op, MemRef):
        return "m"
    if isinstance(op, SymbolDiff):
        return "i"
    if isinstance(op, Symbol):
        return {"hi": "u", "lo": "i"}.get(op.reloc, "s")
    if isinstance(op, Immediate):
        return "i"
    raise TypeError(f"not an operand: {op!r}")


def _kinds_match(actual: str, expected: str) -> bool:
    if len(actual) != len(expected):
        return False
    for a, e in zip(actual, expected):
        # integers are valid wherever an upper immediate is
        if a != e and not (a == "i" and e == "u"):
            return False
    return True


def is_known(mnemonic: str) -> bool:
    return mnemonic in CANONICAL or mnemonic in PSEUDO


def signature_matches(mnemonic: str, operands) -> Tuple[bool, bool]:
    """
    Check operands against the signature table.

    Returns:
        tuple: (matches, is_canonical)
    """
    kinds = "".join(operand_kind(op) for op in operands)
    for sig in CANONICAL.get(mnemonic, ()):
        if _kinds_match(kinds, sig):
            return True, True
    for sig in PSEUDO.get(mnemonic, ()):
        if _kinds_match(kinds, sig):
            return True, False
    return False, False


def is_canonical(instr: Instruction) -> bool:
    return signature_matches(instr.mnemonic, instr.operands)[1]


def _imm(op) -> int:
    return op.value if isinstance(op, Immediate) else None


def _has_relocation(instr: Instruction) -> bool:
    return any(
        isinstance(op, SymbolDiff) or (isinstance(op, Symbol) and op.reloc)
        for op in instr.operands
    )


def _fits(value, low, high) -> bool:
    return value is not None and low <= value <= high


def _compressible(instr: Instruction) -> bool:
    """
    The RVC size table. Branch and jump displacement ranges are not checked.
    """
    if _has_relocation(instr):
        return False
    m, ops = instr.mnemonic, instr.operands
    if m == "addi":
        rd, rs, value = ops[0].index, ops[1].index, _imm(ops[2])
        if rd == 2 and rs == 2:
            if not value:
                return False
            # c.addi16sp, or c.addi for small adjustments
            return (value % 16 == 0 and _fits(value, -512, 496)) or _fits(value, -32, 31)
        if rd == 0:
            return rs == 0 and value == 0  # c.nop
        if rs == 0:
            return _fits(value, -32, 31)  # c.li
        if rd == rs:
            return value != 0 and _fits(value, -32, 31)  # c.addi
        return False
    if m == "addiw":
        return ops[0].index != 0 and ops[0] == ops[1] and _fits(_imm(ops[2]), -32, 31)
    if m == "add":
        rd, rs1, rs2 = (op.index for op in ops)
        return rd != 0 and rs2 != 0 and rs1 in (0, rd)  # c.mv / c.add
    if m in ("sub", "and", "or", "xor", "addw", "subw"):
        return ops[0] == ops[1] and ops[0].is_compact and ops[2].is_compact
    if m == "andi":
        return ops[0] == ops[1] and ops[0].is_compact and _fits(_imm(ops[2]), -32, 31)
    if m == "slli":
        return ops[0] == ops[1] and ops[0].index != 0 and _fits(_imm(ops[2]), 1, 63)
    if m in ("srli", "srai"):
        return ops[0] == ops[1] and ops[0].is_compact and _fits(_imm(ops[2]), 1, 63)
    if m == "lui":
        return ops[0].index not in (0, 2) and _imm(ops[1]) != 0 and _fits(_imm(ops[1]), -32, 31)
    if m in ("ld", "sd", "lw", "sw"):
        width = 8 if m in ("ld", "sd") else 4
        rd, mem = ops
        if mem.offset % width:
            return False
        if mem.base.index == 2:
            if m in ("ld", "lw") and rd.index == 0:
                return False
            return 0 <= mem.offset <= width * 63
        return rd.is_compact and mem.base.is_compact and 0 <= mem.offset <= width * 31
    if m == "jalr":
        rd, rs, value = ops[0].index, ops[1].index, _imm(ops[2])
        return rd in (0, 1) and rs != 0 and value == 0  # c.jr / c.jalr
    if m == "jal":
        return ops[0].index == 0  # c.j
    if m in ("beq", "bne"):
        return ops[0].is_compact and ops[1].index == 0  # c.beqz / c.bnez
    return False


def instr_size(instr: Instruction, isa: IsaProfile) -> int:
    """
    Size in bytes of one canonical instruction.

    Args:
        instr: A pseudo-expanded instruction
        isa: The active profile

    Returns:
        int: 2 or 4

    Raises:
        UnknownMnemonicError: for mnemonics outside the supported subset
        AsmError: for pseudo-instructions that were not expanded
    """
    if not is_known(instr.mnemonic):
        raise UnknownMnemonicError(f"unknown mnemonic '{instr.mnemonic}'")
    if not is_canonical(instr):
        raise AsmError(f"'{instr}' is not canonical; expand pseudo-instructions first")
    if IsaProfile.from_name(isa) is IsaProfile.RV64G:
        return 4
    return 2 if _compressible(instr) else 4
