"""
Pseudo-instruction expansion into canonical RV64 forms.
"""
from dataclasses import replace
from typing import List

from specshield.asm.isa import is_canonical
from specshield.asm.model import AsmUnit, Immediate, Instruction, MemRef, Symbol
from specshield.asm.registers import RA, ZERO
from specshield.errors import AsmError


def _sext(value: int, bits: int) -> int:
    value &= (1 << bits) - 1
    return value - (1 << bits) if value >> (bits - 1) else value


def split_hi_lo(value: int):
    """Split a 32-bit value into the lui (20-bit) and addi/addiw (12-bit) parts."""
    lo = _sext(value, 12)
    hi = ((value - lo) >> 12) & 0xFFFFF
    return hi, lo


def _li(rd, value: int, like: Instruction) -> List[Instruction]:
    if -2048 <= value <= 2047:
        return [_make(like, "addi", rd, ZERO, Immediate(value))]
    if not -(1 << 31) <= value < (1 << 31):
        raise AsmError(f"li immediate {value} does not fit in 32 bits", _line(like))
    hi, lo = split_hi_lo(value)
    out = [_make(like, "lui", rd, Immediate(hi))]
    if lo:
        out.append(_make(like, "addiw", rd, rd, Immediate(lo)))
    return out


def _line(instr: Instruction):
    return instr.loc.line if instr.loc else None


def _make(like: Instruction, mnemonic: str, *operands) -> Instruction:
    return replace(like, mnemonic=mnemonic, operands=tuple(operands))


def expand_pseudo(instr: Instruction) -> List[Instruction]:
    """
    Canonicalize one instruction. Expanded instructions keep the origin and
    source location of the pseudo they came from.

    Args:
        instr: Any supported instruction

    Returns:
        list: Canonical instructions; `[instr]` when it is already canonical
    """
    if is_canonical(instr):
        return [instr]
    m, ops = instr.mnemonic, instr.operands
    if m == "jr":
        return [_make(instr, "jalr", ZERO, ops[0], Immediate(0))]
    if m == "jalr" and len(ops) == 1:
        return [_make(instr, "jalr", RA, ops[0], Immediate(0))]
    if m == "jalr" and isinstance(ops[1], MemRef):
        return [_make(instr, "jalr", ops[0], ops[1].base, Immediate(ops[1].offset))]
    if m == "ret":
        return [_make(instr, "jalr", ZERO, RA, Immediate(0))]
    if m in ("call", "jal"):
        return [_make(instr, "jal", RA, ops[0])]
    if m in ("j", "tail"):
        return [_make(instr, "jal", ZERO, ops[0])]
    if m in ("la", "lla"):
        rd, sym = ops
        return [
            _make(instr, "lui", rd, Symbol(sym.name, "hi")),
            _make(instr, "addi", rd, rd, Symbol(sym.name, "lo")),
        ]
    if m == "li":
        if not isinstance(ops[1], Immediate):
            raise AsmError("li requires an integer immediate", _line(instr))
        return _li(ops[0], ops[1].value, instr)
    if m == "mv":
        return [_make(instr, "addi", ops[0], ops[1], Immediate(0))]
    if m == "nop":
        return [_make(instr, "addi", ZERO, ZERO, Immediate(0))]
    if m == "rdcycle":
        return [_make(instr, "csrrs", ops[0], Immediate(0xC00), ZERO)]
    if m == "beqz":
        return [_make(instr, "beq", ops[0], ZERO, ops[1])]
    if m == "bnez":
        return [_make(instr, "bne", ops[0], ZERO, ops[1])]
    raise AsmError(f"cannot expand '{instr}'", _line(instr))


def expand_unit(unit: AsmUnit, only_original: bool = False) -> AsmUnit:
    """
    Expand the instructions of a unit; labels and directives are kept.

    Args:
        unit: Unit to expand
        only_original: Leave synthesized instructions exactly as emitted
    """
    items = []
    changed = False
    for item in unit.items:
        if isinstance(item, Instruction) and not (only_original and item.synthesized):
            expanded = expand_pseudo(item)
            changed = changed or expanded != [item]
            items.extend(expanded)
        else:
            items.append(item)
    if not changed:
        return unit
    return AsmUnit(items, name=unit.name)
