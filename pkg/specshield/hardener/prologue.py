"""
Prologue splitting for the indirect-call mitigation.

A canonical prologue

    addi sp, sp, -N
    sd   ra, N-8(sp)
    sd   fp, N-16(sp)
    addi fp, sp, K

becomes a fixed 16-byte ra/fp phase followed by the residual allocation,
so a hardened call site can enter the callee a constant distance past
its first two instructions.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from specshield.asm.isa import IsaProfile
from specshield.asm.model import AsmUnit, Function, Immediate, Instruction, MemRef, Origin, synth
from specshield.asm.registers import FP, RA, SP, Register
from specshield.hardener.base import Mitigation, MitigationRegistry, RewriteSite, SiteKind

RECOGNIZED = "recognized"
ALREADY_SPLIT = "split"


def _is_addi(ins, rd: Register, rs: Register) -> bool:
    return (
        isinstance(ins, Instruction)
        and ins.mnemonic == "addi"
        and ins.operands[0] == rd
        and ins.operands[1] == rs
        and isinstance(ins.operands[2], Immediate)
    )


def _is_store(ins, src: Register, offset: int) -> bool:
    return (
        isinstance(ins, Instruction)
        and ins.mnemonic == "sd"
        and ins.operands[0] == src
        and ins.operands[1] == MemRef(offset, SP)
    )


def match_prologue(items: Sequence) -> Optional[Tuple[int, int]]:
    """
    Match the four-instruction canonical prologue at the start of `items`.

    Returns:
        tuple: (N, K) or None
    """
    if len(items) < 4:
        return None
    first, save_ra, save_fp, set_fp = items[:4]
    if not _is_addi(first, SP, SP):
        return None
    size = -first.operands[2].value
    if size < 16 or size % 8:
        return None
    if not (_is_store(save_ra, RA, size - 8) and _is_store(save_fp, FP, size - 16)):
        return None
    if not _is_addi(set_fp, FP, SP):
        return None
    return size, set_fp.operands[2].value


def first_instruction(unit: AsmUnit, start: int, end: int) -> Optional[int]:
    """Index of the first instruction after the function label, if any."""
    for index in range(start + 1, end):
        if isinstance(unit.items[index], Instruction):
            return index
    return None


def prologue_status(unit: AsmUnit, start: int, end: int):
    """
    Classify a function's prologue.

    Returns:
        tuple: (status or None, instruction index, (N, K))
    """
    index = first_instruction(unit, start, end)
    if index is None:
        return None, None, None
    window = unit.items[index:min(index + 4, end)]
    frame = match_prologue(window)
    if frame is None:
        return None, index, None
    origins = {ins.origin for ins in window}
    if origins == {Origin.ORIGINAL}:
        return RECOGNIZED, index, frame
    if origins == {Origin.SYNTHESIZED}:
        return ALREADY_SPLIT, index, frame
    return None, index, None


def _address_taken_text_labels(unit: AsmUnit) -> List[str]:
    sections = unit.sections()
    taken = unit.address_taken()
    return [
        name for name, index in unit.symbols.items()
        if name in taken and sections[index] == "text"
    ]


def prologue_entries(unit: AsmUnit) -> Set[str]:
    """
    Address-taken text labels that open with a canonical or split prologue.
    They can be entered by an indirect call, so they count as functions
    even without `.type` or a direct call.
    """
    entries = set()
    for name in _address_taken_text_labels(unit):
        status, _, _ = prologue_status(unit, unit.symbols[name], len(unit.items))
        if status is not None:
            entries.add(name)
    return entries


def callable_functions(unit: AsmUnit) -> List[Function]:
    """Functions of the unit, address-taken prologue entries included."""
    return unit.functions(extra=prologue_entries(unit))


def non_function_entries(unit: AsmUnit) -> List[str]:
    """Address-taken text labels that are not functions, such as jump-table targets."""
    names = {function.name for function in callable_functions(unit)}
    return [name for name in _address_taken_text_labels(unit) if name not in names]


@dataclass(frozen=True)
class FrameEffect:
    """Symbolic result of running a prologue from an unknown entry state."""

    sp: tuple
    fp: tuple
    stores: Tuple[Tuple[int, tuple], ...]

    def slot_of(self, value: tuple) -> Optional[int]:
        for offset, stored in self.stores:
            if stored == value:
                return offset
        return None

    @property
    def ra_slot(self) -> Optional[int]:
        return self.slot_of(("init", RA.index, 0))

    @property
    def fp_slot(self) -> Optional[int]:
        return self.slot_of(("init", FP.index, 0))


def frame_effect(instructions: Sequence[Instruction]) -> FrameEffect:
    """
    Evaluate `addi`/`sd` sequences symbolically. Values are tuples
    ("entry", None, off) for entry-sp relative addresses and
    ("init", reg, off) for anything derived from an incoming register.

    Raises:
        ValueError: for instructions outside the frame-setup subset
    """
    regs: Dict[int, tuple] = {SP.index: ("entry", None, 0)}
    stores: Dict[int, tuple] = {}

    def value(r: Register) -> tuple:
        if r.index == 0:
            return ("const", None, 0)
        return regs.get(r.index, ("init", r.index, 0))

    for ins in instructions:
        ops = ins.operands
        if ins.mnemonic == "addi" and isinstance(ops[2], Immediate):
            tag, key, off = value(ops[1])
            if ops[0].index:
                regs[ops[0].index] = (tag, key, off + ops[2].value)
        elif ins.mnemonic == "sd":
            tag, _, off = value(ops[1].base)
            if tag != "entry":
                raise ValueError(f"store through a non-stack base: {ins}")
            stores[off + ops[1].offset] = value(ops[0])
        else:
            raise ValueError(f"not a frame-setup instruction: {ins}")
    return FrameEffect(value(SP), value(FP), tuple(sorted(stores.items())))


def split_prologue(items: Sequence[Instruction], isa: IsaProfile) -> List[Instruction]:
    """
    Split a canonical prologue.

    Args:
        items: The function's first four instructions
        isa: Active profile (the split itself is ISA independent)

    Returns:
        list: Replacement instructions; the input itself when N = 16

    Raises:
        ValueError: if the prologue shape is not recognized
    """
    frame = match_prologue(items)
    if frame is None:
        raise ValueError("prologue shape not recognized")
    size, fp_offset = frame
    if size == 16:
        return list(items[:4])
    residual = size - 16
    result = [
        synth("addi", SP, SP, Immediate(-16)),
        synth("sd", RA, MemRef(8, SP)),
        synth("sd", FP, MemRef(0, SP)),
        synth("addi", FP, SP, Immediate(fp_offset - residual)),
        synth("addi", SP, SP, Immediate(-residual)),
    ]
    if frame_effect(items[:4]) != frame_effect(result):
        raise AssertionError(f"split prologue changes the frame for N={size}, K={fp_offset}")
    return result


class PrologueSplit(Mitigation):
    """Splits every recognized prologue when the calls mitigation is on."""

    name = "prologue"
    flag = "calls"
    category = "prologues"
    description = "split function prologues into a fixed ra/fp phase and a residual allocation"

    def find_sites(self, unit, config, diagnostics):
        sites = []
        for function in callable_functions(unit):
            status, index, frame = prologue_status(unit, function.start, function.end)
            if status == RECOGNIZED:
                sites.append(
                    RewriteSite(SiteKind.PROLOGUE, index, function=function.name, frame=frame, span=4)
                )
        return sites

    def rewrite(self, site, unit, config, fresh, diagnostics):
        items = unit.items[site.index:site.index + site.span]
        return split_prologue(items, config.isa), self.category


def unrecognized_functions(unit: AsmUnit) -> List[str]:
    """Functions whose body does not start with a canonical (or already split) prologue."""
    names = []
    for function in callable_functions(unit):
        status, _, _ = prologue_status(unit, function.start, function.end)
        if status is None:
            names.append(function.name)
    return names


MitigationRegistry.register(PrologueSplit())
