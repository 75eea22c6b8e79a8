"""
Indirect-call mitigation. The callee is entered past its first two
prologue instructions, with the legitimate return address already stored
in the ra slot of its frame.
"""
from typing import List

from specshield.asm.isa import IsaProfile, instr_size
from specshield.asm.model import Immediate, Instruction, MemRef, Symbol, synth, synth_label
from specshield.asm.registers import RA, SP, ZERO
from specshield.hardener.base import (
    FreshLabels,
    Mitigation,
    MitigationRegistry,
    RewriteSite,
    SiteKind,
    trampoline_head,
)
from specshield.hardener.config import Diagnostic
from specshield.hardener.prologue import non_function_entries


def skip_constant(isa: IsaProfile) -> int:
    """Bytes of `addi sp,sp,-16; sd ra,8(sp)` under the active profile."""
    return instr_size(Instruction("addi", (SP, SP, Immediate(-16))), isa) + instr_size(
        Instruction("sd", (RA, MemRef(8, SP))), isa
    )


def rewrite_indirect_call(site: RewriteSite, isa: IsaProfile, fresh: FreshLabels) -> list:
    """
    Emit the indirect-call trampoline. The target register doubles as the
    scratch register for the resume address.
    """
    number = fresh.next()
    target = site.register
    return trampoline_head(number) + [
        synth("addi", RA, target, Immediate(skip_constant(isa))),
        synth("addi", SP, SP, Immediate(-16)),
        synth("la", target, Symbol(f"end_{number}")),
        synth("sd", target, MemRef(8, SP)),
        synth("jalr", ZERO, RA, Immediate(0)),
        synth_label(f"end_{number}"),
    ]


def _line(ins: Instruction):
    return ins.loc.line if ins.loc else None


class IndirectCallMitigation(Mitigation):
    name = "indirect_calls"
    flag = "calls"
    category = "indirect_calls"
    description = "replace indirect calls with a trampoline into the split prologue"

    def find_sites(self, unit, config, diagnostics: List[Diagnostic]):
        sites = []
        for index, ins in unit.instructions():
            if ins.synthesized or ins.mnemonic != "jalr":
                continue
            rd, rs, offset = ins.operands
            if rd != RA:
                continue
            if rs == RA:
                diagnostics.append(
                    Diagnostic("error", f"'{ins}' links through its own target register; left unchanged",
                               line=_line(ins))
                )
                continue
            if offset != Immediate(0):
                diagnostics.append(
                    Diagnostic("warning", f"indirect call '{ins}' with a non-zero offset left unchanged",
                               line=_line(ins))
                )
                continue
            if rs.is_argument:
                diagnostics.append(
                    Diagnostic("warning", f"indirect call through argument register {rs}: "
                                          f"the trampoline overwrites it before callee entry",
                               line=_line(ins))
                )
            sites.append(RewriteSite(SiteKind.INDIRECT_CALL, index, register=rs))
        if sites:
            for name in non_function_entries(unit):
                diagnostics.append(
                    Diagnostic("warning", f"address-taken label '{name}' is not a recognized function; "
                                          f"an indirect call to it would enter past its first instructions")
                )
        return sites

    def rewrite(self, site, unit, config, fresh, diagnostics):
        return rewrite_indirect_call(site, config.isa, fresh), self.category


MitigationRegistry.register(IndirectCallMitigation())
