"""
Indirect-jump mitigation: `jalr x0, rs, 0` with rs != ra becomes a
return trampoline whose misprediction spins in a capture loop.
"""
from typing import List

from specshield.asm.model import Immediate, Instruction, synth
from specshield.asm.registers import RA, ZERO
from specshield.hardener.base import (
    FreshLabels,
    Mitigation,
    MitigationRegistry,
    RewriteSite,
    SiteKind,
    trampoline_head,
)
from specshield.hardener.config import Diagnostic


def rewrite_indirect_jump(site: RewriteSite, fresh: FreshLabels) -> list:
    """
    Emit the indirect-jump trampoline for the target register of `site`.
    """
    number = fresh.next()
    return trampoline_head(number) + [
        synth("addi", RA, site.register, Immediate(0)),
        synth("jalr", ZERO, RA, Immediate(0)),
    ]


def _line(ins: Instruction):
    return ins.loc.line if ins.loc else None


class IndirectJumpMitigation(Mitigation):
    name = "indirect_jumps"
    flag = "jumps"
    category = "indirect_jumps"
    description = "replace indirect jumps with a return trampoline"

    def find_sites(self, unit, config, diagnostics: List[Diagnostic]):
        sites = []
        for index, ins in unit.instructions():
            if ins.synthesized or ins.mnemonic != "jalr":
                continue
            rd, rs, offset = ins.operands
            if rd != ZERO or rs == RA:
                continue
            if offset != Immediate(0):
                diagnostics.append(
                    Diagnostic("warning", f"indirect jump '{ins}' with a non-zero offset left unchanged",
                               line=_line(ins))
                )
                continue
            sites.append(RewriteSite(SiteKind.INDIRECT_JUMP, index, register=rs))
        return sites

    def rewrite(self, site, unit, config, fresh, diagnostics):
        return rewrite_indirect_jump(site, fresh), self.category


MitigationRegistry.register(IndirectJumpMitigation())
