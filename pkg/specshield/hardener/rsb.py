"""
Spectre-RSB mitigation for direct calls. The call becomes a return
trampoline, so the RAS entry it pushes only ever predicts the capture loop.

Two linkage forms are available:

    resume   la ra, end_N ; jalr x0, ra, s - end_N ; end_N:
             the callee returns to the instruction after the original call
    literal  la ra, s ; jalr x0, ra, 0
             the callee starts with ra = s and must never return through it

A resume-form site whose callee lies beyond the 12-bit reach of the
`jalr` is re-emitted in the far form, which enters through a nearby stub:

    far      la ra, end_N ; jalr x0, ra, far_N - end_N ; far_N: j s ; end_N:
"""
from typing import List

from specshield.asm.model import Immediate, Symbol, SymbolDiff, synth, synth_label
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


def rewrite_direct_call(site: RewriteSite, fresh: FreshLabels, form: str = "resume") -> list:
    """
    Emit the direct-call trampoline for `site.callee`.
    """
    number = fresh.next()
    head = trampoline_head(number)
    if form == "literal":
        return head + [
            synth("la", RA, Symbol(site.callee)),
            synth("jalr", ZERO, RA, Immediate(0)),
        ]
    resume = f"end_{number}"
    return head + [
        synth("la", RA, Symbol(resume)),
        synth("jalr", ZERO, RA, SymbolDiff(site.callee, resume)),
        synth_label(resume),
    ]


def far_form(items: list) -> list:
    """
    Turn a resume-form trampoline into the far form. The label number and
    the callee are kept.
    """
    *head, load, jump, resume = items
    number = resume.name[len("end_"):]
    stub = f"far_{number}"
    return head + [
        load,
        synth("jalr", ZERO, RA, SymbolDiff(stub, resume.name)),
        synth_label(stub),
        synth("j", Symbol(jump.operands[-1].left)),
        resume,
    ]


class DirectCallMitigation(Mitigation):
    name = "direct_calls"
    flag = "rsb"
    category = "direct_calls"
    description = "replace direct calls with a return trampoline"

    def find_sites(self, unit, config, diagnostics: List[Diagnostic]):
        sites = []
        for index, ins in unit.instructions():
            if ins.synthesized or ins.mnemonic != "jal" or ins.operands[0] != RA:
                continue
            sites.append(RewriteSite(SiteKind.DIRECT_CALL, index, callee=ins.operands[1].name))
        return sites

    def rewrite(self, site, unit, config, fresh, diagnostics):
        if config.rsb_form == "literal":
            return rewrite_direct_call(site, fresh, "literal"), self.category
        if site.callee not in unit.symbols:
            ins = unit.items[site.index]
            diagnostics.append(
                Diagnostic(
                    "warning",
                    f"call to external '{site.callee}' uses the literal form; "
                    f"the callee is entered with ra = its own address",
                    line=ins.loc.line if ins.loc else None,
                )
            )
            return rewrite_direct_call(site, fresh, "literal"), "direct_calls_literal"
        return rewrite_direct_call(site, fresh), self.category


MitigationRegistry.register(DirectCallMitigation())
