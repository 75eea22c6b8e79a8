"""
The hardening driver: find sites, apply the enabled rewrites in one pass
and account for the size overhead.
"""
from typing import Dict, List, Tuple

from specshield.asm.layout import layout, out_of_range_diffs
from specshield.asm.model import AsmUnit, Label
from specshield.asm.pseudo import expand_unit
from specshield.errors import HardenRefusedError
from specshield.hardener.base import FreshLabels, MitigationRegistry, RewriteSite, SiteKind
from specshield.hardener.config import Diagnostic, HardenConfig
from specshield.hardener.prologue import unrecognized_functions
from specshield.hardener.report import OverheadReport, items_size
from specshield.hardener.rsb import far_form
from specshield.utils import debug_echo


def _collect(unit: AsmUnit, config: HardenConfig, diagnostics: List[Diagnostic]):
    found = []
    for mitigation in MitigationRegistry.enabled(config):
        for site in mitigation.find_sites(unit, config, diagnostics):
            found.append((mitigation, site))
    return found


def find_rewrite_sites(unit: AsmUnit, config: HardenConfig) -> List[RewriteSite]:
    """
    List every rewrite site in item order. Indices refer to the unit after
    expansion of its original pseudo-instructions.
    """
    expanded = expand_unit(unit, only_original=True)
    sites = [site for _, site in _collect(expanded, config, [])]
    return sorted(sites, key=lambda site: site.index)


def _check_callees(unit: AsmUnit, config: HardenConfig, diagnostics: List[Diagnostic]) -> None:
    unknown = unrecognized_functions(unit)
    if not unknown:
        return
    callees = unit.address_taken()
    refused = [name for name in unknown if name in callees]
    for name in unknown:
        if name in refused and config.force:
            diagnostics.append(
                Diagnostic("warning", f"potential indirect callee '{name}' has an unrecognized "
                                      f"prologue; hardened calls to it are unsafe", function=name)
            )
        elif name not in refused:
            diagnostics.append(
                Diagnostic("warning", f"function '{name}' has no recognized prologue", function=name)
            )
    if refused and not config.force:
        raise HardenRefusedError(refused)


def _splice(work: AsmUnit, replacements: Dict[int, tuple]) -> AsmUnit:
    items = []
    index = 0
    while index < len(work.items):
        if index in replacements:
            site, new_items, _ = replacements[index]
            items.extend(new_items)
            index += site.span
        else:
            items.append(work.items[index])
            index += 1
    return AsmUnit(items, name=work.name)


def _widen_far_calls(work: AsmUnit, replacements: Dict[int, tuple], config: HardenConfig,
                     diagnostics: List[Diagnostic]) -> AsmUnit:
    """
    Splice the replacements in, re-emitting resume-form direct calls whose
    callee is out of `jalr` reach until the result lays out.
    """
    by_resume = {
        new_items[-1].name: index
        for index, (site, new_items, category) in replacements.items()
        if site.kind is SiteKind.DIRECT_CALL and isinstance(new_items[-1], Label)
    }
    while True:
        hardened = _splice(work, replacements)
        amap = layout(hardened, config.isa, check_ranges=False)
        far = {by_resume[op.right] for _, op in out_of_range_diffs(hardened, amap) if op.right in by_resume}
        if not far:
            return hardened
        for index in sorted(far):
            site, new_items, _ = replacements[index]
            replacements[index] = (site, far_form(new_items), "direct_calls_far")
            del by_resume[new_items[-1].name]
            ins = work.items[index]
            diagnostics.append(
                Diagnostic("warning", f"call to '{site.callee}' is out of jalr range; "
                                      f"entered through a jump stub",
                           line=ins.loc.line if ins.loc else None)
            )


def harden_unit(unit: AsmUnit, config: HardenConfig) -> Tuple[AsmUnit, OverheadReport, List[Diagnostic]]:
    """
    Apply the enabled mitigations.

    Prologue splitting happens before call rewriting; labels are numbered
    in pass order (calls, jumps, rsb), then item order. Synthesized items
    are never rewritten, so hardening twice equals hardening once. A unit
    without sites is returned unchanged. Resume-form direct calls whose
    callee ends up out of `jalr` reach are re-emitted in the far form.

    Returns:
        tuple: (hardened unit, OverheadReport, diagnostics)

    Raises:
        HardenRefusedError: if calls is enabled and an address-taken
            function has an unrecognized prologue (unless config.force)
    """
    diagnostics: List[Diagnostic] = []
    work = expand_unit(unit, only_original=True)
    if config.enabled("calls"):
        _check_callees(work, config, diagnostics)

    fresh = FreshLabels(config.label_seed, set(work.symbols))
    report = OverheadReport(config.isa)
    replacements: Dict[int, tuple] = {}
    for mitigation, site in _collect(work, config, diagnostics):
        original = work.items[site.index:site.index + site.span]
        new_items, category = mitigation.rewrite(site, work, config, fresh, diagnostics)
        if new_items == original:
            report.unchanged_prologues += 1
            continue
        replacements[site.index] = (site, new_items, category)
        debug_echo(f"rewrote {site.kind.value} at item {site.index}")

    before = layout(work, config.isa).text_size
    report.total_before = before
    if not replacements:
        report.diagnostics = len(diagnostics)
        report.total_after = before
        return unit, report, diagnostics

    hardened = _widen_far_calls(work, replacements, config, diagnostics)
    for index, (site, new_items, category) in sorted(replacements.items()):
        original = work.items[index:index + site.span]
        report.record(category, items_size(new_items, config.isa) - items_size(original, config.isa))
    report.diagnostics = len(diagnostics)
    report.total_after = layout(hardened, config.isa).text_size
    return hardened, report, diagnostics
