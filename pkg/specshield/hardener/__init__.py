"""
hardener: Spectre-BTI and Spectre-RSB rewrites for RV64 assembly.

Importing the package registers the passes in application order.
"""
from specshield.hardener import prologue, calls, jumps, rsb  # noqa: F401  (registration order)
from specshield.hardener.base import FreshLabels, Mitigation, MitigationRegistry, RewriteSite, SiteKind
from specshield.hardener.calls import rewrite_indirect_call, skip_constant
from specshield.hardener.config import Diagnostic, HardenConfig, parse_mitigations
from specshield.hardener.harden import find_rewrite_sites, harden_unit
from specshield.hardener.jumps import rewrite_indirect_jump
from specshield.hardener.prologue import frame_effect, match_prologue, split_prologue
from specshield.hardener.report import OverheadReport
from specshield.hardener.rsb import rewrite_direct_call

__all__ = [
    "Diagnostic",
    "FreshLabels",
    "HardenConfig",
    "Mitigation",
    "MitigationRegistry",
    "OverheadReport",
    "RewriteSite",
    "SiteKind",
    "find_rewrite_sites",
    "frame_effect",
    "harden_unit",
    "match_prologue",
    "parse_mitigations",
    "rewrite_direct_call",
    "rewrite_indirect_call",
    "rewrite_indirect_jump",
    "skip_constant",
    "split_prologue",
]
