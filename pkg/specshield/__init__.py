"""
SpecShield: Spectre-BTI / Spectre-RSB hardening for RV64 assembly, plus a
deterministic BOOM-style simulator to check the attacks and the mitigations.
"""
from specshield.version import __version__, VERSION_NAME

__all__ = ["__version__", "VERSION_NAME"]
