"""
Exception hierarchy for SpecShield.

Every error carries the process exit status the CLI reports for it.
"""
from typing import Iterable, Optional


class SpecShieldError(Exception):
    """Base class for all SpecShield errors."""

    exit_code = 1


class AsmError(SpecShieldError):
    """Raised for malformed or unsupported assembly input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AsmSyntaxError(AsmError):
    pass


class DuplicateLabelError(AsmError):
    pass


class UnknownMnemonicError(AsmError):
    pass


class UnresolvedSymbolError(AsmError):
    pass


class ConfigError(SpecShieldError):
    """Invalid machine configuration or command-line flag combination."""


class HardenRefusedError(SpecShieldError):
    """
    Raised when the calls mitigation cannot be applied safely because some
    potential indirect callee has an unrecognized prologue.
    """

    exit_code = 2

    def __init__(self, functions: Iterable[str]):
        self.functions = sorted(functions)
        super().__init__(
            "unrecognized prologue in potential indirect callee(s): "
            + ", ".join(self.functions)
            + " (use --force to harden anyway)"
        )


class SimulationError(SpecShieldError):
    pass


class LoadError(SimulationError):
    pass


class SimulationTimeout(SimulationError):
    def __init__(self, steps: int):
        self.steps = steps
        super().__init__(f"step budget exhausted after {steps} steps")


class AttackExpectationError(SpecShieldError):
    """The observed attack outcome contradicts `--expect`."""

    exit_code = 3
