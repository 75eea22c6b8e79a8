"""
asm-core: parse, represent, lay out and re-emit the supported RV64 subset.
"""
from specshield.asm.isa import IsaProfile, instr_size
from specshield.asm.layout import AddressMap, layout, materialize_data
from specshield.asm.model import (
    AsmUnit,
    Directive,
    Function,
    Immediate,
    Instruction,
    Label,
    MemRef,
    Origin,
    Symbol,
    SymbolDiff,
)
from specshield.asm.parser import parse_file, parse_unit
from specshield.asm.printer import print_unit
from specshield.asm.pseudo import expand_pseudo, expand_unit
from specshield.asm.registers import Register, reg

__all__ = [
    "AddressMap",
    "AsmUnit",
    "Directive",
    "Function",
    "Immediate",
    "Instruction",
    "IsaProfile",
    "Label",
    "MemRef",
    "Origin",
    "Register",
    "Symbol",
    "SymbolDiff",
    "expand_pseudo",
    "expand_unit",
    "instr_size",
    "layout",
    "materialize_data",
    "parse_file",
    "parse_unit",
    "print_unit",
    "reg",
]
