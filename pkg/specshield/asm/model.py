"""
Data model for parsed assembly: operands, items and translation units.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

from specshield.asm.registers import Register
from specshield.errors import DuplicateLabelError

MARKER = "#@specshield"


class Origin(str, Enum):
    ORIGINAL = "original"
    SYNTHESIZED = "synthesized"


@dataclass(frozen=True)
class SourceLoc:
    file: str
    line: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}"


@dataclass(frozen=True)
class Immediate:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Symbol:
    """A symbol reference, optionally wrapped in a %hi/%lo relocation."""

    name: str
    reloc: Optional[str] = None

    def __str__(self) -> str:
        if self.reloc:
            return f"%{self.reloc}({self.name})"
        return self.name


@dataclass(frozen=True)
class SymbolDiff:
    """`left - right`, an assemble-time constant."""

    left: str
    right: str

    def __str__(self) -> str:
        return f"{self.left} - {self.right}"


@dataclass(frozen=True)
class MemRef:
    offset: int
    base: Register

    def __str__(self) -> str:
        return f"{self.offset}({self.base})"


Operand = Union[Register, Immediate, Symbol, SymbolDiff, MemRef]


@dataclass(frozen=True)
class Label:
    name: str
    origin: Origin = Origin.ORIGINAL
    loc: Optional[SourceLoc] = field(default=None, compare=False)


@dataclass(frozen=True)
class Directive:
    name: str
    args: Tuple[str, ...] = ()
    origin: Origin = Origin.ORIGINAL
    loc: Optional[SourceLoc] = field(default=None, compare=False)


@dataclass(frozen=True)
class Instruction:
    mnemonic: str
    operands: Tuple[Operand, ...] = ()
    origin: Origin = Origin.ORIGINAL
    loc: Optional[SourceLoc] = field(default=None, compare=False)

    @property
    def synthesized(self) -> bool:
        return self.origin is Origin.SYNTHESIZED

    def __str__(self) -> str:
        if not self.operands:
            return self.mnemonic
        return f"{self.mnemonic} " + ", ".join(str(op) for op in self.operands)


Item = Union[Label, Directive, Instruction]


def synth(mnemonic: str, *operands: Operand) -> Instruction:
    return Instruction(mnemonic, tuple(operands), Origin.SYNTHESIZED)


def synth_label(name: str) -> Label:
    return Label(name, Origin.SYNTHESIZED)


@dataclass(frozen=True)
class Function:
    name: str
    start: int  # index of the function label
    end: int  # exclusive


TEXT_SECTIONS = (".text",)
DATA_SECTION_DIRECTIVES = (".data", ".rodata", ".bss")


def section_of(directive: Directive) -> Optional[str]:
    """Return "text"/"data" if the directive switches section, else None."""
    if directive.name == ".text":
        return "text"
    if directive.name in DATA_SECTION_DIRECTIVES:
        return "data"
    if directive.name == ".section" and directive.args:
        return "text" if directive.args[0].startswith(".text") else "data"
    return None


@dataclass
class AsmUnit:
    """
    One translation unit. Equality compares items only.

    Raises:
        DuplicateLabelError: if a label is defined twice
    """

    items: List[Item] = field(default_factory=list)
    name: str = field(default="<input>", compare=False)
    symbols: Dict[str, int] = field(default_factory=dict, init=False, compare=False)

    def __post_init__(self):
        self.items = list(self.items)
        for index, item in enumerate(self.items):
            if isinstance(item, Label):
                if item.name in self.symbols:
                    line = item.loc.line if item.loc else None
                    raise DuplicateLabelError(f"duplicate label '{item.name}'", line)
                self.symbols[item.name] = index

    def instructions(self):
        for index, item in enumerate(self.items):
            if isinstance(item, Instruction):
                yield index, item

    def sections(self) -> List[str]:
        """Section ("text" or "data") of every item, by index."""
        current = "text"
        result = []
        for item in self.items:
            if isinstance(item, Directive):
                current = section_of(item) or current
            result.append(current)
        return result

    def declared_externals(self) -> Set[str]:
        names = set()
        for item in self.items:
            if isinstance(item, Directive) and item.name in (".extern", ".global", ".globl"):
                names.update(arg.strip() for arg in item.args)
        return names - set(self.symbols)

    def declared_functions(self) -> Set[str]:
        names = set()
        for item in self.items:
            if (
                isinstance(item, Directive)
                and item.name == ".type"
                and len(item.args) == 2
                and item.args[1].strip() in ("@function", "%function")
            ):
                names.add(item.args[0].strip())
        return names

    def direct_call_targets(self) -> Set[str]:
        """
        Callees of direct calls, including calls already turned into
        trampolines (`jalr x0, ra, callee - end_N`, `la ra, callee` or the
        `j callee` stub of the far form).
        """
        stubs = {
            item.name for item in self.items
            if isinstance(item, Label) and item.origin is Origin.SYNTHESIZED
        }
        targets = set()
        for _, ins in self.instructions():
            if ins.synthesized:
                if ins.mnemonic == "jalr" and isinstance(ins.operands[-1], SymbolDiff):
                    targets.add(ins.operands[-1].left)
                elif ins.mnemonic == "la" and ins.operands[0] == Register(1):
                    targets.add(ins.operands[1].name)
                elif ins.mnemonic == "j":
                    targets.add(ins.operands[0].name)
                continue
            if ins.mnemonic in ("call", "tail") or (
                ins.mnemonic == "jal"
                and (len(ins.operands) == 1 or ins.operands[0] == Register(1))
            ):
                targets.add(ins.operands[-1].name)
        return targets - stubs

    def address_taken(self) -> Set[str]:
        """
        Symbols whose address is materialized by original code or stored in
        data. Trampolines emitted by the hardener do not count.
        """
        taken = set()
        for _, ins in self.instructions():
            if ins.synthesized:
                continue
            if ins.mnemonic in ("la", "lla"):
                taken.add(ins.operands[1].name)
            for op in ins.operands:
                if isinstance(op, Symbol) and op.reloc == "hi":
                    taken.add(op.name)
        for item in self.items:
            if isinstance(item, Directive) and item.name in (".dword", ".quad", ".word"):
                taken.update(arg.strip() for arg in item.args if arg.strip() in self.symbols)
        return taken

    def functions(self, extra: Iterable[str] = ()) -> List[Function]:
        """
        Functions in item order. A function is a text label declared with
        `.type NAME, @function`, targeted by a direct call or named in
        `extra`; it extends to the next function label or the end of its
        text section.
        """
        names = self.declared_functions() | self.direct_call_targets() | set(extra)
        sections = self.sections()
        starts = [
            index
            for index, item in enumerate(self.items)
            if isinstance(item, Label) and item.name in names and sections[index] == "text"
        ]
        result = []
        for pos, start in enumerate(starts):
            limit = starts[pos + 1] if pos + 1 < len(starts) else len(self.items)
            end = start + 1
            while end < limit and sections[end] == "text":
                end += 1
            result.append(Function(self.items[start].name, start, end))
        return result
