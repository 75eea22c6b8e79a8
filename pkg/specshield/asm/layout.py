"""
Address assignment and data materialization.
"""
import ast
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from specshield.asm.isa import IsaProfile, instr_size
from specshield.asm.model import AsmUnit, Directive, Instruction, Label, Symbol, SymbolDiff
from specshield.asm.pseudo import expand_pseudo
from specshield.errors import AsmError, UnresolvedSymbolError

DEFAULT_BASE_TEXT = 0x1_0000
DEFAULT_BASE_DATA = 0x2_0000

_DATA_WIDTH = {".byte": 1, ".half": 2, ".short": 2, ".word": 4, ".long": 4, ".dword": 8, ".quad": 8}
_STRING = {".ascii": False, ".asciz": True, ".string": True}
_ZERO_FILL = (".zero", ".space", ".skip")
_ALIGN_POW2 = (".align", ".p2align")


@dataclass
class AddressMap:
    base_text: int = DEFAULT_BASE_TEXT
    base_data: int = DEFAULT_BASE_DATA
    instr_addr: Dict[int, int] = field(default_factory=dict)
    item_size: Dict[int, int] = field(default_factory=dict)
    data_addr: Dict[int, int] = field(default_factory=dict)
    symbol_addr: Dict[str, int] = field(default_factory=dict)
    text_end: int = DEFAULT_BASE_TEXT
    data_end: int = DEFAULT_BASE_DATA
    isa: IsaProfile = IsaProfile.RV64GC

    @property
    def text_size(self) -> int:
        return self.text_end - self.base_text

    def address_of(self, name: str) -> int:
        return self.symbol_addr[name]


def item_size(instr: Instruction, isa: IsaProfile) -> int:
    """Size of a possibly-pseudo instruction: the sum of its expansion."""
    return sum(instr_size(part, isa) for part in expand_pseudo(instr))


def _line(item) -> Optional[int]:
    return item.loc.line if item.loc else None


def _int_arg(directive: Directive, pos: int = 0) -> int:
    try:
        return int(directive.args[pos], 0)
    except (IndexError, ValueError):
        raise AsmError(f"{directive.name} expects an integer argument", _line(directive))


def string_bytes(directive: Directive) -> bytes:
    out = b""
    for arg in directive.args:
        try:
            value = ast.literal_eval(arg)
        except (ValueError, SyntaxError):
            raise AsmError(f"bad string literal {arg}", _line(directive))
        out += value.encode("latin-1") if isinstance(value, str) else bytes(value)
        if _STRING[directive.name]:
            out += b"\0"
    return out


def _align(addr: int, alignment: int) -> int:
    return (addr + alignment - 1) // alignment * alignment


def data_directive_size(directive: Directive, addr: int) -> int:
    """Bytes a data-section directive occupies when placed at `addr`."""
    name = directive.name
    if name in _DATA_WIDTH:
        return _DATA_WIDTH[name] * len(directive.args)
    if name in _STRING:
        return len(string_bytes(directive))
    if name in _ZERO_FILL:
        return _int_arg(directive)
    if name in _ALIGN_POW2:
        return _align(addr, 1 << _int_arg(directive)) - addr
    if name == ".balign":
        return _align(addr, _int_arg(directive)) - addr
    return 0


def is_data_directive(directive: Directive) -> bool:
    return (
        directive.name in _DATA_WIDTH
        or directive.name in _STRING
        or directive.name in _ZERO_FILL
    )


def layout(
    unit: AsmUnit,
    isa: IsaProfile,
    base_text: int = DEFAULT_BASE_TEXT,
    base_data: int = DEFAULT_BASE_DATA,
    check_ranges: bool = True,
) -> AddressMap:
    """
    Assign addresses to every instruction and symbol.

    Text is placed from base_text, data from base_data; instruction
    addresses accumulate item sizes. Alignment directives pad data only.

    Raises:
        UnresolvedSymbolError: for references that are neither defined nor declared external
        AsmError: for data directives inside the text section, or (with
            check_ranges) a symbol difference outside the 12-bit range
    """
    isa = IsaProfile.from_name(isa)
    amap = AddressMap(base_text=base_text, base_data=base_data, isa=isa)
    pc = {"text": base_text, "data": base_data}
    for index, (item, section) in enumerate(zip(unit.items, unit.sections())):
        if isinstance(item, Label):
            amap.symbol_addr[item.name] = pc[section]
        elif isinstance(item, Instruction):
            if section != "text":
                raise AsmError(f"instruction '{item}' outside the text section", _line(item))
            size = item_size(item, isa)
            amap.instr_addr[index] = pc["text"]
            amap.item_size[index] = size
            pc["text"] += size
        elif section == "data":
            size = data_directive_size(item, pc["data"])
            amap.data_addr[index] = pc["data"]
            amap.item_size[index] = size
            pc["data"] += size
        elif is_data_directive(item):
            raise AsmError(f"data directive {item.name} in the text section", _line(item))
    amap.text_end = pc["text"]
    amap.data_end = pc["data"]
    _check_references(unit, amap)
    if check_ranges:
        for index, op in out_of_range_diffs(unit, amap):
            value = amap.symbol_addr[op.left] - amap.symbol_addr[op.right]
            raise AsmError(f"'{op}' = {value} does not fit a 12-bit immediate", _line(unit.items[index]))
    return amap


def _check_references(unit: AsmUnit, amap: AddressMap) -> None:
    externals = unit.declared_externals()
    for _, ins in unit.instructions():
        for op in ins.operands:
            names = ()
            if isinstance(op, Symbol):
                names = (op.name,)
            elif isinstance(op, SymbolDiff):
                names = (op.left, op.right)
            for name in names:
                if name not in amap.symbol_addr and (
                    name not in externals or isinstance(op, SymbolDiff)
                ):
                    raise UnresolvedSymbolError(f"unresolved symbol '{name}'", _line(ins))


def out_of_range_diffs(unit: AsmUnit, amap: AddressMap) -> List[Tuple[int, SymbolDiff]]:
    """Symbol differences whose value does not fit a 12-bit immediate, by item index."""
    found = []
    for index, ins in unit.instructions():
        for op in ins.operands:
            if isinstance(op, SymbolDiff):
                value = amap.symbol_addr[op.left] - amap.symbol_addr[op.right]
                if not -2048 <= value <= 2047:
                    found.append((index, op))
    return found


def materialize_data(unit: AsmUnit, amap: AddressMap) -> Tuple[bytearray, List[int]]:
    """
    Build the initial data-section image.

    Returns:
        tuple: (image starting at base_data, data offsets of 8-byte slots
        holding text addresses)
    """
    image = bytearray(amap.data_end - amap.base_data)
    code_slots = []
    text_range = range(amap.base_text, amap.text_end + 1)
    for index, (item, section) in enumerate(zip(unit.items, unit.sections())):
        if section != "data" or not isinstance(item, Directive):
            continue
        size = amap.item_size.get(index, 0)
        if not size:
            continue
        start = amap.data_addr[index] - amap.base_data
        if item.name in _DATA_WIDTH:
            width = _DATA_WIDTH[item.name]
            for pos, arg in enumerate(item.args):
                arg = arg.strip()
                value = _resolve_value(arg, amap, item)
                offset = start + pos * width
                image[offset:offset + width] = (value & ((1 << (8 * width)) - 1)).to_bytes(width, "little")
                if width == 8 and arg in amap.symbol_addr and value in text_range:
                    code_slots.append(offset)
        elif item.name in _STRING:
            data = string_bytes(item)
            image[start:start + len(data)] = data
    return image, code_slots


def _resolve_value(arg: str, amap: AddressMap, item: Directive) -> int:
    if arg in amap.symbol_addr:
        return amap.symbol_addr[arg]
    try:
        return int(arg, 0)
    except ValueError:
        if len(arg) == 3 and arg[0] == arg[2] == "'":
            return ord(arg[1])
        raise UnresolvedSymbolError(f"cannot resolve data value '{arg}'", _line(item))
