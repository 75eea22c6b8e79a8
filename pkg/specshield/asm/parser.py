"""
Parser for the GNU-assembler style RV64 subset.

Comments are dropped, except the synthesized-code marker which sets the
origin of the item on its line.
"""
import re
from typing import List, Optional

from specshield.asm.isa import is_known, signature_matches
from specshield.asm.model import (
    MARKER,
    AsmUnit,
    Directive,
    Immediate,
    Instruction,
    Label,
    MemRef,
    Origin,
    SourceLoc,
    Symbol,
    SymbolDiff,
)
from specshield.asm.registers import is_register_name, reg
from specshield.errors import AsmSyntaxError, UnknownMnemonicError

_IDENT = r"[A-Za-z_.$][\w.$]*"
_LABEL_RE = re.compile(rf"^({_IDENT})\s*:")
_RELOC_RE = re.compile(rf"^%(hi|lo)\(\s*({_IDENT})\s*\)$")
_DIFF_RE = re.compile(rf"^({_IDENT})\s*-\s*({_IDENT})$")
_MEM_RE = re.compile(r"^(.*)\(\s*(\w+)\s*\)$")
_IDENT_RE = re.compile(rf"^{_IDENT}$")


def _strip_comment(line: str):
    """Split a line into (code, comment); '#' inside quotes is not a comment."""
    quote = None
    escaped = False
    for pos, ch in enumerate(line):
        if escaped:
            escaped = False
        elif ch == "\\":
            escaped = True
        elif quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:pos], line[pos:]
    return line, ""


def split_operands(text: str) -> List[str]:
    """Split on top-level commas, respecting quotes and parentheses."""
    parts, current = [], []
    depth, quote, escaped = 0, None, False
    for ch in text:
        if escaped:
            escaped = False
        elif ch == "\\":
            escaped = True
        elif quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
            continue
        current.append(ch)
    tail = "".join(current).strip()
    if tail or parts:
        parts.append(tail)
    return parts


def parse_int(text: str) -> Optional[int]:
    text = text.strip()
    if len(text) == 3 and text[0] == text[2] == "'":
        return ord(text[1])
    try:
        return int(text, 0)
    except ValueError:
        return None


def parse_operand(text: str, line: int):
    """
    Parse one operand.

    Raises:
        AsmSyntaxError: if the operand is not recognized
    """
    text = text.strip()
    if not text:
        raise AsmSyntaxError("empty operand", line)
    if is_register_name(text):
        return reg(text)
    value = parse_int(text)
    if value is not None:
        return Immediate(value)
    match = _RELOC_RE.match(text)
    if match:
        return Symbol(match.group(2), match.group(1))
    match = _MEM_RE.match(text)
    if match and is_register_name(match.group(2)):
        offset = parse_int(match.group(1)) if match.group(1).strip() else 0
        if offset is None:
            raise AsmSyntaxError(f"bad memory offset in '{text}'", line)
        return MemRef(offset, reg(match.group(2)))
    match = _DIFF_RE.match(text)
    if match:
        return SymbolDiff(match.group(1), match.group(2))
    if _IDENT_RE.match(text):
        return Symbol(text)
    raise AsmSyntaxError(f"cannot parse operand '{text}'", line)


def _parse_statement(text: str, origin: Origin, loc: SourceLoc):
    head, _, rest = text.partition(" ")
    if "\t" in head:
        head, _, more = head.partition("\t")
        rest = more + " " + rest
    rest = rest.strip()
    if head.startswith("."):
        return Directive(head, tuple(split_operands(rest)), origin, loc)
    mnemonic = head.lower()
    if not is_known(mnemonic):
        raise UnknownMnemonicError(f"unknown mnemonic '{head}'", loc.line)
    operands = tuple(parse_operand(op, loc.line) for op in split_operands(rest))
    matches, _ = signature_matches(mnemonic, operands)
    if not matches:
        raise AsmSyntaxError(f"bad operands for '{mnemonic}': {rest}", loc.line)
    return Instruction(mnemonic, operands, origin, loc)


def parse_unit(text: str, name: str = "<input>") -> AsmUnit:
    """
    Parse assembly source into an AsmUnit.

    Args:
        text: Assembly source
        name: File name used in source locations

    Returns:
        AsmUnit: Items in source order, pseudo-instructions as written

    Raises:
        AsmSyntaxError, DuplicateLabelError, UnknownMnemonicError
    """
    items = []
    for number, raw in enumerate(text.splitlines(), start=1):
        code, comment = _strip_comment(raw)
        origin = Origin.SYNTHESIZED if comment.strip() == MARKER else Origin.ORIGINAL
        loc = SourceLoc(name, number)
        code = code.strip()
        while code:
            match = _LABEL_RE.match(code)
            if not match:
                break
            items.append(Label(match.group(1), origin, loc))
            code = code[match.end():].strip()
        if code:
            items.append(_parse_statement(code, origin, loc))
    return AsmUnit(items, name=name)


def parse_file(path: str) -> AsmUnit:
    with open(path, encoding="utf-8") as fh:
        return parse_unit(fh.read(), name=path)
