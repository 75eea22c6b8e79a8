"""
Re-emit an AsmUnit as assembly text.
"""
from specshield.asm.model import MARKER, AsmUnit, Directive, Instruction, Label, Origin


def format_item(item) -> str:
    if isinstance(item, Label):
        text = f"{item.name}:"
    elif isinstance(item, Directive):
        text = f"\t{item.name}"
        if item.args:
            text += " " + ", ".join(item.args)
    elif isinstance(item, Instruction):
        text = f"\t{item}"
    else:
        raise TypeError(f"not an assembly item: {item!r}")
    if item.origin is Origin.SYNTHESIZED:
        text += f"\t{MARKER}"
    return text


def print_unit(unit: AsmUnit) -> str:
    """
    Print one item per line; synthesized items carry the marker comment.

    Returns:
        str: Assembly text, empty for an empty unit
    """
    if not unit.items:
        return ""
    return "\n".join(format_item(item) for item in unit.items) + "\n"
