#!/usr/bin/env python
"""
Unittest-based tests for pseudo-instruction expansion.
"""
import os
import sys
import unittest

# Add the parent directory to the path so we can import the modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from specshield.asm.model import Immediate, Instruction, Origin, Symbol
from specshield.asm.parser import parse_unit
from specshield.asm.pseudo import expand_pseudo, expand_unit, split_hi_lo
from specshield.asm.registers import RA, ZERO, reg
from specshield.errors import AsmError
from tests import test_helper  # noqa: F401

PSEUDO_FORMS = (
    "ret", "jr t0", "jalr a5", "jalr ra, 8(t1)", "call sym", "jal sym", "j sym", "tail sym",
    "la a0, sym", "lla a0, sym", "li a0, 5", "li a0, 4096", "li a0, 0x12345fff", "mv a0, a1",
    "nop", "rdcycle t4", "beqz a0, sym", "bnez a0, sym",
)


def expand(line):
    unit = parse_unit(f"sym:\n\t{line}\n")
    return [str(ins) for ins in expand_pseudo(unit.items[1])]


class TestExpandPseudo(unittest.TestCase):

    def test_control_transfer_pseudos(self):
        self.assertEqual(expand("ret"), ["jalr zero, ra, 0"])
        self.assertEqual(expand("jr t0"), ["jalr zero, t0, 0"])
        self.assertEqual(expand("jalr a5"), ["jalr ra, a5, 0"])
        self.assertEqual(expand("jalr ra, 8(t1)"), ["jalr ra, t1, 8"])
        self.assertEqual(expand("call sym"), ["jal ra, sym"])
        self.assertEqual(expand("jal sym"), ["jal ra, sym"])
        self.assertEqual(expand("j sym"), ["jal zero, sym"])
        self.assertEqual(expand("tail sym"), ["jal zero, sym"])

    def test_data_movement_pseudos(self):
        self.assertEqual(expand("la a0, sym"), ["lui a0, %hi(sym)", "addi a0, a0, %lo(sym)"])
        self.assertEqual(expand("lla a0, sym"), ["lui a0, %hi(sym)", "addi a0, a0, %lo(sym)"])
        self.assertEqual(expand("mv a0, a1"), ["addi a0, a1, 0"])
        self.assertEqual(expand("nop"), ["addi zero, zero, 0"])
        self.assertEqual(expand("rdcycle t4"), ["csrrs t4, 3072, zero"])
        self.assertEqual(expand("beqz a0, sym"), ["beq a0, zero, sym"])
        self.assertEqual(expand("bnez a0, sym"), ["bne a0, zero, sym"])

    def test_li(self):
        self.assertEqual(expand("li a0, -2048"), ["addi a0, zero, -2048"])
        self.assertEqual(expand("li a0, 4096"), ["lui a0, 1"])
        self.assertEqual(expand("li a0, 0x12345fff"), ["lui a0, 74566", "addiw a0, a0, -1"])

    def test_li_out_of_range(self):
        with self.assertRaises(AsmError):
            expand("li a0, 0x100000000")

    def test_expansion_is_idempotent(self):
        for line in PSEUDO_FORMS:
            with self.subTest(line=line):
                unit = parse_unit(f"sym:\n\t{line}\n")
                parts = expand_pseudo(unit.items[1])
                self.assertNotEqual(parts, [unit.items[1]])
                for part in parts:
                    self.assertEqual(expand_pseudo(part), [part])
                expanded = expand_unit(unit)
                self.assertIs(expand_unit(expanded), expanded)

    def test_canonical_is_unchanged(self):
        ins = Instruction("jalr", (ZERO, RA, Immediate(0)))
        self.assertEqual(expand_pseudo(ins), [ins])

    def test_expansion_keeps_origin_and_location(self):
        unit = parse_unit("\tla a0, x\t#@specshield\nx:\n")
        parts = expand_pseudo(unit.items[0])
        self.assertTrue(all(part.origin is Origin.SYNTHESIZED for part in parts))
        self.assertTrue(all(part.loc.line == 1 for part in parts))


class TestSplitHiLo(unittest.TestCase):

    def test_low_part_is_sign_extended(self):
        self.assertEqual(split_hi_lo(0x800), (1, -2048))
        self.assertEqual(split_hi_lo(0x7FF), (0, 2047))
        hi, lo = split_hi_lo(-1)
        self.assertEqual(lo, -1)
        self.assertEqual(hi, 0)


class TestExpandUnit(unittest.TestCase):

    def test_unit_without_pseudos_is_returned_as_is(self):
        unit = parse_unit("\taddi a0, a0, 1\n")
        self.assertIs(expand_unit(unit), unit)

    def test_only_original_leaves_synthesized_items(self):
        unit = parse_unit("\tret\t#@specshield\n\tret\n")
        expanded = expand_unit(unit, only_original=True)
        self.assertEqual(expanded.items[0].mnemonic, "ret")
        self.assertEqual(expanded.items[1], Instruction("jalr", (ZERO, RA, Immediate(0))))

    def test_labels_are_kept(self):
        unit = parse_unit("top:\n\tcall top\n")
        expanded = expand_unit(unit)
        self.assertEqual(expanded.symbols, {"top": 0})
        self.assertEqual(expanded.items[1].operands, (RA, Symbol("top")))
        self.assertEqual(expanded.items[1].operands[0], reg("ra"))


if __name__ == '__main__':
    unittest.main()
