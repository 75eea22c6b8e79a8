#!/usr/bin/env python
"""
Unittest-based tests for the assembly parser.
"""
import os
import sys
import unittest

# Add the parent directory to the path so we can import the modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from specshield.asm.model import (
    Directive, Immediate, Instruction, Label, MemRef, Origin, Symbol, SymbolDiff,
)
from specshield.asm.parser import parse_file, parse_unit, split_operands
from specshield.asm.registers import RA, SP, ZERO, reg
from specshield.errors import (
    AsmSyntaxError, DuplicateLabelError, SpecShieldError, UnknownMnemonicError,
)
from tests import test_helper  # noqa: F401
from tests.utils.test_utils import cleanup_mock_environment, create_mock_environment, write_file


class TestParseUnit(unittest.TestCase):
    """Tests for parse_unit."""

    def test_label_and_statement_on_one_line(self):
        """A label may prefix an instruction on the same line."""
        unit = parse_unit("loop: addi a0, a0, 1\n\tbnez a0, loop\n")
        self.assertEqual(unit.items[0], Label("loop"))
        self.assertEqual(unit.items[1], Instruction("addi", (reg("a0"), reg("a0"), Immediate(1))))
        self.assertEqual(unit.symbols, {"loop": 0})

    def test_pseudo_instructions_are_kept_as_written(self):
        unit = parse_unit("\tret\n\tcall foo\n\tjr t0\nfoo:\n")
        self.assertEqual([ins.mnemonic for _, ins in unit.instructions()], ["ret", "call", "jr"])
        self.assertEqual(unit.items[1].operands, (Symbol("foo"),))

    def test_operand_forms(self):
        """Memory references, relocations and symbol differences parse to their own types."""
        unit = parse_unit(
            "a:\n\tld a0, 8(sp)\n\tlui t0, %hi(a)\n\taddi t0, t0, %lo(a)\n"
            "\tjalr x0, ra, a - b\nb:\n"
        )
        instructions = [ins for _, ins in unit.instructions()]
        self.assertEqual(instructions[0].operands[1], MemRef(8, SP))
        self.assertEqual(instructions[1].operands[1], Symbol("a", "hi"))
        self.assertEqual(instructions[2].operands[2], Symbol("a", "lo"))
        self.assertEqual(instructions[3].operands, (ZERO, RA, SymbolDiff("a", "b")))

    def test_character_literal(self):
        unit = parse_unit("\tli a0, 'B'\n")
        self.assertEqual(unit.items[0].operands[1], Immediate(66))

    def test_marker_comment_sets_synthesized_origin(self):
        unit = parse_unit("\tnop\t#@specshield\n\tnop # ordinary comment\nend_0:\t#@specshield\n")
        self.assertIs(unit.items[0].origin, Origin.SYNTHESIZED)
        self.assertIs(unit.items[1].origin, Origin.ORIGINAL)
        self.assertIs(unit.items[2].origin, Origin.SYNTHESIZED)

    def test_hash_inside_string_is_not_a_comment(self):
        unit = parse_unit('\t.data\nmsg:\t.asciz "a#b, c"\n')
        self.assertEqual(unit.items[2], Directive(".asciz", ('"a#b, c"',)))

    def test_directive_arguments(self):
        unit = parse_unit("\t.type main, @function\n\t.byte 1, 2, 3\n")
        self.assertEqual(unit.items[0].args, ("main", "@function"))
        self.assertEqual(unit.items[1].args, ("1", "2", "3"))

    def test_source_locations(self):
        unit = parse_unit("\n\n\tnop\n", name="f.s")
        self.assertEqual(unit.items[0].loc.line, 3)
        self.assertEqual(unit.items[0].loc.file, "f.s")

    def test_empty_input(self):
        unit = parse_unit("")
        self.assertEqual(unit.items, [])

    def test_duplicate_label(self):
        with self.assertRaises(DuplicateLabelError) as ctx:
            parse_unit("x:\n\tnop\nx:\n")
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn("line 3", str(ctx.exception))

    def test_unknown_mnemonic(self):
        with self.assertRaises(UnknownMnemonicError) as ctx:
            parse_unit("\tnop\n\tfrobnicate a0\n")
        self.assertEqual(ctx.exception.line, 2)

    def test_bad_operands(self):
        with self.assertRaises(AsmSyntaxError):
            parse_unit("\taddi a0, a0\n")
        with self.assertRaises(AsmSyntaxError):
            parse_unit("\tld a0, 8(notareg)\n")

    def test_errors_map_to_exit_status_one(self):
        with self.assertRaises(SpecShieldError) as ctx:
            parse_unit("\tbogus\n")
        self.assertEqual(ctx.exception.exit_code, 1)


class TestSplitOperands(unittest.TestCase):
    """Tests for operand splitting."""

    def test_commas_inside_parentheses_and_quotes(self):
        self.assertEqual(split_operands("a0, 8(sp)"), ["a0", "8(sp)"])
        self.assertEqual(split_operands('"x,y", 3'), ['"x,y"', "3"])

    def test_empty(self):
        self.assertEqual(split_operands(""), [])


class TestParseFile(unittest.TestCase):
    """Tests for parse_file."""

    def setUp(self):
        self.env = create_mock_environment()

    def tearDown(self):
        cleanup_mock_environment(self.env)

    def test_reads_file_and_names_unit(self):
        path = write_file(self.env, "prog.s", "main:\n\tli a0, 7\n")
        unit = parse_file(path)
        self.assertEqual(unit.name, path)
        self.assertEqual(unit.items[1].loc.file, path)


if __name__ == '__main__':
    unittest.main()
