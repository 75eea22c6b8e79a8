#!/usr/bin/env python
"""
Unittest-based tests for harden_unit and the overhead report.
"""
import os
import sys
import unittest

# Add the parent directory to the path so we can import the modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from specshield.asm.isa import IsaProfile
from specshield.asm.layout import layout
from specshield.asm.model import Label
from specshield.asm.parser import parse_unit
from specshield.asm.printer import print_unit
from specshield.errors import ConfigError, HardenRefusedError
from specshield.hardener import HardenConfig, SiteKind, find_rewrite_sites, harden_unit
from tests import test_helper  # noqa: F401
from tests.utils.test_utils import epilogue, program, prologue, run_unit

# One site of every kind; both functions have canonical prologues larger
# than 16 bytes, and `target` is a potential indirect callee.
ALL_SITES = """\
	.text
	.globl main
	.type main, @function
main:
	addi sp, sp, -32
	sd ra, 24(sp)
	sd fp, 16(sp)
	addi fp, sp, 32
	la t1, target
	jalr t1
	jr t2
	call target
	ld ra, 24(sp)
	ld fp, 16(sp)
	addi sp, sp, 32
	ret
	.type target, @function
target:
	addi sp, sp, -48
	sd ra, 40(sp)
	sd fp, 32(sp)
	addi fp, sp, 48
	ld ra, 40(sp)
	ld fp, 32(sp)
	addi sp, sp, 48
	ret
"""

NO_SITES = """\
main:
	li a0, 1
	addi a0, a0, 2
	li a7, 93
	ecall
"""

# `far` lies more than 2 KiB past the call; the padding is never executed.
FAR_CALL = (
    "main:\n\tcall far\n\tli a7, 93\n\tecall\n"
    + "\tadd a0, a1, a2\n" * 600
    + "far:\n\tli a0, 5\n\tret\n"
)


def labels_of(unit):
    return [item.name for item in unit.items if isinstance(item, Label)]


class TestOverheadTable(unittest.TestCase):
    """Per-site size deltas for each profile."""

    def harden(self, isa, **kwargs):
        config = HardenConfig.from_flag("all", isa=isa, **kwargs)
        return harden_unit(parse_unit(ALL_SITES), config)

    def test_rv64g_deltas(self):
        _, report, _ = self.harden(IsaProfile.RV64G)
        categories = report.categories
        self.assertEqual(categories["indirect_jumps"].delta_bytes, 12)
        self.assertEqual(categories["indirect_calls"].delta_bytes, 28)
        self.assertEqual(categories["prologues"].delta_bytes, 4)
        self.assertEqual(categories["prologues"].count, 2)
        self.assertEqual(categories["direct_calls"].delta_bytes, 16)

    def test_rv64gc_deltas(self):
        _, report, _ = self.harden(IsaProfile.RV64GC)
        categories = report.categories
        self.assertEqual(categories["indirect_jumps"].delta_bytes, 10)
        self.assertEqual(categories["indirect_calls"].delta_bytes, 22)
        self.assertEqual(categories["prologues"].delta_bytes, 2)
        self.assertEqual(categories["direct_calls"].delta_bytes, 14)

    def test_literal_direct_call_form(self):
        _, report, _ = self.harden(IsaProfile.RV64G, rsb_form="literal")
        self.assertEqual(report.categories["direct_calls"].delta_bytes, 16)
        _, report, _ = self.harden(IsaProfile.RV64GC, rsb_form="literal")
        self.assertEqual(report.categories["direct_calls"].delta_bytes, 12)

    def test_totals_match_the_laid_out_text(self):
        for isa in IsaProfile:
            hardened, report, _ = self.harden(isa)
            self.assertEqual(report.total_before, layout(parse_unit(ALL_SITES), isa).text_size)
            self.assertEqual(report.total_after, layout(hardened, isa).text_size)
            self.assertEqual(report.total_after - report.total_before, report.total_delta)

    def test_report_dict(self):
        _, report, _ = self.harden(IsaProfile.RV64G)
        data = report.to_dict()
        self.assertEqual(data["isa"], "rv64g")
        self.assertEqual(data["categories"]["indirect_calls"],
                         {"count": 1, "delta_bytes": 28, "total_delta": 28})
        self.assertEqual(data["unchanged_prologues"], 0)
        self.assertEqual(
            list(data["categories"]),
            ["indirect_jumps", "indirect_calls", "prologues", "direct_calls", "direct_calls_far",
             "direct_calls_literal"],
        )
        self.assertEqual(data["categories"]["direct_calls_literal"], {"count": 0, "delta_bytes": 0, "total_delta": 0})


class TestHardenUnit(unittest.TestCase):

    def test_no_sites_returns_the_input(self):
        unit = parse_unit(NO_SITES)
        hardened, report, diagnostics = harden_unit(unit, HardenConfig())
        self.assertIs(hardened, unit)
        self.assertEqual(report.site_count, 0)
        self.assertEqual(report.total_delta, 0)
        self.assertEqual(diagnostics, [])

    def test_category_filter(self):
        """Only the enabled mitigations rewrite anything."""
        unit = parse_unit("main:\n\tjr t0\n")
        hardened, report, _ = harden_unit(unit, HardenConfig.from_flag("rsb"))
        self.assertIs(hardened, unit)
        self.assertEqual(report.site_count, 0)
        hardened, report, _ = harden_unit(unit, HardenConfig.from_flag("jumps"))
        self.assertEqual(report.categories["indirect_jumps"].count, 1)

    def test_indirect_jump_trampoline(self):
        hardened, _, _ = harden_unit(parse_unit("main:\n\tjr t0\n"), HardenConfig.from_flag("jumps"))
        marker = "\t#@specshield"
        self.assertEqual(
            print_unit(hardened),
            "main:\n"
            f"\tjal set_up_target_0{marker}\n"
            f"capture_spec_0:{marker}\n"
            f"\tj capture_spec_0{marker}\n"
            f"set_up_target_0:{marker}\n"
            f"\taddi ra, t0, 0{marker}\n"
            f"\tjalr zero, ra, 0{marker}\n",
        )

    def test_hardening_is_idempotent(self):
        config = HardenConfig()
        once, _, _ = harden_unit(parse_unit(ALL_SITES), config)
        twice, report, _ = harden_unit(once, config)
        self.assertEqual(twice, once)
        self.assertEqual(report.site_count, 0)
        reparsed, _, _ = harden_unit(parse_unit(print_unit(once)), config)
        self.assertEqual(reparsed, once)

    def test_deterministic_output(self):
        first, _, _ = harden_unit(parse_unit(ALL_SITES), HardenConfig())
        second, _, _ = harden_unit(parse_unit(ALL_SITES), HardenConfig())
        self.assertEqual(print_unit(first), print_unit(second))

    def test_labels_are_fresh(self):
        source = "main:\n\tjr t0\ncapture_spec_0:\n\tret\n"
        hardened, _, _ = harden_unit(parse_unit(source), HardenConfig.from_flag("jumps"))
        self.assertIn("set_up_target_1", labels_of(hardened))
        self.assertNotIn("set_up_target_0", labels_of(hardened))

    def test_label_seed(self):
        config = HardenConfig.from_flag("jumps", label_seed=5)
        hardened, _, _ = harden_unit(parse_unit("main:\n\tjr t0\n\tjr t1\n"), config)
        self.assertEqual(
            [name for name in labels_of(hardened) if name.startswith("capture_spec")],
            ["capture_spec_5", "capture_spec_6"],
        )

    def test_pass_order_numbers_calls_before_jumps(self):
        hardened, _, _ = harden_unit(parse_unit(ALL_SITES), HardenConfig())
        names = labels_of(hardened)
        # indirect call first, then the jump, then the direct call
        self.assertLess(names.index("capture_spec_0"), names.index("capture_spec_1"))
        self.assertIn("end_0", names)
        self.assertIn("end_2", names)
        self.assertNotIn("end_1", names)

    def test_find_rewrite_sites(self):
        sites = find_rewrite_sites(parse_unit(ALL_SITES), HardenConfig())
        kinds = [site.kind for site in sites]
        self.assertEqual(kinds.count(SiteKind.PROLOGUE), 2)
        self.assertEqual(kinds.count(SiteKind.INDIRECT_CALL), 1)
        self.assertEqual(kinds.count(SiteKind.INDIRECT_JUMP), 1)
        self.assertEqual(kinds.count(SiteKind.DIRECT_CALL), 1)
        self.assertEqual([site.index for site in sites], sorted(site.index for site in sites))

    def test_sixteen_byte_prologue_is_unchanged(self):
        source = ("\t.type f, @function\nf:\n\taddi sp, sp, -16\n\tsd ra, 8(sp)\n"
                  "\tsd fp, 0(sp)\n\taddi fp, sp, 16\n\tret\n")
        unit = parse_unit(source)
        hardened, report, _ = harden_unit(unit, HardenConfig.from_flag("calls"))
        self.assertIs(hardened, unit)
        self.assertEqual(report.unchanged_prologues, 1)
        self.assertEqual(report.categories["prologues"].count, 0)


class TestCalleeChecks(unittest.TestCase):

    UNRECOGNIZED_CALLEE = """\
main:
	la t1, odd
	jalr t1
	ret
	.type odd, @function
odd:
	addi sp, sp, -8
	ret
"""

    def test_refused_without_force(self):
        with self.assertRaises(HardenRefusedError) as ctx:
            harden_unit(parse_unit(self.UNRECOGNIZED_CALLEE), HardenConfig())
        self.assertEqual(ctx.exception.functions, ["odd"])
        self.assertEqual(ctx.exception.exit_code, 2)
        self.assertIn("odd", str(ctx.exception))

    def test_force_turns_refusal_into_a_warning(self):
        _, report, diagnostics = harden_unit(
            parse_unit(self.UNRECOGNIZED_CALLEE), HardenConfig(force=True)
        )
        self.assertEqual(report.categories["indirect_calls"].count, 1)
        self.assertTrue(any(d.level == "warning" and d.function == "odd" for d in diagnostics))

    def test_without_calls_no_check(self):
        hardened, _, _ = harden_unit(parse_unit(self.UNRECOGNIZED_CALLEE), HardenConfig.from_flag("jumps"))
        self.assertIsNotNone(hardened)

    def test_only_direct_callee_is_a_warning(self):
        source = "main:\n\tcall leaf\n\tret\nleaf:\n\tret\n"
        _, _, diagnostics = harden_unit(parse_unit(source), HardenConfig())
        self.assertEqual([(d.level, d.function) for d in diagnostics], [("warning", "leaf")])


class TestSiteDiagnostics(unittest.TestCase):

    def test_link_through_own_register_is_left_alone(self):
        unit = parse_unit("main:\n\tjalr ra, ra, 0\n")
        hardened, report, diagnostics = harden_unit(unit, HardenConfig.from_flag("calls"))
        self.assertIs(hardened, unit)
        self.assertEqual([d.level for d in diagnostics], ["error"])

    def test_non_zero_offsets_are_skipped_with_a_warning(self):
        unit = parse_unit("main:\n\tjalr x0, t0, 8\n\tjalr ra, t1, 4\n")
        hardened, report, diagnostics = harden_unit(unit, HardenConfig.from_flag("jumps,calls"))
        self.assertIs(hardened, unit)
        self.assertEqual([d.level for d in diagnostics], ["warning", "warning"])

    def test_argument_register_warning(self):
        unit = parse_unit("main:\n\tjalr a5\n")
        _, report, diagnostics = harden_unit(unit, HardenConfig.from_flag("calls"))
        self.assertEqual(report.categories["indirect_calls"].count, 1)
        self.assertEqual(len(diagnostics), 1)
        self.assertIn("a5", diagnostics[0].message)

    def test_external_callee_falls_back_to_literal(self):
        unit = parse_unit("\t.extern puts\nmain:\n\tcall puts\n")
        hardened, report, diagnostics = harden_unit(unit, HardenConfig.from_flag("rsb"))
        self.assertEqual(report.categories["direct_calls_literal"].count, 1)
        self.assertEqual(report.categories["direct_calls"].count, 0)
        self.assertEqual(diagnostics[0].level, "warning")
        self.assertIn("la ra, puts", print_unit(hardened))


class TestFarCalls(unittest.TestCase):
    """Direct calls whose callee is out of reach of a 12-bit jalr offset."""

    def test_far_callee_is_entered_through_a_stub(self):
        unit = parse_unit(FAR_CALL)
        for isa in (IsaProfile.RV64GC, IsaProfile.RV64G):
            with self.subTest(isa=isa.value):
                hardened, report, diagnostics = harden_unit(unit, HardenConfig.from_flag("rsb", isa=isa))
                self.assertEqual(report.categories["direct_calls_far"].count, 1)
                self.assertEqual(report.categories["direct_calls"].count, 0)
                self.assertEqual([d.level for d in diagnostics], ["warning"])
                self.assertIn("'far'", diagnostics[0].message)
                self.assertIn("\tj far\t#@specshield\n", print_unit(hardened))
                self.assertEqual(report.total_after, layout(hardened, isa).text_size)

    def test_far_call_returns_to_the_call_site(self):
        unit = parse_unit(FAR_CALL)
        hardened, _, _ = harden_unit(unit, HardenConfig.from_flag("rsb"))
        self.assertEqual(run_unit(unit).exit_code, 5)
        after = run_unit(hardened)
        self.assertEqual((after.status, after.exit_code), ("halted", 5))

    def test_far_form_is_idempotent(self):
        config = HardenConfig.from_flag("rsb")
        once, _, _ = harden_unit(parse_unit(FAR_CALL), config)
        twice, report, _ = harden_unit(once, config)
        self.assertEqual(twice, once)
        self.assertEqual(report.site_count, 0)
        reparsed, _, _ = harden_unit(parse_unit(print_unit(once)), config)
        self.assertEqual(reparsed, once)
        self.assertEqual([f.name for f in once.functions()], ["far"])

    def test_near_calls_keep_the_resume_form(self):
        source = FAR_CALL.replace("\tcall far\n", "\tcall near\n\tcall far\n", 1)
        source = source.replace("\tecall\n", "\tecall\nnear:\n\tret\n", 1)
        unit = parse_unit(source)
        hardened, report, _ = harden_unit(unit, HardenConfig.from_flag("rsb"))
        self.assertEqual(report.categories["direct_calls"].count, 1)
        self.assertEqual(report.categories["direct_calls_far"].count, 1)
        self.assertEqual(run_unit(hardened).exit_code, 5)


class TestAddressTakenEntries(unittest.TestCase):
    """Indirect callees that are neither declared nor called directly."""

    TAKEN_WITHOUT_TYPE = program(
        "\tla a5, f\n\tjalr a5\n",
        functions="f:\n" + prologue(32) + "\tli a0, 42\n" + epilogue(32),
    )

    def test_prologue_is_split(self):
        unit = parse_unit(self.TAKEN_WITHOUT_TYPE)
        hardened, report, _ = harden_unit(unit, HardenConfig.from_flag("calls"))
        self.assertEqual(report.categories["prologues"].count, 1)
        self.assertEqual(report.categories["indirect_calls"].count, 1)
        self.assertEqual(run_unit(unit).exit_code, 42)
        after = run_unit(hardened)
        self.assertEqual((after.status, after.exit_code), ("halted", 42))

    def test_label_without_prologue_is_reported(self):
        unit = parse_unit("main:\n\tla t1, spot\n\tjalr t1\n\tret\nspot:\n\tret\n")
        _, _, diagnostics = harden_unit(unit, HardenConfig.from_flag("calls"))
        self.assertEqual([d.level for d in diagnostics], ["warning"])
        self.assertIn("'spot'", diagnostics[0].message)

    def test_jump_table_labels_are_not_refused(self):
        source = ("main:\n\tla t0, table\n\tld t1, 0(t0)\n\tjr t1\ncase0:\n\tli a0, 3\n"
                  "\tli a7, 93\n\tecall\n\t.data\ntable:\n\t.dword case0\n")
        hardened, report, diagnostics = harden_unit(parse_unit(source), HardenConfig())
        self.assertEqual(report.categories["indirect_jumps"].count, 1)
        self.assertEqual(diagnostics, [])
        self.assertEqual(run_unit(hardened).exit_code, 3)


class TestHardenConfig(unittest.TestCase):

    def test_from_flag(self):
        self.assertEqual(HardenConfig.from_flag("all").enable, {"jumps", "calls", "rsb"})
        self.assertEqual(HardenConfig.from_flag("jumps, rsb").enable, {"jumps", "rsb"})

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            HardenConfig.from_flag("retpoline")
        with self.assertRaises(ConfigError):
            HardenConfig.from_flag("")
        with self.assertRaises(ConfigError):
            HardenConfig(rsb_form="inline")
        with self.assertRaises(ConfigError):
            HardenConfig(isa="rv32gc")


if __name__ == '__main__':
    unittest.main()
