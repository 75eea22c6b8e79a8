"""
Deterministic interpreter for the supported RV64 subset with BOOM-style
speculation structures.

Indirect jumps and calls are predicted by the BTB, returns by the RAS.
A prediction that exists and differs from the resolved target opens one
speculative window: instructions run on shadow registers, stores go to a
private buffer, loads still fill the cache. When the window is used up
(or an ecall or unmapped fetch is reached) the checkpoint is restored and
execution resumes at the resolved target. Cache contents and the cycle
counter are not restored.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Union

from specshield.asm.isa import BRANCH_MNEMONICS, LOAD_MNEMONICS, STORE_MNEMONICS, IsaProfile, instr_size
from specshield.asm.layout import AddressMap, layout, materialize_data
from specshield.asm.model import AsmUnit, Immediate, Instruction, Symbol, SymbolDiff
from specshield.asm.parser import parse_unit
from specshield.asm.pseudo import expand_pseudo, split_hi_lo
from specshield.errors import LoadError, SimulationError
from specshield.sim.cache import Cache, cache_access
from specshield.sim.config import MachineConfig
from specshield.sim.predictors import Btb, Ras

MASK = (1 << 64) - 1
EXIT_SYSCALL = 93
CSR_CYCLE = 0xC00


def sext(value: int, bits: int) -> int:
    value &= (1 << bits) - 1
    return value - (1 << bits) if value >> (bits - 1) else value


def to_signed(value: int) -> int:
    return sext(value, 64)


_ALU_R = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "xor": lambda a, b: a ^ b,
    "sll": lambda a, b: a << (b & 63),
    "srl": lambda a, b: a >> (b & 63),
    "sra": lambda a, b: to_signed(a) >> (b & 63),
    "slt": lambda a, b: int(to_signed(a) < to_signed(b)),
    "sltu": lambda a, b: int(a < b),
    "mul": lambda a, b: a * b,
    "addw": lambda a, b: sext(a + b, 32),
    "subw": lambda a, b: sext(a - b, 32),
}

_ALU_I = {
    "addi": lambda a, i: a + i,
    "andi": lambda a, i: a & (i & MASK),
    "ori": lambda a, i: a | (i & MASK),
    "xori": lambda a, i: a ^ (i & MASK),
    "slli": lambda a, i: a << (i & 63),
    "srli": lambda a, i: a >> (i & 63),
    "srai": lambda a, i: to_signed(a) >> (i & 63),
    "slti": lambda a, i: int(to_signed(a) < i),
    "sltiu": lambda a, i: int(a < (i & MASK)),
    "addiw": lambda a, i: sext(a + i, 32),
}

_BRANCH = {
    "beq": lambda a, b: a == b,
    "bne": lambda a, b: a != b,
    "blt": lambda a, b: to_signed(a) < to_signed(b),
    "bge": lambda a, b: to_signed(a) >= to_signed(b),
    "bltu": lambda a, b: a < b,
    "bgeu": lambda a, b: a >= b,
}

# width, sign-extend
_LOAD = {"ld": (8, False), "lw": (4, True), "lwu": (4, False), "lh": (2, True),
         "lhu": (2, False), "lb": (1, True), "lbu": (1, False)}
_STORE = {"sd": 8, "sw": 4, "sh": 2, "sb": 1}


class StepEvent(str, Enum):
    RETIRED = "retired"
    SPECULATED = "speculated"
    SQUASHED = "squashed"
    HALTED = "halted"


class Op:
    """One decoded instruction at a fixed address."""

    __slots__ = ("name", "kind", "fn", "rd", "rs1", "rs2", "imm", "target", "addr", "size",
                 "index", "synthesized")

    def __init__(self, name, kind, addr, size, index, synthesized, rd=0, rs1=0, rs2=0, imm=0,
                 target=None, fn=None):
        self.name = name
        self.kind = kind
        self.addr = addr
        self.size = size
        self.index = index
        self.synthesized = synthesized
        self.rd = rd
        self.rs1 = rs1
        self.rs2 = rs2
        self.imm = imm
        self.target = target
        self.fn = fn

    def __repr__(self):
        return f"Op({self.name}@{self.addr:#x})"


@dataclass
class SpecEvent:
    pc: int
    kind: str  # "btb" or "ras"
    predicted: int
    resolved: int
    window_used: int = 0
    cache_fills: int = 0

    def to_dict(self) -> dict:
        return {
            "pc": self.pc,
            "kind": self.kind,
            "predicted": self.predicted,
            "resolved": self.resolved,
            "window_used": self.window_used,
            "cache_fills": self.cache_fills,
        }


@dataclass
class SpecContext:
    site_pc: int
    kind: str
    predicted: int
    resolved: int
    checkpoint: List[int]
    ras: tuple
    remaining: int
    fills_at_open: int
    store_buffer: Dict[int, int] = field(default_factory=dict)


@dataclass
class RunResult:
    status: str  # halted | timeout | fault
    exit_code: Optional[int]
    steps: int
    cycles: int
    spec_events: List[SpecEvent] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "exit_code": self.exit_code,
            "steps": self.steps,
            "cycles": self.cycles,
            "spec_events": [event.to_dict() for event in self.spec_events],
        }


class Memory:
    """Sparse little-endian byte memory in 4 KiB pages."""

    PAGE = 4096

    def __init__(self):
        self.pages: Dict[int, bytearray] = {}

    def _page(self, addr: int) -> bytearray:
        base = addr - addr % self.PAGE
        page = self.pages.get(base)
        if page is None:
            page = self.pages[base] = bytearray(self.PAGE)
        return page

    def read(self, addr: int, size: int) -> bytes:
        offset = addr % self.PAGE
        if offset + size <= self.PAGE:
            return bytes(self._page(addr)[offset:offset + size])
        return bytes(self.read(addr + i, 1)[0] for i in range(size))

    def write(self, addr: int, data: bytes) -> None:
        offset = addr % self.PAGE
        if offset + len(data) <= self.PAGE:
            self._page(addr)[offset:offset + len(data)] = data
            return
        for i, byte in enumerate(data):
            self.write(addr + i, bytes([byte]))


def _resolve_imm(op, symbols: Dict[str, int], line) -> int:
    if isinstance(op, Immediate):
        return op.value
    if isinstance(op, SymbolDiff):
        return _lookup(op.left, symbols, line) - _lookup(op.right, symbols, line)
    if isinstance(op, Symbol):
        hi, lo = split_hi_lo(_lookup(op.name, symbols, line))
        return hi if op.reloc == "hi" else lo
    raise LoadError(f"line {line}: unsupported immediate {op}")


def _lookup(name: str, symbols: Dict[str, int], line) -> int:
    try:
        return symbols[name]
    except KeyError:
        raise LoadError(f"line {line}: symbol '{name}' is external and cannot be loaded")


def decode(ins: Instruction, addr: int, size: int, index: int, symbols: Dict[str, int]) -> Op:
    """Decode one canonical instruction with all symbols resolved."""
    m, ops = ins.mnemonic, ins.operands
    line = ins.loc.line if ins.loc else None
    op = Op(m, None, addr, size, index, ins.synthesized)
    if m in _ALU_R:
        op.kind, op.fn = "alu_r", _ALU_R[m]
        op.rd, op.rs1, op.rs2 = (r.index for r in ops)
    elif m in _ALU_I:
        op.kind, op.fn = "alu_i", _ALU_I[m]
        op.rd, op.rs1 = ops[0].index, ops[1].index
        op.imm = _resolve_imm(ops[2], symbols, line)
    elif m in LOAD_MNEMONICS:
        op.kind = "load"
        op.rd, op.rs1, op.imm = ops[0].index, ops[1].base.index, ops[1].offset
    elif m in STORE_MNEMONICS:
        op.kind = "store"
        op.rs2, op.rs1, op.imm = ops[0].index, ops[1].base.index, ops[1].offset
    elif m in BRANCH_MNEMONICS:
        op.kind, op.fn = "branch", _BRANCH[m]
        op.rs1, op.rs2 = ops[0].index, ops[1].index
        op.target = _lookup(ops[2].name, symbols, line)
    elif m in ("lui", "auipc"):
        op.kind = m
        op.rd, op.imm = ops[0].index, _resolve_imm(ops[1], symbols, line)
    elif m == "jal":
        op.kind = "jal"
        op.rd, op.target = ops[0].index, _lookup(ops[1].name, symbols, line)
    elif m == "jalr":
        op.kind = "jalr"
        op.rd, op.rs1 = ops[0].index, ops[1].index
        op.imm = _resolve_imm(ops[2], symbols, line)
    elif m == "csrrs":
        op.kind = "csr"
        op.rd, op.imm, op.rs1 = ops[0].index, ops[1].value, ops[2].index
    elif m == "ecall":
        op.kind = "ecall"
    else:
        raise LoadError(f"line {line}: cannot execute '{ins}'")
    return op


def _ranges_overlap(a, b) -> bool:
    return a[0] < a[1] and b[0] < b[1] and a[0] < b[1] and b[0] < a[1]


class Machine:
    """
    Architectural state (pc, registers, memory, cycles) plus BTB, RAS,
    L1 cache and at most one open speculative window.
    """

    def __init__(self, program: Dict[int, Op], entry: int, config: MachineConfig,
                 symbols: Dict[str, int], amap: AddressMap, code_slots: List[int]):
        self.program = program
        self.config = config
        self.symbols = symbols
        self.amap = amap
        self.code_slots = code_slots
        self.pc = entry
        self.regs = [0] * 32
        self.regs[2] = config.stack_top
        self.memory = Memory()
        self.cycles = 0
        self.steps = 0
        self.halted = False
        self.status = "running"
        self.exit_code: Optional[int] = None
        self.cache = Cache.from_config(config)
        self.btb = Btb(config.btb_sets, config.btb_ways)
        self.ras = Ras(config.ras_depth)
        self.spec: Optional[SpecContext] = None
        self.spec_events: List[SpecEvent] = []

    # -- guest memory helpers -------------------------------------------------

    def symbol(self, name: str) -> int:
        return self.symbols[name]

    def read_bytes(self, addr: int, size: int) -> bytes:
        return self.memory.read(addr, size)

    def write_bytes(self, addr: int, data: bytes) -> None:
        self.memory.write(addr, bytes(data))

    def read_u64(self, addr: int) -> int:
        return int.from_bytes(self.memory.read(addr, 8), "little")

    def write_u64(self, addr: int, value: int) -> None:
        self.memory.write(addr, (value & MASK).to_bytes(8, "little"))

    def data_snapshot(self, exclude_code_pointers: bool = True) -> bytes:
        """Final data section; slots initialized with text addresses are zeroed."""
        base = self.amap.base_data
        image = bytearray(self.memory.read(base, self.amap.data_end - base))
        if exclude_code_pointers:
            for offset in self.code_slots:
                image[offset:offset + 8] = bytes(8)
        return bytes(image)

    # -- execution ------------------------------------------------------------

    def _write(self, rd: int, value: int) -> None:
        if rd:
            self.regs[rd] = value & MASK

    def _load(self, addr: int, size: int) -> bytes:
        data = bytearray(self.memory.read(addr, size))
        if self.spec is not None and self.spec.store_buffer:
            buffer = self.spec.store_buffer
            for i in range(size):
                if addr + i in buffer:
                    data[i] = buffer[addr + i]
        return bytes(data)

    def _store(self, addr: int, data: bytes) -> int:
        if self.spec is not None:
            for i, byte in enumerate(data):
                self.spec.store_buffer[addr + i] = byte
            return 0
        self.memory.write(addr, data)
        return cache_access(self.cache, addr)

    def _execute(self, op: Op):
        """Run one instruction; returns (next pc, extra cycles)."""
        regs = self.regs
        kind = op.kind
        next_pc = op.addr + op.size
        if kind == "alu_i":
            self._write(op.rd, op.fn(regs[op.rs1], op.imm))
        elif kind == "alu_r":
            self._write(op.rd, op.fn(regs[op.rs1], regs[op.rs2]))
        elif kind == "load":
            addr = (regs[op.rs1] + op.imm) & MASK
            size, signed = _LOAD[op.name]
            value = int.from_bytes(self._load(addr, size), "little")
            self._write(op.rd, sext(value, size * 8) if signed else value)
            return next_pc, cache_access(self.cache, addr)
        elif kind == "store":
            addr = (regs[op.rs1] + op.imm) & MASK
            size = _STORE[op.name]
            return next_pc, self._store(addr, (regs[op.rs2] & ((1 << (8 * size)) - 1)).to_bytes(size, "little"))
        elif kind == "branch":
            if op.fn(regs[op.rs1], regs[op.rs2]):
                return op.target, 0
        elif kind == "lui":
            self._write(op.rd, sext((op.imm & 0xFFFFF) << 12, 32))
        elif kind == "auipc":
            self._write(op.rd, op.addr + sext((op.imm & 0xFFFFF) << 12, 32))
        elif kind == "jal":
            if op.rd == 1 and self.spec is None:
                self.ras.push(next_pc)
            self._write(op.rd, next_pc)
            return op.target, 0
        elif kind == "jalr":
            return self._jalr(op, next_pc), 0
        elif kind == "csr":
            if op.imm != CSR_CYCLE:
                raise SimulationError(f"unsupported CSR {op.imm:#x} at {op.addr:#x}")
            self._write(op.rd, self.cycles)
        return next_pc, 0

    def _jalr(self, op: Op, link: int) -> int:
        target = (self.regs[op.rs1] + op.imm) & MASK & ~1
        if self.spec is not None:
            self._write(op.rd, link)
            return target
        if op.rd == 1:
            self.ras.push(link)
            predicted, kind = self.btb.lookup(op.addr), "btb"
        elif op.rd == 0 and op.rs1 == 1:
            predicted, kind = self.ras.pop(), "ras"
        else:
            predicted, kind = self.btb.lookup(op.addr), "btb"
        self._write(op.rd, link)
        if self.config.speculation and predicted is not None and predicted != target:
            self.spec = SpecContext(
                site_pc=op.addr,
                kind=kind,
                predicted=predicted,
                resolved=target,
                checkpoint=list(self.regs),
                ras=self.ras.snapshot(),
                remaining=self.config.spec_window,
                fills_at_open=self.cache.fills,
            )
            return predicted
        if kind == "btb":
            self.btb.update(op.addr, target)
        return target

    def _squash(self) -> StepEvent:
        spec = self.spec
        self.regs = spec.checkpoint
        self.pc = spec.resolved
        self.ras.restore(spec.ras)
        if spec.kind == "btb":
            self.btb.update(spec.site_pc, spec.resolved)
        self.spec_events.append(
            SpecEvent(
                pc=spec.site_pc,
                kind=spec.kind,
                predicted=spec.predicted,
                resolved=spec.resolved,
                window_used=self.config.spec_window - spec.remaining,
                cache_fills=self.cache.fills - spec.fills_at_open,
            )
        )
        self.spec = None
        return StepEvent.SQUASHED

    def _halt(self, status: str, exit_code: Optional[int]) -> StepEvent:
        self.halted = True
        self.status = status
        self.exit_code = exit_code
        return StepEvent.HALTED

    def step(self) -> StepEvent:
        """
        Execute one instruction (or squash the open window).

        Raises:
            SimulationError: if the machine has already halted
        """
        if self.halted:
            raise SimulationError("machine is halted")
        self.steps += 1
        spec = self.spec
        if spec is not None and spec.remaining == 0:
            return self._squash()
        op = self.program.get(self.pc)
        if op is None:
            if spec is not None:
                return self._squash()
            return self._halt("fault", None)
        if op.kind == "ecall":
            if spec is not None:
                return self._squash()
            self.cycles += 1
            if self.regs[17] == EXIT_SYSCALL:
                return self._halt("halted", to_signed(self.regs[10]))
            return self._halt("fault", None)
        next_pc, extra = self._execute(op)
        self.cycles += 1 + extra
        self.pc = next_pc
        if spec is not None:
            spec.remaining -= 1
            return StepEvent.SPECULATED
        if self.spec is not None:
            return StepEvent.SPECULATED
        return StepEvent.RETIRED

    def run(self, max_steps: Optional[int] = None) -> RunResult:
        """
        Step until halted or the budget is exhausted. Deterministic.

        Returns:
            RunResult: status is "timeout" when the budget ran out
        """
        limit = max_steps if max_steps is not None else self.config.max_steps
        while not self.halted:
            if self.steps >= limit:
                self.status = "timeout"
                break
            self.step()
        return self.result()

    def result(self) -> RunResult:
        return RunResult(self.status, self.exit_code, self.steps, self.cycles, list(self.spec_events))


def load(unit: AsmUnit, amap: AddressMap, config: Optional[MachineConfig] = None) -> Machine:
    """
    Build a Machine from a laid-out unit. pc starts at `main` (or the first
    instruction), sp at the top of the reserved stack, cycles at 0.

    Raises:
        LoadError: no entry symbol, overlapping sections or external references
    """
    config = config or MachineConfig()
    program: Dict[int, Op] = {}
    for index, addr in sorted(amap.instr_addr.items()):
        for part in expand_pseudo(unit.items[index]):
            size = instr_size(part, amap.isa)
            program[addr] = decode(part, addr, size, index, amap.symbol_addr)
            addr += size
    if not program:
        raise LoadError("no entry symbol")
    entry = amap.symbol_addr.get("main", min(program))
    if entry not in program:
        raise LoadError("no entry symbol")

    text = (amap.base_text, amap.text_end)
    data = (amap.base_data, amap.data_end)
    stack = (config.stack_top - config.stack_size, config.stack_top)
    for (name_a, a), (name_b, b) in (
        (("text", text), ("data", data)),
        (("text", text), ("stack", stack)),
        (("data", data), ("stack", stack)),
    ):
        if _ranges_overlap(a, b):
            raise LoadError(f"overlapping sections: {name_a} {a[0]:#x}-{a[1]:#x} and {name_b} {b[0]:#x}-{b[1]:#x}")

    image, code_slots = materialize_data(unit, amap)
    machine = Machine(program, entry, config, dict(amap.symbol_addr), amap, code_slots)
    if image:
        machine.write_bytes(amap.base_data, image)
    return machine


def load_program(source: Union[str, AsmUnit], config: Optional[MachineConfig] = None,
                 isa: IsaProfile = IsaProfile.RV64GC) -> Machine:
    """Parse (if needed), lay out and load in one go."""
    config = config or MachineConfig()
    unit = parse_unit(source) if isinstance(source, str) else source
    amap = layout(unit, isa, config.base_text, config.base_data)
    return load(unit, amap, config)
