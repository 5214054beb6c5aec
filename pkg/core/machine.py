"""
Machine descriptions and their expansion into a latency spectrum.

A machine is described by its registers, memory hierarchy and instruction
classes. Every distinct (mnemonic, operand values) pair is a separate symbol of
the instruction alphabet, so a class expands into a count of instances per
execution time. The grouped counts are the coefficients of the characteristic
equation solved in core.solver.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from core.errors import ContractViolation, InvalidSpecError, UnsupportedClassError

logger = logging.getLogger(__name__)

MAX_OPERANDS = 4
MAX_IMM_BITS = 64


@dataclass(frozen=True)
class OperandKind:
    """One operand slot: integer register, vector register, memory cell or immediate"""

    kind: str
    width_bits: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("r", "x", "m", "i"):
            raise InvalidSpecError(f"unknown operand kind {self.kind!r}")
        if self.kind == "i":
            if self.width_bits is None or not 1 <= self.width_bits <= MAX_IMM_BITS:
                raise InvalidSpecError(
                    f"immediate width must be in [1, {MAX_IMM_BITS}], got {self.width_bits}"
                )
        elif self.width_bits is not None:
            raise InvalidSpecError(f"operand kind {self.kind!r} takes no width")

    @property
    def token(self) -> str:
        """Token used by the machine file grammar (r, x, m, iN)"""
        if self.kind == "i":
            return f"i{self.width_bits}"
        return self.kind

    @property
    def is_memory(self) -> bool:
        return self.kind == "m"

    @classmethod
    def from_token(cls, token: str) -> "OperandKind":
        token = token.strip()
        if token.startswith("i") and len(token) > 1:
            if not token[1:].isdigit():
                raise InvalidSpecError(f"bad immediate token {token!r}")
            return cls("i", int(token[1:]))
        if token in ("r", "x", "m"):
            return cls(token)
        raise InvalidSpecError(f"unknown operand token {token!r}")

    def __str__(self) -> str:
        return self.token


INT_REG = OperandKind("r")
VEC_REG = OperandKind("x")
MEM = OperandKind("m")


def imm(width_bits: int) -> OperandKind:
    return OperandKind("i", width_bits)


def parse_signature(signature: str) -> Tuple[OperandKind, ...]:
    """'r,r,m' -> (INT_REG, INT_REG, MEM); '' or '-' -> ()"""
    signature = signature.strip()
    if signature in ("", "-"):
        return ()
    return tuple(OperandKind.from_token(tok) for tok in signature.split(","))


def format_signature(operands: Iterable[OperandKind]) -> str:
    return ",".join(op.token for op in operands) or "-"


@dataclass(frozen=True)
class InstructionClass:
    mnemonic_count: int
    operands: Tuple[OperandKind, ...]
    base_latency: int
    name: str = "cmd"

    def __post_init__(self):
        object.__setattr__(self, "operands", tuple(self.operands))
        if not isinstance(self.mnemonic_count, int) or self.mnemonic_count < 1:
            raise InvalidSpecError(f"mnemonic_count must be a positive integer, got {self.mnemonic_count!r}")
        if not isinstance(self.base_latency, int) or self.base_latency < 1:
            raise InvalidSpecError(f"base_latency must be a positive integer, got {self.base_latency!r}")
        if len(self.operands) > MAX_OPERANDS:
            raise InvalidSpecError(f"at most {MAX_OPERANDS} operands per class, got {len(self.operands)}")
        if self.memory_operands > 1:
            raise UnsupportedClassError(
                f"class '{self.name} {self.signature}' has {self.memory_operands} memory operands; at most one is supported"
            )

    @property
    def memory_operands(self) -> int:
        return sum(1 for op in self.operands if op.is_memory)

    @property
    def has_memory(self) -> bool:
        return self.memory_operands > 0

    @property
    def arity(self) -> int:
        return len(self.operands)

    @property
    def signature(self) -> str:
        return format_signature(self.operands)

    @property
    def is_fast(self) -> bool:
        """Latency 1 and no memory operand"""
        return self.base_latency == 1 and not self.has_memory

    def __str__(self) -> str:
        return f"{self.mnemonic_count} {self.name} {self.signature} {self.base_latency}"


@dataclass(frozen=True)
class MemoryLevel:
    name: str
    size_bytes: int
    latency_cc: int

    def __post_init__(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise InvalidSpecError(f"memory level name must be a single non-empty word, got {self.name!r}")
        if not isinstance(self.size_bytes, int) or self.size_bytes < 1:
            raise InvalidSpecError(f"{self.name}: size_bytes must be a positive integer")
        if not isinstance(self.latency_cc, int) or self.latency_cc < 1:
            raise InvalidSpecError(f"{self.name}: latency_cc must be a positive integer")


@dataclass(frozen=True)
class MachineSpec:
    name: str
    int_regs: int
    vec_regs: int
    memory_levels: Tuple[MemoryLevel, ...]
    classes: Tuple[InstructionClass, ...]
    word_bytes: int = 8
    pipeline_width: int = 1
    cores: int = 1
    clock_hz: Optional[float] = None

    def __post_init__(self):
        levels = tuple(sorted(self.memory_levels, key=lambda level: level.size_bytes))
        object.__setattr__(self, "memory_levels", levels)
        object.__setattr__(self, "classes", tuple(self.classes))

        for label, value in (
            ("int_regs", self.int_regs),
            ("vec_regs", self.vec_regs),
            ("word_bytes", self.word_bytes),
            ("pipeline_width", self.pipeline_width),
            ("cores", self.cores),
        ):
            if not isinstance(value, int) or value < 1:
                raise InvalidSpecError(f"{label} must be a positive integer, got {value!r}")
        if self.clock_hz is not None and not self.clock_hz > 0:
            raise InvalidSpecError(f"clock_hz must be positive, got {self.clock_hz!r}")
        if not self.classes:
            raise InvalidSpecError("a machine needs at least one instruction class")

        names = [level.name for level in levels]
        if len(set(names)) != len(names):
            raise InvalidSpecError(f"duplicate memory level names in {names}")
        for lower, upper in zip(levels, levels[1:]):
            if upper.size_bytes <= lower.size_bytes:
                raise InvalidSpecError(f"memory levels {lower.name} and {upper.name} have the same size")
            if upper.latency_cc < lower.latency_cc:
                raise InvalidSpecError(
                    f"latency of {upper.name} ({upper.latency_cc}) is below {lower.name} ({lower.latency_cc})"
                )
        for level in levels:
            if level.size_bytes % self.word_bytes:
                raise InvalidSpecError(f"{level.name} size {level.size_bytes} is not a multiple of word_bytes {self.word_bytes}")
        if not levels and any(cls.has_memory for cls in self.classes):
            raise InvalidSpecError("classes with a memory operand need at least one memory level")

    def level(self, name: str) -> MemoryLevel:
        for level in self.memory_levels:
            if level.name == name:
                return level
        raise KeyError(name)

    @property
    def max_arity(self) -> int:
        return max(cls.arity for cls in self.classes)


class LatencySpectrum(Mapping):
    """
    Exact map latency (clock cycles) -> number of distinct instructions.

    Counts are Python integers so they never overflow; zero counts are dropped.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Union[Mapping[int, int], Iterable[Tuple[int, int]], None] = None):
        merged: Counter = Counter()
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for latency, count in items:
            if isinstance(latency, bool) or not isinstance(latency, int) or latency < 1:
                raise InvalidSpecError(f"latency must be a positive integer, got {latency!r}")
            if isinstance(count, bool) or not isinstance(count, int) or count < 0:
                raise InvalidSpecError(f"count at latency {latency} must be a non-negative integer, got {count!r}")
            merged[latency] += count
        self._terms: Dict[int, int] = {t: merged[t] for t in sorted(merged) if merged[t] > 0}

    def __getitem__(self, latency: int) -> int:
        return self._terms[latency]

    def __iter__(self) -> Iterator[int]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, LatencySpectrum):
            return self._terms == other._terms
        if isinstance(other, Mapping):
            return self._terms == dict(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __repr__(self) -> str:
        return f"LatencySpectrum({self._terms!r})"

    @property
    def total(self) -> int:
        return sum(self._terms.values())

    @property
    def gcd(self) -> int:
        """gcd of the occupied latencies (0 for an empty spectrum)"""
        return math.gcd(*self._terms) if self._terms else 0

    @property
    def is_solvable(self) -> bool:
        return self.total >= 2

    def merged(self, other: "LatencySpectrum") -> "LatencySpectrum":
        return LatencySpectrum(list(self.items()) + list(other.items()))

    def dilated(self, factor: int) -> "LatencySpectrum":
        """Every latency multiplied by a positive integer factor"""
        if not isinstance(factor, int) or factor < 1:
            raise ContractViolation(f"dilation factor must be a positive integer, got {factor!r}")
        return LatencySpectrum({t * factor: n for t, n in self.items()})

    def dominates(self, other: "LatencySpectrum") -> bool:
        """Count >= other's at every latency, strictly greater somewhere"""
        latencies = set(self) | set(other)
        ge = all(self.get(t, 0) >= other.get(t, 0) for t in latencies)
        return ge and any(self.get(t, 0) > other.get(t, 0) for t in latencies)


def operand_domain_size(kind: OperandKind, spec: MachineSpec) -> int:
    """Number of distinct values a non-memory operand slot can take"""
    if kind.kind == "r":
        return spec.int_regs
    if kind.kind == "x":
        return spec.vec_regs
    if kind.kind == "i":
        return 2 ** kind.width_bits
    raise ContractViolation("memory operands are expanded per level by class_instances")


def class_instances(cls: InstructionClass, spec: MachineSpec) -> List[Tuple[int, int]]:
    """
    Expand one instruction class into (latency, count) pairs.

    A class without memory operands yields a single pair. A class with one
    memory operand yields one pair per memory level; each level contributes only
    the cells beyond the previous level and adds its access latency.
    """
    if cls.memory_operands > 1:
        raise UnsupportedClassError(f"class '{cls}' has more than one memory operand")

    register_values = cls.mnemonic_count
    for op in cls.operands:
        if not op.is_memory:
            register_values *= operand_domain_size(op, spec)

    if not cls.has_memory:
        return [(cls.base_latency, register_values)]

    pairs = []
    previous_size = 0
    for level in spec.memory_levels:
        cells = (level.size_bytes - previous_size) // spec.word_bytes
        previous_size = level.size_bytes
        pairs.append((cls.base_latency + level.latency_cc, register_values * cells))
    return pairs


def enumerate_spectrum(spec: MachineSpec) -> LatencySpectrum:
    """Sum of class_instances over all classes, equal latencies merged exactly"""
    pairs: List[Tuple[int, int]] = []
    for cls in spec.classes:
        pairs.extend(class_instances(cls, spec))
    spectrum = LatencySpectrum(pairs)
    logger.debug("%s: %d classes -> %d latency terms, %d instructions",
                 spec.name, len(spec.classes), len(spectrum), spectrum.total)
    return spectrum
