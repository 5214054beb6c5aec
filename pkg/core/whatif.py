"""
What-if analysis of machine descriptions.

A Modification edits one aspect of a MachineSpec. Sweeps evaluate many
modifications against the unmodified machine and report each capacity in
percent of the original. The default protocol has three steps: single
characteristics (plus the register pair) at x0.5..x20, growth of existing
instruction families at x1.1..x2, and register scaling combined with a new,
wider instruction type of 8..64 mnemonics.
"""

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from joblib import Parallel, delayed

from core.errors import CapacityError, ContractViolation, InvalidSpecError, ModificationError
from core.machine import (
    INT_REG,
    MAX_OPERANDS,
    VEC_REG,
    InstructionClass,
    MachineSpec,
    MemoryLevel,
    parse_signature,
)
from core.solver import CapacityResult, CapacitySolver
from utils.helpers import format_factor, parse_factor, scale_count

logger = logging.getLogger(__name__)

STEP1_FACTORS = ("0.5", "2", "5", "10", "20")
STEP2_FACTORS = ("1.1", "1.25", "1.5", "2")
STEP3_REGISTER_FACTORS = ("2", "5", "10")
STEP3_ADD_COUNTS = (8, 16, 32, 64)


def _factor(value) -> Fraction:
    try:
        return parse_factor(value)
    except ValueError as e:
        raise ModificationError(str(e))


def _x(factor: Fraction) -> str:
    return f"×{format_factor(factor)}"


# ---------------------------------------------------------------------------
# Class selectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassSelector:
    """
    Operand-signature pattern such as 'r,r 1' or 'cmd x,x,x 1'.

    Tokens are matched one to one; '*' matches any operand kind. The trailing
    latency is optional.
    """

    tokens: Tuple[str, ...]
    latency: Optional[int] = None

    @classmethod
    def parse(cls, text: str) -> "ClassSelector":
        parts = text.replace('"', " ").split()
        if parts and parts[0] == "cmd":
            parts = parts[1:]
        if not parts or len(parts) > 2:
            raise ModificationError(f"bad class selector {text!r}; expected 'SIGNATURE [LATENCY]'")
        latency = None
        if len(parts) == 2:
            if not parts[1].isdigit() or int(parts[1]) < 1:
                raise ModificationError(f"bad latency in class selector {text!r}")
            latency = int(parts[1])
        if parts[0] == "-":
            return cls((), latency)
        tokens = tuple(tok.strip() for tok in parts[0].split(","))
        for tok in tokens:
            if tok != "*":
                try:
                    parse_signature(tok)
                except InvalidSpecError:
                    raise ModificationError(f"bad operand token {tok!r} in class selector {text!r}")
        return cls(tokens, latency)

    def matches(self, cls: InstructionClass) -> bool:
        if len(self.tokens) != cls.arity:
            return False
        if self.latency is not None and cls.base_latency != self.latency:
            return False
        return all(tok == "*" or tok == op.token for tok, op in zip(self.tokens, cls.operands))

    @property
    def label(self) -> str:
        sig = ",".join(self.tokens) or "-"
        return f'"cmd {sig}"' if self.latency is None else f'"cmd {sig} {self.latency}"'


# ---------------------------------------------------------------------------
# Modifications
# ---------------------------------------------------------------------------

class Modification:
    label = "modification"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        raise NotImplementedError


@dataclass(frozen=True)
class IdentityModification(Modification):
    @property
    def label(self) -> str:
        return "identity"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        return spec


@dataclass(frozen=True)
class ScaleIntRegs(Modification):
    factor: Fraction

    @property
    def label(self) -> str:
        return f"R_i {_x(self.factor)}"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        return replace(spec, int_regs=scale_count(spec.int_regs, _factor(self.factor)))


@dataclass(frozen=True)
class ScaleVecRegs(Modification):
    factor: Fraction

    @property
    def label(self) -> str:
        return f"R_v {_x(self.factor)}"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        return replace(spec, vec_regs=scale_count(spec.vec_regs, _factor(self.factor)))


@dataclass(frozen=True)
class ScaleBoth(Modification):
    factor: Fraction

    @property
    def label(self) -> str:
        return f"R_i & R_v {_x(self.factor)}"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        factor = _factor(self.factor)
        return replace(spec, int_regs=scale_count(spec.int_regs, factor),
                       vec_regs=scale_count(spec.vec_regs, factor))


def _level_index(spec: MachineSpec, name: str) -> int:
    try:
        level = spec.level(name)
    except KeyError:
        known = ", ".join(level.name for level in spec.memory_levels) or "none"
        raise ModificationError(f"unknown memory level {name!r} (machine has: {known})")
    return spec.memory_levels.index(level)


def _with_level(spec: MachineSpec, index: int, level: MemoryLevel) -> MachineSpec:
    levels = list(spec.memory_levels)
    levels[index] = level
    return replace(spec, memory_levels=tuple(levels))


@dataclass(frozen=True)
class ScaleMemLevelSize(Modification):
    """
    Resize one memory level.

    The new size is rounded to a whole number of words and kept strictly
    between the neighbouring levels so the hierarchy stays ordered.
    """

    level: str
    factor: Fraction

    @property
    def label(self) -> str:
        return f"{self.level} {_x(self.factor)}"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        factor = _factor(self.factor)
        i = _level_index(spec, self.level)
        levels = spec.memory_levels
        word = spec.word_bytes
        words = scale_count(levels[i].size_bytes // word, factor)
        low = levels[i - 1].size_bytes // word + 1 if i > 0 else 1
        high = levels[i + 1].size_bytes // word - 1 if i + 1 < len(levels) else None
        clamped = max(low, words if high is None else min(words, high))
        if clamped != words:
            logger.info("%s size %s clamped to %d bytes to keep the hierarchy ordered",
                        self.level, _x(factor), clamped * word)
        return _with_level(spec, i, replace(levels[i], size_bytes=clamped * word))


@dataclass(frozen=True)
class SetMemLatency(Modification):
    level: str
    latency_cc: int

    @property
    def label(self) -> str:
        return f"{self.level}_t = {self.latency_cc}"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        if not isinstance(self.latency_cc, int) or self.latency_cc < 1:
            raise ModificationError(f"latency must be a positive integer, got {self.latency_cc!r}")
        i = _level_index(spec, self.level)
        return _with_level(spec, i, replace(spec.memory_levels[i], latency_cc=self.latency_cc))


@dataclass(frozen=True)
class ScaleMemLatency(Modification):
    """Scale one level's latency, kept between the neighbouring levels' latencies"""

    level: str
    factor: Fraction

    @property
    def label(self) -> str:
        return f"{self.level}_t {_x(self.factor)}"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        factor = _factor(self.factor)
        i = _level_index(spec, self.level)
        levels = spec.memory_levels
        latency = scale_count(levels[i].latency_cc, factor)
        low = levels[i - 1].latency_cc if i > 0 else 1
        high = levels[i + 1].latency_cc if i + 1 < len(levels) else None
        clamped = max(low, latency if high is None else min(latency, high))
        if clamped != latency:
            logger.info("%s latency %s clamped to %d cycles", self.level, _x(factor), clamped)
        return _with_level(spec, i, replace(levels[i], latency_cc=clamped))


@dataclass(frozen=True)
class ScaleClassFamily(Modification):
    selector: ClassSelector
    factor: Fraction

    @property
    def label(self) -> str:
        return f"{self.selector.label} {_x(self.factor)}"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        factor = _factor(self.factor)
        if not any(self.selector.matches(cls) for cls in spec.classes):
            raise ModificationError(f"class selector {self.selector.label} matches no class of {spec.name}")
        classes = tuple(
            replace(cls, mnemonic_count=scale_count(cls.mnemonic_count, factor)) if self.selector.matches(cls) else cls
            for cls in spec.classes
        )
        return replace(spec, classes=classes)


@dataclass(frozen=True)
class AddClass(Modification):
    instruction_class: InstructionClass
    how_many_mnemonics: int

    @property
    def label(self) -> str:
        cls = self.instruction_class
        return f"+{self.how_many_mnemonics} {cls.name} {cls.signature} {cls.base_latency}"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        if not isinstance(self.how_many_mnemonics, int) or self.how_many_mnemonics < 1:
            raise ModificationError(f"how_many_mnemonics must be a positive integer, got {self.how_many_mnemonics!r}")
        try:
            added = replace(self.instruction_class, mnemonic_count=self.how_many_mnemonics)
            return replace(spec, classes=spec.classes + (added,))
        except InvalidSpecError as e:
            raise ModificationError(f"cannot add class: {e}")


@dataclass(frozen=True)
class Combined(Modification):
    """Several modifications applied left to right"""

    parts: Tuple[Modification, ...]

    @property
    def label(self) -> str:
        return " & ".join(part.label for part in self.parts) or "identity"

    def apply(self, spec: MachineSpec) -> MachineSpec:
        for part in self.parts:
            spec = part.apply(spec)
        return spec


def apply_modification(spec: MachineSpec, mod: Modification) -> MachineSpec:
    """A new machine with the edit applied; the original is never touched"""
    return mod.apply(spec)


# ---------------------------------------------------------------------------
# Sweep targets: a characteristic that a factor can be applied to
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Target:
    """
    A sweepable characteristic.

    kind is one of identity, int_regs, vec_regs, both, mem_size, mem_latency
    or family; mem_* targets name a level, family targets carry a selector.
    """

    kind: str
    level: Optional[str] = None
    selector: Optional[ClassSelector] = None

    KINDS = ("identity", "int_regs", "vec_regs", "both", "mem_size", "mem_latency", "family")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ModificationError(f"unknown sweep target {self.kind!r}")
        if self.kind in ("mem_size", "mem_latency") and not self.level:
            raise ModificationError(f"target {self.kind} needs a memory level name")
        if self.kind == "family" and self.selector is None:
            raise ModificationError("family target needs a class selector")

    @classmethod
    def parse(cls, text: str) -> "Target":
        """'int_regs', 'mem_size:L1', 'mem_latency:RAM', 'family:r,r 1'"""
        kind, _, arg = text.strip().partition(":")
        kind = kind.strip()
        arg = arg.strip()
        if kind in ("mem_size", "mem_latency"):
            return cls(kind, level=arg)
        if kind == "family":
            return cls(kind, selector=ClassSelector.parse(arg))
        if arg:
            raise ModificationError(f"target {kind!r} takes no argument")
        return cls(kind)

    @property
    def label(self) -> str:
        if self.kind == "int_regs":
            return "R_i"
        if self.kind == "vec_regs":
            return "R_v"
        if self.kind == "both":
            return "R_i & R_v"
        if self.kind == "mem_size":
            return self.level
        if self.kind == "mem_latency":
            return f"{self.level}_t"
        if self.kind == "family":
            return self.selector.label
        return "identity"

    def build(self, factor) -> Modification:
        factor = _factor(factor)
        if self.kind == "int_regs":
            return ScaleIntRegs(factor)
        if self.kind == "vec_regs":
            return ScaleVecRegs(factor)
        if self.kind == "both":
            return ScaleBoth(factor)
        if self.kind == "mem_size":
            return ScaleMemLevelSize(self.level, factor)
        if self.kind == "mem_latency":
            return ScaleMemLatency(self.level, factor)
        if self.kind == "family":
            return ScaleClassFamily(self.selector, factor)
        return IdentityModification()


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class SweepCell:
    column: str
    percent: Optional[float]
    error: Optional[str] = None


@dataclass
class SweepRow:
    label: str
    cells: List[SweepCell]

    @property
    def no_effect(self) -> bool:
        if not self.cells:
            return False
        return all(cell.percent is not None and round(cell.percent, 9) == 100.0 for cell in self.cells)

    @property
    def failed(self) -> bool:
        return any(cell.error is not None for cell in self.cells)

    def vector(self) -> Tuple[Optional[float], ...]:
        return tuple(None if cell.percent is None else round(cell.percent, 9) for cell in self.cells)


@dataclass
class SweepReport:
    """Percent-of-baseline capacities; one row per modification set, one column per factor/count"""

    title: str
    baseline_capacity: float
    columns: List[str]
    rows: List[SweepRow] = field(default_factory=list)

    def row(self, label: str) -> SweepRow:
        for row in self.rows:
            if row.label == label or label in row.label.split(", "):
                return row
        raise KeyError(label)

    def cell(self, row_label: str, column) -> Optional[float]:
        column = column if isinstance(column, str) else format_factor(column)
        for cell in self.row(row_label).cells:
            if cell.column == column:
                return cell.percent
        raise KeyError(column)

    @property
    def no_effect_rows(self) -> List[str]:
        return [row.label for row in self.rows if row.no_effect]

    def to_frame(self) -> pd.DataFrame:
        data = {row.label: [cell.percent for cell in row.cells] for row in self.rows}
        frame = pd.DataFrame.from_dict(data, orient="index", columns=self.columns)
        frame.index.name = self.title
        return frame


def merge_rows(rows: Sequence[SweepRow]) -> List[SweepRow]:
    """Rows with identical percent vectors collapse into one, labels joined"""
    merged: Dict[Tuple, SweepRow] = {}
    out: List[SweepRow] = []
    for row in rows:
        if row.failed:
            out.append(row)
            continue
        key = row.vector()
        if key in merged:
            merged[key].label = f"{merged[key].label}, {row.label}"
        else:
            copy = SweepRow(label=row.label, cells=list(row.cells))
            merged[key] = copy
            out.append(copy)
    return out


@dataclass
class RankedCandidate:
    modification: Modification
    percent: Optional[float]
    saturated: bool = False
    error: Optional[str] = None

    @property
    def label(self) -> str:
        return self.modification.label


@dataclass
class ProtocolResult:
    step1: SweepReport
    step2: Optional[SweepReport]
    step3: Optional[SweepReport]

    @property
    def reports(self) -> List[SweepReport]:
        return [report for report in (self.step1, self.step2, self.step3) if report is not None]


@dataclass
class SweepConfig:
    """What run_protocol sweeps; None fields are derived from the machine"""

    step1_factors: Sequence = STEP1_FACTORS
    step1_targets: Optional[List[Target]] = None
    pairs: Optional[List[Tuple[Target, Target]]] = None
    step2_factors: Sequence = STEP2_FACTORS
    step2_selectors: Optional[List[ClassSelector]] = None
    step3_register_factors: Sequence = STEP3_REGISTER_FACTORS
    step3_add_counts: Sequence[int] = STEP3_ADD_COUNTS
    step3_new_classes: Optional[List[InstructionClass]] = None
    steps: Tuple[int, ...] = (1, 2, 3)


def _cell_capacity(solver: CapacitySolver, spec: MachineSpec, mod: Modification):
    try:
        return solver.capacity(mod.apply(spec)).capacity_per_cycle, None
    except (CapacityError, ValueError) as e:
        return None, f"{type(e).__name__}: {e}"


class WhatIfEngine:
    def __init__(self, solver: Optional[CapacitySolver] = None, n_jobs: int = 1,
                 saturation_threshold: float = 100.05):
        self.solver = solver or CapacitySolver()
        self.n_jobs = n_jobs
        self.saturation_threshold = saturation_threshold

    @classmethod
    def from_settings(cls, settings) -> "WhatIfEngine":
        return cls(solver=CapacitySolver.from_settings(settings), n_jobs=settings.n_jobs,
                   saturation_threshold=settings.saturation_threshold)

    def baseline(self, spec: MachineSpec) -> float:
        return self.solver.capacity(spec).capacity_per_cycle

    def _evaluate(self, spec: MachineSpec, mods: Sequence[Modification]):
        if self.n_jobs == 1 or len(mods) < 2:
            return [_cell_capacity(self.solver, spec, mod) for mod in mods]
        return Parallel(n_jobs=self.n_jobs)(delayed(_cell_capacity)(self.solver, spec, mod) for mod in mods)

    def _grid(self, spec: MachineSpec, title: str, columns: List[str],
              row_specs: List[Tuple[str, List[Modification]]], merge: bool = True) -> SweepReport:
        base = self.baseline(spec)
        flat = [mod for _, mods in row_specs for mod in mods]
        results = self._evaluate(spec, flat)

        rows: List[SweepRow] = []
        k = 0
        for label, mods in row_specs:
            cells = []
            for column, _ in zip(columns, mods):
                value, error = results[k]
                k += 1
                if error is not None:
                    logger.warning("%s: cell %s/%s failed: %s", title, label, column, error)
                    cells.append(SweepCell(column, None, error))
                else:
                    cells.append(SweepCell(column, 100.0 * (value / base)))
            rows.append(SweepRow(label, cells))

        report = SweepReport(title=title, baseline_capacity=base, columns=columns,
                             rows=merge_rows(rows) if merge else rows)
        logger.info("%s: %d rows (%d without effect)", title, len(report.rows), len(report.no_effect_rows))
        return report

    def single_sweep(self, spec: MachineSpec, targets: Sequence[Target], factors: Sequence,
                     title: str = "single characteristics") -> SweepReport:
        if not factors:
            raise ContractViolation("a sweep needs at least one factor")
        factors = [_factor(f) for f in factors]
        columns = [format_factor(f) for f in factors]
        row_specs = [(target.label, [target.build(f) for f in factors]) for target in targets]
        return self._grid(spec, title, columns, row_specs)

    def pair_sweep(self, spec: MachineSpec, target_pair: Tuple[Target, Target], factors: Sequence,
                   title: str = "characteristic pair") -> SweepReport:
        return self.pair_sweeps(spec, [target_pair], factors, title)

    def pair_sweeps(self, spec: MachineSpec, pairs: Sequence[Tuple[Target, Target]], factors: Sequence,
                    title: str = "characteristic pairs") -> SweepReport:
        if not factors:
            raise ContractViolation("a sweep needs at least one factor")
        factors = [_factor(f) for f in factors]
        columns = [format_factor(f) for f in factors]
        row_specs = [
            (f"{a.label} & {b.label}", [Combined((a.build(f), b.build(f))) for f in factors])
            for a, b in pairs
        ]
        return self._grid(spec, title, columns, row_specs)

    def grow_instruction_set(self, spec: MachineSpec, family_selector, growth_factors: Sequence,
                             title: str = "instruction set growth") -> SweepReport:
        selectors = [family_selector] if isinstance(family_selector, (ClassSelector, str)) else list(family_selector)
        selectors = [ClassSelector.parse(s) if isinstance(s, str) else s for s in selectors]
        for selector in selectors:
            if not any(selector.matches(cls) for cls in spec.classes):
                raise ModificationError(f"class selector {selector.label} matches no class of {spec.name}")
        targets = [Target("family", selector=selector) for selector in selectors]
        return self.single_sweep(spec, targets, growth_factors, title=title)

    def combo_step3(self, spec: MachineSpec, register_factors: Sequence, new_class: InstructionClass,
                    add_counts: Sequence[int], register_target: Optional[Target] = None,
                    title: str = "registers with a new instruction type") -> SweepReport:
        if new_class.arity <= spec.max_arity:
            raise ContractViolation(
                f"new class arity {new_class.arity} must exceed the widest class present ({spec.max_arity})"
            )
        if not register_factors or not add_counts:
            raise ContractViolation("a combined sweep needs at least one register factor and one added count")
        if register_target is None:
            register_target = _register_target_for(new_class)
        factors = [_factor(f) for f in register_factors]
        columns = [str(count) for count in add_counts]
        row_specs = []
        for f in factors:
            mods: List[Modification] = []
            for count in add_counts:
                if count < 0:
                    raise ModificationError(f"added mnemonic count must be >= 0, got {count}")
                parts = [register_target.build(f)]
                if count:
                    parts.append(AddClass(new_class, count))
                mods.append(Combined(tuple(parts)))
            row_specs.append((f"{_register_token(register_target)} {_x(f)} {new_class.name}", mods))
        return self._grid(spec, title, columns, row_specs)

    def evolution_rank(self, spec: MachineSpec, candidates: Sequence[Modification]) -> List[RankedCandidate]:
        if not candidates:
            raise ContractViolation("evolution_rank needs at least one candidate")
        base = self.baseline(spec)
        results = self._evaluate(spec, list(candidates))
        ranked = []
        for mod, (value, error) in zip(candidates, results):
            if error is not None:
                logger.warning("candidate %s failed: %s", mod.label, error)
                ranked.append(RankedCandidate(mod, None, False, error))
                continue
            percent = 100.0 * (value / base)
            ranked.append(RankedCandidate(mod, percent, percent < self.saturation_threshold))
        # stable sort: ties keep input order, failures last
        return sorted(ranked, key=lambda c: (c.percent is None, -(c.percent or 0.0)))

    def run_protocol(self, spec: MachineSpec, config: Optional[SweepConfig] = None) -> ProtocolResult:
        config = config or SweepConfig()
        step1 = step2 = step3 = None

        if 1 in config.steps:
            targets = config.step1_targets if config.step1_targets is not None else default_step1_targets(spec)
            pairs = config.pairs if config.pairs is not None else [(Target("int_regs"), Target("vec_regs"))]
            step1 = self.single_sweep(spec, targets, config.step1_factors, title=f"{spec.name} step 1")
            if pairs:
                paired = self.pair_sweeps(spec, pairs, config.step1_factors)
                step1.rows = merge_rows(step1.rows + paired.rows)

        if 2 in config.steps:
            selectors = config.step2_selectors if config.step2_selectors is not None else default_step2_selectors(spec)
            if selectors:
                step2 = self.grow_instruction_set(spec, selectors, config.step2_factors,
                                                  title=f"{spec.name} step 2")
            else:
                logger.warning("%s has no fast instruction families; step 2 skipped", spec.name)

        if 3 in config.steps:
            new_classes = config.step3_new_classes
            if new_classes is None:
                new_classes = default_step3_classes(spec)
            if new_classes:
                reports = [
                    self.combo_step3(spec, config.step3_register_factors, cls, config.step3_add_counts)
                    for cls in new_classes
                ]
                step3 = reports[0]
                step3.title = f"{spec.name} step 3"
                for extra in reports[1:]:
                    step3.rows.extend(extra.rows)
                step3.rows = merge_rows(step3.rows)
            else:
                logger.warning("%s already has %d-operand classes; step 3 skipped", spec.name, MAX_OPERANDS)

        return ProtocolResult(step1, step2, step3)


def _register_target_for(cls: InstructionClass) -> Target:
    kinds = {op.kind for op in cls.operands if op.kind in ("r", "x")}
    if kinds == {"r"}:
        return Target("int_regs")
    if kinds == {"x"}:
        return Target("vec_regs")
    return Target("both")


def _register_token(target: Target) -> str:
    return {"int_regs": "r", "vec_regs": "x", "both": "r,x"}.get(target.kind, target.label)


def default_step1_targets(spec: MachineSpec) -> List[Target]:
    """identity, every level size, every level latency, then R_i and R_v"""
    targets = [Target("identity")]
    targets += [Target("mem_size", level=level.name) for level in spec.memory_levels]
    targets += [Target("mem_latency", level=level.name) for level in spec.memory_levels]
    targets += [Target("int_regs"), Target("vec_regs")]
    return targets


def default_step2_selectors(spec: MachineSpec) -> List[ClassSelector]:
    """One selector per operand signature that has fast (latency 1, register-only) classes"""
    selectors: List[ClassSelector] = []
    for cls in spec.classes:
        if not cls.is_fast or not cls.operands:
            continue
        selector = ClassSelector(tuple(op.token for op in cls.operands), 1)
        if selector not in selectors:
            selectors.append(selector)
    return selectors


def new_class_name(arity: int, vector: bool) -> str:
    """cmd1/cmd2 for three operands, cmd3/cmd4 for four"""
    return f"cmd{2 * (arity - 3) + (2 if vector else 1)}"


def default_step3_classes(spec: MachineSpec) -> List[InstructionClass]:
    """One integer and one vector fast class, one operand wider than anything present"""
    arity = max(spec.max_arity + 1, 3)
    if arity > MAX_OPERANDS:
        return []
    return [
        InstructionClass(1, (INT_REG,) * arity, 1, name=new_class_name(arity, vector=False)),
        InstructionClass(1, (VEC_REG,) * arity, 1, name=new_class_name(arity, vector=True)),
    ]


def default_candidates(spec: MachineSpec) -> List[Modification]:
    """
    Evolution steps worth ranking for a successor: register growth, growth of
    the existing fast families, and a new wider instruction type combined with
    ten times the registers.
    """
    candidates: List[Modification] = [IdentityModification()]
    for factor in ("2", "5", "10"):
        f = Fraction(factor)
        candidates += [ScaleIntRegs(f), ScaleVecRegs(f), ScaleBoth(f)]
    candidates += [ScaleClassFamily(selector, Fraction(2)) for selector in default_step2_selectors(spec)]
    for cls in default_step3_classes(spec):
        for count in (8, 64):
            candidates.append(Combined((_register_target_for(cls).build(10), AddClass(cls, count))))
    return candidates


def capacity_ratio(a: Union[MachineSpec, CapacityResult, float], b: Union[MachineSpec, CapacityResult, float],
                   solver: Optional[CapacitySolver] = None) -> float:
    """100 * C(b) / C(a)"""
    solver = solver or CapacitySolver()

    def _value(x) -> float:
        if isinstance(x, MachineSpec):
            return solver.capacity(x).capacity_per_cycle
        if isinstance(x, CapacityResult):
            return x.capacity_per_cycle
        return float(x)

    base = _value(a)
    if not base > 0:
        raise ContractViolation("baseline capacity must be positive")
    return 100.0 * (_value(b) / base)
