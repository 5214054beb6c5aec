"""
Text formats read and written by the command line.

Machine files are sectioned:

    [machine]
    name = Pentium M toy
    int_regs = 8
    vec_regs = 8
    pipeline_width = 3
    [memory]
    # NAME SIZE_BYTES LATENCY_CC
    L1 32768 3
    [instructions]
    # COUNT NAME OPERANDS LATENCY
    53 cmd r 1
    91 cmd r,r 1

Spectrum files hold one "LATENCY COUNT" pair per line. Sweep configs are
"key = value" lines, candidates files one modification per line. '#' starts
a comment everywhere.
"""

import io
import logging
import math
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from core.errors import CapacityError, InvalidSpecError, ModificationError, ParseError
from core.machine import InstructionClass, LatencySpectrum, MachineSpec, MemoryLevel, parse_signature
from core.reports import ComparisonRow
from core.whatif import (
    AddClass,
    ClassSelector,
    Combined,
    IdentityModification,
    Modification,
    ScaleBoth,
    ScaleClassFamily,
    ScaleIntRegs,
    ScaleMemLatency,
    ScaleMemLevelSize,
    ScaleVecRegs,
    SetMemLatency,
    SweepConfig,
    Target,
)
from utils.helpers import format_factor, parse_factor, strip_comment

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MACHINE_KEYS = ("name", "int_regs", "vec_regs", "pipeline_width", "word_bytes", "cores", "clock_mhz")
SECTIONS = ("machine", "memory", "instructions")


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = strip_comment(raw)
        if line:
            yield lineno, line


def _int(token: str, what: str, filename: str, lineno: int, minimum: int = 1) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"{what} must be a decimal integer, got {token!r}", filename, lineno)
    if value < minimum:
        raise ParseError(f"{what} must be >= {minimum}, got {value}", filename, lineno)
    return value


# ---------------------------------------------------------------------------
# Machine files
# ---------------------------------------------------------------------------

def parse_machine(text: str, filename: Optional[str] = None, default_word_bytes: int = 8) -> MachineSpec:
    filename = filename or "<machine>"
    section = None
    header_line = 1
    values: Dict[str, Tuple[str, int]] = {}
    levels: List[Tuple[MemoryLevel, int]] = []
    classes: List[InstructionClass] = []

    for lineno, line in _lines(text):
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header {line!r}", filename, lineno)
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ParseError(f"unknown section [{section}]; expected one of {', '.join(SECTIONS)}",
                                 filename, lineno)
            if section == "machine":
                header_line = lineno
            continue

        if section is None:
            raise ParseError("content before the first section header", filename, lineno)

        if section == "machine":
            key, sep, value = line.partition("=")
            key = key.strip().lower()
            if not sep:
                raise ParseError(f"expected 'key = value', got {line!r}", filename, lineno)
            if key not in MACHINE_KEYS:
                raise ParseError(f"unknown key {key!r} in [machine]", filename, lineno)
            if key in values:
                raise ParseError(f"duplicate key {key!r} (first on line {values[key][1]})", filename, lineno)
            values[key] = (value.strip(), lineno)

        elif section == "memory":
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("memory lines are 'NAME SIZE_BYTES LATENCY_CC'", filename, lineno)
            name = parts[0]
            size = _int(parts[1], "memory size", filename, lineno)
            latency = _int(parts[2], "memory latency", filename, lineno)
            for level, first in levels:
                if level.name == name:
                    raise ParseError(f"duplicate memory level {name!r} (first on line {first})", filename, lineno)
            if levels:
                previous = levels[-1][0]
                if size <= previous.size_bytes:
                    raise ParseError(f"memory levels must be listed in increasing size order; "
                                     f"{name} is not larger than {previous.name}", filename, lineno)
                if latency < previous.latency_cc:
                    raise ParseError(f"latency of {name} is below {previous.name}", filename, lineno)
            levels.append((MemoryLevel(name, size, latency), lineno))

        else:
            parts = line.split()
            if len(parts) != 4:
                raise ParseError("instruction lines are 'COUNT NAME OPERANDS LATENCY'", filename, lineno)
            count = _int(parts[0], "mnemonic count", filename, lineno)
            latency = _int(parts[3], "latency", filename, lineno)
            try:
                classes.append(InstructionClass(count, parse_signature(parts[2]), latency, name=parts[1]))
            except InvalidSpecError as e:
                raise ParseError(str(e), filename, lineno)

    def _get_int(key: str, default: Optional[int]) -> int:
        if key not in values:
            if default is None:
                raise ParseError(f"[machine] is missing required key {key!r}", filename, header_line)
            return default
        raw, lineno = values[key]
        return _int(raw, key, filename, lineno)

    int_regs = _get_int("int_regs", None)
    vec_regs = _get_int("vec_regs", None)
    word_bytes = _get_int("word_bytes", default_word_bytes)
    clock_hz = None
    if "clock_mhz" in values:
        raw, lineno = values["clock_mhz"]
        try:
            mhz = Decimal(raw)
        except InvalidOperation:
            raise ParseError(f"clock_mhz must be a number, got {raw!r}", filename, lineno)
        if not mhz.is_finite():
            raise ParseError(f"clock_mhz must be finite, got {raw!r}", filename, lineno)
        if not mhz > 0:
            raise ParseError("clock_mhz must be positive", filename, lineno)
        clock_hz = float(mhz * 1_000_000)
        if not math.isfinite(clock_hz):
            raise ParseError(f"clock_mhz {raw} is out of range", filename, lineno)

    for level, lineno in levels:
        if level.size_bytes % word_bytes:
            raise ParseError(f"{level.name} size is not a multiple of word_bytes {word_bytes}", filename, lineno)
    if not classes:
        raise ParseError("no instruction classes", filename, header_line)

    name = values["name"][0] if "name" in values else Path(filename).stem
    try:
        spec = MachineSpec(
            name=name,
            int_regs=int_regs,
            vec_regs=vec_regs,
            memory_levels=tuple(level for level, _ in levels),
            classes=tuple(classes),
            word_bytes=word_bytes,
            pipeline_width=_get_int("pipeline_width", 1),
            cores=_get_int("cores", 1),
            clock_hz=clock_hz,
        )
    except InvalidSpecError as e:
        raise ParseError(str(e), filename, header_line)
    logger.debug("%s: parsed %s with %d levels and %d classes", filename, spec.name,
                 len(spec.memory_levels), len(spec.classes))
    return spec


def render_machine(spec: MachineSpec) -> str:
    lines = [
        "[machine]",
        f"name = {spec.name}",
        f"int_regs = {spec.int_regs}",
        f"vec_regs = {spec.vec_regs}",
        f"pipeline_width = {spec.pipeline_width}",
        f"word_bytes = {spec.word_bytes}",
        f"cores = {spec.cores}",
    ]
    if spec.clock_hz is not None:
        mhz = Decimal(repr(spec.clock_hz)) / 1_000_000
        lines.append(f"clock_mhz = {mhz.normalize():f}")
    lines += ["", "[memory]"]
    lines += [f"{level.name} {level.size_bytes} {level.latency_cc}" for level in spec.memory_levels]
    lines += ["", "[instructions]"]
    lines += [str(cls) for cls in spec.classes]
    return "\n".join(lines) + "\n"


def is_machine_text(text: str) -> bool:
    return any(line.lower().replace(" ", "") == "[machine]" for _, line in _lines(text))


# ---------------------------------------------------------------------------
# Spectrum files
# ---------------------------------------------------------------------------

def parse_spectrum(text: str, filename: Optional[str] = None) -> LatencySpectrum:
    filename = filename or "<spectrum>"
    terms: Dict[int, int] = {}
    first_seen: Dict[int, int] = {}
    for lineno, line in _lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("spectrum lines are 'LATENCY COUNT'", filename, lineno)
        latency = _int(parts[0], "latency", filename, lineno)
        count = _int(parts[1], "count", filename, lineno)
        if latency in terms:
            raise ParseError(f"duplicate latency {latency} (first on line {first_seen[latency]})", filename, lineno)
        terms[latency] = count
        first_seen[latency] = lineno
    return LatencySpectrum(terms)


def render_spectrum(spectrum: LatencySpectrum) -> str:
    return "".join(f"{t} {n}\n" for t, n in spectrum.items())


# ---------------------------------------------------------------------------
# Modifications, candidates files and sweep configs
# ---------------------------------------------------------------------------

def _factor_token(token: str) -> Fraction:
    try:
        return parse_factor(token)
    except ValueError as e:
        raise ModificationError(str(e))


def _latency_token(token: str) -> int:
    if not token.isdigit() or int(token) < 1:
        raise ModificationError(f"latency must be a positive integer, got {token!r}")
    return int(token)


def _parse_single(text: str) -> Modification:
    parts = text.split()
    if not parts:
        raise ModificationError("empty modification")
    kind, args = parts[0].lower(), parts[1:]

    if kind == "identity" and not args:
        return IdentityModification()
    if kind in ("int_regs", "vec_regs", "both") and len(args) == 1:
        cls = {"int_regs": ScaleIntRegs, "vec_regs": ScaleVecRegs, "both": ScaleBoth}[kind]
        return cls(_factor_token(args[0]))
    if kind == "mem_size" and len(args) == 2:
        return ScaleMemLevelSize(args[0], _factor_token(args[1]))
    if kind == "mem_latency" and len(args) == 2:
        return ScaleMemLatency(args[0], _factor_token(args[1]))
    if kind == "set_latency" and len(args) == 2:
        return SetMemLatency(args[0], _latency_token(args[1]))
    if kind == "family" and 2 <= len(args) <= 4:
        return ScaleClassFamily(ClassSelector.parse(" ".join(args[:-1])), _factor_token(args[-1]))
    if kind == "add" and len(args) == 4:
        if not args[0].isdigit():
            raise ModificationError(f"mnemonic count must be a positive integer, got {args[0]!r}")
        try:
            new_class = InstructionClass(1, parse_signature(args[2]), _latency_token(args[3]), name=args[1])
        except InvalidSpecError as e:
            raise ModificationError(str(e))
        return AddClass(new_class, int(args[0]))
    raise ModificationError(f"cannot read modification {text!r}")


def parse_modification(text: str) -> Modification:
    """
    One modification, or several joined by '&':

        int_regs x2 | vec_regs x10 | both x5 | identity
        mem_size L2 x2 | mem_latency RAM x0.5 | set_latency L2 12
        family r,r 1 x1.5
        add 8 cmd2 x,x,x 1
    """
    parts = [part.strip() for part in text.split("&")]
    mods = [_parse_single(part) for part in parts]
    return mods[0] if len(mods) == 1 else Combined(tuple(mods))


def parse_candidates(text: str, filename: Optional[str] = None) -> List[Modification]:
    filename = filename or "<candidates>"
    candidates = []
    for lineno, line in _lines(text):
        try:
            candidates.append(parse_modification(line))
        except CapacityError as e:
            raise ParseError(str(e), filename, lineno)
    if not candidates:
        raise ParseError("no candidate modifications", filename)
    return candidates


_LIST_KEYS = ("steps", "step1_factors", "step2_factors", "step3_register_factors", "step3_add_counts")
_REPEATED_KEYS = ("target", "pair", "family", "new_class")


def _factor_list(value: str) -> List[str]:
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ModificationError("empty factor list")
    return [format_factor(_factor_token(item)) for item in items]


def parse_sweep_config(text: str, filename: Optional[str] = None) -> SweepConfig:
    """
    Declarative sweep description. Every key is optional:

        steps = 1, 2, 3
        step1_factors = 0.5, 2, 5, 10, 20
        target = mem_size:L1            (repeatable; replaces the default targets)
        pair = int_regs + vec_regs      (repeatable)
        step2_factors = 1.1, 1.25, 1.5, 2
        family = r,r 1                  (repeatable)
        step3_register_factors = 2, 5, 10
        step3_add_counts = 8, 16, 32, 64
        new_class = cmd1 r,r,r 1        (repeatable)

    Listing targets without pairs sweeps only those targets.
    """
    filename = filename or "<sweep config>"
    seen: Dict[str, int] = {}
    config = SweepConfig()
    targets: List[Target] = []
    pairs: List[Tuple[Target, Target]] = []
    selectors: List[ClassSelector] = []
    new_classes: List[InstructionClass] = []

    for lineno, line in _lines(text):
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not sep or not value:
            raise ParseError(f"expected 'key = value', got {line!r}", filename, lineno)
        if key not in _LIST_KEYS + _REPEATED_KEYS:
            raise ParseError(f"unknown key {key!r}", filename, lineno)
        if key in _LIST_KEYS:
            if key in seen:
                raise ParseError(f"duplicate key {key!r} (first on line {seen[key]})", filename, lineno)
            seen[key] = lineno

        try:
            if key == "steps":
                steps = tuple(_int(item.strip(), "step", filename, lineno) for item in value.split(","))
                if any(step not in (1, 2, 3) for step in steps):
                    raise ParseError("steps are 1, 2 and 3", filename, lineno)
                config.steps = steps
            elif key == "step3_add_counts":
                config.step3_add_counts = [_int(item.strip(), "added count", filename, lineno, minimum=0)
                                           for item in value.split(",")]
            elif key in _LIST_KEYS:
                setattr(config, key, _factor_list(value))
            elif key == "target":
                targets.append(Target.parse(value))
            elif key == "pair":
                a, plus, b = value.partition("+")
                if not plus:
                    raise ModificationError("pairs are written 'TARGET + TARGET'")
                pairs.append((Target.parse(a), Target.parse(b)))
            elif key == "family":
                selectors.append(ClassSelector.parse(value))
            else:
                parts = value.split()
                if len(parts) != 3:
                    raise ModificationError("new_class is 'NAME OPERANDS LATENCY'")
                new_classes.append(InstructionClass(1, parse_signature(parts[1]), _latency_token(parts[2]),
                                                    name=parts[0]))
        except ParseError:
            raise
        except CapacityError as e:
            raise ParseError(str(e), filename, lineno)

    if targets:
        config.step1_targets = targets
        config.pairs = pairs
    elif pairs:
        config.pairs = pairs
    if selectors:
        config.step2_selectors = selectors
    if new_classes:
        config.step3_new_classes = new_classes
    return config


# ---------------------------------------------------------------------------
# Benchmark tables
# ---------------------------------------------------------------------------

BENCHMARK_COLUMNS = ("name", "capacity_mbps")


def parse_benchmarks(frame: pd.DataFrame, filename: str = "<benchmarks>",
                     line_numbers: Optional[List[int]] = None) -> List[ComparisonRow]:
    """
    Rows of a name/passmark/capacity_mbps table; passmark may be blank or absent.

    line_numbers gives the physical line of the header and of every record;
    without it the table is assumed to start on line 1 with no comment lines.
    """
    if line_numbers is None:
        line_numbers = list(range(1, len(frame) + 2))
    missing = [col for col in BENCHMARK_COLUMNS if col not in frame.columns]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)}", filename, line_numbers[0])
    rows = []
    for i, record in enumerate(frame.to_dict("records")):
        lineno = line_numbers[i + 1] if i + 1 < len(line_numbers) else None
        score = record.get("passmark")
        score = None if score is None or pd.isna(score) else float(score)
        try:
            rows.append(ComparisonRow(str(record["name"]), float(record["capacity_mbps"]), score))
        except (InvalidSpecError, TypeError, ValueError) as e:
            raise ParseError(str(e), filename, lineno)
    if not rows:
        raise ParseError("no benchmark rows", filename)
    return rows


def _record_lines(text: str) -> List[int]:
    """Physical line numbers of the lines read_csv(comment='#') keeps"""
    return [lineno for lineno, line in enumerate(text.splitlines(), 1) if strip_comment(line)]


def load_benchmarks(path: PathLike) -> List[ComparisonRow]:
    text = read_text(path)
    try:
        frame = pd.read_csv(io.StringIO(text), comment="#", skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(str(e).strip(), str(path))
    return parse_benchmarks(frame, str(path), _record_lines(text))


def load_processors(path: PathLike) -> pd.DataFrame:
    """Published per-processor summary: hierarchy, registers, width and capacity"""
    return pd.read_csv(io.StringIO(read_text(path)), comment="#", skipinitialspace=True).set_index("name")


def read_text(path: PathLike) -> str:
    """File contents as UTF-8; undecodable bytes are a ParseError, not a traceback"""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data[:e.start].count(b"\n") + 1
        raise ParseError(f"not valid UTF-8 text ({e.reason} at byte {e.start})", str(path), line)
    return text.replace("\r\n", "\n").replace("\r", "\n")


def load_machine(path: PathLike, default_word_bytes: int = 8) -> MachineSpec:
    return parse_machine(read_text(path), str(path), default_word_bytes)


def load_spectrum(path: PathLike) -> LatencySpectrum:
    return parse_spectrum(read_text(path), str(path))


def load_sweep_config(path: PathLike) -> SweepConfig:
    return parse_sweep_config(read_text(path), str(path))


def load_candidates(path: PathLike) -> List[Modification]:
    return parse_candidates(read_text(path), str(path))
