"""Computer capacity command line.

Examples:
  capacity solve data/haswell.spectrum --width 4
  capacity sweep data/pentium_m_toy.machine --format csv
  capacity oracle data/fib.spectrum --t-max 200
  capacity compare data/passmark.csv --plot plot.csv
  capacity evolve data/pentium_m_toy.machine data/successor.candidates
"""

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from app_settings import Settings
from core.errors import CapacityError
from core.formats import (
    is_machine_text,
    load_benchmarks,
    load_candidates,
    load_sweep_config,
    parse_machine,
    parse_spectrum,
    read_text,
)
from core.oracle import oracle_rate
from core.reports import ReportGenerator, normalize
from core.solver import CapacitySolver
from core.whatif import SweepConfig, WhatIfEngine, default_candidates
from utils.helpers import format_percentage

logger = logging.getLogger("capacity")


def _setup_logging(settings: Settings, verbosity: int):
    level = getattr(logging, settings.log_level)
    if verbosity == 1:
        level = min(level, logging.INFO)
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, force=True,
                        format="%(levelname)s %(name)s: %(message)s")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"must be a finite positive number, got {text}")
    return value


def _write(text: str):
    sys.stdout.write(text)


def cmd_solve(args, settings: Settings) -> int:
    text = read_text(args.file)
    solver = CapacitySolver.from_settings(settings)
    clock_hz = None if args.clock_mhz is None else args.clock_mhz * 1e6

    if is_machine_text(text):
        spec = parse_machine(text, args.file, settings.word_bytes)
        spec = replace(
            spec,
            pipeline_width=args.width or spec.pipeline_width,
            cores=args.cores or spec.cores,
            clock_hz=clock_hz if clock_hz is not None else spec.clock_hz,
        )
        result = solver.capacity(spec)
    else:
        spectrum = parse_spectrum(text, args.file)
        result = solver.capacity_from_spectrum(spectrum, args.width or 1, args.cores or 1, clock_hz,
                                               name=Path(args.file).stem)

    _write(ReportGenerator.from_settings(settings).render_table(result, args.format))
    return 0


def cmd_sweep(args, settings: Settings) -> int:
    spec = parse_machine(read_text(args.machine), args.machine, settings.word_bytes)
    config = load_sweep_config(args.config) if args.config else SweepConfig()
    engine = WhatIfEngine.from_settings(settings)
    reports = engine.run_protocol(spec, config).reports

    generator = ReportGenerator.from_settings(settings)
    _write("\n".join(generator.render_table(report, args.format) for report in reports))
    if args.xlsx:
        generator.export_excel(reports, args.xlsx)
    return 0


def cmd_oracle(args, settings: Settings) -> int:
    spectrum = parse_spectrum(read_text(args.file), args.file)
    solver = CapacitySolver.from_settings(settings)
    z0 = solver.solve_root(spectrum)
    d = spectrum.gcd
    T = args.t_max - args.t_max % d
    if T != args.t_max:
        logger.info("T lowered from %d to %d, the nearest multiple of the latency gcd", args.t_max, T)
    rate = oracle_rate(spectrum, T)
    _write(
        f"T        {T}\n"
        f"solver   {z0:.6f}\n"
        f"oracle   {rate:.6f}\n"
        f"diff     {abs(rate - z0):.3e}\n"
    )
    return 0


def cmd_compare(args, settings: Settings) -> int:
    series = normalize(load_benchmarks(args.file))
    generator = ReportGenerator.from_settings(settings)
    _write(generator.render_table(series, args.format))
    if args.plot:
        Path(args.plot).write_text(generator.emit_plot_data(series), encoding="utf-8")
        logger.info("plot data written to %s", args.plot)
    if args.xlsx:
        generator.export_excel([series], args.xlsx)
    return 0


def cmd_evolve(args, settings: Settings) -> int:
    spec = parse_machine(read_text(args.machine), args.machine, settings.word_bytes)
    candidates = load_candidates(args.candidates) if args.candidates else default_candidates(spec)
    ranked = WhatIfEngine.from_settings(settings).evolution_rank(spec, candidates)

    _write(ReportGenerator.from_settings(settings).render_table(ranked, args.format))
    best = ranked[0]
    if best.percent is not None and args.format == "markdown":
        _write(f"\nbest: {best.label} ({format_percentage(best.percent)} over {spec.name})\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="capacity", description="Computer capacity of processor descriptions")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG on stderr")
    ap.add_argument("--env-file", default=None, help="Path to a .env file with CAPACITY_* settings")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_format(p):
        p.add_argument("--format", choices=ReportGenerator.FORMATS, default="markdown")
        return p

    p = with_format(sub.add_parser("solve", help="Capacity of a machine or spectrum file"))
    p.add_argument("file")
    p.add_argument("--width", type=_positive_int, default=None, help="Pipeline width W")
    p.add_argument("--cores", type=_positive_int, default=None)
    p.add_argument("--clock-mhz", type=_positive_float, default=None)
    p.set_defaults(func=cmd_solve)

    p = with_format(sub.add_parser("sweep", help="What-if sweeps against a machine file"))
    p.add_argument("machine")
    p.add_argument("config", nargs="?", default=None, help="Sweep config; defaults to the three-step protocol")
    p.add_argument("--xlsx", default=None, help="Also write the tables to an Excel workbook")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="Compare the solver with exact sequence counting")
    p.add_argument("file")
    p.add_argument("--t-max", type=_positive_int, required=True)
    p.set_defaults(func=cmd_oracle)

    p = with_format(sub.add_parser("compare", help="Normalize benchmark and capacity figures"))
    p.add_argument("file")
    p.add_argument("--plot", default=None, help="Write x/y plot data CSV to this path")
    p.add_argument("--xlsx", default=None)
    p.set_defaults(func=cmd_compare)

    p = with_format(sub.add_parser("evolve", help="Rank candidate modifications of a machine"))
    p.add_argument("machine")
    p.add_argument("candidates", nargs="?", default=None)
    p.set_defaults(func=cmd_evolve)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        settings = Settings.from_env(args.env_file)
    except CapacityError as e:
        print(f"capacity: {e}", file=sys.stderr)
        return 1
    _setup_logging(settings, args.verbose)

    try:
        return args.func(args, settings)
    except (CapacityError, OSError) as e:
        logger.debug("command failed", exc_info=True)
        print(f"capacity: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
