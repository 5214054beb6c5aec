import io
import logging
import numbers
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import pandas as pd
import xlsxwriter

from core.errors import ContractViolation, InvalidSpecError
from core.solver import CapacityResult
from core.whatif import RankedCandidate, SweepReport
from utils.helpers import format_fixed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComparisonRow:
    """One processor of a benchmark comparison; capacity in Mbit/s"""

    name: str
    capacity_bps: float
    benchmark_score: Optional[float] = None

    def __post_init__(self):
        if not self.capacity_bps > 0:
            raise InvalidSpecError(f"{self.name}: capacity must be positive, got {self.capacity_bps!r}")


@dataclass(frozen=True)
class NormalizedPoint:
    name: str
    benchmark_rel: Optional[float]
    capacity_rel: float


@dataclass
class NormalizedSeries:
    rows: List[NormalizedPoint]

    @property
    def has_benchmark(self) -> bool:
        return any(row.benchmark_rel is not None for row in self.rows)

    def as_rows(self) -> List[ComparisonRow]:
        return [ComparisonRow(row.name, row.capacity_rel, row.benchmark_rel) for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "name": [row.name for row in self.rows],
                "benchmark_rel": [row.benchmark_rel for row in self.rows],
                "capacity_rel": [row.capacity_rel for row in self.rows],
            }
        )


def normalize(rows: Sequence[ComparisonRow]) -> NormalizedSeries:
    """Divide every row by the first one, so the first row becomes (1.0, 1.0)"""
    if not rows:
        raise ContractViolation("normalize needs at least one row")
    first = rows[0]
    if not first.capacity_bps > 0:
        raise ContractViolation(f"{first.name}: reference capacity must be positive")
    needs_benchmark = any(row.benchmark_score is not None for row in rows)
    if needs_benchmark and (first.benchmark_score is None or not first.benchmark_score > 0):
        raise ContractViolation(f"{first.name}: reference benchmark score must be present and positive")

    points = []
    for row in rows:
        bench = None
        if row.benchmark_score is not None:
            bench = row.benchmark_score / first.benchmark_score
        points.append(NormalizedPoint(row.name, bench, row.capacity_bps / first.capacity_bps))
    return NormalizedSeries(points)


def _markdown(headers: List[str], body: List[List[str]]) -> str:
    lines = ["| " + " | ".join(headers) + " |",
             "|" + "|".join("---" for _ in headers) + "|"]
    for cells in body:
        lines.append("| " + " | ".join(cell.replace("|", "\\|") for cell in cells) + " |")
    return "\n".join(lines) + "\n"


def _csv(headers: List[str], body: List[List[str]]) -> str:
    buffer = io.StringIO()
    pd.DataFrame(body, columns=headers).to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


class ReportGenerator:
    FORMATS = ("markdown", "csv")

    def __init__(self, percent_decimals: int = 3, capacity_decimals: int = 3,
                 output_dir: str = "data/reports"):
        self.percent_decimals = percent_decimals
        self.capacity_decimals = capacity_decimals
        self.output_dir = output_dir

    @classmethod
    def from_settings(cls, settings) -> "ReportGenerator":
        return cls(settings.percent_decimals, settings.capacity_decimals, settings.output_dir)

    def render_table(self, report: Union[SweepReport, NormalizedSeries, CapacityResult, Sequence],
                     format: str = "markdown") -> str:
        if format not in self.FORMATS:
            raise ContractViolation(f"unknown table format {format!r}; expected one of {self.FORMATS}")
        if isinstance(report, SweepReport):
            headers, body = self._sweep_table(report)
        elif isinstance(report, NormalizedSeries):
            headers, body = self._series_table(report)
        elif isinstance(report, CapacityResult):
            headers, body = self._capacity_table([report])
        elif report and all(isinstance(item, CapacityResult) for item in report):
            headers, body = self._capacity_table(list(report))
        elif report and all(isinstance(item, RankedCandidate) for item in report):
            headers, body = self._ranking_table(list(report))
        else:
            raise ContractViolation(f"cannot render {type(report).__name__}")

        if format == "csv":
            return _csv(headers, body)
        return _markdown(headers, body)

    def _pct(self, value: Optional[float]) -> str:
        return format_fixed(value, self.percent_decimals)

    def _sweep_table(self, report: SweepReport):
        headers = [report.title] + report.columns
        body = []
        for row in report.rows:
            cells = [self._pct(cell.percent) if cell.error is None else "error" for cell in row.cells]
            body.append([row.label] + cells)
        return headers, body

    def _series_table(self, series: NormalizedSeries):
        headers = ["name", "capacity_rel"]
        if series.has_benchmark:
            headers.append("benchmark_rel")
        body = []
        for row in series.rows:
            cells = [row.name, format_fixed(row.capacity_rel, self.capacity_decimals)]
            if series.has_benchmark:
                cells.append(format_fixed(row.benchmark_rel, self.capacity_decimals))
            body.append(cells)
        return headers, body

    def _capacity_table(self, results: List[CapacityResult]):
        headers = ["name", "z0_bits_per_slot", "width", "capacity_bits_per_cc",
                   "cores", "clock_mhz", "system_mbit_s", "residual"]
        body = []
        for result in results:
            body.append([
                result.name or "-",
                format_fixed(result.z0, 6),
                str(result.pipeline_width),
                format_fixed(result.capacity_per_cycle, self.capacity_decimals),
                str(result.cores),
                format_fixed(None if result.clock_hz is None else result.clock_hz / 1e6, 3),
                format_fixed(result.system_mbps, 2),
                f"{result.residual:.1e}",
            ])
        return headers, body

    def _ranking_table(self, ranked: List[RankedCandidate]):
        headers = ["rank", "modification", "percent", "saturated"]
        body = []
        for i, candidate in enumerate(ranked, 1):
            if candidate.error is not None:
                body.append([str(i), candidate.label, "error", candidate.error])
                continue
            body.append([str(i), candidate.label, self._pct(candidate.percent),
                         "yes" if candidate.saturated else "no"])
        return headers, body

    def emit_plot_data(self, series: NormalizedSeries) -> str:
        """x/y data for an external plotting tool; x is the 1-based row index"""
        headers = ["x", "name", "capacity_rel"]
        if series.has_benchmark:
            headers.append("benchmark_rel")
        body = []
        for x, row in enumerate(series.rows, 1):
            cells = [str(x), row.name, format_fixed(row.capacity_rel, self.capacity_decimals)]
            if series.has_benchmark:
                cells.append(format_fixed(row.benchmark_rel, self.capacity_decimals))
            body.append(cells)
        return _csv(headers, body)

    def export_excel(self, reports: Sequence[Union[SweepReport, NormalizedSeries]],
                     filepath: Optional[str] = None) -> str:
        """Write one worksheet per report and return the file path"""
        if filepath is None:
            os.makedirs(self.output_dir, exist_ok=True)
            filepath = os.path.join(self.output_dir, "capacity_report.xlsx")
        else:
            parent = os.path.dirname(filepath)
            if parent:
                os.makedirs(parent, exist_ok=True)

        workbook = xlsxwriter.Workbook(filepath)
        header_format = workbook.add_format({
            'bold': True,
            'font_color': 'white',
            'bg_color': '#4472C4',
            'border': 1,
            'align': 'center',
            'valign': 'vcenter'
        })
        number_format = workbook.add_format({
            'num_format': '0.' + '0' * max(self.percent_decimals, 1),
            'border': 1,
            'align': 'right'
        })
        cell_format = workbook.add_format({
            'border': 1,
            'align': 'left'
        })

        used_names = set()
        for i, report in enumerate(reports, 1):
            if isinstance(report, SweepReport):
                title = report.title
                frame = report.to_frame().reset_index()
            else:
                title = "comparison"
                frame = report.to_frame()
            sheet_name = (title or f"sheet{i}")[:31]
            for ch in '[]:*?/\\':
                sheet_name = sheet_name.replace(ch, "_")
            if sheet_name in used_names:
                sheet_name = f"{sheet_name[:28]}_{i}"
            used_names.add(sheet_name)

            sheet = workbook.add_worksheet(sheet_name)
            for col, header in enumerate(frame.columns):
                sheet.write(0, col, str(header), header_format)
            for row_idx, values in enumerate(frame.itertuples(index=False), 1):
                for col, value in enumerate(values):
                    if value is None or (isinstance(value, float) and pd.isna(value)):
                        sheet.write_blank(row_idx, col, None, cell_format)
                    elif isinstance(value, numbers.Real):
                        sheet.write_number(row_idx, col, float(value), number_format)
                    else:
                        sheet.write(row_idx, col, str(value), cell_format)
            sheet.set_column(0, 0, 36)
            sheet.set_column(1, max(len(frame.columns) - 1, 1), 12)

        workbook.close()
        logger.info("Excel report written to %s", filepath)
        return filepath
