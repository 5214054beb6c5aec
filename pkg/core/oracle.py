"""
Brute-force check of the capacity definition.

N(T) counts instruction sequences whose latencies add up to exactly T. It obeys
N(0) = 1 and N(T) = sum_t n_t * N(T - t), computed here with exact integers.
Its growth rate converges to log2 of the largest root found by core.solver.
"""

import logging
import math
from dataclasses import dataclass
from typing import List

from core.errors import ContractViolation, DegenerateSpectrumError, HorizonTooShortError, PeriodMisalignedError
from core.machine import LatencySpectrum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaskCountTable:
    counts: List[int]
    spectrum: LatencySpectrum

    @property
    def t_max(self) -> int:
        return len(self.counts) - 1

    def __getitem__(self, T: int) -> int:
        return self.counts[T]


def dp_task_count(spectrum: LatencySpectrum, t_max: int) -> TaskCountTable:
    if t_max < 0:
        raise ContractViolation(f"t_max must be non-negative, got {t_max}")
    terms = list(spectrum.items())
    counts = [1] + [0] * t_max
    for T in range(1, t_max + 1):
        total = 0
        for t, n in terms:
            if t > T:
                break
            total += n * counts[T - t]
        counts[T] = total
    return TaskCountTable(counts=counts, spectrum=spectrum)


def _check_rate_input(spectrum: LatencySpectrum, T: int) -> int:
    if not len(spectrum):
        raise DegenerateSpectrumError("empty spectrum has no growth rate")
    if T < 1:
        raise ContractViolation(f"T must be positive, got {T}")
    d = spectrum.gcd
    if T % d:
        raise PeriodMisalignedError(T, d)
    return d


def ratio_rates(table: TaskCountTable, T: int, steps: int) -> List[float]:
    """(1/d) * log2(N(T + (k+1)d) / N(T + kd)) for k = 0 .. steps - 1"""
    d = table.spectrum.gcd
    if T + steps * d > table.t_max:
        raise ContractViolation(f"table stops at {table.t_max}, need {T + steps * d}")
    rates = []
    for k in range(steps):
        lo, hi = table[T + k * d], table[T + (k + 1) * d]
        if lo == 0 or hi == 0:
            empty = T + k * d if lo == 0 else T + (k + 1) * d
            raise HorizonTooShortError(T, d, f"N({empty}) = 0, no task of that length exists yet")
        # int / int is correctly rounded even when both exceed float range
        rates.append(math.log2(hi / lo) / d)
    return rates


def oracle_rate(spectrum: LatencySpectrum, T: int, tol: float = 1e-9) -> float:
    """
    (1/d) * log2(N(T + d) / N(T)), d being the latency gcd.

    The ratio converges geometrically to the solver's root, at a speed set by
    how close the other roots come to the largest one; a spectrum mixing one
    odd latency into even ones can still oscillate at T = 500d. The ratio is
    also taken over one period of the slowest instruction after T, and a
    spread above tol raises HorizonTooShortError.
    """
    d = _check_rate_input(spectrum, T)
    window = max(1, max(spectrum) // d)
    table = dp_task_count(spectrum, T + (window + 1) * d)
    if table[T] == 0:
        raise PeriodMisalignedError(T, d)

    rates = ratio_rates(table, T, window + 1)
    spread = max(rates) - min(rates)
    logger.debug("ratio estimates over [%d, %d]: spread %.3e", T, T + (window + 1) * d, spread)
    if spread > tol:
        raise HorizonTooShortError(
            T, d, f"consecutive-ratio estimates still oscillate by {spread:.3e} bits; use a larger T"
        )
    return rates[0]


def log_rate(table: TaskCountTable, T: int) -> float:
    """log2(N(T)) / T, the direct definition estimator"""
    if not 1 <= T <= table.t_max:
        raise ContractViolation(f"T must be in [1, {table.t_max}], got {T}")
    if table[T] == 0:
        raise PeriodMisalignedError(T, table.spectrum.gcd)
    return math.log2(table[T]) / T


def composition_gap(table: TaskCountTable, t1: int, t2: int) -> int:
    """
    N(t1 + t2) - N(t1) * N(t2).

    Non-negative: every pair of tasks concatenates into a longer task, and the
    difference counts tasks with an instruction straddling the t1 boundary.
    """
    if t1 < 0 or t2 < 0 or t1 + t2 > table.t_max:
        raise ContractViolation(f"t1 + t2 must lie within the table (t_max={table.t_max})")
    return table[t1 + t2] - table[t1] * table[t2]
