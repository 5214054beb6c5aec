import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import bisect, brentq
from scipy.special import logsumexp

from core.errors import ContractViolation, DegenerateSpectrumError
from core.machine import LatencySpectrum, MachineSpec, enumerate_spectrum

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
ROOT_METHODS = ("brentq", "bisect")


@dataclass(frozen=True)
class CapacityResult:
    """
    Solved capacity of one machine.

    z0 is log2 of the largest real root (bits per cycle per issue slot);
    capacity_per_cycle multiplies it by the pipeline width. The bits/second
    fields are only filled when a clock rate is known.
    """

    z0: float
    capacity_per_cycle: float
    pipeline_width: int = 1
    cores: int = 1
    clock_hz: Optional[float] = None
    per_core_bps: Optional[float] = None
    system_bps: Optional[float] = None
    residual: float = 0.0
    name: str = ""

    @property
    def system_mbps(self) -> Optional[float]:
        return None if self.system_bps is None else self.system_bps / 1e6

    @classmethod
    def build(cls, z0: float, pipeline_width: int, cores: int, clock_hz: Optional[float],
              residual: float = 0.0, name: str = "") -> "CapacityResult":
        if pipeline_width < 1 or cores < 1:
            raise ContractViolation("pipeline_width and cores must be >= 1")
        per_cycle = pipeline_width * z0
        per_core = None if clock_hz is None else per_cycle * clock_hz
        system = None if per_core is None else cores * per_core
        return cls(z0=z0, capacity_per_cycle=per_cycle, pipeline_width=pipeline_width,
                   cores=cores, clock_hz=clock_hz, per_core_bps=per_core,
                   system_bps=system, residual=residual, name=name)

    @classmethod
    def from_published(cls, bits_per_cycle: float, cores: int = 1, clock_hz: Optional[float] = None,
                       pipeline_width: int = 1, name: str = "") -> "CapacityResult":
        """Wrap a published bits/c.c. figure so it can be scaled to bits/second"""
        return cls.build(bits_per_cycle / pipeline_width, pipeline_width, cores, clock_hz, name=name)


def log_characteristic(spectrum: LatencySpectrum, z: float) -> float:
    """ln f(2^z) where f(Y) = sum n_t * Y^-t, evaluated without overflow"""
    log_n, t = _log_terms(spectrum)
    return float(logsumexp(log_n - t * (z * LN2)))


def residual(spectrum: LatencySpectrum, z0: float) -> float:
    """|f(2^z0) - 1|"""
    return abs(math.expm1(log_characteristic(spectrum, z0)))


def _log_terms(spectrum: LatencySpectrum):
    log_n = np.array([math.log(n) for n in spectrum.values()], dtype=float)
    t = np.array(list(spectrum.keys()), dtype=float)
    return log_n, t


class CapacitySolver:
    """
    Largest real root of sum_t n_t * Y^-t = 1, searched as z = log2(Y).

    f is strictly decreasing in z, so the root is unique inside the bracket
    [max_t log2(n_t)/t, log2(sum n_t)].
    """

    def __init__(self, rel_tol: float = 1e-12, method: str = "brentq", max_iter: int = 500):
        if not rel_tol > 0:
            raise ContractViolation(f"rel_tol must be positive, got {rel_tol!r}")
        if method not in ROOT_METHODS:
            raise ContractViolation(f"unknown root method {method!r}; expected one of {ROOT_METHODS}")
        self.rel_tol = rel_tol
        self.method = method
        self.max_iter = max_iter

    @classmethod
    def from_settings(cls, settings) -> "CapacitySolver":
        return cls(rel_tol=settings.rel_tol, method=settings.root_method)

    def bracket(self, spectrum: LatencySpectrum):
        z_lo = max(math.log2(n) / t for t, n in spectrum.items())
        z_hi = math.log2(spectrum.total)
        return z_lo, z_hi

    def solve_root(self, spectrum: LatencySpectrum) -> float:
        if not len(spectrum):
            raise DegenerateSpectrumError("empty spectrum has no capacity")
        if not spectrum.is_solvable:
            raise DegenerateSpectrumError(
                f"spectrum holds {spectrum.total} instruction(s); at least 2 are needed for positive capacity"
            )

        log_n, t = _log_terms(spectrum)

        def g(z: float) -> float:
            return float(logsumexp(log_n - t * (z * LN2)))

        z_lo, z_hi = self.bracket(spectrum)
        g_lo = g(z_lo)
        if g_lo <= 0.0:
            return z_lo
        if z_hi <= z_lo or g(z_hi) >= 0.0:
            return z_hi

        root_finder = brentq if self.method == "brentq" else bisect
        z0, info = root_finder(g, z_lo, z_hi, xtol=self.rel_tol * 1e-3 * max(1.0, z_hi),
                               rtol=max(self.rel_tol, 4 * np.finfo(float).eps),
                               maxiter=self.max_iter, full_output=True)
        logger.debug("root in [%.6f, %.6f]: z0=%.12f after %d iterations (%s)",
                     z_lo, z_hi, z0, info.iterations, self.method)
        return float(z0)

    def capacity_from_spectrum(self, spectrum: LatencySpectrum, pipeline_width: int = 1, cores: int = 1,
                               clock_hz: Optional[float] = None, name: str = "") -> CapacityResult:
        z0 = self.solve_root(spectrum)
        return CapacityResult.build(z0, pipeline_width, cores, clock_hz,
                                    residual=residual(spectrum, z0), name=name)

    def capacity(self, spec: MachineSpec) -> CapacityResult:
        return self.capacity_from_spectrum(enumerate_spectrum(spec), spec.pipeline_width,
                                           spec.cores, spec.clock_hz, name=spec.name)


_default_solver = CapacitySolver()


def solve_root(spectrum: LatencySpectrum, rel_tol: float = 1e-12) -> float:
    if rel_tol == _default_solver.rel_tol:
        return _default_solver.solve_root(spectrum)
    return CapacitySolver(rel_tol=rel_tol).solve_root(spectrum)


def capacity(spec: MachineSpec) -> CapacityResult:
    return _default_solver.capacity(spec)


def capacity_from_spectrum(spectrum: LatencySpectrum, pipeline_width: int = 1, cores: int = 1,
                           clock_hz: Optional[float] = None) -> CapacityResult:
    return _default_solver.capacity_from_spectrum(spectrum, pipeline_width, cores, clock_hz)
