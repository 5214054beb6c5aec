import numpy as np
import pytest

from core.formats import load_machine, load_spectrum
from core.machine import INT_REG, VEC_REG, InstructionClass, MachineSpec, MemoryLevel
from core.solver import CapacitySolver
from core.whatif import WhatIfEngine
from utils.helpers import bundled_path

SETTINGS_VARS = (
    "CAPACITY_REL_TOL",
    "CAPACITY_ROOT_METHOD",
    "CAPACITY_N_JOBS",
    "CAPACITY_PERCENT_DECIMALS",
    "CAPACITY_CAPACITY_DECIMALS",
    "CAPACITY_SATURATION_THRESHOLD",
    "CAPACITY_WORD_BYTES",
    "CAPACITY_OUTPUT_DIR",
    "CAPACITY_LOG_LEVEL",
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    # set-then-delete registers an undo even for unset variables, so values
    # that load_dotenv writes are removed again after the test
    for name in SETTINGS_VARS:
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def solver():
    return CapacitySolver()


@pytest.fixture
def engine(solver):
    return WhatIfEngine(solver=solver)


@pytest.fixture
def pentium_toy():
    return load_machine(bundled_path("pentium_m_toy.machine"))


@pytest.fixture
def intel_core_toy():
    return load_machine(bundled_path("intel_core_toy.machine"))


@pytest.fixture
def haswell_spectrum():
    return load_spectrum(bundled_path("haswell.spectrum"))


def make_spec(classes, int_regs=8, vec_regs=8, levels=(), pipeline_width=1, **kwargs):
    return MachineSpec(
        name=kwargs.pop("name", "toy"),
        int_regs=int_regs,
        vec_regs=vec_regs,
        memory_levels=tuple(levels),
        classes=tuple(classes),
        pipeline_width=pipeline_width,
        **kwargs,
    )


@pytest.fixture
def rr_toy():
    """One class of one two-operand integer instruction, R_i = 8"""
    return make_spec([InstructionClass(1, (INT_REG, INT_REG), 1)])


@pytest.fixture
def rr_xx_toy():
    return make_spec([
        InstructionClass(1, (INT_REG, INT_REG), 1),
        InstructionClass(1, (VEC_REG, VEC_REG), 1),
    ])


@pytest.fixture
def two_level_memory():
    return (MemoryLevel("L1", 64, 3), MemoryLevel("RAM", 128, 70))
