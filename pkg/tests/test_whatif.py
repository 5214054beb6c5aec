import math
from fractions import Fraction

import pytest
from joblib import parallel_config

from core.errors import ContractViolation, ModificationError
from core.machine import INT_REG, MEM, VEC_REG, InstructionClass, MemoryLevel
from core.whatif import (
    AddClass,
    ClassSelector,
    Combined,
    IdentityModification,
    ScaleBoth,
    ScaleClassFamily,
    ScaleIntRegs,
    ScaleMemLatency,
    ScaleMemLevelSize,
    ScaleVecRegs,
    SetMemLatency,
    SweepCell,
    SweepConfig,
    SweepRow,
    Target,
    WhatIfEngine,
    apply_modification,
    capacity_ratio,
    default_candidates,
    default_step1_targets,
    default_step2_selectors,
    default_step3_classes,
    merge_rows,
)
from tests.conftest import make_spec


class TestModifications:
    def test_scale_int_regs(self, pentium_toy):
        assert apply_modification(pentium_toy, ScaleIntRegs(Fraction(2))).int_regs == 16

    def test_original_untouched(self, pentium_toy):
        apply_modification(pentium_toy, ScaleIntRegs(Fraction(2)))
        assert pentium_toy.int_regs == 8

    def test_scale_both_identity(self, pentium_toy):
        assert apply_modification(pentium_toy, ScaleBoth(Fraction(1))) == pentium_toy
        assert capacity_ratio(pentium_toy, ScaleBoth(Fraction(1)).apply(pentium_toy)) == 100.0

    def test_register_count_rounds_and_stays_positive(self, pentium_toy):
        assert ScaleIntRegs(Fraction("1.1")).apply(pentium_toy).int_regs == 9
        assert ScaleIntRegs(Fraction(1, 100)).apply(pentium_toy).int_regs == 1

    def test_add_three_operand_family(self, intel_core_toy):
        new_class = InstructionClass(1, (INT_REG,) * 3, 1)
        modified = apply_modification(intel_core_toy, AddClass(new_class, 10))
        assert modified.max_arity == 3
        assert modified.classes[-1].mnemonic_count == 10

    def test_mem_size_clamped_below_next_level(self, pentium_toy):
        modified = ScaleMemLevelSize("L2", Fraction(1000)).apply(pentium_toy)
        assert modified.level("L2").size_bytes == 1073741824 - 8

    def test_mem_size_rounds_to_words(self, pentium_toy):
        modified = ScaleMemLevelSize("L1", Fraction("1.1")).apply(pentium_toy)
        assert modified.level("L1").size_bytes % 8 == 0

    def test_mem_latency_clamped(self, pentium_toy):
        assert ScaleMemLatency("L2", Fraction(20)).apply(pentium_toy).level("L2").latency_cc == 70
        assert ScaleMemLatency("L2", Fraction(1, 2)).apply(pentium_toy).level("L2").latency_cc == 5

    def test_set_latency(self, pentium_toy):
        assert SetMemLatency("RAM", 100).apply(pentium_toy).level("RAM").latency_cc == 100

    def test_unknown_level(self, pentium_toy):
        with pytest.raises(ModificationError):
            ScaleMemLevelSize("L3", Fraction(2)).apply(pentium_toy)

    @pytest.mark.parametrize("factor", [0, -2, "x0"])
    def test_factor_must_be_positive(self, pentium_toy, factor):
        with pytest.raises(ModificationError):
            ScaleIntRegs(factor).apply(pentium_toy)

    def test_family_selector_must_match(self, pentium_toy):
        with pytest.raises(ModificationError):
            ScaleClassFamily(ClassSelector.parse("x,x 1"), Fraction(2)).apply(pentium_toy)

    def test_family_scales_only_matching_classes(self, pentium_toy):
        modified = ScaleClassFamily(ClassSelector.parse("cmd r,r 1"), Fraction(2)).apply(pentium_toy)
        assert [cls.mnemonic_count for cls in modified.classes] == [53, 182]

    def test_combined_applies_in_order(self, pentium_toy):
        mod = Combined((ScaleIntRegs(Fraction(2)), ScaleIntRegs(Fraction(5))))
        assert mod.apply(pentium_toy).int_regs == 80
        assert mod.label == "R_i ×2 & R_i ×5"


class TestSelectorsAndTargets:
    def test_selector_wildcard(self):
        selector = ClassSelector.parse("r,* 1")
        assert selector.matches(InstructionClass(1, (INT_REG, MEM), 1))
        assert not selector.matches(InstructionClass(1, (INT_REG,), 1))
        assert not selector.matches(InstructionClass(1, (INT_REG, VEC_REG), 3))

    def test_selector_label(self):
        assert ClassSelector.parse("cmd r,r 1").label == '"cmd r,r 1"'

    @pytest.mark.parametrize("text", ["", "r,q 1", "r,r zero", "r r r"])
    def test_bad_selectors(self, text):
        with pytest.raises(ModificationError):
            ClassSelector.parse(text)

    def test_target_parse(self):
        assert Target.parse("mem_size:L1") == Target("mem_size", level="L1")
        assert Target.parse("family:r,r 1").selector == ClassSelector(("r", "r"), 1)
        assert Target.parse("mem_latency:RAM").label == "RAM_t"

    def test_target_needs_level(self):
        with pytest.raises(ModificationError):
            Target.parse("mem_size")


class TestSweeps:
    def test_unused_memory_has_no_effect(self, engine, rr_toy):
        spec = make_spec(rr_toy.classes, levels=[MemoryLevel("L1", 64, 3), MemoryLevel("RAM", 4096, 70)])
        report = engine.single_sweep(spec, [Target("mem_size", level="L1")], ["2"])
        assert report.cell("L1", "2") == 100.0

    def test_register_closed_forms(self, engine, rr_toy):
        report = engine.single_sweep(rr_toy, [Target("int_regs")], ["0.5", "2"])
        assert report.cell("R_i", "2") == pytest.approx(100 * 8 / 6, abs=1e-9)
        assert report.cell("R_i", "0.5") == pytest.approx(100 * 4 / 6, abs=1e-9)
        assert report.columns == ["0.5", "2"]

    def test_pair_identity(self, engine, rr_xx_toy):
        report = engine.pair_sweep(rr_xx_toy, (Target("int_regs"), Target("vec_regs")), ["1"])
        assert report.cell("R_i & R_v", "1") == 100.0

    def test_pair_closed_form(self, engine, rr_xx_toy):
        report = engine.pair_sweep(rr_xx_toy, (Target("int_regs"), Target("vec_regs")), ["2"])
        assert report.cell("R_i & R_v", "2") == pytest.approx(100 * 9 / 7, abs=1e-9)
        assert report.cell("R_i & R_v", "2") == pytest.approx(128.57, abs=0.005)

    def test_percent_never_drops_for_growth_factors(self, engine, intel_core_toy):
        targets = [Target("int_regs"), Target("vec_regs"), Target("both")]
        targets += [Target("mem_size", level=level.name) for level in intel_core_toy.memory_levels]
        targets += [Target("family", selector=s) for s in default_step2_selectors(intel_core_toy)]
        report = engine.single_sweep(intel_core_toy, targets, ["1", "1.1", "2", "5", "10", "20"])
        for row in report.rows:
            values = [cell.percent for cell in row.cells]
            assert values[0] == pytest.approx(100.0, abs=1e-9)
            assert all(b >= a - 1e-9 for a, b in zip(values, values[1:])), row.label

    def test_slower_memory_never_helps(self, engine, intel_core_toy):
        targets = [Target("mem_latency", level=level.name) for level in intel_core_toy.memory_levels]
        report = engine.single_sweep(intel_core_toy, targets, ["1", "2", "5"])
        for row in report.rows:
            values = [cell.percent for cell in row.cells]
            assert all(b <= a + 1e-9 for a, b in zip(values, values[1:])), row.label

    def test_combo_grid_monotone_both_ways(self, engine, pentium_toy):
        new_class = default_step3_classes(pentium_toy)[0]
        report = engine.combo_step3(pentium_toy, ["1", "2", "5", "10"], new_class, [0, 8, 16, 32, 64])
        grid = [[cell.percent for cell in row.cells] for row in report.rows]
        assert len(grid) == 4
        for row in grid:
            assert all(b > a for a, b in zip(row, row[1:]))
        for column in zip(*grid):
            assert all(b > a for a, b in zip(column, column[1:]))
        assert grid[0][0] == pytest.approx(100.0, abs=1e-9)

    def test_combo_needs_add_counts(self, engine, pentium_toy):
        new_class = default_step3_classes(pentium_toy)[0]
        with pytest.raises(ContractViolation, match="count"):
            engine.combo_step3(pentium_toy, ["2"], new_class, [])
        assert not SweepRow("empty", []).no_effect

    def test_growth_is_diluted_by_a_larger_neighbour(self, engine):
        alone = make_spec([InstructionClass(1, (INT_REG,), 1)])
        crowded = make_spec([InstructionClass(1, (INT_REG,), 1), InstructionClass(1, (INT_REG, INT_REG), 1)])
        gain_alone = engine.grow_instruction_set(alone, "r 1", ["2"]).rows[0].cells[0].percent
        gain_crowded = engine.grow_instruction_set(crowded, "r 1", ["2"]).rows[0].cells[0].percent
        assert gain_alone == pytest.approx(100 * 4 / 3, abs=1e-9)
        assert gain_crowded == pytest.approx(100 * math.log2(80) / math.log2(72), abs=1e-9)
        assert 100.0 < gain_crowded < gain_alone

    def test_grow_instruction_set(self, engine):
        spec = make_spec([InstructionClass(91, (INT_REG, INT_REG), 1)])
        report = engine.grow_instruction_set(spec, "r,r 1", ["1", "2"])
        assert report.cell('"cmd r,r 1"', "1") == 100.0
        expected = 100 * math.log2(2 * 5824) / math.log2(5824)
        assert report.cell('"cmd r,r 1"', "2") == pytest.approx(expected, rel=1e-9)
        assert report.cell('"cmd r,r 1"', "2") == pytest.approx(108.0, abs=0.01)

    def test_grow_unknown_family(self, engine, rr_toy):
        with pytest.raises(ModificationError):
            engine.grow_instruction_set(rr_toy, "x,x 1", ["2"])

    def test_combo_identity_cell(self, engine):
        spec = make_spec([InstructionClass(100, (INT_REG, INT_REG), 1)], int_regs=16)
        new_class = InstructionClass(1, (INT_REG,) * 3, 1, name="cmd1")
        report = engine.combo_step3(spec, ["1"], new_class, [0])
        assert report.cell("r ×1 cmd1", "0") == 100.0

    def test_combo_closed_form(self, engine):
        spec = make_spec([InstructionClass(100, (INT_REG, INT_REG), 1)], int_regs=16)
        new_class = InstructionClass(1, (INT_REG,) * 3, 1, name="cmd1")
        report = engine.combo_step3(spec, ["2", "5"], new_class, [8, 16])
        expected = 100 * math.log2(100 * 32 ** 2 + 8 * 32 ** 3) / math.log2(100 * 16 ** 2)
        assert report.cell("r ×2 cmd1", "8") == pytest.approx(expected, rel=1e-9)
        assert report.columns == ["8", "16"]

    def test_combo_needs_wider_class(self, engine, rr_toy):
        with pytest.raises(ContractViolation):
            engine.combo_step3(rr_toy, ["2"], InstructionClass(1, (INT_REG, INT_REG), 1), [8])

    def test_failed_cell_is_captured(self, engine, pentium_toy):
        report = engine.single_sweep(pentium_toy, [Target("int_regs"), Target("mem_size", level="L3")], ["2"])
        failed = report.row("L3")
        assert failed.failed
        assert "L3" in failed.cells[0].error
        assert report.cell("R_i", "2") > 100.0

    def test_rows_with_equal_effect_merge(self, engine, pentium_toy):
        targets = [Target("identity"), Target("mem_size", level="L1"), Target("vec_regs")]
        report = engine.single_sweep(pentium_toy, targets, ["2", "5"])
        assert len(report.rows) == 1
        assert report.rows[0].label == "identity, L1, R_v"
        assert report.no_effect_rows == ["identity, L1, R_v"]

    def test_merge_rows_tolerates_float_noise_and_keeps_failures(self):
        rows = [
            SweepRow("a", [SweepCell("2", 104.0)]),
            SweepRow("b", [SweepCell("2", None, "ModificationError: boom")]),
            SweepRow("c", [SweepCell("2", 104.0 + 1e-12)]),
            SweepRow("d", [SweepCell("2", None, "ModificationError: boom")]),
        ]
        merged = merge_rows(rows)
        assert [row.label for row in merged] == ["a, c", "b", "d"]
        assert rows[0].label == "a"

    def test_parallel_matches_serial(self, solver, pentium_toy):
        targets = default_step1_targets(pentium_toy)
        serial = WhatIfEngine(solver=solver).single_sweep(pentium_toy, targets, ["0.5", "2"])
        with parallel_config(backend="threading"):
            parallel = WhatIfEngine(solver=solver, n_jobs=2).single_sweep(pentium_toy, targets, ["0.5", "2"])
        assert serial.to_frame().equals(parallel.to_frame())


class TestProtocol:
    def test_pentium_toy_shape(self, engine, pentium_toy):
        result = engine.run_protocol(pentium_toy)
        step1, step2, step3 = result.step1, result.step2, result.step3

        assert step1.columns == ["0.5", "2", "5", "10", "20"]
        assert step1.cell("identity", "2") == 100.0
        for unused in ("L1", "L2", "RAM", "L1_t", "L2_t", "RAM_t", "R_v"):
            assert all(cell.percent == 100.0 for cell in step1.row(unused).cells)
        assert step1.cell("R_i", "2") > 100.0
        assert step1.row("R_i & R_v").label == step1.row("R_i").label

        assert step2.columns == ["1.1", "1.25", "1.5", "2"]
        assert [row.label for row in step2.rows] == ['"cmd r 1"', '"cmd r,r 1"']

        assert step3.columns == ["8", "16", "32", "64"]
        labels = [row.label for row in step3.rows]
        assert "r ×2 cmd1" in labels
        assert "x ×10 cmd2" in labels
        assert len(labels) == 6

    def test_steps_subset(self, engine, pentium_toy):
        result = engine.run_protocol(pentium_toy, SweepConfig(steps=(2,)))
        assert result.step1 is None and result.step3 is None
        assert len(result.reports) == 1

    def test_identity_only(self, engine, pentium_toy):
        config = SweepConfig(step1_targets=[Target("identity")], pairs=[], steps=(1,))
        report = engine.run_protocol(pentium_toy, config).step1
        assert [row.label for row in report.rows] == ["identity"]
        assert all(cell.percent == 100.0 for cell in report.rows[0].cells)

    def test_default_derivations(self, pentium_toy):
        assert [t.label for t in default_step1_targets(pentium_toy)] == [
            "identity", "L1", "L2", "RAM", "L1_t", "L2_t", "RAM_t", "R_i", "R_v"]
        assert default_step2_selectors(pentium_toy) == [ClassSelector(("r",), 1), ClassSelector(("r", "r"), 1)]
        assert [cls.name for cls in default_step3_classes(pentium_toy)] == ["cmd1", "cmd2"]

    def test_no_step3_for_four_operand_machines(self):
        spec = make_spec([InstructionClass(1, (INT_REG,) * 4, 1)])
        assert default_step3_classes(spec) == []


class TestEvolution:
    def test_identity_only(self, engine, pentium_toy):
        ranked = engine.evolution_rank(pentium_toy, [IdentityModification()])
        assert len(ranked) == 1
        assert ranked[0].percent == 100.0
        assert ranked[0].saturated

    def test_ranked_descending_with_failures_last(self, engine, pentium_toy):
        candidates = [
            ScaleMemLevelSize("L9", Fraction(2)),
            IdentityModification(),
            ScaleIntRegs(Fraction(10)),
            ScaleIntRegs(Fraction(2)),
        ]
        ranked = engine.evolution_rank(pentium_toy, candidates)
        assert [c.label for c in ranked] == ["R_i ×10", "R_i ×2", "identity", "L9 ×2"]
        assert ranked[-1].error is not None
        assert not ranked[0].saturated

    def test_ties_keep_input_order(self, engine, pentium_toy):
        candidates = [ScaleMemLevelSize("L1", Fraction(2)), IdentityModification()]
        assert [c.label for c in engine.evolution_rank(pentium_toy, candidates)] == ["L1 ×2", "identity"]

    def test_vector_registers_win_on_vector_machine(self, engine):
        spec = make_spec([InstructionClass(4, (VEC_REG, VEC_REG), 1)])
        ranked = engine.evolution_rank(spec, [ScaleIntRegs(Fraction(10)), ScaleVecRegs(Fraction(10))])
        assert [c.label for c in ranked] == ["R_v ×10", "R_i ×10"]
        assert ranked[0].percent > 100.0
        assert ranked[1].percent == pytest.approx(100.0, abs=1e-9)
        assert ranked[1].saturated

    def test_empty_candidates(self, engine, pentium_toy):
        with pytest.raises(ContractViolation):
            engine.evolution_rank(pentium_toy, [])

    def test_default_candidates_favour_new_wide_class(self, engine, pentium_toy):
        ranked = engine.evolution_rank(pentium_toy, default_candidates(pentium_toy))
        assert "cmd" in ranked[0].label
        assert all(c.error is None for c in ranked)


class TestCapacityRatio:
    def test_published_cross_table_ratio(self):
        assert capacity_ratio(70.898, 108.587) == pytest.approx(153.16, abs=0.01)

    def test_zero_baseline(self):
        with pytest.raises(ContractViolation):
            capacity_ratio(0.0, 1.0)
