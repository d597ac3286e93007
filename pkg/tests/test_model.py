import io
from pathlib import Path

import numpy as np
import pytest

from lcge.chimera import ChimeraDims, ChimeraGraph, Crossroad, HorizontalVertex as H, VerticalVertex as V
from lcge.constraints import ConstraintSet, MesConstraint, Provenance
from lcge.errors import PreconditionError
from lcge.instances import read_instance
from lcge.model import EXACT, HEURISTIC, IlpModel, build_model, export_lp, model_stats

from helpers import random_suite
from lp_reader import parse_lp

DATA = Path(__file__).parent / "data"


def lp_text(model) -> str:
    buf = io.BytesIO()
    export_lp(model, buf)
    return buf.getvalue().decode("ascii")


def test_ideal_model_counts():
    model = build_model(ChimeraGraph.ideal(3))
    assert model_stats(model).as_tuple() == (144, 12, 12, 0, 0)
    assert len(model.variables) == 144 and not model.fixed_zero
    assert [len(r) for r in model.row_constraints] == [12] * 12
    assert [len(c) for c in model.col_constraints] == [12] * 12


def test_variable_count_scales_with_square_size():
    assert model_stats(build_model(ChimeraGraph.ideal(16))).num_vars == 4096


def test_heuristic_m_zero_keeps_only_same_kind_constraints():
    for g in random_suite(11, 20, [(3, 4)], 10):
        kinds = build_model(g, HEURISTIC, 0).mes.count_by_kind()
        assert kinds["MIX"] == 0


def test_mode_arguments():
    g = ChimeraGraph.ideal(1)
    with pytest.raises(PreconditionError):
        build_model(g, EXACT, 0.5)
    with pytest.raises(PreconditionError):
        build_model(g, HEURISTIC)
    with pytest.raises(PreconditionError):
        build_model(g, "fancy")


def test_variables_and_fixed_partition_grid():
    for g in random_suite(12, 20, [(2, 4), (3, 2)], 8):
        for model in (build_model(g), build_model(g, HEURISTIC, 0.25)):
            assert model.variables.isdisjoint(model.fixed_zero)
            assert len(model.variables) + len(model.fixed_zero) == g.n_rows * g.n_cols
            for con in model.mes:
                assert con.members <= model.variables
            assert model.excluded <= model.fixed_zero


def test_small_bound_example():
    g = ChimeraGraph(ChimeraDims(3, 3, 4), [H(2, 1), H(9, 3)])
    assert model_stats(build_model(g)).num_mes <= 2


def test_is_feasible_matches_constraints():
    g = ChimeraGraph(ChimeraDims(3, 3, 4), [H(9, 2)], [V(2, 3)])
    model = build_model(g)
    assert model.is_feasible([(1, 1), (2, 2)])
    assert not model.is_feasible([(1, 1), (1, 2)])  # same row
    assert not model.is_feasible([(9, 5)])  # unavailable
    assert not model.is_feasible([(9, 3), (1, 5)])  # common crossroad vs rectangle


class TestExport:
    def test_smallest_model(self):
        text = lp_text(build_model(ChimeraGraph.ideal(1, depth=1)))
        body = text.split("\n", 1)[1]
        assert body == (
            "Maximize\n obj: x_1_1\nSubject To\nrow_1: x_1_1 <= 1\ncol_1: x_1_1 <= 1\n"
            "Binary\n x_1_1\nEnd\n"
        )

    def test_single_mes_rendering(self):
        g = ChimeraGraph.ideal(3)
        con = MesConstraint(frozenset({Crossroad(5, 1), Crossroad(10, 9)}), Provenance("HH", (5, 1), (10, 3), (1,)))
        base = build_model(g)
        model = IlpModel(g, EXACT, None, base.var_mask, ConstraintSet.from_constraints(g.n_cols, [con]), frozenset())
        assert "\nmes_1: x_5_1 + x_10_9 <= 1\n" in lp_text(model)

    def test_fixed_variables_omitted(self):
        g = ChimeraGraph(ChimeraDims(1, 1, 4), [H(1, 1)])
        text = lp_text(build_model(g))
        assert "x_1_" not in text
        assert "row_1:" not in text
        assert "row_2:" in text

    def test_long_rows_wrap(self):
        text = lp_text(build_model(ChimeraGraph.ideal(3)))
        assert all(len(line) < 120 for line in text.split("\n"))
        assert "\n + x_1_9" in text

    def test_ascii_lf_and_deterministic(self):
        g = read_instance(DATA / "golden_c334.json")
        a, b = io.BytesIO(), io.BytesIO()
        export_lp(build_model(g), a)
        export_lp(build_model(g), b)
        assert a.getvalue() == b.getvalue()
        assert b"\r" not in a.getvalue()
        a.getvalue().decode("ascii")

    def test_golden_file(self):
        g = read_instance(DATA / "golden_c334.json")
        buf = io.BytesIO()
        export_lp(build_model(g), buf)
        assert buf.getvalue() == (DATA / "golden_c334.lp").read_bytes()

    def test_reader_recovers_counts(self):
        for g in random_suite(13, 10, [(2, 4), (3, 4)], 10):
            model = build_model(g)
            stats = model_stats(model)
            lp = parse_lp(lp_text(model))
            assert len(lp.objective) == stats.num_vars
            assert len(lp.binaries) == stats.num_vars
            assert len(lp.rows_with_prefix("mes_")) == stats.num_mes
            nonempty_rows = int(np.count_nonzero(model.var_mask.any(axis=1)))
            assert len(lp.rows_with_prefix("row_")) == nonempty_rows
            for i, con in enumerate(model.mes):
                terms, op, rhs = lp.rows[f"mes_{i + 1}"]
                assert {tuple(map(int, t.split("_")[1:])) for t in terms} == set(con.members)
                assert (op, rhs) == ("<=", 1.0)
