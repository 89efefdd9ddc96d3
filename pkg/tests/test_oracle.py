import json
import math

import numpy as np
import pytest

from quantdea import distance as engine
from quantdea import lp as lp_engine
from quantdea.dataset import PAPER_EXAMPLE, Dataset
from quantdea.distance import Orientation
from quantdea.errors import PreconditionError
from quantdea.lp import LpProblem
from quantdea.oracle import (
    OracleReport,
    bisect_distance,
    grid_lp_check,
    integer_scan,
    oracle_contains,
    reports_json,
    vertex_enumeration,
    verify_suite,
)
from quantdea.technology import Point, TechSpec

D = PAPER_EXAMPLE


class TestBisection:
    def test_builtin_tropical(self):
        tech = TechSpec.parse("quant-crs:+inf")
        got = [bisect_distance(tech, D, Point(D.X[k], D.Y[k]), "out") for k in range(7)]
        assert got == pytest.approx([1, 1, 0, 0, 1, 0, 0], abs=1e-8)

    def test_fdh(self):
        tech = TechSpec.parse("fdh")
        assert bisect_distance(tech, D, Point(D.X[0], D.Y[0]), "out") == pytest.approx(1.0, abs=1e-8)

    def test_unbounded(self):
        ds = Dataset([[0.0], [1.0]], [[1.0], [1.0]])
        # a zero-input firm can be scaled up freely under constant returns
        assert bisect_distance(TechSpec.parse("convex-crs"), ds, Point([1.0], [1.0]), "out") == math.inf
        assert bisect_distance(TechSpec.parse("quant-crs:+inf"), ds, Point([1.0], [1.0]), "in") == pytest.approx(1.0, abs=1e-8)

    def test_infeasible_start(self):
        with pytest.raises(PreconditionError):
            bisect_distance(TechSpec.parse("fdh"), D, Point([0.0, 0.0], [9.0]), "out")
        with pytest.raises(PreconditionError):
            bisect_distance(TechSpec.parse("fdh"), D, Point(D.X[0], D.Y[0]), "out", tol=0.0)

    def test_finite_alpha(self):
        tech = TechSpec.parse("quant-vrs:1")
        got = bisect_distance(tech, D, Point(D.X[1], D.Y[1]), "in")
        ref = engine.distance_quantized_lp(D, 1, 1.0, "vrs", "in").delta
        assert got == pytest.approx(ref, abs=1e-7)


class TestIntegerScan:
    def test_builtin_example(self):
        tech = TechSpec.parse("fdh")
        assert [integer_scan(tech, D, Point(D.X[k], D.Y[k]), "out") for k in range(7)] == [1, 0, 0, 0, 1, 0, 0]

    def test_limit(self):
        ds = Dataset([[0.0], [1.0]], [[1.0], [1.0]])
        assert integer_scan(TechSpec.parse("convex-crs"), ds, Point([1.0], [1.0]), "out", limit=25) == 25


class TestMembership:
    def test_independent_of_orthant(self):
        tech = TechSpec.parse("quant-crs:+inf")
        assert oracle_contains(tech, D, np.array([-1.0, 1.0]), np.array([0.0]))

    def test_convex(self):
        assert oracle_contains(TechSpec.parse("convex-vrs"), D, np.array([2.0, 2.0]), np.array([2.0]))
        assert not oracle_contains(TechSpec.parse("convex-vrs"), D, np.array([1.0, 1.0]), np.array([3.0]))


class TestGrid:
    @pytest.mark.parametrize("a", [-1.0, 0.5, 2.0])
    @pytest.mark.parametrize("o", ["in", "out"])
    def test_passes(self, a, o):
        ds = Dataset([[1.0, 2.0], [2.0, 1.0], [2.0, 2.5]], [[1.0], [1.5], [2.0]])
        rep = grid_lp_check(ds, 2, a, o, grid=2e-3)
        assert rep.passed, rep

    def test_crs(self):
        ds = Dataset([[1.0], [2.0]], [[1.0], [3.0]])
        assert grid_lp_check(ds, 0, 1.0, "out", grid=1e-4, returns="crs").passed

    def test_size_limit(self):
        with pytest.raises(PreconditionError):
            grid_lp_check(D, 0, 1.0, "in")


class TestVertexEnumeration:
    def test_statuses(self):
        p = LpProblem([3.0, 5.0], "max").add([1, 0], "<=", 4).add([0, 2], "<=", 12).add([3, 2], "<=", 18)
        status, val = vertex_enumeration(p)
        assert status == "optimal" and val == pytest.approx(36.0, abs=1e-9)
        assert vertex_enumeration(LpProblem([1.0], "max").add([1.0], ">=", 0.0))[0] == "unbounded"
        assert vertex_enumeration(LpProblem([1.0]).add([1.0], "<=", -1.0))[0] == "infeasible"


class TestSuite:
    def test_all_pass(self):
        reps = verify_suite(0)
        assert len(reps) > 100
        failed = [r for r in reps if not r.passed]
        assert not failed, failed[:3]

    def test_deterministic(self):
        assert reports_json(verify_suite(3)) == reports_json(verify_suite(3))

    def test_json_shape(self):
        doc = json.loads(reports_json([OracleReport.compare("x", "i", math.inf, math.inf, 0.0)]))
        assert doc["passed"] is True
        assert doc["reports"][0]["oracle"] == "inf"

    def test_detects_corrupted_fdh(self, monkeypatch):
        real = engine.distance_fdh

        def off_by_half(ds, k, o):
            rec = real(ds, k, o)
            rec.delta += 0.5
            return rec

        monkeypatch.setattr(engine, "distance_fdh", off_by_half)
        assert any(not r.passed and r.check in ("bisection", "integer-scan") for r in verify_suite(0))

    def test_detects_corrupted_closed_form(self, monkeypatch):
        real = engine.maxplus_distance
        monkeypatch.setattr(engine, "maxplus_distance", lambda *a: real(*a) * 1.001 + 1e-3)
        assert any(not r.passed for r in verify_suite(0))

    def test_detects_corrupted_lp(self, monkeypatch):
        real = lp_engine.solve

        def biased(problem, *a, **kw):
            sol = real(problem, *a, **kw)
            if sol.optimal:
                sol.objective += 1e-3
            return sol

        monkeypatch.setattr(lp_engine, "solve", biased)
        assert any(not r.passed and r.check == "lp" for r in verify_suite(0))

    def test_report_compare(self):
        assert OracleReport.compare("c", "i", 1.0, 1.0 + 1e-7, 1e-6).passed
        assert not OracleReport.compare("c", "i", math.inf, 3.0, 1e-6).passed
        assert OracleReport.compare("c", "i", -math.inf, -math.inf, 0.0).passed

    def test_orientation_enum(self):
        assert Orientation.parse("IN") is Orientation.IN

    def test_unbounded_ray_with_mixed_signs(self):
        # d = (1, 1, 1.958) keeps both rows feasible and lowers the objective
        p = LpProblem([-0.14, 2.38, -2.12], "min")
        p.add([-1.98, -2.25, 2.16], "<=", -2.96).add([-2.85, 2.84, 1.35], ">=", 2.53)
        assert vertex_enumeration(p) == ("unbounded", None)

    def test_free_coordinate_outside_objective(self):
        # x2 can grow without bound but does not enter the objective
        p = LpProblem([-3.0, 0.0, 3.0, 3.0], "max")
        p.add([3, 0, 1, 1], "<=", 3).add([1, 0, 0, -3], ">=", 1).add([-3, 1, 0, -3], ">=", 2)
        status, val = vertex_enumeration(p)
        assert status == "optimal" and val == pytest.approx(-3.0, abs=1e-12)

    def test_zero_equality_row(self):
        p = LpProblem([1.0, -2.0], "max").add([0, -2], "<=", 2).add([0, 0], "==", 0).add([1, 2], "<=", 3)
        status, val = vertex_enumeration(p)
        assert status == "optimal" and val == pytest.approx(3.0, abs=1e-12)
