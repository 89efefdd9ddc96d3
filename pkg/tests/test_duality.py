import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_dataset
from quantdea.dataset import PAPER_EXAMPLE
from quantdea.distance import Orientation, distance_quantized_lp
from quantdea.duality import PriceVector, duality_check, q_cost, q_inner, q_revenue, witness_prices
from quantdea.errors import PreconditionError
from quantdea.kp_algebra import Alpha
from quantdea.technology import Returns, TechSpec

D = PAPER_EXAMPLE


class TestPriceVector:
    def test_normalization_enforced(self):
        PriceVector([0.0], 1.0)
        with pytest.raises(PreconditionError):
            PriceVector([0.0, 0.0], 1.0)

    def test_from_weights(self):
        v = PriceVector.from_weights([1.0, 3.0], 2.0)
        assert np.exp(2.0 * v.w).tolist() == pytest.approx([0.25, 0.75])

    def test_zero_weight_is_sentinel(self):
        v = PriceVector.from_weights([0.0, 1.0], -1.0)
        assert v.w[0] == math.inf and v.w[1] == 0.0

    def test_bad_weights(self):
        with pytest.raises(PreconditionError):
            PriceVector.from_weights([0.0, 0.0], 1.0)
        with pytest.raises(PreconditionError):
            PriceVector.from_weights([-1.0, 2.0], 1.0)
        with pytest.raises(PreconditionError):
            PriceVector([0.0], math.inf)

    @given(st.integers(0, 10**6), st.integers(1, 5), st.sampled_from([-2.0, -1.0, 0.5, 3.0]))
    def test_random_normalized(self, seed, d, a):
        v = PriceVector.random(d, a, np.random.default_rng(seed))
        assert np.exp(a * v.w).sum() == pytest.approx(1.0, abs=1e-12)

    def test_log_weights(self):
        v = PriceVector.from_log_weights([0.0, -math.inf], 1.0)
        assert v.w.tolist() == [0.0, -math.inf]


class TestInner:
    def test_single_term(self):
        assert q_inner(PriceVector([0.0], 1.0), [2.5]) == 2.5

    def test_origin(self):
        v = PriceVector.from_weights([0.2, 0.3, 0.5], -2.0)
        assert q_inner(v, [0.0, 0.0, 0.0]) == pytest.approx(0.0, abs=1e-15)

    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(-10, 10), st.sampled_from([-1.0, 2.0]))
    def test_translation(self, z, c, a):
        v = PriceVector.from_weights([0.2, 0.3, 0.5], a)
        assert q_inner(v, np.array(z) + c) == pytest.approx(q_inner(v, z) + c, abs=1e-12)

    def test_dimension(self):
        with pytest.raises(PreconditionError):
            q_inner(PriceVector([0.0], 1.0), [1.0, 2.0])


class TestCostRevenue:
    def test_cost_at_observed_output(self):
        # cost of producing y is at most the cost of any firm producing at least y
        tech = TechSpec.parse("quant-vrs:1")
        w = PriceVector.from_weights([0.5, 0.5], 1.0)
        c = q_cost(w, D.Y[0], tech, D)
        for k in range(D.ell):
            if D.Y[k, 0] >= D.Y[0, 0]:
                assert c <= q_inner(w, D.X[k]) + 1e-12

    def test_infeasible_cost(self):
        tech = TechSpec.parse("quant-vrs:1")
        w = PriceVector.from_weights([0.5, 0.5], 1.0)
        assert q_cost(w, [100.0], tech, D) == math.inf

    def test_infeasible_revenue(self):
        tech = TechSpec.parse("quant-vrs:1")
        p = PriceVector([0.0], 1.0)
        assert q_revenue(p, [0.0, 0.0], tech, D) == -math.inf

    @given(st.integers(0, 10**6), st.sampled_from([-2.0, -1.0, 1.0, 2.0]), st.floats(-3, 3))
    def test_crs_cost_translation(self, seed, a, c):
        rng = np.random.default_rng(seed)
        tech = TechSpec.quantized(a, "crs")
        w = PriceVector.random(D.m, a, rng)
        y = rng.uniform(0, 5, D.n)
        assert q_cost(w, y + c, tech, D) == pytest.approx(q_cost(w, y, tech, D) + c, abs=1e-9)

    def test_checks(self):
        w = PriceVector.from_weights([0.5, 0.5], 1.0)
        with pytest.raises(PreconditionError):
            q_cost(w, [1.0], TechSpec.parse("quant-vrs:2"), D)
        with pytest.raises(PreconditionError):
            q_cost(w, [1.0], TechSpec.parse("convex-vrs"), D)
        with pytest.raises(PreconditionError):
            q_revenue(w, [1.0, 1.0], TechSpec.parse("quant-vrs:1"), D)


class TestDualityCheck:
    @pytest.mark.parametrize("a", [-2.0, -1.0, 1.0, 2.0])
    @pytest.mark.parametrize("o", ["in", "out"])
    @pytest.mark.parametrize("ret", ["vrs", "crs"])
    def test_builtin_example(self, a, o, ret):
        tech = TechSpec.quantized(a, ret)
        cache = {}
        for k in range(D.ell):
            rep = duality_check(D, k, tech, o, 40, seed=k, cache=cache)
            assert rep.weak_violations == 0
            assert rep.ok
            if not rep.degenerate:
                assert rep.strong_gap <= 1e-9

    @given(st.integers(0, 10**6), st.sampled_from([-1.0, 0.5, 2.0]))
    def test_random_data(self, seed, a):
        rng = np.random.default_rng(seed)
        ds = random_dataset(rng, max_ell=5, hi=4)
        tech = TechSpec.quantized(a, "vrs")
        for o in Orientation:
            rep = duality_check(ds, 0, tech, o, 10, seed=seed)
            assert rep.weak_violations == 0
            if not rep.degenerate and math.isfinite(rep.distance):
                assert rep.strong_gap <= 1e-6

    def test_witness_matches_lp(self):
        rec = distance_quantized_lp(D, 1, 1.0, Returns.VRS, Orientation.IN)
        wit = witness_prices(rec.duals, D.X[1], slice(0, 2), Alpha(1.0))
        assert wit is not None and wit.d == 2

    def test_zero_multipliers(self):
        assert witness_prices(np.zeros(4), np.zeros(2), slice(0, 2), Alpha(1.0)) is None

    def test_report_dict(self):
        rep = duality_check(D, "2", TechSpec.parse("quant-vrs:2"), "in", 5, seed=0)
        d = rep.to_dict()
        for key in ("firm", "orientation", "alpha", "weak_violations", "strong_gap", "witness_prices"):
            assert key in d
        assert d["firm"] == "2"

    def test_deterministic(self):
        tech = TechSpec.parse("quant-vrs:-1")
        a = duality_check(D, 1, tech, "in", 20, seed=4).to_dict()
        b = duality_check(D, 1, tech, "in", 20, seed=4).to_dict()
        assert a == b

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            duality_check(D, 0, TechSpec.parse("quant-vrs:1"), "in", 0, seed=0)
        with pytest.raises(PreconditionError):
            duality_check(D, 0, TechSpec.parse("quant-vrs:+inf"), "in", 5, seed=0)
