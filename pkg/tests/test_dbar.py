import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import GOLDEN, SEEDS
from nonadapt.construction_a import ConstructionAParams, NuPSampler, dbar_bound_A, make_pK, sample_joining_A
from nonadapt.construction_b import BinaryPV, dbar_bound_B, mu_prime_marginal, sample_coupled_path
from nonadapt.dbar import (
    DbarError,
    DbarEstimate,
    InvalidJoiningError,
    JoiningSampler,
    binary_entropy,
    cylinder_table,
    dbar_exact_bernoulli,
    dbar_lower_1block,
    dbar_upper,
    entropy_continuity_bound,
    exact_cylinder_table,
    maximal_coupling,
    sample_maximal_coupling,
    weak_star_cylinder_metric,
)
from nonadapt.measures import (
    GapDistribution,
    MarkovMeasure,
    MarkovSampler,
    entropy_empirical,
    parry_measure,
)
from nonadapt.sft import Sft

F = Fraction
COIN = MarkovMeasure.bernoulli([0.5, 0.5])
P13 = GapDistribution.from_weights({1: F(1, 2), 3: F(1, 2)})


def rational_vectors(J):
    return st.lists(st.integers(0, 30), min_size=J, max_size=J).filter(sum).map(
        lambda w: [F(v, sum(w)) for v in w]
    )


def construction_a_joining(gaps, t):
    params = ConstructionAParams(Sft.full_shift(2), gaps, (0,), t, 1, MarkovSampler(COIN))
    return JoiningSampler(lambda n, s: sample_joining_A(params, n, s)[:2], (np.array([0.5, 0.5]), None))


def construction_b_joining(p, q, base=COIN):
    s = MarkovSampler(base)
    m = base.stationary
    return JoiningSampler(
        lambda n, seed: sample_coupled_path(s, p, q, n, seed),
        (mu_prime_marginal(m, p), mu_prime_marginal(m, q)),
        base.J,
    )


class TestUpper:
    def test_diagonal(self):
        est = dbar_upper(JoiningSampler.diagonal(MarkovSampler(parry_measure(GOLDEN))), 10_000, replicas=5)
        assert est.value == 0 and est.side == "upper"

    def test_construction_a(self):
        est = dbar_upper(construction_a_joining(P13, 0), 20_000, replicas=20, seed=1)
        assert est.value <= float(dbar_bound_A(P13)) + est.radius
        assert len(est.seeds) == 20 and est.n == 400_000

    def test_construction_b(self):
        P, Q = BinaryPV(F(1, 3)), BinaryPV(F(1, 4))
        est = dbar_upper(construction_b_joining(P, Q), 20_000, seed=2)
        assert est.value <= 1 / 12 + est.radius

    def test_marginal_contract(self):
        s = MarkovSampler(COIN)
        bad = JoiningSampler(lambda n, seed: (s.sample(n, seed), s.sample(n, seed)), (np.array([0.9, 0.1]), None))
        with pytest.raises(InvalidJoiningError):
            dbar_upper(bad, 10_000, replicas=2)

    def test_length_mismatch(self):
        j = JoiningSampler(lambda n, s: (np.zeros(n, dtype=int), np.zeros(n + 1, dtype=int)))
        with pytest.raises(DbarError):
            dbar_upper(j, 10, replicas=2)

    def test_reproducible_and_serializable(self):
        j = construction_b_joining(BinaryPV(F(1, 3)), BinaryPV(F(1, 2)))
        a, b = dbar_upper(j, 5_000, replicas=4, seed=9), dbar_upper(j, 5_000, replicas=4, seed=9)
        assert a == b
        assert a.as_dict()["side"] == "upper" and len(a.as_dict()["seeds"]) == 4


class TestLower:
    def test_examples(self):
        assert dbar_lower_1block([F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]).value == 0
        assert dbar_lower_1block([F(1, 2), F(1, 2)], [F(3, 4), F(1, 4)]).exact_value == F(1, 4)
        assert dbar_lower_1block([1, 0], [F(1, 2), F(1, 2)]).exact_value == F(1, 2)

    def test_dimension(self):
        with pytest.raises(DbarError):
            dbar_lower_1block([1, 0], [1, 0, 0])

    @given(rational_vectors(3), rational_vectors(3))
    def test_maximal_coupling(self, a, b):
        C = maximal_coupling([float(v) for v in a], [float(v) for v in b])
        assert C.sum(axis=1) == pytest.approx([float(v) for v in a])
        assert C.sum(axis=0) == pytest.approx([float(v) for v in b])
        assert 1 - np.trace(C) == pytest.approx(float(dbar_lower_1block(a, b).exact_value), abs=1e-12)


class TestExact:
    def test_examples(self):
        assert dbar_exact_bernoulli([0.5, 0.5], [0.5, 0.5]).value == 0
        est = dbar_exact_bernoulli([F(1, 2), F(1, 2)], [F(3, 4), F(1, 4)], verify_length=100_000)
        assert est.side == "exact" and est.exact_value == F(1, 4)

    def test_pinch_at_one_million(self):
        m1, m2 = [0.2, 0.5, 0.3], [0.4, 0.4, 0.2]
        est = dbar_exact_bernoulli(m1, m2, verify_length=1_000_000, replicas=20, seed=3)
        assert est.value == pytest.approx(0.2)

    def test_sandwich(self):
        m1, m2 = [0.3, 0.7], [0.6, 0.4]
        lower = dbar_lower_1block(m1, m2)
        upper = dbar_upper(
            JoiningSampler(lambda n, s: sample_maximal_coupling(m1, m2, n, s), (np.array(m1), np.array(m2))), 50_000
        )
        assert lower.consistent_with(upper) and upper.consistent_with(lower)
        assert abs(upper.value - lower.value) <= upper.radius

    @settings(max_examples=50)
    @given(rational_vectors(3), rational_vectors(3), rational_vectors(3))
    def test_metric_axioms(self, a, b, c):
        d = lambda u, v: dbar_exact_bernoulli(u, v).exact_value
        assert d(a, a) == 0
        assert d(a, b) == d(b, a)
        assert d(a, c) <= d(a, b) + d(b, c)

    @given(st.fractions(0, 1, max_denominator=50), st.fractions(0, 1, max_denominator=50))
    def test_construction_b_consistency(self, a, b):
        p, q = BinaryPV(a), BinaryPV(b)
        m1 = [F(1, 2) * p.p1 + p.p0, F(1, 2) * p.p1]
        m2 = [F(1, 2) * q.p1 + q.p0, F(1, 2) * q.p1]
        assert dbar_exact_bernoulli(m1, m2).exact_value <= dbar_bound_B(p, q)


class TestEntropyContinuity:
    def test_examples(self):
        assert entropy_continuity_bound(0.0, 2) == 0
        assert entropy_continuity_bound(0.5, 2) == pytest.approx(math.log(2))
        assert entropy_continuity_bound(1.0, 3) == pytest.approx(math.log(3))
        assert binary_entropy(0) == binary_entropy(1) == 0

    def test_out_of_range(self):
        with pytest.raises(DbarError):
            entropy_continuity_bound(1.5, 2)

    def test_radius_is_added_for_upper_estimates(self):
        d = DbarEstimate(0.1, "upper", 0.05)
        assert entropy_continuity_bound(d, 3) == pytest.approx(entropy_continuity_bound(0.15, 3))

    @pytest.mark.parametrize("K", [1, 4, 16])
    def test_observed_entropy_gap(self, K):
        params = ConstructionAParams(Sft.full_shift(2), make_pK(K, 1, 1), (0,), 1, 1, MarkovSampler(COIN))
        h_nu = entropy_empirical(MarkovSampler(COIN), n=200_000, seed=0)
        h_mu = entropy_empirical(NuPSampler(params), n=200_000, seed=0)
        bound = entropy_continuity_bound(float(dbar_bound_A(params.gaps)), 2)
        assert abs(h_nu.value - h_mu.value) <= bound + h_nu.band + h_mu.band


class TestWeakStar:
    def test_identical(self):
        x = MarkovSampler(COIN).sample(10_000, 0)
        t = cylinder_table(x, 5, 2)
        assert weak_star_cylinder_metric(t, t, 5) == 0

    def test_disjoint_deltas(self):
        t0 = cylinder_table(np.zeros(100, dtype=int), 4, 2)
        t1 = cylinder_table(np.ones(100, dtype=int), 4, 2)
        assert weak_star_cylinder_metric(t0, t1, 4) >= 0.5

    def test_incomplete(self):
        t = cylinder_table(np.zeros(10, dtype=int), 2, 2)
        with pytest.raises(DbarError):
            weak_star_cylinder_metric(t, t, 3)

    def test_exact_table(self):
        t = exact_cylinder_table(COIN.cylinder, 2, 3)
        assert t[3] == pytest.approx(np.full(8, 1 / 8))

    @pytest.mark.parametrize("a,b", [(0.0, 0.5), (0.1, 0.2), (0.3, 0.9)])
    def test_bounded_by_dbar_upper(self, a, b):
        p, q = BinaryPV(a), BinaryPV(b)
        j = construction_b_joining(p, q, parry_measure(GOLDEN))
        up = dbar_upper(j, 20_000, replicas=20, seed=5)
        x, y = j.draw(200_000, 1)
        zeta = weak_star_cylinder_metric(cylinder_table(x, 6, 2), cylinder_table(y, 6, 2), 6)
        assert zeta <= up.value + up.radius


class TestReplicaSeeds:
    def test_seeds_listed(self):
        est = dbar_upper(JoiningSampler.diagonal(MarkovSampler(COIN)), 100, replicas=len(SEEDS), seed=7)
        assert len(set(est.seeds)) == len(SEEDS)
