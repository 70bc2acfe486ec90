import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import GOLDEN, PERIOD2, all_sfts
from nonadapt.sft import (
    Sft,
    SftError,
    StructureError,
    connector,
    cyclic_decomposition,
    format_sft,
    higher_block,
    is_admissible,
    is_safe,
    parse_sft,
    transition_length,
)


def words(J, n):
    return [list(w) for w in product(range(J), repeat=n)]


def brute_admissible(word, A):
    return all(A[a][b] for a, b in zip(word, word[1:]))


def brute_period(sft):
    """gcd of the lengths of closed walks of length <= J (simple cycles suffice)."""
    A = sft.matrix
    P = np.eye(sft.J, dtype=np.int64)
    g = 0
    for k in range(1, sft.J + 1):
        P = (P @ A > 0).astype(np.int64)
        if np.trace(P) > 0:
            g = math.gcd(g, k)
    return g


def brute_transition_length(sft):
    for t in range(1, sft.J**2 + 1):
        ok = all(
            any(brute_admissible([a, *v, b], sft.adjacency) for v in product(range(sft.J), repeat=t))
            for a in range(sft.J)
            for b in range(sft.J)
        )
        if ok:
            return t
    return None


class TestConstruction:
    def test_full_shift(self):
        s = Sft.full_shift(3)
        assert s.J == 3 and s.is_mixing

    @pytest.mark.parametrize(
        "rows",
        [[], [[1, 1]], [[1, 2], [1, 1]], [[0, 0], [1, 1]], [[1, 0], [1, 0]]],
    )
    def test_rejects_bad_matrices(self, rows):
        with pytest.raises(SftError):
            Sft(rows)

    def test_transitive_vs_mixing(self):
        assert GOLDEN.is_mixing
        assert PERIOD2.is_transitive and not PERIOD2.is_mixing
        assert not Sft([[1, 0], [0, 1]]).is_transitive


class TestAdmissibility:
    def test_golden_mean_exhaustive(self):
        # independent oracle: the golden-mean shift forbids the block "11"
        for n in range(0, 9):
            for w in words(2, n):
                assert is_admissible(w, GOLDEN) == ("11" not in "".join(map(str, w)))

    @pytest.mark.parametrize("J", [1, 2])
    def test_round_trip_all_small_sfts(self, J):
        for sft in all_sfts(J):
            for n in range(4):
                for w in words(J, n):
                    assert is_admissible(w, sft) == brute_admissible(w, sft.adjacency)

    def test_round_trip_three_symbols(self):
        for sft in all_sfts(3):
            for w in words(3, 3):
                assert is_admissible(w, sft) == brute_admissible(w, sft.adjacency)

    def test_symbol_out_of_range(self):
        with pytest.raises(SftError):
            is_admissible([0, 2], GOLDEN)

    def test_short_words(self):
        assert is_admissible([], GOLDEN)
        assert is_admissible([1], GOLDEN)


class TestCyclicStructure:
    def test_period_two_example(self):
        d = cyclic_decomposition(PERIOD2)
        assert d.period == 2
        assert d.classes == (frozenset({0}), frozenset({1, 2}))

    def test_cycle_permutation(self):
        d = cyclic_decomposition(Sft([[0, 1, 0], [0, 0, 1], [1, 0, 0]]))
        assert d.period == 3

    def test_base_symbol_sits_in_class_zero(self):
        d = cyclic_decomposition(PERIOD2, base_symbol=2)
        assert 2 in d.classes[0] and d.class_of(0) == 1

    def test_not_transitive(self):
        with pytest.raises(StructureError):
            cyclic_decomposition(Sft([[1, 0], [0, 1]]))

    @pytest.mark.parametrize("J", [1, 2, 3])
    def test_exhaustive(self, J):
        for sft in all_sfts(J):
            if not sft.is_transitive:
                continue
            d = cyclic_decomposition(sft)
            assert d.period == brute_period(sft)
            assert sorted(s for c in d.classes for s in c) == list(range(J))
            for a in range(J):
                for b in sft.successors(a):
                    assert d.class_of(b) == (d.class_of(a) + 1) % d.period
            hb = higher_block(sft, d)
            assert hb.sft.is_mixing
            for k, word in enumerate(hb.symbols):
                assert is_admissible(word, sft)
                assert hb.encode(word) == [k]
                assert hb.expand([k]).tolist() == list(word)


class TestHigherBlock:
    def test_period_two(self):
        hb = higher_block(PERIOD2, cyclic_decomposition(PERIOD2))
        assert hb.symbols == ((0, 1), (0, 2))
        assert hb.sft.adjacency == ((1, 1), (1, 1))

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=30))
    def test_expand_encode_round_trip(self, blocks):
        hb = higher_block(PERIOD2, cyclic_decomposition(PERIOD2))
        word = hb.expand(blocks)
        assert is_admissible(word.tolist(), PERIOD2)
        assert hb.encode(word.tolist()) == blocks

    def test_encode_rejects_partial_block(self):
        hb = higher_block(PERIOD2, cyclic_decomposition(PERIOD2))
        with pytest.raises(SftError):
            hb.encode([0, 1, 0])


class TestTransitionLength:
    def test_values(self):
        assert transition_length(Sft.full_shift(2)) == 1
        assert transition_length(GOLDEN) == 1

    def test_not_mixing(self):
        with pytest.raises(StructureError):
            transition_length(PERIOD2)

    @pytest.mark.parametrize("J", [2, 3])
    def test_exhaustive(self, J):
        for sft in all_sfts(J):
            if sft.is_mixing:
                assert transition_length(sft) == brute_transition_length(sft)


class TestConnector:
    @pytest.mark.parametrize("t", [1, 2, 3])
    def test_lexicographic_least(self, t):
        for sft in [GOLDEN, Sft([[0, 1, 1], [1, 1, 0], [1, 0, 1]])]:
            for a in range(sft.J):
                for b in range(sft.J):
                    cands = [
                        v for v in product(range(sft.J), repeat=t) if brute_admissible([a, *v, b], sft.adjacency)
                    ]
                    if cands:
                        assert connector(sft, a, b, t) == min(cands)
                    else:
                        with pytest.raises(StructureError):
                            connector(sft, a, b, t)

    def test_zero_length(self):
        assert connector(GOLDEN, 0, 1, 0) == ()
        with pytest.raises(StructureError):
            connector(GOLDEN, 1, 1, 0)


class TestSafeSymbols:
    def test_golden_mean(self):
        assert is_safe(GOLDEN, 0) and not is_safe(GOLDEN, 1)

    @pytest.mark.parametrize("J", [2, 3])
    def test_exhaustive_by_overwriting(self, J):
        # oracle: i is safe iff writing i into the middle of any admissible
        # 3-word keeps it admissible
        for sft in all_sfts(J):
            triples = [w for w in words(J, 3) if brute_admissible(w, sft.adjacency)]
            for i in range(J):
                oracle = all(brute_admissible([a, i, c], sft.adjacency) for a, _, c in triples)
                assert is_safe(sft, i) == oracle


class TestTextFormat:
    def test_parse(self):
        assert parse_sft("2\n1 1\n1 0\n") == GOLDEN

    def test_row_count(self):
        with pytest.raises(SftError):
            parse_sft("3\n1 1 1\n")

    @settings(max_examples=50)
    @given(st.integers(1, 3).flatmap(lambda J: st.sampled_from(list(all_sfts(J)))))
    def test_round_trip(self, sft):
        assert parse_sft(format_sft(sft)) == sft


@pytest.mark.parametrize("J", range(4, 13))
def test_random_transitive_classes(J):
    # every edge of 20 random transitive SFTs per size goes from class i to class i+1
    rng = np.random.default_rng(J)
    found = 0
    while found < 20:
        A = (rng.random((J, J)) < rng.uniform(0.1, 0.4)).astype(int)
        # a Hamiltonian cycle keeps it transitive; a random one of length J
        perm = rng.permutation(J)
        A[perm, np.roll(perm, -1)] = 1
        sft = Sft(A.tolist())
        d = cyclic_decomposition(sft)
        assert d.period == brute_period(sft)
        for a in range(J):
            for b in sft.successors(a):
                assert d.class_of(b) == (d.class_of(a) + 1) % d.period
        if d.period > 1 or found % 4 == 0:
            hb = higher_block(sft, d)
            assert hb.sft.is_mixing
        found += 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_random_periodic_sfts(n):
    # blow up a random mixing matrix along a cycle of n classes
    rng = np.random.default_rng(n)
    for _ in range(20):
        sizes = rng.integers(1, 4, size=n)
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        J = int(offsets[-1])
        A = np.zeros((J, J), dtype=int)
        for i in range(n):
            j = (i + 1) % n
            block = (rng.random((sizes[i], sizes[j])) < 0.7).astype(int)
            block[:, 0] = 1
            block[0, :] = 1
            A[offsets[i] : offsets[i + 1], offsets[j] : offsets[j + 1]] = block
        sft = Sft(A.tolist())
        d = cyclic_decomposition(sft)
        assert d.period == brute_period(sft)
        assert d.period in {k for k in range(1, n + 1) if n % k == 0}
