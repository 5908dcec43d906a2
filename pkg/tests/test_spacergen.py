import json
import random
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergomix.errors import NotAGenerator, WindowTooLarge
from ergomix.numtheory import primes_in_range
from ergomix.spacergen import (
    Algebraic,
    SpacerSequence,
    Stochastic,
    algebraic_spacers,
    difference_histogram,
    make_spacers,
    partial_sums,
    stochastic_spacers,
    verify_injectivity,
    verify_range_property,
)

DATA = Path(__file__).parent / "data"


def direct_S(s, H, i, n):
    # literal definition, 1-based
    return sum(s[i + k - 1] for k in range(1, n + 1)) - n * H


def test_algebraic_example():
    seq = algebraic_spacers(Algebraic(r=7, q=3, H=7))
    assert seq.s.tolist() == [8, 3, 9, 6, 11, 5, 7]
    assert seq.s[:6].sum() == 42
    assert seq.provenance.tolist() == [3, 2, 6, 4, 5, 1, 3]


def test_algebraic_rejects_bad_input():
    with pytest.raises(NotAGenerator):
        algebraic_spacers(Algebraic(r=7, q=2, H=7))
    with pytest.raises(ValueError):
        Algebraic(r=7, q=3, H=6)


def test_algebraic_minimum_spacer_and_telescoping():
    for r in primes_in_range(3, 2000)[::7]:
        for H in (r, r + 5):
            seq = algebraic_spacers(Algebraic.minimal(r, H))
            assert seq.s.min() >= H - (r - 2)
            assert int(seq.s[:-1].sum()) == (r - 1) * H
            assert seq.s[-1] == H


def test_stochastic_determinism_and_range():
    a = stochastic_spacers(Stochastic(H=5, seed=123), 100)
    b = stochastic_spacers(Stochastic(H=5, seed=123), 100)
    assert np.array_equal(a.s, b.s) and np.array_equal(a.provenance, b.provenance)
    assert a.s.min() >= 0 and a.s.max() <= 10
    assert a.provenance.size == 101
    assert np.array_equal(a.s, 5 + a.provenance[:-1] - a.provenance[1:])


def test_stochastic_golden():
    golden = json.loads((DATA / "stochastic_H1_seed42_r10.json").read_text())
    seq = stochastic_spacers(Stochastic(H=1, seed=42), 10)
    assert seq.to_dict() == golden


def test_json_round_trip():
    seq = algebraic_spacers(Algebraic(11, 2, 11))
    back = SpacerSequence.from_dict(json.loads(json.dumps(seq.to_dict())))
    assert back.to_dict() == seq.to_dict()


def test_make_spacers_checks_cut_count():
    with pytest.raises(ValueError):
        make_spacers(Algebraic(7, 3, 7), 11)
    assert make_spacers(Stochastic(3, 1), 9).r == 9


def test_partial_sums_example():
    seq = algebraic_spacers(Algebraic(7, 3, 7))
    t = partial_sums(seq, 2)
    assert t.S(1) == -2 == seq.provenance[1] - seq.provenance[3]
    assert partial_sums(seq, 1).values.tolist() == [-4, 2, -1, 4, -2]


def test_partial_sums_window_bounds():
    seq = algebraic_spacers(Algebraic(7, 3, 7))
    assert partial_sums(seq, 5).values.size == 1
    for n in (0, 6):
        with pytest.raises(WindowTooLarge):
            partial_sums(seq, n)


def test_partial_sums_constant_sequence_is_zero():
    t = partial_sums(SpacerSequence.constant(20, 4), 3)
    assert not t.values.any()


def test_partial_sums_match_literal_definition():
    for seq in (algebraic_spacers(Algebraic.minimal(31)), stochastic_spacers(Stochastic(4, 9), 31)):
        s = seq.s.tolist()
        for n in range(1, 30):
            t = partial_sums(seq, n)
            assert t.values.tolist() == [direct_S(s, seq.H, i, n) for i in range(1, 31 - n)]


def test_stochastic_partial_sums_equal_draw_differences():
    seq = stochastic_spacers(Stochastic(H=1, seed=42), 10)
    a = [None] + seq.provenance.tolist()  # 1-based draws
    rng = random.Random(0)
    for _ in range(50):
        n = rng.randint(1, 8)
        i = rng.randint(1, 10 - n - 1)
        assert partial_sums(seq, n).S(i) == a[i + 1] - a[i + n + 1]


def test_algebraic_partial_sums_equal_residue_differences():
    seq = algebraic_spacers(Algebraic.minimal(101))
    rho = np.concatenate(([1], seq.provenance))
    for n in range(1, 100):
        t = partial_sums(seq, n)
        i = np.arange(1, 101 - n)
        assert np.array_equal(t.values, rho[i + 1] - rho[i + n + 1])


@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=2**64 - 1),
       st.integers(min_value=3, max_value=60))
@settings(max_examples=60)
def test_stochastic_telescoping_every_window(H, seed, r):
    # sum_{i=k}^{k+N-1} s(i) - N H = a(k) - a(k+N)
    seq = stochastic_spacers(Stochastic(H, seed), r)
    s, a = seq.s.tolist(), seq.provenance.tolist()
    for k in range(1, r + 1):
        for N in range(1, r - k + 2):
            assert sum(s[k - 1 : k - 1 + N]) - N * H == a[k - 1] - a[k + N - 1]


def test_range_property_examples():
    seq = algebraic_spacers(Algebraic(7, 3, 7))
    chk = verify_range_property(partial_sums(seq, 1), 7)
    assert chk.ok and chk.max_abs == 4
    chk = verify_range_property(partial_sums(SpacerSequence.constant(9, 2), 2), 9)
    assert chk.ok and chk.max_abs == 0


def test_range_property_detects_violation():
    s = np.full(8, 3, dtype=np.int64)
    s[2] = 20
    chk = verify_range_property(partial_sums(SpacerSequence(8, 3, s, "custom", np.zeros(0, dtype=np.int64)), 1), 8)
    assert not chk.ok and chk.max_abs == 17 and chk.worst_i == 2


def test_properties_exhaustive_r101():
    seq = algebraic_spacers(Algebraic.minimal(101))
    for n in range(1, 100):
        t = partial_sums(seq, n)
        assert verify_range_property(t, 101).ok
        assert verify_injectivity(t).ok


def test_injectivity_examples():
    t = partial_sums(algebraic_spacers(Algebraic(7, 3, 7)), 1)
    assert verify_injectivity(t).ok and len(set(t.values.tolist())) == 5
    chk = verify_injectivity(partial_sums(SpacerSequence.constant(10, 3), 1))
    assert not chk.ok and chk.collision == (1, 2)


def test_injectivity_reports_first_collision():
    s = np.array([5, 5, 7, 3, 5, 6, 4, 5], dtype=np.int64)
    t = partial_sums(SpacerSequence(8, 5, s, "custom", np.zeros(0, dtype=np.int64)), 1)
    # S(i,1) = s(i+1) - 5 -> [0, 2, -2, 0, 1, -1]
    assert verify_injectivity(t).collision == (1, 4)


def test_properties_for_all_primes_up_to_2000():
    for r in primes_in_range(5, 2000):
        seq = algebraic_spacers(Algebraic.minimal(r))
        for n in range(1, min(r - 2, 200) + 1):
            t = partial_sums(seq, n)
            assert verify_range_property(t, r).ok, (r, n)
            assert verify_injectivity(t).ok, (r, n)


def test_distinct_count_for_window_one():
    for r in primes_in_range(5, 500):
        t = partial_sums(algebraic_spacers(Algebraic.minimal(r)), 1)
        assert np.unique(t.values).size == r - 2


def test_difference_histogram_examples():
    h = difference_histogram(algebraic_spacers(Algebraic(7, 3, 7)), 1)
    assert h.counts == {-4: 1, -2: 1, -1: 1, 2: 1, 4: 1} and h.total == 5
    h = difference_histogram(SpacerSequence.constant(12, 2), 3)
    assert h.counts == {0: 8} and h.total == 8


def test_difference_histogram_counts_by_enumeration():
    seq = stochastic_spacers(Stochastic(6, 17), 500)
    a = seq.provenance.tolist()
    for n in (1, 2, 7):
        expected = {}
        for i in range(1, 500 - n):
            v = a[i] - a[i + n]
            expected[v] = expected.get(v, 0) + 1
        h = difference_histogram(seq, n)
        assert h.counts == expected and h.total == 500 - n - 1
