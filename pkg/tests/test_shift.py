import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewlab.shift import (MarkovShift, admissible_words, common_prefix, flatten, metric_distance,
                           mixing_class, p_power_shift, period, sigma_free, word_array)

from conftest import all_words, cycle_shift, irreducible_shifts

BIPARTITE = MarkovShift.from_rows(["01", "10"])
TWO_LOOPS = MarkovShift.from_rows(["10", "01"])


def test_admissible_word_counts():
    assert len(admissible_words(MarkovShift.full(2), 2)) == 4
    assert len(admissible_words(sigma_free(2), 2)) == 12
    assert admissible_words(cycle_shift(3), 3) == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]


def test_words_are_lexicographic_and_match_brute_force():
    shift = sigma_free(2)
    for n in range(1, 5):
        words = admissible_words(shift, n)
        assert words == sorted(words) == all_words(shift, n)
        assert [tuple(r) for r in word_array(shift, n)] == words


def test_rejects_unpruned_or_malformed():
    with pytest.raises(ValueError, match="no admissible successor"):
        MarkovShift.from_rows(["11", "00"])
    with pytest.raises(ValueError, match="row 1"):
        MarkovShift.from_rows(["11", "1"])
    with pytest.raises(ValueError):
        admissible_words(MarkovShift.full(2), 0)


def test_mixing_classes():
    rep = mixing_class(MarkovShift.full(2))
    assert rep.kind == "finitely-primitive" and rep.witness_length == 1
    assert set(rep.witness) == {(i, j) for i in range(2) for j in range(2)}
    rep = mixing_class(cycle_shift(3))
    assert rep.kind == "irreducible-periodic" and rep.period == 3
    rep = mixing_class(TWO_LOOPS)
    assert rep.kind == "reducible" and len(rep.components) == 2


@given(irreducible_shifts(aperiodic=True))
@settings(max_examples=40, deadline=None)
def test_primitivity_witness_connects_every_pair(shift):
    rep = mixing_class(shift)
    assert rep.kind == "finitely-primitive"
    for (i, j), w in rep.witness.items():
        assert len(w) == rep.witness_length
        assert shift.is_admissible((i,) + w + (j,))


def test_periods():
    assert all(period(MarkovShift.full(t)) == 1 for t in range(1, 5))
    assert period(BIPARTITE) == 2
    assert period(cycle_shift(3)) == 3
    with pytest.raises(ValueError):
        period(TWO_LOOPS)


@given(irreducible_shifts())
@settings(max_examples=40, deadline=None)
def test_period_divides_every_loop_length(shift):
    p = period(shift)
    A = shift.incidence.astype(np.int64)
    P = np.eye(shift.alphabet_size, dtype=np.int64)
    for length in range(1, 13):
        P = (P @ A > 0).astype(np.int64)
        if np.trace(P) > 0:
            assert length % p == 0


def test_p_power_shift():
    same, words = p_power_shift(MarkovShift.full(2), 1)
    assert same.rows() == MarkovShift.full(2).rows() and words == [(0,), (1,)]
    four, _ = p_power_shift(MarkovShift.full(2), 2)
    assert four.alphabet_size == 4 and four.incidence.all()
    split, _ = p_power_shift(BIPARTITE, 2)
    assert mixing_class(split).kind == "reducible"
    assert len(mixing_class(split).components) == 2


@given(irreducible_shifts(max_size=3), st.integers(1, 3), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_p_power_flattening_reproduces_words(shift, p, n):
    rec, words = p_power_shift(shift, p)
    flat = sorted(flatten(words, w) for w in admissible_words(rec, n))
    assert flat == admissible_words(shift, p * n)


@given(irreducible_shifts(max_size=3), st.integers(1, 6))
@settings(max_examples=30, deadline=None)
def test_prefix_projection_and_extension(shift, n):
    longer = admissible_words(shift, n + 1)
    shorter = admissible_words(shift, n)
    assert sorted({w[:n] for w in longer}) == shorter
    for w in shorter:
        assert any(shift.is_admissible(w + (j,)) for j in range(shift.alphabet_size))


def test_metric_examples():
    assert metric_distance(1.0, (0, 1, 1), (0, 1, 1)) == 0.0
    assert metric_distance(1.0, (0, 1), (1, 1)) == 1.0
    assert metric_distance(1.0, (0, 1, 0), (0, 1, 1)) == pytest.approx(math.exp(-2))
    assert common_prefix((0, 1), (0, 1)) == math.inf
    with pytest.raises(ValueError):
        metric_distance(0.0, (0,), (1,))


words3 = st.lists(st.integers(0, 2), min_size=6, max_size=6).map(tuple)


@given(words3, words3, words3, st.floats(0.1, 3))
def test_metric_is_ultrametric(x, y, z, alpha):
    d = lambda a, b: metric_distance(alpha, a, b)
    assert d(x, z) <= max(d(x, y), d(y, z)) + 1e-15
