from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frugaltm.automata import Action, Event
from frugaltm.feedback import (
    FeedbackTables, FeedbackType, UnreachableCell, cell, cell_index, sample_event, threshold_table,
)
from frugaltm.rng import RngStream

I, II = FeedbackType.TYPE_I, FeedbackType.TYPE_II
INC, EXC = Action.INCLUDE, Action.EXCLUDE
REFERENCE_S = [Fraction(11, 10), Fraction(6, 5), Fraction(19, 10), Fraction(4), Fraction(10), Fraction(20)]


def test_examples():
    assert cell(I, INC, 1, 1, 4.0) == (0.75, 0.25, 0)
    assert cell(II, EXC, 1, 0, 4.0) == (0, 0, 1.0)
    assert cell(II, INC, 1, 1, 4.0) == (0, 1.0, 0)


@pytest.mark.parametrize("s", REFERENCE_S)
def test_row_sums_exact(s):
    cells = list(FeedbackTables(s).cells())
    assert len(cells) == 14
    for _, probs in cells:
        assert all(isinstance(p, Fraction) for p in probs)
        assert sum(probs) == 1
        assert all(0 <= p <= 1 for p in probs)


def test_unreachable_cell_raises():
    for t in FeedbackType:
        with pytest.raises(UnreachableCell):
            cell(t, INC, 1, 0, 4.0)
    with pytest.raises(ValueError):
        cell(I, INC, 1, 1, 1.0)


@given(a=st.floats(1.01, 100), b=st.floats(1.01, 100))
def test_monotone_in_s(a, b):
    lo, hi = sorted((a, b))
    assert cell(I, INC, 1, 1, lo)[0] <= cell(I, INC, 1, 1, hi)[0]
    assert cell(I, EXC, 0, 0, lo)[0] >= cell(I, EXC, 0, 0, hi)[0]


def test_type_ii_never_rewards():
    for (t, *_), (p_r, _, _) in FeedbackTables(Fraction(3)).cells():
        if t == II:
            assert p_r == 0


def test_certain_penalty_samples_penalty():
    rng = RngStream.pcg64(1)
    assert all(sample_event(II, EXC, 1, 0, 3.0, rng) == Event.PENALTY for _ in range(100))


def test_sample_always_consumes_two_draws():
    a, b = RngStream.pcg64(8), RngStream.pcg64(8)
    sample_event(II, INC, 0, 1, 3.0, a)
    b.next_raw()
    b.next_raw()
    assert a.next_raw() == b.next_raw()


def _period_frequencies(t, act, c, lit, s, w):
    rng = RngStream.lfsr(w, 1)
    period = 2**w - 1
    counts = {e: 0 for e in Event}
    # each sample takes two draws; the period is odd, so the first draws of
    # ``period`` samples visit every register state exactly once
    for _ in range(period):
        counts[sample_event(t, act, c, lit, s, rng)] += 1
    return {e: counts[e] / period for e in Event}


def test_reward_frequency_large_s():
    w = 8
    freq = _period_frequencies(I, INC, 1, 1, 1e9, w)
    assert freq[Event.REWARD] >= (1e9 - 1) / 1e9 - 2 / (2**w - 1)


def test_reward_frequency_exclude_low_s():
    w = 12
    freq = _period_frequencies(I, EXC, 0, 0, 1.2, w)
    assert abs(freq[Event.REWARD] - 1 / 1.2) <= 2 / (2**w - 1)


def test_threshold_table_layout():
    first, second = threshold_table(4.0, 8)
    assert first[cell_index(I, INC, 1, 1)] == 192
    assert second[cell_index(II, EXC, 1, 0)] == 256
    assert first[cell_index(I, INC, 1, 0)] == -1
    assert first[cell_index(II, INC, 1, 0)] == -1
