import pytest
from hypothesis import given
from hypothesis import strategies as st

from frugaltm.automata import (
    Action, Event, FaultSpec, TsetlinAutomaton, check_fault, min_steps_to_saturation, register_bits, settle, step,
    wrap,
)
from frugaltm.rng import RngStream


class _Forced:
    def __init__(self, low: bool):
        self.low = low

    def bernoulli(self, p):
        return self.low


def test_init_forced_draws():
    assert TsetlinAutomaton.init(3, _Forced(True)).state == 3
    assert TsetlinAutomaton.init(3, _Forced(False)).state == 4


def test_init_with_fault_masks_once():
    a = TsetlinAutomaton.init(3, _Forced(False), FaultSpec(0, 1))
    assert a.state == 5


def test_init_is_random_half_half():
    rng = RngStream.pcg64(3)
    states = [TsetlinAutomaton.init(5, rng).state for _ in range(4000)]
    assert set(states) == {5, 6}
    assert 0.45 < states.count(5) / 4000 < 0.55


def test_action_decode():
    assert TsetlinAutomaton(3, 3).action == Action.EXCLUDE
    assert TsetlinAutomaton(3, 4).action == Action.INCLUDE
    assert TsetlinAutomaton(1, 2).action == Action.INCLUDE
    assert TsetlinAutomaton(1, 1).action == Action.EXCLUDE


def test_reinforce_examples():
    assert TsetlinAutomaton(3, 3).reinforce(Event.PENALTY).state == 4
    assert TsetlinAutomaton(3, 1).reinforce(Event.REWARD).state == 1
    assert TsetlinAutomaton(3, 6).reinforce(Event.REWARD).state == 6
    assert TsetlinAutomaton(3, 4).reinforce(Event.PENALTY).state == 3
    assert TsetlinAutomaton(3, 4).reinforce(Event.INACTION).state == 4


def test_faulty_reward_at_top_wraps_to_one():
    a = TsetlinAutomaton(3, 5, FaultSpec(0, 1))
    assert a.reinforce(Event.REWARD).state == 1  # 6 -> masked 7 -> wrap 1
    assert settle(6, 3, FaultSpec(0, 1)) == (1, True, True)


def test_faulty_penalty_three_to_five():
    assert settle(4, 3, FaultSpec(0, 1)) == (5, True, False)
    assert TsetlinAutomaton(3, 3, FaultSpec(0, 1)).reinforce(Event.PENALTY).state == 5


def test_fault_bit_validation():
    assert register_bits(3) == 3
    with pytest.raises(ValueError):
        check_fault(3, FaultSpec(3, 1))
    with pytest.raises(ValueError):
        TsetlinAutomaton(3, 3, FaultSpec(5, 0))
    with pytest.raises(ValueError):
        FaultSpec(0, 2)
    with pytest.raises(ValueError):
        TsetlinAutomaton(3, 7)


def _faults(n):
    out = [None]
    for b in range(register_bits(n)):
        out += [FaultSpec(b, 0), FaultSpec(b, 1)]
    return out


def test_state_bounds_exhaustive():
    for n in range(1, 17):
        for fault in _faults(n):
            for s in range(1, 2 * n + 1):
                a = TsetlinAutomaton(n, settle(s, n, fault)[0], fault)
                for ev in Event:
                    b = a.reinforce(ev)
                    assert 1 <= b.state <= 2 * n, (n, fault, s, ev)
                    if fault is None:
                        assert abs(b.state - a.state) <= 1
                        if ev == Event.REWARD:
                            assert b.action == a.action


def _reachable(n, fault):
    start = {settle(n, n, fault)[0], settle(n + 1, n, fault)[0]}
    seen, todo = set(start), list(start)
    while todo:
        s = todo.pop()
        for ev in (Event.REWARD, Event.PENALTY):
            t = settle(step(s, n, ev), n, fault)[0]
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def test_reachable_set_bit0_stuck1():
    assert _reachable(3, FaultSpec(0, 1)) == {1, 3, 5}
    assert _reachable(3, None) == set(range(1, 7))


@given(n=st.integers(1, 16), raw=st.integers(-40, 80))
def test_wrap_lands_in_range(n, raw):
    assert 1 <= wrap(raw, n) <= 2 * n


def test_min_steps():
    assert min_steps_to_saturation(3) == 3
    assert min_steps_to_saturation(1) == 1
    assert min_steps_to_saturation(50) == 50
    # from s3: three rewards reach s1; one penalty then three rewards reach s6
    a = TsetlinAutomaton(3, 3)
    for _ in range(3):
        a = a.reinforce(Event.REWARD)
    assert a.state == 1
    b = TsetlinAutomaton(3, 3).reinforce(Event.PENALTY)
    for _ in range(2):
        b = b.reinforce(Event.REWARD)
    assert b.state == 6
