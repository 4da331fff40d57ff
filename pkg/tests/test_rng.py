import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import factorint

from frugaltm import _kernels as K
from frugaltm.rng import (
    LFSR_TAPS, MASK64, PCG_MULTIPLIER, RngKind, RngSpec, RngStream, StreamBank, derive_seed, derive_seeds,
    lfsr_step, mix64, pcg_output, pcg_seed, tap_mask, threshold,
)


def _polymulmod(a: int, b: int, mod: int, deg: int) -> int:
    """Carry-less product of two GF(2) polynomials reduced by ``mod`` (degree ``deg``)."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> deg & 1:
            a ^= mod
    return out


def _polypow(e: int, mod: int, deg: int) -> int:
    result, base = 1, 0b10  # x
    while e:
        if e & 1:
            result = _polymulmod(result, base, mod, deg)
        base = _polymulmod(base, base, mod, deg)
        e >>= 1
    return result


def _is_primitive(taps, w) -> bool:
    poly = 1 | (1 << w)
    for t in taps:
        poly |= 1 << t
    order = (1 << w) - 1
    if _polypow(order, poly, w) != 1:
        return False
    return all(_polypow(order // q, poly, w) != 1 for q in factorint(order))


@pytest.mark.parametrize("w", sorted(LFSR_TAPS))
def test_tap_table_is_primitive(w):
    assert LFSR_TAPS[w][0] == w
    assert _is_primitive(LFSR_TAPS[w], w)


def test_lfsr_step_example():
    assert lfsr_step(0b0001, 4, tap_mask(4)) == 0b1000


@pytest.mark.parametrize("w", [4, 5, 6, 7, 8])
def test_lfsr_period_is_maximal(w):
    s = RngStream.lfsr(w, 1)
    seen = []
    for _ in range(2**w - 1):
        seen.append(s.next_raw())
    assert len(set(seen)) == 2**w - 1
    assert 0 not in seen
    assert s.next_raw() == seen[0]


def test_lfsr_w4_fifteen_states_then_repeat():
    s = RngStream.lfsr(4, 1)
    vals = [s.next_raw() for _ in range(16)]
    assert len(set(vals[:15])) == 15 and vals[15] == vals[0]


@pytest.mark.parametrize("w", [9, 12, 16])
def test_wider_lfsr_period_brute_force(w):
    mask, start, state = tap_mask(w), 1, 1
    for i in range(1, 2**w):
        state = lfsr_step(state, w, mask)
        if state == start:
            assert i == 2**w - 1
            break


def test_pcg_reference_vector():
    # pcg32 demo stream: seed 42, sequence 54
    state, inc = pcg_seed(42, 54)
    out = []
    for _ in range(6):
        old = state
        state = (state * PCG_MULTIPLIER + inc) & MASK64
        out.append(pcg_output(old))
    assert out == [0xA15C02B7, 0x7B47F409, 0xBA1D3330, 0x83D2F293, 0xBFA4784B, 0xCBED606E]


def test_pcg_outputs_vary_and_repeat_by_seed():
    a, b = RngStream.pcg64(42), RngStream.pcg64(42)
    xs = [a.next_raw() for _ in range(10)]
    assert xs[0] != xs[1]
    assert xs == [b.next_raw() for _ in range(10)]
    assert xs != [RngStream.pcg64(43).next_raw() for _ in range(10)]


def test_spec_validation():
    with pytest.raises(ValueError):
        RngSpec(RngKind.LFSR, 3, 1)
    with pytest.raises(ValueError):
        RngSpec(RngKind.LFSR, 33, 1)
    with pytest.raises(ValueError):
        RngSpec(RngKind.LFSR, 8, 256)
    with pytest.raises(ValueError):
        RngSpec.parse("mt19937")
    assert RngSpec.parse("lfsr:8", 256).seed % 256 != 0
    assert RngSpec.parse("LFSR:12").label() == "lfsr:12"


def test_bernoulli_endpoints():
    for s in (RngStream.pcg64(1), RngStream.lfsr(4, 3)):
        assert not any(s.bernoulli(0.0) for _ in range(100))
        assert all(s.bernoulli(1.0) for _ in range(100))
    with pytest.raises(ValueError):
        RngStream.pcg64(1).bernoulli(1.5)
    with pytest.raises(ValueError):
        threshold(-0.1, 8)


def test_bernoulli_full_period_w4_half():
    s = RngStream.lfsr(4, 1)
    assert sum(s.bernoulli(0.5) for _ in range(15)) == 7


@settings(max_examples=200, deadline=None)
@given(w=st.integers(4, 8), p=st.floats(0, 1))
def test_bernoulli_quantization_bound(w, p):
    s = RngStream.lfsr(w, 1)
    period = 2**w - 1
    freq = sum(s.bernoulli(p) for _ in range(period)) / period
    assert abs(freq - p) <= 2 / period + 1e-12


def test_derive_seed_vectorized_matches_scalar():
    idx = np.arange(50, dtype=np.uint64)
    vec = derive_seeds(12345, idx)
    assert [int(v) for v in vec] == [derive_seed(12345, i) for i in range(50)]
    assert len(set(int(v) for v in vec)) == 50


def test_mix64_known_value():
    # SplitMix64 first output for state 0 (state += gamma, then finalize)
    assert mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("spec", [RngSpec(RngKind.PCG64, 32, 9), RngSpec(RngKind.LFSR, 7, 9),
                                  RngSpec(RngKind.LFSR, 16, 9)])
def test_stream_bank_matches_scalar_streams(spec):
    bank = StreamBank.create(spec, 77, 20)
    for i in range(20):
        ref = RngStream(spec.with_seed(derive_seed(77, i)))
        got = K.draw_raw(bank.kind, bank.width, np.uint64(bank.mask), bank.state, bank.inc, i, 40)
        assert [int(v) for v in got] == [ref.next_raw() for _ in range(40)]
        # the scalar view continues where the kernel stopped
        assert bank.stream(i).next_raw() == ref.next_raw()


def test_below_and_shuffle():
    s = RngStream.pcg64(5)
    vals = [s.below(7) for _ in range(2000)]
    assert min(vals) == 0 and max(vals) == 6
    perm = RngStream.pcg64(5).shuffle(list(range(30)))
    assert sorted(perm) == list(range(30))
    assert perm == RngStream.pcg64(5).shuffle(list(range(30)))
