# Compiled inner loops. Array layout: automata are flat, index
# ((bank * U) + clause) * W + literal with W = 2L; clause streams are flat
# bank * U + clause. Stream kinds follow rng.RngKind (0 = PCG, 1 = LFSR).
import numpy as np
from numba import njit

_PCG_MULT = np.uint64(6364136223846793005)
_U1 = np.uint64(1)
_U18 = np.uint64(18)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U32 = np.uint64(32)
_U59 = np.uint64(59)
_M32 = np.uint64(0xFFFFFFFF)

TRACE_COLS = 10
FLAG_MASKED = 1
FLAG_WRAPPED = 2


@njit(cache=True, inline="always")
def _raw(kind, width, tmask, st, inc, i):
    if kind == 0:
        old = st[i]
        st[i] = old * _PCG_MULT + inc[i]
        xs = (((old >> _U18) ^ old) >> _U27) & _M32
        rot = old >> _U59
        return ((xs >> rot) | (xs << ((_U32 - rot) & _U31))) & _M32
    s = st[i]
    x = s & tmask
    x ^= x >> np.uint64(32)
    x ^= x >> np.uint64(16)
    x ^= x >> np.uint64(8)
    x ^= x >> np.uint64(4)
    x ^= x >> np.uint64(2)
    x ^= x >> _U1
    s = (s >> _U1) | ((x & _U1) << np.uint64(width - 1))
    st[i] = s
    return s


@njit(cache=True)
def draw_raw(kind, width, tmask, st, inc, i, count):
    out = np.empty(count, dtype=np.uint64)
    for c in range(count):
        out[c] = _raw(kind, width, tmask, st, inc, i)
    return out


@njit(cache=True, inline="always")
def _settle(raw, or_m, and_m, n):
    v = (raw | or_m) & and_m
    flags = 0
    if v != raw:
        flags |= FLAG_MASKED
    if v < 1 or v > 2 * n:
        w = (v - 1) % (2 * n) + 1
        flags |= FLAG_WRAPPED
        again = (w | or_m) & and_m
        if again >= 1 and again <= 2 * n:
            w = again
        v = w
    return v, flags


@njit(cache=True)
def init_states(states, or_m, and_m, st, inc, kind, width, tmask, n, mode):
    """mode 0: random s_n / s_{n+1} (one draw each), 1: s_n, 2: s_{n+1}."""
    half = np.uint64(1) << np.uint64(width - 1)
    for i in range(states.shape[0]):
        if mode == 0:
            r = _raw(kind, width, tmask, st, inc, i)
            raw = n if r < half else n + 1
        elif mode == 1:
            raw = n
        else:
            raw = n + 1
        v, _ = _settle(raw, or_m[i], and_m[i], n)
        states[i] = v


@njit(cache=True)
def clause_outputs(states, lits, bank, U, W, n, infer, out):
    for j in range(U):
        base = (bank * U + j) * W
        fire = 1
        any_inc = False
        for k in range(W):
            if states[base + k] > n:
                any_inc = True
                if lits[k] == 0:
                    fire = 0
                    break
        if infer and not any_inc:
            fire = 0
        out[j] = fire


@njit(cache=True)
def class_sums(states, X, B, U, W, n, infer):
    N = X.shape[0]
    sums = np.zeros((N, B), dtype=np.int64)
    out = np.empty(U, dtype=np.int64)
    for s in range(N):
        for b in range(B):
            clause_outputs(states, X[s], b, U, W, n, infer, out)
            v = 0
            for j in range(U):
                if j % 2 == 0:
                    v += out[j]
                else:
                    v -= out[j]
            sums[s, b] = v
    return sums


@njit(cache=True)
def _update_bank(states, or_m, and_m, ta_st, ta_inc, cl_st, cl_inc, kind, width, tmask,
                 lits, bank, target, U, W, n, T, thr1, thr2, counters, out,
                 trace, ntrace, trace_on, trace_inaction, epoch, step):
    clause_outputs(states, lits, bank, U, W, n, False, out)
    v = 0
    for j in range(U):
        if j % 2 == 0:
            v += out[j]
        else:
            v -= out[j]
    if v > T:
        v = T
    elif v < -T:
        v = -T
    num = T - v if target else T + v
    sel = np.uint64((num << width) // (2 * T))
    for j in range(U):
        r = _raw(kind, width, tmask, cl_st, cl_inc, bank * U + j)
        if r >= sel:
            continue
        positive = j % 2 == 0
        ftype = 1 if positive == target else 2
        c = out[j]
        base = (bank * U + j) * W
        for k in range(W):
            i = base + k
            before = states[i]
            act = 1 if before > n else 0
            ci = (ftype - 1) * 8 + act * 4 + c * 2 + lits[k]
            t1 = thr1[ci]
            if t1 < 0:
                raise ValueError("unreachable feedback cell: included 0-literal in a firing clause")
            r1 = _raw(kind, width, tmask, ta_st, ta_inc, i)
            r2 = _raw(kind, width, tmask, ta_st, ta_inc, i)
            if r1 < np.uint64(t1):
                ev = 1
            elif r2 < np.uint64(thr2[ci]):
                ev = 2
            else:
                ev = 0
            after = before
            flags = 0
            if ev == 0:
                counters[4] += 1
            else:
                if ev == 1:
                    if act == 1:
                        raw = before + 1 if before < 2 * n else before
                    else:
                        raw = before - 1 if before > 1 else before
                else:
                    raw = before - 1 if act == 1 else before + 1
                after, flags = _settle(raw, or_m[i], and_m[i], n)
                states[i] = after
                counters[(ftype - 1) * 2 + (ev - 1)] += 1
            if trace_on and (ev != 0 or trace_inaction):
                row = trace[ntrace]
                row[0] = epoch
                row[1] = step
                row[2] = bank
                row[3] = j
                row[4] = k
                row[5] = ftype
                row[6] = ev
                row[7] = before
                row[8] = after
                row[9] = flags
                ntrace += 1
    return ntrace


@njit(cache=True)
def train_epoch(states, or_m, and_m, ta_st, ta_inc, cl_st, cl_inc, kind, width, tmask,
                X, Y, order, negs, U, W, n, T, binary, thr1, thr2, counters,
                trace, trace_on, trace_inaction, epoch):
    """One pass over ``order``; returns the number of trace rows written."""
    out = np.empty(U, dtype=np.int64)
    ntrace = 0
    for t in range(order.shape[0]):
        s = order[t]
        lits = X[s]
        y = Y[s]
        if binary:
            ntrace = _update_bank(states, or_m, and_m, ta_st, ta_inc, cl_st, cl_inc, kind, width, tmask,
                                  lits, 0, y == 1, U, W, n, T, thr1, thr2, counters, out,
                                  trace, ntrace, trace_on, trace_inaction, epoch, t)
        else:
            ntrace = _update_bank(states, or_m, and_m, ta_st, ta_inc, cl_st, cl_inc, kind, width, tmask,
                                  lits, y, True, U, W, n, T, thr1, thr2, counters, out,
                                  trace, ntrace, trace_on, trace_inaction, epoch, t)
            if negs[t] >= 0:
                ntrace = _update_bank(states, or_m, and_m, ta_st, ta_inc, cl_st, cl_inc, kind, width, tmask,
                                      lits, negs[t], False, U, W, n, T, thr1, thr2, counters, out,
                                      trace, ntrace, trace_on, trace_inaction, epoch, t)
    return ntrace
