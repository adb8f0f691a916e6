"""Compiled inner loop for :func:`satgame.engine.run_batch`.

Mirrors the numpy kernels in :mod:`satgame.learners` round for round and
consumes the same uniform blocks, so both paths produce the same
trajectories.  Only games exposing ``fast_spec()`` (table, resource and RAT
families) take this path.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KIND_TABLE, KIND_RESOURCE, KIND_RAT = 0, 1, 2
ALGO_CODES = {"psel_uniform": 0, "psel_reinforced": 1, "sra": 2, "rm": 3, "rmrl": 4}


@njit(cache=True)
def _pairwise(v, lo, n):
    if n < 8:
        res = -0.0
        for i in range(n):
            res += v[lo + i]
        return res
    r0 = v[lo]; r1 = v[lo + 1]; r2 = v[lo + 2]; r3 = v[lo + 3]
    r4 = v[lo + 4]; r5 = v[lo + 5]; r6 = v[lo + 6]; r7 = v[lo + 7]
    i = 8
    while i < n - (n % 8):
        r0 += v[lo + i]; r1 += v[lo + i + 1]; r2 += v[lo + i + 2]; r3 += v[lo + i + 3]
        r4 += v[lo + i + 4]; r5 += v[lo + i + 5]; r6 += v[lo + i + 6]; r7 += v[lo + i + 7]
        i += 8
    res = ((r0 + r1) + (r2 + r3)) + ((r4 + r5) + (r6 + r7))
    while i < n:
        res += v[lo + i]
        i += 1
    return res


@njit(cache=True)
def _np_sum(v, n):
    """Sum of ``v[:n]`` in numpy's last-axis reduction order."""
    return _pairwise(v, 0, n)


@njit(cache=True)
def _table_row_table(a, tbl, counts, strides, tables):
    N = a.shape[0]
    base = 0
    for j in range(N):
        base += a[j] * strides[j]
    for i in range(N):
        for x in range(tbl.shape[1]):
            tbl[i, x] = False
        for x in range(counts[i]):
            tbl[i, x] = tables[i, base + (x - a[i]) * strides[i]]


@njit(cache=True)
def _table_row_resource(a, envu, tbl, demands, capacities, all_or_nothing, consumed):
    N = a.shape[0]
    M = capacities.shape[0]
    order = np.argsort(envu, kind="mergesort")
    for j in range(M):
        consumed[j] = 0.0
    for r in range(N):
        k = order[r]
        for j in range(M):
            tbl[k, j] = capacities[j] - consumed[j] >= demands[k]
        j = a[k]
        if all_or_nothing:
            if tbl[k, j]:
                consumed[j] += demands[k]
        else:
            consumed[j] += demands[k]


@njit(cache=True)
def _table_row_rat(a, tbl, capacities, threshold, load):
    N = a.shape[0]
    M = capacities.shape[0]
    for j in range(M):
        load[j] = 0
    for i in range(N):
        load[a[i]] += 1
    for i in range(N):
        for j in range(M):
            joined = load[j] + 1 - (1 if a[i] == j else 0)
            tbl[i, j] = capacities[j] / joined >= threshold


@njit(cache=True)
def advance(kind, algo, round0, n_rounds, U, probs, prev, a_out, sat_out,
            cum, est, paid, fails, streak, streak_start, settle_start, prev_count,
            sat_time, tail_sat, tail_start,
            keep_tail, tail, record, traj_a, traj_s, traj_r,
            counts, mu, tremble, cutoff, k_movers,
            strides, tables, demands, capacities, threshold, all_or_nothing):
    B, N, A = probs.shape
    tbl = np.zeros((N, A), dtype=np.bool_)
    consumed = np.zeros(capacities.shape[0])
    load = np.zeros(capacities.shape[0], dtype=np.int64)
    a = np.zeros(N, dtype=np.int64)
    sat = np.zeros(N, dtype=np.bool_)
    pos = np.zeros(A)
    rank_keys = np.zeros(N)
    for b in range(B):
        for r in range(n_rounds):
            n = round0 + r
            t = n + 1
            u = U[b, r]
            # draw
            for i in range(N):
                c = 0.0
                idx = 0
                lastpos = 0
                for x in range(A):
                    c += probs[b, i, x]
                    if u[i] >= c:
                        idx += 1
                    if probs[b, i, x] > 0:
                        lastpos = x
                a[i] = min(idx, lastpos)
            # counterfactual table
            if kind == KIND_TABLE:
                _table_row_table(a, tbl, counts, strides, tables)
            elif kind == KIND_RESOURCE:
                _table_row_resource(a, u[2 * N:], tbl, demands, capacities, all_or_nothing, consumed)
            else:
                _table_row_rat(a, tbl, capacities, threshold, load)
            for i in range(N):
                sat[i] = tbl[i, a[i]]
            # regret sums
            for i in range(N):
                own = 1.0 if sat[i] else 0.0
                for x in range(counts[i]):
                    cum[b, i, a[i], x] += (1.0 if tbl[i, x] else 0.0) - own
            if algo == 4:
                for i in range(N):
                    played = probs[b, i, a[i]]
                    if played <= 0:
                        return -1
                    uu = 1.0 if sat[i] else 0.0
                    w = uu / played
                    for x in range(A):
                        est[b, i, x, a[i]] += probs[b, i, x] * w
                    paid[b, i, a[i]] += uu
            elif algo == 1:
                for i in range(N):
                    if not sat[i]:
                        fails[b, i, a[i]] += 1.0
            # convergence / satisfaction bookkeeping
            same = True
            for i in range(N):
                if a[i] != prev[b, i]:
                    same = False
            if same:
                streak[b] += 1
            else:
                streak[b] = 1
                streak_start[b] = n
            count = 0
            for i in range(N):
                prev[b, i] = a[i]
                if sat[i]:
                    sat_time[b, i] += 1.0
                    count += 1
            if count != prev_count[b]:
                settle_start[b] = n
                prev_count[b] = count
            if n >= tail_start:
                for i in range(N):
                    if sat[i]:
                        tail_sat[b, i] += 1.0
                if keep_tail:
                    for i in range(N):
                        tail[n - tail_start, b, i] = a[i]
            # next mixed action
            if algo == 0 or algo == 1:
                for i in range(N):
                    for x in range(A):
                        probs[b, i, x] = 0.0
                    if sat[i]:
                        probs[b, i, a[i]] = 1.0
                    elif algo == 0:
                        for x in range(counts[i]):
                            probs[b, i, x] = 1.0 / counts[i]
                    else:
                        for x in range(A):
                            pos[x] = 1.0 / (1.0 + fails[b, i, x]) if x < counts[i] else 0.0
                        s = _np_sum(pos, A)
                        for x in range(counts[i]):
                            probs[b, i, x] = pos[x] / s
            elif algo == 2:
                for i in range(N):
                    rank_keys[i] = np.inf if sat[i] else u[N + i]
                for i in range(N):
                    for x in range(A):
                        probs[b, i, x] = 0.0
                    mover = False
                    if not sat[i]:
                        rank = 0
                        for j in range(N):
                            if rank_keys[j] < rank_keys[i] or (rank_keys[j] == rank_keys[i] and j < i):
                                rank += 1
                        mover = rank < k_movers
                    m = 0
                    for x in range(A):
                        if tbl[i, x]:
                            m += 1
                    if mover and m > 0:
                        for x in range(A):
                            if tbl[i, x]:
                                probs[b, i, x] = 1.0 / m
                    else:
                        probs[b, i, a[i]] = 1.0
            else:
                delta = 0.0
                if algo == 4 and t < cutoff:
                    delta = tremble
                for i in range(N):
                    ai = a[i]
                    for x in range(A):
                        if x == ai or x >= counts[i]:
                            pos[x] = 0.0
                        else:
                            if algo == 3:
                                row = cum[b, i, ai, x] / t
                            else:
                                row = (est[b, i, ai, x] - paid[b, i, ai]) / t
                            pos[x] = row if row > 0.0 else 0.0
                    total = _np_sum(pos, A)
                    denom = total if total > mu else mu
                    for x in range(A):
                        pos[x] = pos[x] / denom
                    stay = 1.0 - _np_sum(pos, A)
                    if stay < 0.0:
                        stay = 0.0
                    for x in range(A):
                        p = stay if x == ai else pos[x]
                        if delta != 0.0:
                            p = (1.0 - delta) * p + delta * ((1.0 / counts[i]) if x < counts[i] else 0.0)
                        probs[b, i, x] = p
            if record:
                for i in range(N):
                    traj_a[n, b, i] = a[i]
                    traj_s[n, b, i] = sat[i]
                if algo == 3 or algo == 4:
                    best = -np.inf
                    for i in range(N):
                        for x in range(A):
                            for y in range(A):
                                if algo == 3:
                                    v = cum[b, i, x, y]
                                else:
                                    v = est[b, i, x, y] - paid[b, i, x]
                                if v > best:
                                    best = v
                    best = best / t
                    traj_r[n, b] = best if best > 0.0 else 0.0
        for i in range(N):
            a_out[b, i] = prev[b, i]
            sat_out[b, i] = sat[i]
    return 0
