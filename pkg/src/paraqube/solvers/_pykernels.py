"""Pure numpy fallback for the compiled kernels.

Same signatures, same xoshiro256** streams and the same per-restart update
order as ``_kernels.pyx``, vectorized across restarts instead of threaded.
"""

from __future__ import annotations

import numpy as np

_U53 = 1.0 / 9007199254740992.0
EXP_CUTOFF = 37.0
_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


def xoshiro_next(s: np.ndarray) -> np.ndarray:
    """Advance every row of ``s`` (shape ``(m, 4)``) in place; returns ``m`` outputs."""
    with np.errstate(over="ignore"):
        result = _rotl(s[:, 1] * np.uint64(5), 7) * np.uint64(9)
    t = s[:, 1] << np.uint64(17)
    s[:, 2] ^= s[:, 0]
    s[:, 3] ^= s[:, 1]
    s[:, 1] ^= s[:, 2]
    s[:, 0] ^= s[:, 3]
    s[:, 2] ^= t
    s[:, 3] = _rotl(s[:, 3], 45)
    return result


def anneal(indptr, indices, data, linear, betas, seeds, num_threads=1):
    del num_threads
    linear = np.asarray(linear, dtype=np.float64)
    n = linear.size
    rng = np.array(seeds, dtype=np.uint64, copy=True)
    m = rng.shape[0]
    if n == 0:
        return np.zeros((m, 0), dtype=np.uint8)

    q = np.empty((m, n), dtype=np.uint8)
    for k in range(n):
        q[:, k] = (xoshiro_next(rng) >> np.uint64(63)).astype(np.uint8)

    fields = np.tile(linear, (m, 1))
    e = np.zeros(m)
    rows = np.arange(m)
    for k in range(n):
        on = q[:, k].astype(bool)
        e[on] += linear[k]
        for p in range(indptr[k], indptr[k + 1]):
            l = indices[p]
            fields[on, l] += data[p]
            if l > k:
                e[on & q[:, l].astype(bool)] += data[p]
    best_e = e.copy()
    best = q.copy()

    neigh = [(indices[indptr[k]:indptr[k + 1]], data[indptr[k]:indptr[k + 1]]) for k in range(n)]
    for beta in betas:
        for k in range(n):
            cur = q[:, k]
            d = np.where(cur == 0, fields[:, k], -fields[:, k])
            u = (xoshiro_next(rng) >> np.uint64(11)).astype(np.float64) * _U53
            bd = beta * d
            flip = (d <= 0.0) | ((bd > EXP_CUTOFF) & (u == 0.0))
            mid = (d > 0.0) & (bd <= EXP_CUTOFF)
            flip[mid] = u[mid] < np.exp(-bd[mid])
            if not flip.any():
                continue
            idx = rows[flip]
            sign = np.where(cur[idx] == 0, 1.0, -1.0)
            q[idx, k] ^= 1
            e[idx] += d[idx]
            cols, w = neigh[k]
            if cols.size:
                fields[np.ix_(idx, cols)] += sign[:, None] * w[None, :]
            improved = idx[e[idx] < best_e[idx]]
            if improved.size:
                best_e[improved] = e[improved]
                best[improved] = q[improved]
    return best


def gray_enumerate(indptr, indices, data, linear, slack, max_candidates=4096, chunk_bits=16):
    """Chunked exhaustive enumeration; returns the same triple as the compiled kernel.

    Energies here are exact per state (no incremental drift).
    """
    linear = np.asarray(linear, dtype=np.float64)
    n = linear.size
    if n > 62:
        raise ValueError("enumeration supports at most 62 bits")
    # upper-triangular pairs from the symmetric CSR
    counts = np.diff(indptr)
    src = np.repeat(np.arange(n), counts)
    keep = src < indices
    pr, pc, pv = src[keep], np.asarray(indices)[keep], np.asarray(data)[keep]

    low_bits = min(n, chunk_bits)
    low = np.arange(1 << low_bits, dtype=np.uint64)
    low_q = ((low[:, None] >> np.arange(low_bits, dtype=np.uint64)) & np.uint64(1)).astype(np.float64)

    best = np.inf
    cand_codes: list[np.ndarray] = []
    cand_e: list[np.ndarray] = []
    truncated = False
    for high in range(1 << (n - low_bits)):
        high_q = ((high >> np.arange(n - low_bits)) & 1).astype(np.float64)
        qs = np.hstack([low_q, np.broadcast_to(high_q, (low_q.shape[0], n - low_bits))])
        e = qs @ linear + (qs[:, pr] * qs[:, pc]) @ pv
        chunk_min = e.min()
        if chunk_min < best:
            best = chunk_min
            pairs = [(c[ce <= best + slack], ce[ce <= best + slack]) for c, ce in zip(cand_codes, cand_e)]
            cand_codes = [p[0] for p in pairs]
            cand_e = [p[1] for p in pairs]
        sel = e <= best + slack
        if sel.any():
            cand_codes.append(low[sel] | (np.uint64(high) << np.uint64(low_bits)))
            cand_e.append(e[sel])
    codes = np.concatenate(cand_codes) if cand_codes else np.zeros(0, dtype=np.uint64)
    energies = np.concatenate(cand_e) if cand_e else np.zeros(0)
    if codes.size > max_candidates:
        truncated = True
        order = np.argsort(energies, kind="stable")[:max_candidates]
        codes, energies = codes[order], energies[order]
    return codes, energies, truncated
