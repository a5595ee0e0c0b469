# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: single-flip Metropolis annealing and Gray-code enumeration.

Both kernels take the QUBO as a symmetric CSR coupling matrix ``W = B + B^T``
(``indptr``, ``indices``, ``data``) plus linear terms. Each restart draws from
its own xoshiro256** stream, so results do not depend on the thread count.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp
from libc.stdint cimport uint64_t, int64_t, uint8_t
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cnp.import_array()

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

ctypedef cnp.float64_t f64

cdef double EXP_CUTOFF = 37.0


cdef inline uint64_t rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t xoshiro_next(uint64_t* s) noexcept nogil:
    cdef uint64_t result = rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = rotl(s[3], 45)
    return result


cdef inline double uniform(uint64_t* s) noexcept nogil:
    return <double>(xoshiro_next(s) >> 11) * (1.0 / 9007199254740992.0)


cdef void anneal_one(
    const int64_t[::1] indptr,
    const int64_t[::1] indices,
    const f64[::1] data,
    const f64[::1] linear,
    const f64[::1] betas,
    uint64_t* rng,
    uint8_t* q,
    uint8_t* best,
    f64* fields,
    int n,
) noexcept nogil:
    cdef int k, l, s, sweeps = betas.shape[0]
    cdef int64_t p
    cdef double e = 0.0, best_e, d, beta, sign, u
    cdef uint8_t flip

    for k in range(n):
        q[k] = <uint8_t>(xoshiro_next(rng) >> 63)
    for k in range(n):
        fields[k] = linear[k]
    for k in range(n):
        if q[k]:
            e += linear[k]
            for p in range(indptr[k], indptr[k + 1]):
                l = indices[p]
                fields[l] += data[p]
                if l > k and q[l]:
                    e += data[p]
    best_e = e
    memcpy(best, q, n)

    for s in range(sweeps):
        beta = betas[s]
        for k in range(n):
            d = fields[k] if q[k] == 0 else -fields[k]
            u = uniform(rng)
            if d <= 0.0:
                flip = 1
            elif beta * d > EXP_CUTOFF:
                # exp(-beta*d) < 2**-53, the smallest nonzero uniform
                flip = u == 0.0
            else:
                flip = u < exp(-beta * d)
            if flip:
                sign = 1.0 if q[k] == 0 else -1.0
                q[k] ^= 1
                e += d
                for p in range(indptr[k], indptr[k + 1]):
                    fields[indices[p]] += sign * data[p]
                if e < best_e:
                    best_e = e
                    memcpy(best, q, n)


def anneal(
    const int64_t[::1] indptr,
    const int64_t[::1] indices,
    const f64[::1] data,
    const f64[::1] linear,
    const f64[::1] betas,
    const uint64_t[:, ::1] seeds,
    int num_threads=1,
):
    """Run one annealing restart per row of ``seeds`` (xoshiro256** states).

    Returns a ``(restarts, n)`` uint8 array with the lowest-energy state
    visited by each restart.
    """
    cdef int n = linear.shape[0]
    cdef int restarts = seeds.shape[0]
    cdef int r
    out = np.zeros((restarts, n), dtype=np.uint8)
    cdef uint8_t[:, ::1] out_v = out
    cdef uint64_t* rngs = <uint64_t*>malloc(restarts * 4 * sizeof(uint64_t))
    cdef uint8_t* q = <uint8_t*>malloc(restarts * n * sizeof(uint8_t) + 1)
    cdef f64* fields = <f64*>malloc(restarts * n * sizeof(f64) + 1)
    if rngs == NULL or q == NULL or fields == NULL:
        free(rngs); free(q); free(fields)
        raise MemoryError()
    for r in range(restarts):
        rngs[4 * r] = seeds[r, 0]
        rngs[4 * r + 1] = seeds[r, 1]
        rngs[4 * r + 2] = seeds[r, 2]
        rngs[4 * r + 3] = seeds[r, 3]
    try:
        if n > 0:
            for r in prange(restarts, nogil=True, num_threads=num_threads, schedule="dynamic"):
                anneal_one(indptr, indices, data, linear, betas, &rngs[4 * r],
                           &q[r * n], &out_v[r, 0], &fields[r * n], n)
    finally:
        free(rngs); free(q); free(fields)
    return out


def gray_enumerate(
    const int64_t[::1] indptr,
    const int64_t[::1] indices,
    const f64[::1] data,
    const f64[::1] linear,
    double slack,
    int max_candidates=4096,
):
    """Walk all ``2**n`` states in Gray-code order.

    Energies are tracked incrementally (without offset), so callers must
    re-evaluate the returned candidates. Returns ``(codes, approx_energies,
    truncated)`` for states within ``slack`` of the running minimum; bit ``k``
    of a code is QUBO bit ``k``. ``truncated`` is set when near-degenerate
    states overflowed ``max_candidates`` (the minimum itself is always kept).
    """
    cdef int n = linear.shape[0]
    if n > 62:
        raise ValueError("gray enumeration supports at most 62 bits")
    cdef uint64_t total = (<uint64_t>1) << n
    cdef uint64_t i, code = 0
    cdef int k
    cdef int64_t p
    cdef double e = 0.0, best = 0.0, d, sign
    cdef f64[::1] fields = np.array(linear, dtype=np.float64)
    cdef uint8_t[::1] q = np.zeros(n, dtype=np.uint8)
    cand_codes = np.zeros(max_candidates, dtype=np.uint64)
    cand_e = np.zeros(max_candidates, dtype=np.float64)
    cdef uint64_t[::1] cc = cand_codes
    cdef f64[::1] ce = cand_e
    cdef int count = 1, j, w
    cdef bint truncated = False
    cc[0] = 0
    ce[0] = 0.0
    with nogil:
        for i in range(1, total):
            k = __builtin_ctzll(i)
            d = fields[k] if q[k] == 0 else -fields[k]
            sign = 1.0 if q[k] == 0 else -1.0
            q[k] ^= 1
            code ^= (<uint64_t>1) << k
            e += d
            for p in range(indptr[k], indptr[k + 1]):
                fields[indices[p]] += sign * data[p]
            if e <= best + slack:
                if e < best:
                    best = e
                    w = 0
                    for j in range(count):
                        if ce[j] <= best + slack:
                            cc[w] = cc[j]
                            ce[w] = ce[j]
                            w += 1
                    count = w
                if count < max_candidates:
                    cc[count] = code
                    ce[count] = e
                    count += 1
                else:
                    truncated = True
                    if e <= best:
                        cc[count - 1] = code
                        ce[count - 1] = e
    return cand_codes[:count].copy(), cand_e[:count].copy(), bool(truncated)

