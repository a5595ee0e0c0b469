"""Exact ground states of fixed-point QUBOs beyond the brute-force cap.

A fixed-point QUBO built from ``f(x) = 1/2 x.A.x - phi.x`` is a box-constrained
integer least-squares problem when ``A`` is positive definite::

    f(x) = 1/2 ||R (x - x*)||^2 + f(x*),   A = R^T R,  x_i = low + step * k_i

so a depth-first Schnorr-Euchner search over the levels ``k_i`` with pruning
on the partial norm finds the certified minimum.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from ..clock import ClockSystem
from ..qubo import QuboInstance, qubo_energy
from ..numerics import NotPositiveDefiniteError


class SearchBudgetExceeded(RuntimeError):
    pass


def _levels_to_bits(levels: np.ndarray, R: int) -> np.ndarray:
    shifts = R - 1 - np.arange(R)
    return ((levels[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def lattice_ground_state(
    instance: QuboInstance,
    sys: ClockSystem,
    upper_bound: float | None = None,
    max_nodes: int = 2_000_000,
    tol: float = 1e-12,
) -> tuple[float, np.ndarray]:
    """Certified ground energy and minimizers (rows of bits) via sphere decoding.

    ``upper_bound`` (a known achievable QUBO energy, e.g. from annealing)
    tightens the initial radius. Raises :class:`NotPositiveDefiniteError` if
    the clock matrix is not positive definite and
    :class:`SearchBudgetExceeded` if more than ``max_nodes`` tree nodes are
    visited.
    """
    code = instance.code
    a = sys.A_real.to_dense()
    n = a.shape[0]
    try:
        r = scipy.linalg.cholesky(a, lower=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("clock matrix is not positive definite") from exc
    center = scipy.linalg.cho_solve((r, False), sys.phi_real)
    f_center = -0.5 * float(sys.phi_real @ center)

    m = 2**code.R
    low, step = code.low, code.step
    diag = np.diag(r).copy()

    # radius is on ||R(x - c)||^2 = 2 (f - f_center)
    if upper_bound is None:
        bound = math.inf
    else:
        bound = 2.0 * (upper_bound - f_center) * (1 + 1e-12) + 1e-12
    slack = 2.0 * tol

    levels = np.zeros(n, dtype=np.int64)
    dev = np.zeros(n)  # x_j - c_j for assigned j
    best = math.inf
    leaves: list[tuple[float, np.ndarray]] = []
    nodes = 0

    # iterative DFS: each frame enumerates level i in zig-zag order around its centre
    order_stack: list[list[int]] = [[] for _ in range(n)]
    cost_stack = np.zeros(n + 1)
    i = n - 1

    def candidates(i: int) -> list[int]:
        z = center[i] - (r[i, i + 1:] @ dev[i + 1:]) / diag[i]
        k0 = (z - low) / step
        base = int(min(max(round(k0), 0), m - 1))
        out = [base]
        lo, hi = base - 1, base + 1
        while lo >= 0 or hi < m:
            dlo = abs(k0 - lo) if lo >= 0 else math.inf
            dhi = abs(k0 - hi) if hi < m else math.inf
            if dlo <= dhi:
                out.append(lo)
                lo -= 1
            else:
                out.append(hi)
                hi += 1
        out.reverse()  # pop() takes the nearest first
        return out, z

    frames_z = np.zeros(n)
    order_stack[i], frames_z[i] = candidates(i)
    while True:
        if not order_stack[i]:
            i += 1
            if i == n:
                break
            continue
        k = order_stack[i].pop()
        x = low + step * k
        d = x - frames_z[i]
        cost = cost_stack[i + 1] + (diag[i] * d) ** 2
        limit = min(bound, best + slack) if best < math.inf else bound
        if cost > limit:
            # remaining candidates at this level are farther from the centre
            order_stack[i] = []
            continue
        nodes += 1
        if nodes > max_nodes:
            raise SearchBudgetExceeded(f"lattice search exceeded {max_nodes} nodes")
        levels[i] = k
        dev[i] = x - center[i]
        cost_stack[i] = cost
        if i == 0:
            if cost < best:
                best = cost
                leaves = [(l, v) for l, v in leaves if l <= best + slack]
            leaves.append((cost, levels.copy()))
            continue
        i -= 1
        order_stack[i], frames_z[i] = candidates(i)

    if not leaves:
        raise RuntimeError("no grid point within the initial bound; upper_bound was not achievable")
    bits = np.array([_levels_to_bits(lv, code.R) for _, lv in leaves], dtype=np.uint8)
    energies = np.atleast_1d(qubo_energy(instance, bits))
    ground = float(energies.min())
    keep = energies <= ground + tol
    return ground, np.unique(bits[keep], axis=0)
