from __future__ import annotations

import logging

import numpy as np

from ..qubo import QuboInstance, qubo_energy
from ._backend import kernels
from .annealing import csr_arrays

log = logging.getLogger(__name__)

MAX_BRUTE_FORCE_BITS = 30
DEGENERACY_TOL = 1e-12


class InstanceTooLargeError(ValueError):
    pass


def _codes_to_bits(codes: np.ndarray, n: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.uint64)
    return ((codes[:, None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)).astype(np.uint8)


def brute_force(instance: QuboInstance, max_bits: int = MAX_BRUTE_FORCE_BITS, backend: str | None = None):
    """Exact ground energy and every minimizer within ``DEGENERACY_TOL`` of it.

    The kernel screens states with incrementally updated energies; the
    survivors are re-evaluated exactly before the minimum is taken.
    """
    n = instance.n_bits
    if n > max_bits:
        raise InstanceTooLargeError(f"{n} bits exceeds the brute-force cap of {max_bits}")
    indptr, indices, data = csr_arrays(instance)
    scale = 1.0 + np.abs(instance.linear).sum() + np.abs(data).sum()
    codes, _, truncated = kernels(backend).gray_enumerate(
        indptr, indices, data, np.ascontiguousarray(instance.linear, dtype=np.float64),
        1e-9 * scale,
    )
    bits = _codes_to_bits(codes, n)
    energies = np.atleast_1d(qubo_energy(instance, bits))
    ground = float(energies.min())
    sel = energies <= ground + DEGENERACY_TOL
    ground_bits = np.unique(bits[sel], axis=0)
    if truncated:
        log.warning("near-degenerate states overflowed the candidate buffer; ground manifold may be incomplete")
    return ground, ground_bits


def enumerate_energies(instance: QuboInstance) -> tuple[np.ndarray, np.ndarray]:
    """All ``2**n`` bitstrings (rows, bit k = column k) and their energies.

    Intended for exhaustive identity checks on small instances.
    """
    n = instance.n_bits
    if n > 22:
        raise InstanceTooLargeError(f"{n} bits is too many to materialize")
    codes = np.arange(1 << n, dtype=np.uint64)
    bits = _codes_to_bits(codes, n)
    return bits, qubo_energy(instance, bits)
