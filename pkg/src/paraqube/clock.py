"""Clock operator, initial-condition operator and the real quadratic objective.

Real component layout: index ``i = part * (L*N) + n * L + l`` with
``part`` 0 for real parts and 1 for imaginary parts, ``n`` the time slice
and ``l`` the state component.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .models import PropagatorSequence
from .numerics import RealSymmetricSparse, solve_spd

LAYOUT_NAME = "part-major"


@dataclass(frozen=True)
class ComponentLayout:
    L: int
    N: int

    @property
    def size(self) -> int:
        return 2 * self.L * self.N

    def index(self, n: int, l: int, part: int) -> int:
        return part * self.L * self.N + n * self.L + l

    def locate(self, i: int) -> tuple[int, int, int]:
        """Inverse of :meth:`index`: returns ``(n, l, part)``."""
        if not 0 <= i < self.size:
            raise IndexError(i)
        part, rest = divmod(i, self.L * self.N)
        n, l = divmod(rest, self.L)
        return n, l, part

    def embed(self, slices) -> np.ndarray:
        z = np.asarray(slices, dtype=complex).reshape(self.L * self.N)
        return np.concatenate([z.real, z.imag])

    def unembed(self, x) -> np.ndarray:
        """Real vector -> complex array of shape ``(N, L)``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise ValueError(f"expected {self.size} real components, got {x.shape}")
        half = self.L * self.N
        return (x[:half] + 1j * x[half:]).reshape(self.N, self.L)


@dataclass(frozen=True)
class HistoryState:
    slices: np.ndarray  # (N, L) complex

    def __len__(self):
        return self.slices.shape[0]

    def __getitem__(self, n):
        return self.slices[n]

    def __iter__(self):
        return iter(self.slices)

    def stacked(self) -> np.ndarray:
        return self.slices.reshape(-1)


def build_clock_operator(props: PropagatorSequence | Sequence[np.ndarray], n_points: int | None = None, dim: int | None = None) -> sp.csr_matrix:
    """Block-tridiagonal Hermitian clock operator of size ``L*N``.

    Diagonal blocks carry weight 1 on the first and last slices and 2 on
    interior slices; sub/superdiagonal blocks are ``-U_n`` and ``-U_n^dagger``.
    An empty propagator sequence needs ``n_points`` and ``dim`` and yields the
    zero matrix.
    """
    steps = list(props)
    if steps:
        L = steps[0].shape[0]
        N = len(steps) + 1
    else:
        if dim is None:
            raise ValueError("an empty propagator sequence needs an explicit state dimension")
        L, N = dim, n_points or 1
        return sp.csr_matrix((L * N, L * N), dtype=complex)
    weights = np.full(N, 2.0)
    weights[0] = weights[-1] = 1.0
    blocks: list[list] = [[None] * N for _ in range(N)]
    for n in range(N):
        blocks[n][n] = weights[n] * sp.identity(L, dtype=complex, format="csr")
    for n, u in enumerate(steps):
        u = sp.csr_matrix(np.asarray(u, dtype=complex))
        blocks[n + 1][n] = -u
        blocks[n][n + 1] = -u.conj().T
    return sp.bmat(blocks, format="csr")


def printed_clock_operator(props: Sequence[np.ndarray]) -> sp.csr_matrix:
    """The clock sum read literally, with h.c. applied to both terms.

    Kept only to document that it does not annihilate history states.
    """
    steps = list(props)
    L, N = steps[0].shape[0], len(steps) + 1
    weights = np.full(N, 2.0)
    weights[0] = 0.0
    blocks: list[list] = [[None] * N for _ in range(N)]
    for n in range(N):
        blocks[n][n] = weights[n] * sp.identity(L, dtype=complex, format="csr")
    for n, u in enumerate(steps):
        u = sp.csr_matrix(np.asarray(u, dtype=complex))
        blocks[n + 1][n] = -u
        blocks[n][n + 1] = -u.conj().T
    return sp.bmat(blocks, format="csr")


@dataclass(frozen=True)
class ClockSystem:
    L: int
    N: int
    A_complex: sp.csr_matrix
    A_real: RealSymmetricSparse
    phi_real: np.ndarray
    layout: ComponentLayout
    psi0: np.ndarray

    @property
    def n_real(self) -> int:
        return self.layout.size


def build_system(clock: sp.spmatrix, psi0, n_points: int | None = None) -> ClockSystem:
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    L = psi0.size
    dim = clock.shape[0]
    if dim % L:
        raise ValueError(f"clock dimension {dim} is not a multiple of the state dimension {L}")
    N = dim // L
    if n_points is not None and n_points != N:
        raise ValueError(f"clock spans {N} slices, expected {n_points}")

    projector = sp.lil_matrix((dim, dim), dtype=complex)
    projector[:L, :L] = np.eye(L)
    a = (sp.csr_matrix(clock, dtype=complex) + projector.tocsr()).tocsr()
    re, im = sp.csr_matrix(a.real), sp.csr_matrix(a.imag)
    a_hat = sp.bmat([[re, -im], [im, re]], format="csr")
    layout = ComponentLayout(L, N)
    phi = np.zeros(N * L, dtype=complex)
    phi[:L] = psi0
    return ClockSystem(
        L=L,
        N=N,
        A_complex=a,
        A_real=RealSymmetricSparse.from_sparse(a_hat),
        phi_real=layout.embed(phi),
        layout=layout,
        psi0=psi0,
    )


def system_for(h, grid, psi0) -> ClockSystem:
    """Convenience: propagators -> clock -> system for a fixed generator."""
    from .models import build_propagators

    psi0 = np.asarray(psi0, dtype=complex)
    if grid.n_points == 1:
        clock = build_clock_operator([], n_points=1, dim=psi0.size)
    else:
        clock = build_clock_operator(build_propagators(h, grid))
    return build_system(clock, psi0)


def quadratic_form(sys: ClockSystem, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n_real,):
        raise ValueError(f"expected {sys.n_real} components, got {x.shape}")
    return float(0.5 * x @ sys.A_real.matvec(x) - x @ sys.phi_real)


def continuous_minimizer(sys: ClockSystem) -> tuple[np.ndarray, HistoryState]:
    x = solve_spd(sys.A_real, sys.phi_real)
    return x, HistoryState(sys.layout.unembed(x))


def clock_residual(clock: sp.spmatrix, history) -> float:
    """``||C Psi||_2`` for a stacked history state, as a diagnostic."""
    psi = np.asarray(history, dtype=complex).reshape(-1)
    return float(np.linalg.norm(clock @ psi))
