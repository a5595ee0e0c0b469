"""Small dense complex linear algebra and a sparse SPD solver.

States and generators are plain ``numpy`` complex arrays. The only custom
container is :class:`RealSymmetricSparse`, which stores the upper triangle of
the real-embedded clock matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

MAX_KRON_DIM = 1 << 14


class NotPositiveDefiniteError(ArithmeticError):
    """Raised when conjugate gradients hits a direction of non-positive curvature."""


class ConvergenceError(ArithmeticError):
    pass


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def is_hermitian(m, atol: float = 1e-12) -> bool:
    a = np.asarray(m)
    return a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, rtol=0.0, atol=atol)


def kron(a, b, max_dim: int = MAX_KRON_DIM) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with a guard on the output dimension."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise ValueError(f"kron result {rows}x{cols} exceeds max dimension {max_dim}")
    return np.kron(a, b)


def matrix_exponential(m, tol: float = 1e-15) -> np.ndarray:
    """Scaling and squaring with a truncated Taylor series.

    The matrix is scaled by ``2**-s`` so that its 1-norm is at most 0.5, the
    series is summed until the next term drops below ``tol`` relative to the
    partial sum, and the result is squared ``s`` times.
    """
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix exponential needs a square matrix, got {a.shape}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    scaled = a / (2.0**s)

    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 64):
        term = term @ scaled / k
        result += term
        if np.linalg.norm(term, 1) <= tol * np.linalg.norm(result, 1):
            break
    else:  # pragma: no cover - norm <= 0.5 converges in < 30 terms
        raise ConvergenceError("Taylor series did not converge")
    for _ in range(s):
        result = result @ result
    return result


def _eig2_closed_form(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = np.sqrt(tr * tr / 4 - det + 0j)
    lams = np.array([tr / 2 - disc, tr / 2 + disc])
    if abs(disc) < 1e-12 * max(1.0, abs(tr)):
        if abs(a[0, 1]) > 1e-14 or abs(a[1, 0]) > 1e-14:
            raise ConvergenceError("defective 2x2 matrix: eigenvectors do not span")
        return lams, np.eye(2, dtype=complex)
    vecs = np.empty((2, 2), dtype=complex)
    for k, lam in enumerate(lams):
        # pick the better-conditioned row of (a - lam I) v = 0
        if abs(a[0, 1]) + abs(a[0, 0] - lam) >= abs(a[1, 0]) + abs(a[1, 1] - lam):
            v = np.array([a[0, 1], lam - a[0, 0]])
        else:
            v = np.array([lam - a[1, 1], a[1, 0]])
        if np.linalg.norm(v) == 0:
            v = np.eye(2, dtype=complex)[k]
        vecs[:, k] = v / np.linalg.norm(v)
    # real spectra (unbroken PT phase) come back sorted ascending
    if np.all(np.abs(lams.imag) < 1e-12):
        lams = lams.real.astype(complex)
        order = np.argsort(lams.real)
        lams, vecs = lams[order], vecs[:, order]
    return lams, vecs


def eigensystem(m, max_dim: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and column eigenvectors of a small matrix.

    Hermitian input gives real ascending eigenvalues and an orthonormal basis.
    Non-Hermitian input is only supported for 2x2 matrices, via the
    characteristic polynomial.
    """
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"eigensystem needs a square matrix, got {a.shape}")
    if a.shape[0] > max_dim:
        raise ValueError(f"dimension {a.shape[0]} exceeds {max_dim}")
    if is_hermitian(a):
        w, v = np.linalg.eigh(a)
        return w.astype(complex), v
    if a.shape[0] == 2:
        return _eig2_closed_form(a)
    raise ValueError("non-Hermitian eigensystems are only supported for 2x2 input")


@dataclass(frozen=True)
class RealSymmetricSparse:
    """Real symmetric matrix stored as its upper triangle (``i <= j``)."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    _full: sp.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.values, dtype=float)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols and values must have equal length")
        if np.any(rows > cols):
            raise ValueError("entries must be upper-triangular (i <= j)")
        if rows.size and (rows.min() < 0 or cols.max() >= self.dim):
            raise ValueError("entry index out of range")
        keys = rows * self.dim + cols
        if np.unique(keys).size != keys.size:
            raise ValueError("duplicate (i, j) entries")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", vals)
        upper = sp.coo_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))
        off = rows != cols
        lower = sp.coo_matrix((vals[off], (cols[off], rows[off])), shape=(self.dim, self.dim))
        object.__setattr__(self, "_full", (upper + lower).tocsr())

    @classmethod
    def from_dense(cls, a, tol: float = 0.0) -> "RealSymmetricSparse":
        a = np.asarray(a, dtype=float)
        if a.shape[0] != a.shape[1] or not np.allclose(a, a.T, rtol=0, atol=1e-12):
            raise ValueError("matrix is not square symmetric")
        iu, ju = np.triu_indices(a.shape[0])
        vals = a[iu, ju]
        keep = np.abs(vals) > tol
        return cls(a.shape[0], iu[keep], ju[keep], vals[keep])

    @classmethod
    def from_sparse(cls, m, tol: float = 0.0) -> "RealSymmetricSparse":
        m = sp.triu(sp.csr_matrix(m, dtype=float)).tocoo()
        m.sum_duplicates()
        keep = np.abs(m.data) > tol
        return cls(m.shape[0], m.row[keep], m.col[keep], m.data[keep])

    def to_csr(self) -> sp.csr_matrix:
        return self._full

    def to_dense(self) -> np.ndarray:
        return self._full.toarray()

    def matvec(self, x) -> np.ndarray:
        return self._full @ np.asarray(x, dtype=float)

    def __matmul__(self, x):
        return self.matvec(x)


def solve_spd(a: RealSymmetricSparse, b, rtol: float = 1e-10, maxiter: int | None = None) -> np.ndarray:
    """Conjugate gradients for ``a x = b`` with ``a`` symmetric positive definite.

    Raises :class:`NotPositiveDefiniteError` on a non-positive curvature step.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (a.dim,):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({a.dim},)")
    bnorm = np.linalg.norm(b)
    x = np.zeros(a.dim)
    if bnorm == 0:
        return x
    target = rtol * bnorm
    # stop a bit below the target so the true residual also meets it
    inner_target = 0.1 * target
    op = a.to_csr()
    maxiter = maxiter or 10 * a.dim + 100

    for _restart in range(4):
        r = b - op @ x
        if np.linalg.norm(r) <= target:
            return x
        p = r.copy()
        rr = r @ r
        for _ in range(maxiter):
            ap = op @ p
            curv = p @ ap
            if curv <= 0 or not np.isfinite(curv):
                raise NotPositiveDefiniteError(f"non-positive curvature {curv:.3e} encountered")
            alpha = rr / curv
            x += alpha * p
            r -= alpha * ap
            rr_new = r @ r
            if np.sqrt(rr_new) <= inner_target:
                break
            p = r + (rr_new / rr) * p
            rr = rr_new
    if np.linalg.norm(b - op @ x) > target:
        raise ConvergenceError("conjugate gradients did not reach the requested residual")
    return x
