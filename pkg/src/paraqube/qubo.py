"""Fixed-point binarization of the clock objective into QUBO / Ising form.

Each real component ``x_i`` is written with ``R`` bits ``q_i^a`` as::

    x_i = 2**D * (sum_a 2**-a * q_i^a - 1)

and bit ``(i, a)`` lives at index ``i*R + a``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .clock import LAYOUT_NAME, ClockSystem, ComponentLayout, HistoryState

FORMAT_MAGIC = "paraqube-qubo v1"
MAX_BITS = 1 << 16


class InstanceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class FixedPointCode:
    R: int = 2
    D: int = 0

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("need at least one bit per component")

    @property
    def weights(self) -> np.ndarray:
        """Value of each bit position: ``2**(D - a)``."""
        return 2.0 ** (self.D - np.arange(self.R))

    @property
    def low(self) -> float:
        return -(2.0**self.D)

    @property
    def high(self) -> float:
        return 2.0**self.D * (1.0 - 2.0 ** (1 - self.R))

    @property
    def step(self) -> float:
        return 2.0 ** (self.D - self.R + 1)

    def grid(self) -> np.ndarray:
        return self.low + self.step * np.arange(2**self.R)

    def decode(self, bits) -> np.ndarray:
        q = np.asarray(bits, dtype=float).reshape(-1, self.R)
        return q @ self.weights + self.low

    def encode(self, x) -> np.ndarray:
        """Nearest grid point per component, clipped to the representable range."""
        x = np.asarray(x, dtype=float)
        k = np.clip(np.rint((x - self.low) / self.step), 0, 2**self.R - 1).astype(np.int64)
        # bit a carries weight 2**(R-1-a) in units of the grid step
        shifts = self.R - 1 - np.arange(self.R)
        return ((k[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)

    def quantize(self, x) -> np.ndarray:
        return self.decode(self.encode(x))


@dataclass(frozen=True, eq=False)
class QuboInstance:
    """``E(q) = offset + linear . q + sum_k quad_values[k] q[rows[k]] q[cols[k]]``.

    Couplings are strictly upper triangular (``rows < cols``).
    """

    n_bits: int
    linear: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    offset: float
    code: FixedPointCode
    L: int
    N: int
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float))
        if self.linear.shape != (self.n_bits,):
            raise ValueError("linear terms do not match n_bits")
        if np.any(rows >= cols):
            raise ValueError("couplings must be strictly upper triangular")
        if self.n_bits != 2 * self.L * self.N * self.code.R:
            raise ValueError("n_bits inconsistent with L, N and R")

    def __eq__(self, other):
        if not isinstance(other, QuboInstance):
            return NotImplemented
        return (
            (self.n_bits, self.L, self.N, self.code, self.offset) == (other.n_bits, other.L, other.N, other.code, other.offset)
            and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ("linear", "rows", "cols", "values"))
        )

    __hash__ = None

    @property
    def layout(self) -> ComponentLayout:
        return ComponentLayout(self.L, self.N)

    @property
    def n_real(self) -> int:
        return 2 * self.L * self.N

    def bit_index(self, i: int, a: int) -> int:
        return i * self.code.R + a

    def coupling_matrix(self) -> sp.csr_matrix:
        """Upper-triangular coupling matrix ``B`` with ``E = q.B.q + a.q + f0``."""
        return sp.csr_matrix((self.values, (self.rows, self.cols)), shape=(self.n_bits, self.n_bits))

    def symmetric_couplings(self) -> sp.csr_matrix:
        """``W = B + B^T``; flipping bit k changes the local field of l by ``W[k, l]``."""
        b = self.coupling_matrix()
        return (b + b.T).tocsr()

    def dense_qubo(self) -> np.ndarray:
        """Upper-triangular dense matrix with linear terms on the diagonal."""
        q = self.coupling_matrix().toarray()
        q[np.diag_indices(self.n_bits)] += self.linear
        return q


def encode_qubo(sys: ClockSystem, code: FixedPointCode = FixedPointCode(), metadata: dict | None = None, max_bits: int = MAX_BITS) -> QuboInstance:
    """Exact expansion of ``f(x(q))`` with ``q**2 = q`` folded into the linear terms."""
    n = sys.n_real
    R = code.R
    n_bits = n * R
    if n_bits > max_bits:
        raise ValueError(f"instance needs {n_bits} bits, above the budget of {max_bits}")
    # x = C q + low * 1
    c = sp.kron(sp.identity(n, format="csr"), sp.csr_matrix(code.weights[None, :]), format="csr")
    a = sys.A_real.to_csr()
    shift = np.full(n, code.low)
    # 1/2 (Cq + s)^T A (Cq + s) - phi^T (Cq + s)
    quad = (0.5 * (c.T @ a @ c)).tocsr()
    lin_vec = c.T @ (a @ shift - sys.phi_real)
    offset = float(0.5 * shift @ (a @ shift) - sys.phi_real @ shift)

    linear = lin_vec + quad.diagonal()
    upper = sp.triu(quad, k=1).tocoo()
    lower = sp.tril(quad, k=-1).tocoo()
    b = sp.coo_matrix(
        (np.concatenate([upper.data, lower.data]),
         (np.concatenate([upper.row, lower.col]), np.concatenate([upper.col, lower.row]))),
        shape=(n_bits, n_bits),
    ).tocsr()
    b.sum_duplicates()
    b.eliminate_zeros()
    b = b.tocoo()
    order = np.lexsort((b.col, b.row))
    return QuboInstance(
        n_bits=n_bits,
        linear=linear,
        rows=b.row[order],
        cols=b.col[order],
        values=b.data[order],
        offset=offset,
        code=code,
        L=sys.L,
        N=sys.N,
        metadata=dict(metadata or {}),
    )


def _check_bits(bits, n_bits) -> np.ndarray:
    q = np.asarray(bits)
    if q.shape[-1] != n_bits:
        raise ValueError(f"bitstring has length {q.shape[-1]}, instance has {n_bits} bits")
    return q


def qubo_energy(instance: QuboInstance, bits) -> float | np.ndarray:
    """Energy of one bitstring, or of each row of a 2-d array of bitstrings."""
    q = _check_bits(bits, instance.n_bits).astype(float)
    pair = q[..., instance.rows] * q[..., instance.cols]
    e = instance.offset + q @ instance.linear + pair @ instance.values
    return float(e) if np.ndim(e) == 0 else e


def decode_solution(bits, instance: QuboInstance) -> tuple[np.ndarray, HistoryState]:
    q = _check_bits(bits, instance.n_bits)
    if q.ndim != 1:
        raise ValueError("decode_solution takes a single bitstring")
    x = instance.code.decode(q)
    return x, HistoryState(instance.layout.unembed(x))


def bits_from_string(text: str) -> np.ndarray:
    if set(text) - {"0", "1"}:
        raise ValueError(f"bitstring may only contain 0 and 1: {text!r}")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def bits_to_string(bits) -> str:
    return (np.asarray(bits, dtype=np.uint8) + ord("0")).tobytes().decode()


# -- Ising form -------------------------------------------------------------


@dataclass(frozen=True)
class IsingInstance:
    """``E(s) = offset + h . s + sum_k J[k] s[rows[k]] s[cols[k]]`` with ``s = 2q - 1``."""

    h: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    J: np.ndarray
    offset: float


def to_ising(instance: QuboInstance) -> IsingInstance:
    a, b = instance.linear, instance.values
    h = a / 2.0
    np.add.at(h, instance.rows, b / 4.0)
    np.add.at(h, instance.cols, b / 4.0)
    offset = instance.offset + a.sum() / 2.0 + b.sum() / 4.0
    return IsingInstance(h=h, rows=instance.rows.copy(), cols=instance.cols.copy(), J=b / 4.0, offset=float(offset))


def ising_energy(ising: IsingInstance, spins) -> float | np.ndarray:
    s = np.asarray(spins, dtype=float)
    e = ising.offset + s @ ising.h + (s[..., ising.rows] * s[..., ising.cols]) @ ising.J
    return float(e) if np.ndim(e) == 0 else e


# -- printed closed-form coefficients ---------------------------------------


def printed_coefficients(sys: ClockSystem, code: FixedPointCode) -> tuple[np.ndarray, np.ndarray, float]:
    """Closed-form coefficients as printed: ``(b[i,j,a,b], a[i,a], f0)``.

    ``b`` is returned as a dense ``(n*R, n*R)`` matrix indexed by bit, summing
    over all ordered index pairs.
    """
    A = sys.A_real.to_dense()
    phi = sys.phi_real
    R, D = code.R, code.D
    alpha = np.arange(R)
    scale = 2.0 ** (1 - alpha[:, None] - alpha[None, :] + 2 * D)
    b = np.einsum("ij,ab->iajb", A, scale).reshape(A.shape[0] * R, A.shape[0] * R)
    row_sum = A.sum(axis=1)
    a = (2.0 ** (1 - alpha[None, :] + D)) * (np.diag(A) - 2.0**D * (row_sum - phi))[:, None]
    f0 = 2.0**D * (2.0 ** (D - 1) * A.sum() + phi.sum())
    return b, a.reshape(-1), float(f0)


@dataclass
class CrossCheckReport:
    offset_expanded: float
    offset_printed: float
    linear_mismatches: list = field(default_factory=list)
    coupling_mismatches: list = field(default_factory=list)
    coupling_ratio: float | None = None

    @property
    def consistent(self) -> bool:
        return (
            not self.linear_mismatches
            and not self.coupling_mismatches
            and math.isclose(self.offset_expanded, self.offset_printed, rel_tol=1e-12, abs_tol=1e-12)
        )

    def summary(self) -> str:
        parts = [
            f"offset expanded={self.offset_expanded:.12g} printed={self.offset_printed:.12g}",
            f"linear mismatches={len(self.linear_mismatches)}",
            f"coupling mismatches={len(self.coupling_mismatches)}",
        ]
        if self.coupling_ratio is not None:
            parts.append(f"printed/expanded coupling ratio={self.coupling_ratio:.6g}")
        if self.linear_mismatches:
            bit, got, want = self.linear_mismatches[0]
            parts.append(f"first linear mismatch at bit {bit}: printed {got:.6g} vs expanded {want:.6g}")
        return "; ".join(parts)


def cross_check_printed(instance: QuboInstance, sys: ClockSystem, atol: float = 1e-9) -> CrossCheckReport:
    """Compare expansion-derived coefficients with the printed closed forms.

    Printed pair terms are folded the same way as the expansion (diagonal into
    the linear term, ``(k, l)`` and ``(l, k)`` summed) before comparing.
    """
    b, a, f0 = printed_coefficients(sys, instance.code)
    lin_printed = a + np.diag(b)
    pair = np.triu(b, 1) + np.tril(b, -1).T
    pair_expanded = instance.coupling_matrix().toarray()

    report = CrossCheckReport(offset_expanded=instance.offset, offset_printed=f0)
    for k in np.flatnonzero(np.abs(lin_printed - instance.linear) > atol):
        report.linear_mismatches.append((int(k), float(lin_printed[k]), float(instance.linear[k])))
    diff = np.argwhere(np.abs(np.triu(pair, 1) - pair_expanded) > atol)
    for k, l in diff:
        report.coupling_mismatches.append((int(k), int(l), float(pair[k, l]), float(pair_expanded[k, l])))
    nz = np.abs(pair_expanded) > atol
    if nz.any():
        ratios = pair[nz] / pair_expanded[nz]
        if np.allclose(ratios, ratios[0]):
            report.coupling_ratio = float(ratios[0])
    return report


# -- file I/O ---------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def write_instance(instance: QuboInstance, path) -> None:
    meta = instance.metadata
    lines = [
        FORMAT_MAGIC,
        f"system {meta.get('system', 'custom')}",
        f"L {instance.L}",
        f"N {instance.N}",
        f"R {instance.code.R}",
        f"D {instance.code.D}",
        f"layout {LAYOUT_NAME}",
        f"nbits {instance.n_bits}",
        f"offset {_fmt(instance.offset)}",
    ]
    for key in ("t0", "dt"):
        if key in meta:
            lines.append(f"{key} {_fmt(meta[key])}")
    if "psi0" in meta:
        lines.append(f"psi0 {meta['psi0']}")
    for key in ("omega", "alpha", "b"):
        if key in meta:
            lines.append(f"param {key} {_fmt(meta[key])}")
    for k in np.flatnonzero(instance.linear):
        lines.append(f"lin {k} {_fmt(instance.linear[k])}")
    for i, j, v in zip(instance.rows, instance.cols, instance.values):
        lines.append(f"quad {i} {j} {_fmt(v)}")
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    Path(path).write_text(body + f"checksum sha256 {digest}\n")


_REQUIRED = ("system", "L", "N", "R", "D", "layout", "nbits", "offset")


def read_instance(path) -> QuboInstance:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_MAGIC:
        raise InstanceFormatError(f"{path}: missing '{FORMAT_MAGIC}' header")
    if lines[-1].startswith("checksum "):
        parts = lines[-1].split()
        if len(parts) != 3 or parts[1] != "sha256":
            raise InstanceFormatError(f"{path}: malformed checksum line")
        body = "\n".join(lines[:-1]) + "\n"
        if hashlib.sha256(body.encode()).hexdigest() != parts[2]:
            raise InstanceFormatError(f"{path}: checksum mismatch")
        lines = lines[:-1]

    header: dict[str, str] = {}
    meta: dict = {}
    lin: dict[int, float] = {}
    quad: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, *rest = line.split()
        try:
            if key == "lin":
                k, v = rest
                lin[int(k)] = float(v)
            elif key == "quad":
                i, j, v = rest
                quad.append((int(i), int(j), float(v)))
            elif key == "param":
                name, v = rest
                meta[name] = float(v)
            elif key in ("t0", "dt"):
                (v,) = rest
                meta[key] = float(v)
            elif key == "psi0":
                (v,) = rest
                meta["psi0"] = v
            elif key in _REQUIRED:
                (v,) = rest
                header[key] = v
            else:
                raise InstanceFormatError(f"{path}:{lineno}: unknown record {key!r}")
        except ValueError as exc:
            if isinstance(exc, InstanceFormatError):
                raise
            raise InstanceFormatError(f"{path}:{lineno}: malformed line {raw!r}") from exc

    missing = [k for k in _REQUIRED if k not in header]
    if missing:
        raise InstanceFormatError(f"{path}: missing header fields {missing}")
    if header["layout"] != LAYOUT_NAME:
        raise InstanceFormatError(f"{path}: unknown layout {header['layout']!r}")
    try:
        L, N, R, D, n_bits = (int(header[k]) for k in ("L", "N", "R", "D", "nbits"))
        offset = float(header["offset"])
    except ValueError as exc:
        raise InstanceFormatError(f"{path}: malformed header value") from exc
    if n_bits != 2 * L * N * R:
        raise InstanceFormatError(f"{path}: nbits {n_bits} does not match 2*L*N*R = {2 * L * N * R}")

    linear = np.zeros(n_bits)
    for k, v in lin.items():
        if not 0 <= k < n_bits:
            raise InstanceFormatError(f"{path}: linear index {k} out of range")
        linear[k] = v
    if quad:
        rows, cols, vals = (np.array(c) for c in zip(*quad))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    if np.any(rows >= cols) or (rows.size and cols.max() >= n_bits):
        raise InstanceFormatError(f"{path}: coupling indices must satisfy 0 <= i < j < nbits")
    meta["system"] = header["system"]
    return QuboInstance(
        n_bits=n_bits,
        linear=linear,
        rows=rows,
        cols=cols,
        values=vals,
        offset=offset,
        code=FixedPointCode(R, D),
        L=L,
        N=N,
        metadata=meta,
    )
