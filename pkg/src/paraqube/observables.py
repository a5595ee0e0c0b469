"""Decoded histories, per-qubit <sigma_z>, fidelities and observable series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clock import HistoryState
from .models import SystemSpec, TimeGrid, build_hamiltonian, exact_evolution, initial_state
from .qubo import QuboInstance, decode_solution
from .solvers.samples import SampleSet


class DegenerateSampleError(ValueError):
    """A decoded state is the zero vector, so normalized observables are undefined."""


def history_from_sample(bits, instance: QuboInstance) -> HistoryState:
    """Raw (unnormalized) decoded amplitudes per time slice."""
    return decode_solution(bits, instance)[1]


def _norm2(v: np.ndarray) -> float:
    return float(np.vdot(v, v).real)


def sigma_z_expectation(state, qubit: int) -> float:
    """Normalized ``<sigma_z>`` on ``qubit``; qubit 0 is the leftmost tensor factor."""
    v = np.asarray(state, dtype=complex)
    n_qubits = int(round(math.log2(v.size)))
    if 2**n_qubits != v.size:
        raise ValueError(f"state dimension {v.size} is not a power of two")
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
    norm = _norm2(v)
    if norm == 0:
        raise DegenerateSampleError("cannot take <sigma_z> of the zero vector")
    bit = (np.arange(v.size) >> (n_qubits - 1 - qubit)) & 1
    signs = 1.0 - 2.0 * bit
    value = float(np.sum(signs * np.abs(v) ** 2) / norm)
    return min(1.0, max(-1.0, value))


def fidelity(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    na, nb = _norm2(a), _norm2(b)
    if na == 0 or nb == 0:
        raise DegenerateSampleError("fidelity is undefined for the zero vector")
    return min(1.0, abs(np.vdot(a, b)) ** 2 / (na * nb))


def spec_from_metadata(meta: dict) -> SystemSpec:
    params = {k: float(meta[k]) for k in ("omega", "alpha", "b") if k in meta}
    return SystemSpec(meta["system"], **params)


def oracle_states(instance: QuboInstance) -> tuple[np.ndarray, list[np.ndarray]]:
    """Grid points and exact states for the system recorded in the instance metadata."""
    meta = instance.metadata
    missing = [k for k in ("system", "psi0") if k not in meta]
    if missing:
        raise ValueError(f"instance metadata lacks {missing}; cannot rebuild the exact evolution")
    spec = spec_from_metadata(meta)
    grid = TimeGrid.from_step(instance.N, float(meta.get("dt", 0.0)), float(meta.get("t0", 0.0)))
    psi0 = initial_state(spec, meta["psi0"])
    return grid.points, exact_evolution(build_hamiltonian(spec), grid, psi0)


@dataclass(frozen=True)
class SeriesRow:
    t: float
    qubit: int
    sigma_z: float
    fidelity: float


def select_sample(samples: SampleSet, selector: str | int = "best_energy") -> np.ndarray:
    """``"best_energy"`` (default) or an integer rank among distinct records by energy."""
    if not len(samples):
        raise ValueError("empty sample set")
    if selector == "best_energy":
        return samples.best()[0]
    rank = int(selector)
    agg = samples.aggregate()
    if not 0 <= rank < len(agg):
        raise ValueError(f"rank {rank} out of range for {len(agg)} distinct samples")
    return agg.bits[rank]


def series_for_history(times, history: HistoryState, reference) -> list[SeriesRow]:
    """Rows of ``(t, qubit, <sigma_z>, fidelity vs reference)``; NaN marks zero slices."""
    rows = []
    n_qubits = int(round(math.log2(history.slices.shape[1])))
    for t, state, ref in zip(times, history, reference):
        try:
            fid = fidelity(state, ref)
            zs = [sigma_z_expectation(state, k) for k in range(n_qubits)]
        except DegenerateSampleError:
            fid, zs = math.nan, [math.nan] * n_qubits
        rows.extend(SeriesRow(float(t), k, z, fid) for k, z in enumerate(zs))
    return rows


def observable_series(samples: SampleSet, instance: QuboInstance, selector: str | int = "best_energy") -> list[SeriesRow]:
    bits = select_sample(samples, selector)
    times, exact = oracle_states(instance)
    return series_for_history(times, history_from_sample(bits, instance), exact)


def oracle_series(times, states) -> list[SeriesRow]:
    history = HistoryState(np.asarray(states, dtype=complex))
    return series_for_history(times, history, states)


def quantized_fidelities(instance: QuboInstance, states) -> np.ndarray:
    """Per-slice fidelity of the componentwise grid-quantized exact states."""
    layout = instance.layout
    x = layout.embed(np.asarray(states))
    q = layout.unembed(instance.code.quantize(x))
    out = []
    for a, b in zip(q, states):
        try:
            out.append(fidelity(a, b))
        except DegenerateSampleError:
            out.append(0.0)
    return np.array(out)


def write_series_csv(rows: list[SeriesRow], path, header: dict | None = None) -> str:
    lines = [f"# {k}={v}" for k, v in (header or {}).items()]
    lines.append("t,qubit,sigma_z,fidelity")
    lines.extend(f"{float(r.t)!r},{r.qubit},{float(r.sigma_z)!r},{float(r.fidelity)!r}" for r in rows)
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_series_csv(path) -> list[SeriesRow]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#") or line.startswith("t,"):
            continue
        t, q, z, f = line.split(",")
        rows.append(SeriesRow(float(t), int(q), float(z), float(f)))
    return rows
