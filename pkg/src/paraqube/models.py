"""Benchmark generators H1..H8, time grids, propagators and exact evolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import eigensystem, kron, matrix_exponential

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

SYSTEM_IDS = ("H1", "H2", "H3", "H4", "H5", "H6", "H7", "H8")
HERMITIAN_IDS = ("H1", "H2", "H3", "H4", "H5", "H6", "H8")


def _kron(*ops):
    out = ops[0]
    for op in ops[1:]:
        out = kron(out, op)
    return out


@dataclass(frozen=True)
class SystemSpec:
    """A catalog entry. ``omega``, ``alpha`` and ``b`` only affect H7.

    H7 is ``omega * (b sigma_x + i sin(alpha) sigma_z)``; ``b`` defaults to
    ``sqrt(1 + sin(alpha)**2)``, which puts the spectrum at ``±omega``.
    """

    id: str
    omega: float = 1.0
    alpha: float = 0.3
    b: float | None = None

    def __post_init__(self):
        if self.id not in SYSTEM_IDS:
            raise ValueError(f"unknown system {self.id!r}; expected one of {', '.join(SYSTEM_IDS)}")
        if self.id == "H7":
            if not abs(self.alpha) < math.pi / 2:
                raise ValueError(f"H7 needs |alpha| < pi/2 for unbroken PT symmetry, got {self.alpha}")
            if self.b is None:
                object.__setattr__(self, "b", math.sqrt(1.0 + math.sin(self.alpha) ** 2))

    @property
    def dim(self) -> int:
        return {"H4": 4, "H5": 4, "H8": 4, "H6": 8}.get(self.id, 2)

    @property
    def hermitian(self) -> bool:
        return self.id != "H7"

    def params(self) -> dict[str, float]:
        if self.id != "H7":
            return {}
        return {"omega": self.omega, "alpha": self.alpha, "b": self.b}


def build_hamiltonian(spec: SystemSpec | str) -> np.ndarray:
    if isinstance(spec, str):
        spec = SystemSpec(spec)
    pi = math.pi
    if spec.id == "H1":
        return pi / 2 * SY
    if spec.id == "H2":
        return pi / math.sqrt(2) * (SX + SZ)
    if spec.id == "H3":
        return pi * (0.75 * I2 - 0.25 * SY)
    if spec.id == "H4":
        return pi / 4 * (_kron(SX, SX) + _kron(SY, SY))
    if spec.id == "H5":
        return pi / 4 * (_kron(SX, SX) - _kron(SY, SY))
    if spec.id == "H6":
        return pi / 8 * (
            _kron(SX, SX, SX) - _kron(SX, SY, SY) - _kron(SY, SX, SY) - _kron(SY, SY, SX)
        )
    if spec.id == "H7":
        # PT-symmetric under P = sigma_x, T = complex conjugation; spectrum ±omega*sqrt(b^2 - sin^2 alpha)
        return spec.omega * (spec.b * SX + 1j * math.sin(spec.alpha) * SZ)
    return pi / 4 * (_kron(I2, SY) - _kron(I2, SZ) + _kron(SX, SX) - _kron(SY, SX))


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    tf: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("a time grid needs at least one point")
        if self.n_points >= 2 and not self.tf > self.t0:
            raise ValueError("tf must exceed t0 when the grid has two or more points")

    @classmethod
    def from_step(cls, n_points: int, dt: float, t0: float = 0.0) -> "TimeGrid":
        return cls(t0, t0 + dt * max(n_points - 1, 0), n_points)

    @property
    def dt(self) -> float:
        if self.n_points < 2:
            return 0.0
        return (self.tf - self.t0) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_points)


@dataclass(frozen=True)
class PropagatorSequence:
    steps: tuple[np.ndarray, ...]
    dim: int = field(default=0)

    def __post_init__(self):
        if self.steps and not self.dim:
            object.__setattr__(self, "dim", self.steps[0].shape[0])

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, n):
        return self.steps[n]


Generator = Callable[[float], np.ndarray]


def build_propagators(h: np.ndarray | Generator, grid: TimeGrid, dt: float | None = None) -> PropagatorSequence:
    """Short-time propagators ``U_n = exp(-i H(t_n) dt)``.

    ``h`` is either a fixed matrix or a callable returning ``H(t)``. ``dt``
    overrides the grid spacing (used with single-point grids).
    """
    if grid.n_points < 2:
        raise ValueError("propagators need a grid with at least two points")
    dt = grid.dt if dt is None else dt
    if callable(h):
        steps = tuple(matrix_exponential(-1j * np.asarray(h(t)) * dt) for t in grid.points[:-1])
    else:
        u = matrix_exponential(-1j * np.asarray(h, dtype=complex) * dt)
        steps = (u,) * (grid.n_points - 1)
    for u in steps:
        if abs(np.linalg.det(u)) < 1e-12:
            raise ValueError("propagator is numerically singular")
    return PropagatorSequence(steps, steps[0].shape[0])


def exact_evolution(h: np.ndarray | Generator, grid: TimeGrid, psi0) -> list[np.ndarray]:
    psi = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    states = [psi]
    if grid.n_points == 1:
        return states
    for u in build_propagators(h, grid):
        states.append(u @ states[-1])
    return states


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) - 1e-12 * np.arange(v.size)))
    return v * (abs(v[k]) / v[k])


def initial_state(spec: SystemSpec | str, choice: str | tuple[str, int]) -> np.ndarray:
    """Initial state from ``"basis:i"`` / ``"eigen:k"`` or a ``(kind, index)`` pair.

    Eigenstates are ordered by ascending energy, normalized, and phased so
    the largest-magnitude component is real positive.
    """
    if isinstance(spec, str):
        spec = SystemSpec(spec)
    kind, index = parse_state_choice(choice) if isinstance(choice, str) else choice
    dim = spec.dim
    if not 0 <= index < dim:
        raise ValueError(f"index {index} out of range for dimension {dim}")
    if kind == "basis":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return v
    if kind == "eigen":
        if not spec.hermitian:
            raise ValueError(f"eigenstate initial states need a Hermitian system, {spec.id} is not")
        _, vecs = eigensystem(build_hamiltonian(spec))
        return _fix_phase(vecs[:, index])
    raise ValueError(f"unknown initial-state kind {kind!r}")


def parse_state_choice(text: str) -> tuple[str, int]:
    kind, _, idx = text.partition(":")
    kind = {"eigenstate": "eigen", "eig": "eigen"}.get(kind, kind)
    if kind not in ("basis", "eigen") or not idx.isdigit():
        raise ValueError(f"bad initial state {text!r}; use basis:<i> or eigen:<k>")
    return kind, int(idx)
