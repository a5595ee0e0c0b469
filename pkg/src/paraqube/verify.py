"""Invariant suites behind ``paraqube verify``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .clock import build_clock_operator, build_system, clock_residual, quadratic_form
from .models import HERMITIAN_IDS, SYSTEM_IDS, SystemSpec, TimeGrid, build_hamiltonian, build_propagators, exact_evolution, initial_state
from .qubo import FixedPointCode, cross_check_printed, decode_solution, encode_qubo, qubo_energy
from .solvers.bruteforce import enumerate_energies

EXHAUSTIVE_BITS = 16
RANDOM_CHECKS = 10_000


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str
    informational: bool = False

    def line(self) -> str:
        status = "INFO" if self.informational else ("PASS" if self.passed else "FAIL")
        return f"[{status}] {self.suite}: {self.name} - {self.detail}"


def _system(sid: str, n_points: int, dt: float, code: FixedPointCode):
    spec = SystemSpec(sid)
    h = build_hamiltonian(spec)
    grid = TimeGrid.from_step(n_points, dt)
    psi0 = initial_state(spec, "basis:0")
    props = build_propagators(h, grid)
    clock = build_clock_operator(props)
    sys = build_system(clock, psi0)
    inst = encode_qubo(sys, code, metadata={"system": sid})
    return spec, h, grid, psi0, clock, sys, inst


def energy_identity_error(inst, sys, seed: int = 0) -> tuple[float, str]:
    """Max ``|qubo_energy(q) - quadratic_form(decode(q))|``, exhaustive when small."""
    if inst.n_bits <= EXHAUSTIVE_BITS:
        bits, energies = enumerate_energies(inst)
        how = f"exhaustive over {len(bits)} configurations"
    else:
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, size=(RANDOM_CHECKS, inst.n_bits), dtype=np.uint8)
        energies = qubo_energy(inst, bits)
        how = f"{RANDOM_CHECKS} random configurations"
    xs = inst.code.decode(bits.reshape(-1)).reshape(len(bits), -1)
    a = sys.A_real.to_csr()
    direct = 0.5 * np.einsum("ki,ki->k", xs, (a @ xs.T).T) - xs @ sys.phi_real
    return float(np.max(np.abs(energies - direct))), how


def energy_identity_suite(systems: Iterable[str], sizes: Iterable[int], code: FixedPointCode, dt: float = 0.5, tol: float = 1e-9):
    for sid in systems:
        for n in sizes:
            *_, sys, inst = _system(sid, n, dt, code)
            err, how = energy_identity_error(inst, sys)
            # spot-check the scalar path against the vectorized one
            q = np.zeros(inst.n_bits, dtype=np.uint8)
            err = max(err, abs(qubo_energy(inst, q) - quadratic_form(sys, decode_solution(q, inst)[0])))
            yield CheckResult("energy-identity", f"{sid} N={n} bits={inst.n_bits}", err <= tol, f"max error {err:.2e} ({how})")


def clock_kernel_suite(systems: Iterable[str], sizes: Iterable[int], dt: float = 0.5, tol: float = 1e-10):
    for sid in systems:
        for n in sizes:
            spec, h, grid, psi0, clock, sys, _ = _system(sid, n, dt, FixedPointCode())
            states = np.array(exact_evolution(h, grid, psi0))
            res = clock_residual(clock, states)
            lhs = sys.A_real.matvec(sys.layout.embed(states))
            err = float(np.max(np.abs(lhs - sys.phi_real)))
            ok = res <= tol and err <= tol
            yield CheckResult("clock-kernel", f"{sid} N={n}", ok, f"||C Psi||={res:.2e}, max|A x - phi|={err:.2e}")


def printed_coefficient_suite(systems: Iterable[str], code: FixedPointCode, dt: float = 0.5):
    for sid in systems:
        *_, sys, inst = _system(sid, 2, dt, code)
        report = cross_check_printed(inst, sys)
        yield CheckResult("printed-coefficients", f"{sid} N=2", report.consistent, report.summary(), informational=True)


def run_all(systems=SYSTEM_IDS, sizes=(2, 3), code: FixedPointCode = FixedPointCode(), dt: float = 0.5) -> list[CheckResult]:
    unitary = [s for s in systems if s in HERMITIAN_IDS]
    small = [s for s in systems if SystemSpec(s).dim <= 4]
    results = list(energy_identity_suite(systems, (2,), code, dt))
    results += list(energy_identity_suite(small, [n for n in sizes if n != 2], code, dt))
    results += list(clock_kernel_suite(unitary, sorted(set(sizes) | {4}), dt))
    results += list(printed_coefficient_suite(systems, code, dt))
    return results
