"""Compare the compiled and pure-Python kernels on catalog instances.

Reports flip-attempt throughput for annealing and state throughput for the
Gray-code enumeration, and checks that both backends return identical
annealing states for the same seed.

    python3 benchmarks/bench_kernels.py [--sweeps 200] [--restarts 50]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from paraqube.clock import system_for
from paraqube.models import SystemSpec, TimeGrid, build_hamiltonian, initial_state
from paraqube.qubo import FixedPointCode, encode_qubo
from paraqube.solvers import BACKENDS, SaConfig, brute_force, simulated_annealing


def instance(sid, n_points):
    spec = SystemSpec(sid)
    sys = system_for(build_hamiltonian(spec), TimeGrid.from_step(n_points, 0.5), initial_state(spec, "basis:0"))
    return encode_qubo(sys, FixedPointCode(2, 0))


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sweeps", type=int, default=200)
    ap.add_argument("--restarts", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if "compiled" not in BACKENDS:
        print("compiled kernels are not built; only the Python fallback is available")
    cfg = SaConfig(sweeps=args.sweeps, restarts=args.restarts)

    print(f"{'instance':<10}{'bits':>6}{'backend':>10}{'anneal s':>11}{'ns/flip':>9}{'speedup':>9}  identical")
    for sid, n in (("H1", 2), ("H1", 4), ("H4", 2), ("H6", 2), ("H1", 8)):
        inst = instance(sid, n)
        flips = cfg.sweeps * cfg.restarts * inst.n_bits
        results = {}
        for name in BACKENDS:
            results[name] = timed(lambda: simulated_annealing(inst, cfg, seed=1, backend=name), args.repeat)
        base = results.get("python", (None,))[0]
        ref = next(iter(results.values()))[1].bits
        for name, (t, s) in results.items():
            same = np.array_equal(s.bits, ref)
            speed = f"{base / t:8.1f}x" if base else "      -"
            print(f"{sid}/N={n:<4}{inst.n_bits:>6}{name:>10}{t:>11.4f}{1e9 * t / flips:>9.1f}{speed}  {same}")

    print()
    print(f"{'instance':<10}{'bits':>6}{'backend':>10}{'enum s':>11}{'ns/state':>9}{'speedup':>9}")
    for sid, n in (("H1", 2), ("H2", 2), ("H1", 3)):
        inst = instance(sid, n)
        results = {}
        for name in BACKENDS:
            if name == "python" and inst.n_bits > 20:
                continue
            results[name] = timed(lambda: brute_force(inst, backend=name), 1)
        base = results.get("python", (None,))[0]
        for name, (t, (e, _)) in results.items():
            speed = f"{base / t:8.1f}x" if base else "      -"
            print(f"{sid}/N={n:<4}{inst.n_bits:>6}{name:>10}{t:>11.4f}{1e9 * t / 2**inst.n_bits:>9.2f}{speed}  E0={e:.6f}")


if __name__ == "__main__":
    main()
