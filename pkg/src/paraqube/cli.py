"""Command-line entry point: generate | solve | decode | bench | oracle | verify."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import bench as bench_mod
from . import verify as verify_mod
from .models import SYSTEM_IDS, SystemSpec, TimeGrid, build_hamiltonian, exact_evolution, initial_state
from .observables import (
    DegenerateSampleError,
    observable_series,
    oracle_series,
    write_series_csv,
)
from .qubo import FixedPointCode, InstanceFormatError, encode_qubo, read_instance, write_instance
from .clock import system_for
from .solvers import (
    BACKEND,
    BallisticConfig,
    InstanceTooLargeError,
    SaConfig,
    SampleSet,
    ballistic_solve,
    brute_force,
    simulated_annealing,
)
from .solvers.samples import config_digest

log = logging.getLogger("paraqube")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``"2..6"`` (inclusive), ``"2,4,8"`` or a single integer."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise UsageError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError(f"empty range {text!r}")
    return out


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("PARAQUBE_THREADS")
    return int(env) if env else 1


def _header(args, **extra) -> dict:
    head = {"paraqube": "0.1.0", **extra}
    if not args.deterministic:
        head["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return head


def _spec(args) -> SystemSpec:
    params = {k: getattr(args, k) for k in ("omega", "alpha", "b") if getattr(args, k, None) is not None}
    return SystemSpec(args.system, **params)


def _load_config(path):
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


# -- subcommands ------------------------------------------------------------


def cmd_generate(args) -> int:
    spec = _spec(args)
    grid = _grid(args)
    psi0 = initial_state(spec, args.psi0)
    sys_ = system_for(build_hamiltonian(spec), grid, psi0)
    meta = {"system": spec.id, "t0": grid.t0, "dt": grid.dt if grid.n_points > 1 else args.dt, "psi0": args.psi0, **spec.params()}
    inst = encode_qubo(sys_, FixedPointCode(args.bits, args.range_exp), metadata=meta)
    write_instance(inst, args.out)
    print(f"wrote {args.out}: {spec.id} L={inst.L} N={inst.N} nbits={inst.n_bits} couplings={len(inst.values)}")
    return EXIT_OK


def _grid(args) -> TimeGrid:
    if args.tf is not None:
        return TimeGrid(args.t0, args.tf, args.timepoints)
    return TimeGrid.from_step(args.timepoints, args.dt, args.t0)


def cmd_solve(args) -> int:
    inst = read_instance(args.input)
    cfg = _load_config(args.config)
    sets = []
    wall = 0.0
    for run in range(args.runs):
        if args.solver == "sa":
            sa = SaConfig.from_dict({**cfg, "restarts": args.samples})
            s = simulated_annealing(inst, sa, seed=args.seed, stream=run, num_threads=_threads(args))
            digest = config_digest(sa.__dict__)
        elif args.solver == "ballistic":
            bc = BallisticConfig.from_dict({**cfg, "restarts": args.samples})
            s = ballistic_solve(inst, bc, seed=(args.seed, run))
            digest = config_digest(bc.__dict__)
        else:
            start = time.perf_counter()
            _, ground = brute_force(inst)
            s = SampleSet.from_bits(inst, ground, {"wall_time": time.perf_counter() - start})
            digest = "none"
        wall += s.metadata["wall_time"]
        sets.append(s)
    merged = SampleSet.concatenate(sets).aggregate()
    head = _header(args, solver=args.solver, seed=args.seed, runs=args.runs, samples=args.samples,
                   config=digest, backend=BACKEND)
    if not args.deterministic:
        head["wall_time"] = f"{wall:.6f}"
    merged.to_csv(args.out, head)
    print(f"wrote {args.out}: {merged.total} samples, {len(merged)} distinct, best energy {merged.energies.min():.12g}")
    return EXIT_OK


def cmd_decode(args) -> int:
    inst = read_instance(args.input)
    samples = SampleSet.from_csv(args.samples)
    if samples.n_bits != inst.n_bits:
        raise ValueError(f"samples have {samples.n_bits} bits, instance has {inst.n_bits}")
    selector = "best_energy" if args.selector in ("best", "best_energy") else int(args.selector)
    rows = observable_series(samples, inst, selector)
    write_series_csv(rows, args.out, _header(args, system=inst.metadata.get("system"), selector=args.selector))
    print(f"wrote {args.out}: {len(rows)} rows")
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = _spec(args)
    grid = _grid(args)
    states = exact_evolution(build_hamiltonian(spec), grid, initial_state(spec, args.psi0))
    rows = oracle_series(grid.points, states)
    write_series_csv(rows, args.out, _header(args, system=spec.id, psi0=args.psi0, source="exact"))
    print(f"wrote {args.out}: {len(rows)} rows")
    return EXIT_OK


def cmd_bench(args) -> int:
    systems = [s.strip() for s in args.system.split(",") if s.strip()]
    solvers = [s.strip() for s in args.solver.split(",") if s.strip()]
    for s in solvers:
        if s not in bench_mod.SOLVERS:
            raise UsageError(f"unknown solver {s!r}")
    cfg = _load_config(args.config)
    settings = bench_mod.SweepSettings(
        samples_per_run=args.samples,
        runs=args.runs,
        code=FixedPointCode(args.bits, args.range_exp),
        psi0=args.psi0,
        dt=args.dt,
        t0=args.t0,
        p_target=args.target,
        seed=args.seed,
        threads=_threads(args),
        sa=SaConfig.from_dict({**cfg.get("sa", {}), "restarts": args.samples}),
        ballistic=BallisticConfig.from_dict({**cfg.get("ballistic", {}), "restarts": args.samples}),
        model_unit_cost=args.model_unit_cost if args.deterministic else None,
    )
    sizes = parse_range(args.timepoints)
    records = []
    for system in systems:
        spec = SystemSpec(system)
        for solver in solvers:
            for rec in bench_mod.sweep(spec, sizes, solver, settings):
                print(f"{rec.system} {rec.solver} N={rec.n_timepoints} n_vars={rec.n_vars} bits={rec.n_bits} "
                      f"p={rec.p_success:.4f} t_run={rec.t_run:.4g}s tts={rec.tts:.4g}s {rec.flag}".rstrip())
                records.append(rec)
    report = bench_mod.build_report(records, settings)
    if not args.deterministic:
        report["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    bench_mod.write_report(report, args.out)
    if args.csv:
        bench_mod.write_records_csv(records, args.csv)
    for entry in report["fits"]:
        fit = entry["fit"]
        if fit:
            beta = "inf" if fit["beta"] is None else f"{fit['beta']:.4g}"
            print(f"fit {entry['system']} {entry['solver']}: D={fit['D_fit']:.4g}s beta={beta} r2={fit['r_squared']:.3f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    systems = SYSTEM_IDS if args.systems == "all" else tuple(s.strip() for s in args.systems.split(","))
    results = verify_mod.run_all(systems, tuple(parse_range(args.timepoints)), FixedPointCode(args.bits, args.range_exp), args.dt)
    failed = 0
    for r in results:
        print(r.line())
        failed += (not r.passed) and not r.informational
    print(f"{len(results)} checks, {failed} failed")
    return EXIT_DOMAIN if failed else EXIT_OK


# -- parser -----------------------------------------------------------------


def _add_system(p, required=True):
    p.add_argument("--system", required=required, choices=SYSTEM_IDS, help="catalog generator")
    p.add_argument("--omega", type=float, help="H7 frequency")
    p.add_argument("--alpha", type=float, help="H7 phase angle, |alpha| < pi/2")
    p.add_argument("--b", type=float, help="H7 coupling (default sqrt(1 + sin^2 alpha))")


def _add_grid(p):
    p.add_argument("--timepoints", type=int, required=True, help="number of time points N")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=0.5, help="slice width (default 0.5)")
    p.add_argument("--tf", type=float, help="final time; overrides --dt")
    p.add_argument("--psi0", default="basis:0", help="basis:<i> or eigen:<k> (default basis:0)")


def _add_code(p):
    p.add_argument("--bits", type=int, default=2, help="bits per real component R (default 2)")
    p.add_argument("--range-exp", type=int, default=0, help="range exponent D (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paraqube", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a QUBO instance file")
    _add_system(p)
    _add_grid(p)
    _add_code(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="sample an instance file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--solver", choices=("sa", "ballistic", "bruteforce"), default="sa")
    p.add_argument("--samples", type=int, default=1000, help="restarts per run")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="solver config JSON")
    p.add_argument("--threads", type=int)
    p.add_argument("--deterministic", action="store_true", help="omit timestamp and timing header lines")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("decode", help="observable series from a sample set")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--selector", default="best", help="best, or the rank of a distinct sample by energy")
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("oracle", help="exact-evolution observable series")
    _add_system(p)
    _add_grid(p)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="success probability / TTS sweep with exponential fits")
    p.add_argument("--system", required=True, help="comma-separated system ids")
    p.add_argument("--timepoints", required=True, help="range a..b or list")
    p.add_argument("--solver", default="sa", help="comma-separated: sa, ballistic, bruteforce")
    p.add_argument("--target", type=float, default=0.99)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=0.5)
    p.add_argument("--psi0", default="basis:0")
    _add_code(p)
    p.add_argument("--config", help='JSON with optional "sa" and "ballistic" sections')
    p.add_argument("--threads", type=int)
    p.add_argument("--deterministic", action="store_true",
                   help="time runs with a work model instead of the wall clock, omit timestamps")
    p.add_argument("--model-unit-cost", type=float, default=1e-9, help="seconds per work unit under --deterministic")
    p.add_argument("--csv", help="also write records as CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="run invariant suites; nonzero exit on failure")
    p.add_argument("--systems", default="all")
    p.add_argument("--timepoints", default="2,3")
    p.add_argument("--dt", type=float, default=0.5)
    _add_code(p)
    p.set_defaults(func=cmd_verify)
    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"paraqube: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"paraqube: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, InstanceTooLargeError, DegenerateSampleError, ValueError, ArithmeticError) as exc:
        print(f"paraqube: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
