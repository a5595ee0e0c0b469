"""Success probability, time to solution and exponential scaling fits."""

from __future__ import annotations

import json
import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .clock import ClockSystem, system_for
from .models import SystemSpec, TimeGrid, build_hamiltonian, initial_state
from .numerics import NotPositiveDefiniteError
from .qubo import FixedPointCode, QuboInstance, encode_qubo
from .solvers import (
    MAX_BRUTE_FORCE_BITS,
    BallisticConfig,
    SaConfig,
    SampleSet,
    SearchBudgetExceeded,
    ballistic_solve,
    brute_force,
    lattice_ground_state,
    simulated_annealing,
)

log = logging.getLogger(__name__)

SOLVERS = ("sa", "ballistic", "bruteforce")


def success_probability(samples: SampleSet, ground_energy: float, tol: float = 1e-9) -> float:
    if samples.total == 0:
        raise ValueError("empty sample set")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    hits = samples.counts[samples.energies <= ground_energy + tol].sum()
    return float(hits / samples.total)


def time_to_solution(p_success: float, p_target: float, t_run: float) -> float:
    """``max(1, ln(1 - p_target) / ln(1 - p_success)) * t_run``; infinite when ``p_success == 0``."""
    if not 0 < p_target < 1:
        raise ValueError(f"p_target must lie in (0, 1), got {p_target}")
    if not 0 <= p_success <= 1:
        raise ValueError(f"p_success must lie in [0, 1], got {p_success}")
    if not t_run > 0:
        raise ValueError("t_run must be positive")
    if p_success == 0:
        return math.inf
    if p_success >= p_target:
        return t_run
    return max(1.0, math.log1p(-p_target) / math.log1p(-p_success)) * t_run


@dataclass
class RunRecord:
    system: str
    n_timepoints: int
    n_vars: int
    n_bits: int
    solver: str
    samples_per_run: int
    runs: int
    p_success: float
    t_run: float
    tts: float
    ground_energy: float | None = None
    ground_method: str = ""
    best_energy: float | None = None
    flag: str = ""

    def to_json(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
        return d


@dataclass
class FitResult:
    D_fit: float
    beta: float
    r_squared: float
    n_points: int
    n_excluded: int = 0

    def to_json(self) -> dict:
        d = asdict(self)
        if not math.isfinite(self.beta):
            d["beta"] = None
        return d


def fit_exponential(records: Sequence[RunRecord]) -> FitResult:
    """Least squares of ``ln(TTS)`` against ``n_vars``: ``TTS ~ D exp(n_vars / beta)``.

    Records with infinite TTS are excluded (and counted). A non-positive slope
    yields ``beta = inf`` with a warning.
    """
    usable = [r for r in records if math.isfinite(r.tts) and r.tts > 0]
    excluded = len(records) - len(usable)
    xs = np.array([r.n_vars for r in usable], dtype=float)
    if len(usable) < 2 or np.unique(xs).size < 2:
        raise ValueError("need at least two finite records with distinct n_vars")
    ys = np.log([r.tts for r in usable])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    if slope <= 0:
        warnings.warn("TTS does not grow with size; reporting beta = inf", RuntimeWarning, stacklevel=2)
        beta = math.inf
    else:
        beta = 1.0 / slope
    return FitResult(D_fit=float(math.exp(intercept)), beta=float(beta), r_squared=max(0.0, min(1.0, r2)),
                     n_points=len(usable), n_excluded=excluded)


# -- ground truth -----------------------------------------------------------


def ground_truth(instance: QuboInstance, sys: ClockSystem, upper_bound: float | None = None,
                 brute_force_cap: int = MAX_BRUTE_FORCE_BITS, max_nodes: int = 2_000_000) -> tuple[float | None, str]:
    """Exact ground energy and how it was obtained.

    Returns ``(energy, "bruteforce" | "lattice")``, or ``(None, "")`` when
    neither exact method applies.
    """
    if instance.n_bits <= min(brute_force_cap, 24):
        return brute_force(instance)[0], "bruteforce"
    try:
        return lattice_ground_state(instance, sys, upper_bound=upper_bound, max_nodes=max_nodes)[0], "lattice"
    except (NotPositiveDefiniteError, SearchBudgetExceeded) as exc:
        log.info("no exact ground state for %s N=%d: %s", instance.metadata.get("system"), instance.N, exc)
    if instance.n_bits <= brute_force_cap:
        return brute_force(instance)[0], "bruteforce"
    return None, ""


# -- sweeps -----------------------------------------------------------------


@dataclass
class SweepSettings:
    samples_per_run: int = 1000
    runs: int = 20
    code: FixedPointCode = field(default_factory=FixedPointCode)
    psi0: str = "basis:0"
    dt: float = 0.5
    t0: float = 0.0
    p_target: float = 0.99
    seed: int = 0
    threads: int = 1
    sa: SaConfig = field(default_factory=SaConfig)
    ballistic: BallisticConfig = field(default_factory=BallisticConfig)
    energy_tol: float = 1e-9
    brute_force_cap: int = MAX_BRUTE_FORCE_BITS
    # seconds per unit of work; when set, t_run comes from a work model instead of the wall clock
    model_unit_cost: float | None = None


def build_instance(spec: SystemSpec, n_points: int, settings: SweepSettings) -> tuple[QuboInstance, ClockSystem]:
    grid = TimeGrid.from_step(n_points, settings.dt, settings.t0)
    psi0 = initial_state(spec, settings.psi0)
    sys = system_for(build_hamiltonian(spec), grid, psi0)
    meta = {"system": spec.id, "t0": settings.t0, "dt": settings.dt, "psi0": settings.psi0, **spec.params()}
    return encode_qubo(sys, settings.code, metadata=meta), sys


def _work_units(solver: str, instance: QuboInstance, settings: SweepSettings) -> float:
    n = instance.n_bits
    if solver == "sa":
        return float(settings.samples_per_run) * settings.sa.sweeps * n
    if solver == "ballistic":
        return float(settings.samples_per_run) * settings.ballistic.steps * n * n
    return float(2**n)


def _run_solver(solver: str, instance: QuboInstance, settings: SweepSettings, run: int) -> SampleSet:
    if solver == "sa":
        cfg = SaConfig(**{**asdict(settings.sa), "restarts": settings.samples_per_run})
        return simulated_annealing(instance, cfg, seed=settings.seed, stream=run, num_threads=settings.threads)
    if solver == "ballistic":
        cfg = BallisticConfig(**{**asdict(settings.ballistic), "restarts": settings.samples_per_run})
        return ballistic_solve(instance, cfg, seed=(settings.seed, run))
    raise ValueError(f"unknown solver {solver!r}")


def sweep(spec: SystemSpec | str, sizes: Sequence[int], solver: str, settings: SweepSettings | None = None) -> list[RunRecord]:
    """One record per time-point count, averaging success and run time over runs."""
    if isinstance(spec, str):
        spec = SystemSpec(spec)
    settings = settings or SweepSettings()
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    records = []
    for n_points in sizes:
        instance, sys = build_instance(spec, n_points, settings)
        base = dict(system=spec.id, n_timepoints=n_points, n_vars=instance.n_real, n_bits=instance.n_bits, solver=solver)
        if solver == "bruteforce":
            records.append(_bruteforce_record(instance, settings, base))
            continue

        run_sets, p_runs, t_runs = [], [], []
        for run in range(settings.runs):
            start = time.perf_counter()
            samples = _run_solver(solver, instance, settings, run)
            elapsed = time.perf_counter() - start
            if settings.model_unit_cost is not None:
                elapsed = _work_units(solver, instance, settings) * settings.model_unit_cost
            run_sets.append(samples)
            t_runs.append(elapsed)
        best = min(float(s.energies.min()) for s in run_sets)
        ground, method = ground_truth(instance, sys, upper_bound=best, brute_force_cap=settings.brute_force_cap)
        flag = ""
        if ground is None:
            ground, method, flag = best, "best_known", "no-ground-truth"
        p_runs = [success_probability(s, ground, settings.energy_tol) for s in run_sets]
        p = float(np.mean(p_runs))
        t_run = float(np.mean(t_runs))
        records.append(RunRecord(
            **base, samples_per_run=settings.samples_per_run, runs=settings.runs,
            p_success=p, t_run=t_run, tts=time_to_solution(p, settings.p_target, t_run),
            ground_energy=ground, ground_method=method, best_energy=best, flag=flag,
        ))
    return records


def _bruteforce_record(instance: QuboInstance, settings: SweepSettings, base: dict) -> RunRecord:
    common = dict(**base, samples_per_run=1, runs=settings.runs)
    if instance.n_bits > settings.brute_force_cap:
        return RunRecord(**common, p_success=0.0, t_run=math.nan, tts=math.inf, flag="infeasible")
    times = []
    ground = None
    for _ in range(settings.runs):
        start = time.perf_counter()
        ground, _ = brute_force(instance, max_bits=settings.brute_force_cap)
        times.append(time.perf_counter() - start)
    t_run = float(np.mean(times))
    if settings.model_unit_cost is not None:
        t_run = _work_units("bruteforce", instance, settings) * settings.model_unit_cost
    return RunRecord(**common, p_success=1.0, t_run=t_run, tts=time_to_solution(1.0, settings.p_target, t_run),
                     ground_energy=ground, ground_method="bruteforce", best_energy=ground)


# -- reports ----------------------------------------------------------------


def _try_fit(records) -> FitResult | None:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return fit_exponential(records)
    except ValueError:
        return None


def build_report(records: Sequence[RunRecord], settings: SweepSettings | None = None) -> dict:
    """Records plus per-(system, solver) and pooled per-solver fits."""
    fits = []
    for solver in sorted({r.solver for r in records}):
        mine = [r for r in records if r.solver == solver]
        for system in sorted({r.system for r in mine}):
            fit = _try_fit([r for r in mine if r.system == system])
            fits.append({"system": system, "solver": solver, "fit": fit.to_json() if fit else None})
        fit = _try_fit(mine)
        fits.append({"system": "pooled", "solver": solver, "fit": fit.to_json() if fit else None})
    report = {"records": [r.to_json() for r in records], "fits": fits}
    if settings is not None:
        report["settings"] = {
            "samples_per_run": settings.samples_per_run,
            "runs": settings.runs,
            "R": settings.code.R,
            "D": settings.code.D,
            "psi0": settings.psi0,
            "dt": settings.dt,
            "t0": settings.t0,
            "p_target": settings.p_target,
            "seed": settings.seed,
            "sa": asdict(settings.sa),
            "ballistic": asdict(settings.ballistic),
            "timing": "model" if settings.model_unit_cost is not None else "wall",
        }
    return report


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=False) + "\n")


CSV_COLUMNS = ("system", "solver", "n_timepoints", "n_vars", "n_bits", "samples_per_run", "runs",
               "p_success", "t_run", "tts", "ground_energy", "ground_method", "best_energy", "flag")


def write_records_csv(records: Sequence[RunRecord], path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        d = asdict(r)
        lines.append(",".join("" if d[c] is None else repr(d[c]) if isinstance(d[c], float) else str(d[c]) for c in CSV_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")
