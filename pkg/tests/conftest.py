import functools
import sys

import numpy as np
import pytest
import scipy.sparse as sp

from paraqube.clock import build_system, system_for
from paraqube.models import SYSTEM_IDS, SystemSpec, TimeGrid, build_hamiltonian, initial_state
from paraqube.numerics import RealSymmetricSparse
from paraqube.qubo import FixedPointCode, QuboInstance, encode_qubo


@functools.lru_cache(maxsize=None)
def catalog_instance(sid: str, n_points: int = 2, R: int = 2, D: int = 0, dt: float = 0.5, psi0: str = "basis:0"):
    spec = SystemSpec(sid)
    grid = TimeGrid.from_step(n_points, dt)
    sys = system_for(build_hamiltonian(spec), grid, initial_state(spec, psi0))
    meta = {"system": sid, "t0": 0.0, "dt": dt, "psi0": psi0, **spec.params()}
    return encode_qubo(sys, FixedPointCode(R, D), metadata=meta), sys


def toy_system():
    """One-slice, one-component system: A = I_2, phi = (1, 0).

    The real part carries the ``x^2/2 - x`` toy objective, the imaginary part
    ``x^2/2`` with its minimum at 0.
    """
    return build_system(sp.csr_matrix((1, 1), dtype=complex), np.array([1.0 + 0j]))


def raw_instance(linear, couplings=(), offset=0.0):
    """QUBO with arbitrary coefficients on an even number of bits (R = 1, N = 1)."""
    n = len(linear)
    assert n % 2 == 0
    rows = [c[0] for c in couplings]
    cols = [c[1] for c in couplings]
    vals = [c[2] for c in couplings]
    return QuboInstance(n_bits=n, linear=np.array(linear, float), rows=rows, cols=cols, values=vals,
                        offset=offset, code=FixedPointCode(1, 0), L=n // 2, N=1)


def random_spd(rng, n):
    m = rng.normal(size=(n, n))
    return RealSymmetricSparse.from_dense(m @ m.T + n * np.eye(n))


@pytest.fixture
def toy():
    sys = toy_system()
    return encode_qubo(sys, FixedPointCode(2, 0)), sys


@pytest.fixture(params=SYSTEM_IDS)
def catalog(request):
    return catalog_instance(request.param)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for number in sorted(verdicts):
            terminalreporter.write_line(verdicts[number])
