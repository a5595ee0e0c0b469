import numpy as np
import pytest

from paraqube.clock import (
    ComponentLayout,
    build_clock_operator,
    build_system,
    clock_residual,
    continuous_minimizer,
    printed_clock_operator,
    quadratic_form,
    system_for,
)
from paraqube.models import HERMITIAN_IDS, SystemSpec, TimeGrid, build_hamiltonian, build_propagators, exact_evolution, initial_state
from paraqube.numerics import NotPositiveDefiniteError, is_hermitian


def _chain(sid, n_points, dt=0.5, psi0="basis:0"):
    h = build_hamiltonian(sid)
    grid = TimeGrid.from_step(n_points, dt)
    psi = initial_state(sid, psi0)
    props = build_propagators(h, grid)
    return h, grid, psi, props, build_clock_operator(props)


def test_layout_is_bijective():
    lay = ComponentLayout(L=4, N=3)
    seen = {lay.index(n, l, p) for n in range(3) for l in range(4) for p in range(2)}
    assert seen == set(range(lay.size))
    for i in range(lay.size):
        assert lay.index(*lay.locate(i)) == i
    z = np.arange(12).reshape(3, 4) * (1 + 2j)
    assert np.array_equal(lay.unembed(lay.embed(z)), z)
    assert lay.index(1, 2, 1) == 12 + 4 + 2


def test_two_block_example():
    u = build_propagators(build_hamiltonian("H2"), TimeGrid.from_step(2, 0.4))[0]
    c = build_clock_operator([u]).toarray()
    expected = np.block([[np.eye(2), -u.conj().T], [-u, np.eye(2)]])
    assert np.allclose(c, expected)
    psi = np.array([0.6, 0.8j])
    assert np.allclose(c @ np.concatenate([psi, u @ psi]), 0, atol=1e-14)


def test_empty_clock_is_zero():
    c = build_clock_operator([], n_points=1, dim=2)
    assert c.shape == (2, 2) and c.nnz == 0
    with pytest.raises(ValueError):
        build_clock_operator([])


@pytest.mark.parametrize("sid", HERMITIAN_IDS)
@pytest.mark.parametrize("n_points", [2, 3, 4])
def test_history_in_kernel(sid, n_points):
    h, grid, psi, props, clock = _chain(sid, n_points)
    assert is_hermitian(clock.toarray())
    history = exact_evolution(h, grid, psi)
    assert clock_residual(clock, history) <= 1e-10


def test_kernel_for_random_states_and_psd():
    rng = np.random.default_rng(5)
    for sid in ("H2", "H4", "H6"):
        for n_points in (2, 3, 4):
            h, grid, _, _, clock = _chain(sid, n_points, dt=0.3)
            dense = clock.toarray()
            assert np.linalg.eigvalsh(dense).min() >= -1e-12
            for _ in range(8):
                v = rng.normal(size=len(h)) + 1j * rng.normal(size=len(h))
                v /= np.linalg.norm(v)
                assert clock_residual(clock, exact_evolution(h, grid, v)) <= 1e-10


def test_printed_weights_do_not_annihilate_history():
    h, grid, psi, props, clock = _chain("H1", 3)
    history = exact_evolution(h, grid, psi)
    assert clock_residual(clock, history) <= 1e-12
    literal = printed_clock_operator(props)
    assert clock_residual(literal, history) > 0.5


def test_single_slice_system():
    psi = initial_state("H4", "basis:2")
    sys = system_for(build_hamiltonian("H4"), TimeGrid(0.0, 0.0, 1), psi)
    assert np.allclose(sys.A_real.to_dense(), np.eye(8))
    assert np.array_equal(sys.phi_real, sys.layout.embed(psi))
    x, hist = continuous_minimizer(sys)
    assert np.allclose(hist[0], psi)
    assert quadratic_form(sys, sys.phi_real) == -0.5


@pytest.mark.parametrize("sid", HERMITIAN_IDS)
def test_embedding_reproduces_history_equation(sid):
    h, grid, psi, props, clock = _chain(sid, 3)
    sys = build_system(clock, psi)
    x = sys.layout.embed(exact_evolution(h, grid, psi))
    assert np.max(np.abs(sys.A_real @ x - sys.phi_real)) <= 1e-10
    # phi lives only in the t0 block
    support = {sys.layout.locate(i)[0] for i in np.flatnonzero(sys.phi_real)}
    assert support == {0}


def test_h1_three_points_is_positive_definite():
    *_, psi, _, clock = _chain("H1", 3)
    sys = build_system(clock, psi)
    a = sys.A_real.to_dense()
    assert a.shape == (12, 12) and np.allclose(a, a.T)
    assert np.linalg.eigvalsh(a).min() > 0


def test_quadratic_form_identities():
    h, grid, psi, props, clock = _chain("H2", 4)
    sys = build_system(clock, psi)
    assert quadratic_form(sys, np.zeros(sys.n_real)) == 0.0
    x, _ = continuous_minimizer(sys)
    assert abs(quadratic_form(sys, x) + 0.5 * sys.phi_real @ x) <= 1e-12
    rng = np.random.default_rng(6)
    f_star = quadratic_form(sys, x)
    for _ in range(100):
        d = rng.normal(size=x.size)
        d *= rng.uniform() / np.linalg.norm(d)
        assert f_star <= quadratic_form(sys, x + d) + 1e-14
    with pytest.raises(ValueError):
        quadratic_form(sys, np.zeros(3))


def test_real_embedding_fidelity():
    rng = np.random.default_rng(7)
    h, grid, psi, props, clock = _chain("H8", 3)
    sys = build_system(clock, psi)
    phi = np.zeros(sys.L * sys.N, dtype=complex)
    phi[: sys.L] = psi
    for _ in range(50):
        z = rng.normal(size=phi.size) + 1j * rng.normal(size=phi.size)
        direct = 0.5 * np.vdot(z, sys.A_complex @ z).real - np.vdot(phi, z).real
        assert abs(direct - quadratic_form(sys, sys.layout.embed(z))) <= 1e-12


@pytest.mark.parametrize("sid", HERMITIAN_IDS)
def test_minimizer_recovers_history(sid):
    h, grid, psi, props, clock = _chain(sid, 4)
    _, hist = continuous_minimizer(build_system(clock, psi))
    assert np.max(np.abs(hist.slices - np.array(exact_evolution(h, grid, psi)))) <= 1e-8


def test_h4_bell_state_from_01():
    # the flip-flop generator gives (|01> - i|10>)/sqrt2 at t = 0.5 and a full swap at t = 1
    h, grid, psi, props, clock = _chain("H4", 3, psi0="basis:1")
    _, hist = continuous_minimizer(build_system(clock, psi))
    bell = np.array([0, 1, -1j, 0]) / np.sqrt(2)
    assert abs(abs(np.vdot(bell, hist[1])) - 1) <= 1e-9
    assert abs(abs(hist[2][2]) - 1) <= 1e-9


def test_h7_definiteness_is_checked():
    spec = SystemSpec("H7")
    h = build_hamiltonian(spec)
    psi = initial_state(spec, "basis:0")
    # short chains stay positive definite, longer ones do not
    sys = system_for(h, TimeGrid.from_step(3, 0.5), psi)
    assert np.linalg.eigvalsh(sys.A_real.to_dense()).min() > 0
    sys = system_for(h, TimeGrid.from_step(6, 0.5), psi)
    assert np.linalg.eigvalsh(sys.A_real.to_dense()).min() < 0
    with pytest.raises(NotPositiveDefiniteError):
        continuous_minimizer(sys)


def test_build_system_validation():
    *_, clock = _chain("H1", 2)
    with pytest.raises(ValueError):
        build_system(clock, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        build_system(clock, np.array([1.0, 0, 0]))
    with pytest.raises(ValueError):
        build_system(clock, np.array([1.0, 0]), n_points=3)
