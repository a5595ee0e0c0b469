import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paraqube.models import I2, SX, SY, SZ, SYSTEM_IDS, SystemSpec, build_hamiltonian
from paraqube.numerics import (
    NotPositiveDefiniteError,
    RealSymmetricSparse,
    eigensystem,
    is_hermitian,
    kron,
    matrix_exponential,
    solve_spd,
)

from conftest import random_spd


def test_kron_examples():
    assert np.allclose(kron(SZ, SZ), np.diag([1, -1, -1, 1]))
    k = kron(I2, SX)
    assert np.allclose(k[:2, :2], SX) and np.allclose(k[2:, 2:], SX)
    assert np.allclose(k[:2, 2:], 0)
    assert kron(np.ones((2, 2)), np.ones((4, 4))).shape == (8, 8)


def test_kron_index_law():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    b = rng.normal(size=(3, 2))
    k = kron(a, b)
    for i in range(2):
        for j in range(3):
            for p in range(3):
                for q in range(2):
                    assert k[i * 3 + p, j * 2 + q] == a[i, j] * b[p, q]


def test_kron_guard():
    with pytest.raises(ValueError):
        kron(np.eye(64), np.eye(64), max_dim=1024)


def test_kron_associative():
    rng = np.random.default_rng(2)
    a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) <= 1e-14


def test_expm_examples():
    assert np.allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3), atol=0)
    u = matrix_exponential(-1j * (np.pi / 2) * SY)
    assert np.allclose(u, [[0, -1], [1, 0]], atol=1e-14)
    d = np.array([0.3, -2.0])
    assert np.allclose(matrix_exponential(np.diag(d)), np.diag(np.exp(d)), rtol=1e-14)


def test_expm_rejects_non_square():
    with pytest.raises(ValueError):
        matrix_exponential(np.zeros((2, 3)))


@pytest.mark.parametrize("a", [0.1, 1.0, 3.7, 20.0])
def test_expm_matches_sigma_y_closed_form(a):
    expected = np.cos(a) * I2 - 1j * np.sin(a) * SY
    assert np.allclose(matrix_exponential(-1j * a * SY), expected, atol=1e-12)


def _series(m, terms=80):
    out = np.eye(m.shape[0], dtype=complex)
    term = out.copy()
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


def test_expm_matches_taylor_series_on_small_norm():
    rng = np.random.default_rng(3)
    m = 0.4 * (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    r = matrix_exponential(m)
    assert np.linalg.norm(r - _series(m)) <= 1e-13 * np.linalg.norm(r)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(0.01, 30))
def test_expm_anti_hermitian_is_unitary(n, seed, scale):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = scale * (h + h.conj().T) / 2
    u = matrix_exponential(-1j * h)
    assert np.max(np.abs(u.conj().T @ u - np.eye(n))) <= 1e-10


def test_eigensystem_examples():
    w, _ = eigensystem(SZ)
    assert np.allclose(w, [-1, 1])
    w, _ = eigensystem(build_hamiltonian("H1"))
    assert np.allclose(w, [-np.pi / 2, np.pi / 2], atol=1e-14)
    w, _ = eigensystem(build_hamiltonian(SystemSpec("H7", omega=1.0, alpha=0.3)))
    assert np.allclose(w, [-1, 1], atol=1e-10)


@pytest.mark.parametrize("sid", SYSTEM_IDS)
def test_eigensystem_reconstructs_catalog(sid):
    h = build_hamiltonian(sid)
    w, v = eigensystem(h)
    assert np.max(np.abs(h @ v - v * w)) <= 1e-10
    assert np.max(np.abs(v @ np.diag(w) @ np.linalg.inv(v) - h)) <= 1e-9
    if is_hermitian(h):
        assert np.all(np.diff(w.real) >= 0)
        assert np.allclose(v.conj().T @ v, np.eye(len(w)), atol=1e-12)


def test_eigensystem_rejects_large_non_hermitian():
    m = np.triu(np.ones((3, 3)))
    with pytest.raises(ValueError):
        eigensystem(m)


def test_eigensystem_defective_2x2():
    with pytest.raises(ArithmeticError):
        eigensystem(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_sparse_container_validation():
    with pytest.raises(ValueError):
        RealSymmetricSparse(3, [1], [0], [1.0])
    with pytest.raises(ValueError):
        RealSymmetricSparse(3, [0, 0], [1, 1], [1.0, 2.0])
    with pytest.raises(ValueError):
        RealSymmetricSparse(2, [0], [2], [1.0])
    m = RealSymmetricSparse(3, [0, 0, 2], [0, 2, 2], [1.0, 5.0, 2.0])
    assert np.allclose(m.to_dense(), [[1, 0, 5], [0, 0, 0], [5, 0, 2]])
    assert np.allclose(m @ np.ones(3), [6, 0, 7])


def test_solve_spd_examples():
    rng = np.random.default_rng(4)
    b = rng.normal(size=5)
    assert np.allclose(solve_spd(RealSymmetricSparse.from_dense(np.eye(5)), b), b)
    assert np.allclose(solve_spd(RealSymmetricSparse.from_dense(np.diag([2.0, 4.0])), np.array([2.0, 4.0])), [1, 1])
    assert np.all(solve_spd(RealSymmetricSparse.from_dense(np.eye(3)), np.zeros(3)) == 0)


def test_solve_spd_rejects_indefinite_and_bad_shape():
    with pytest.raises(NotPositiveDefiniteError):
        solve_spd(RealSymmetricSparse.from_dense(np.diag([1.0, -1.0])), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        solve_spd(RealSymmetricSparse.from_dense(np.eye(2)), np.ones(3))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 200), st.integers(0, 2**32 - 1))
def test_solve_spd_residual_property(n, seed):
    rng = np.random.default_rng(seed)
    a = random_spd(rng, n)
    b = rng.normal(size=n)
    x = solve_spd(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)
