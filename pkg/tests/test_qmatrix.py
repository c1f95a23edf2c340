import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complab.errors import BadTrace, DimensionMismatch, NotFinite, NotHermitian, NotPSD
from complab.qmatrix import (
    RngSpec,
    eigenvalues_hermitian,
    partial_trace_detector,
    partial_trace_system,
    pure_state,
    random_density,
    random_density_batch,
    random_unitary,
    tensor_product,
    validate_density,
)
from complab import measures

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def kron_loops(a, b):
    a, b = np.asarray(a), np.asarray(b)
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for m in range(b.shape[0]):
                for l in range(b.shape[1]):
                    out[i * b.shape[0] + m, j * b.shape[1] + l] = a[i, j] * b[m, l]
    return out


def ptrace_loops(m, n, d):
    out = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            out[j, k] = sum(m[j * d + x, k * d + x] for x in range(d))
    return out


def test_tensor_identity_and_projectors():
    assert np.array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(tensor_product(np.diag([1, 0]), np.diag([0, 1])), np.diag([0, 1, 0, 0]))


def test_tensor_pauli_square():
    xx = tensor_product(SX, SX)
    assert np.allclose(xx @ xx, np.eye(4), atol=0)


def test_tensor_matches_loop_oracle(rng):
    a = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    b = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    assert np.allclose(tensor_product(a, b), kron_loops(a, b), atol=1e-14)


def test_tensor_rejects_nonfinite():
    with pytest.raises(NotFinite):
        tensor_product([[np.nan]], [[1]])


def test_trace_of_tensor_factorizes(rng):
    for _ in range(20):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert abs(np.trace(tensor_product(a, b)) - np.trace(a) * np.trace(b)) < 1e-10


@pytest.mark.parametrize("n,d", [(2, 2), (3, 3), (2, 5), (4, 2)])
def test_partial_trace_product_state(n, d):
    rs = random_density(n, RngSpec(1, n))
    rd = random_density(d, RngSpec(2, d))
    joint = tensor_product(rs.data, rd.data)
    assert np.abs(partial_trace_detector(joint, n, d) - rs.data).max() < 1e-12
    assert np.abs(partial_trace_system(joint, n, d) - rd.data).max() < 1e-12


def test_partial_trace_matches_loops(rng):
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    assert np.allclose(partial_trace_detector(m, 2, 3), ptrace_loops(m, 2, 3), atol=1e-14)
    assert np.isclose(np.trace(partial_trace_detector(m, 3, 2)), np.trace(m))


def test_partial_trace_bell_state():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace_detector(np.outer(phi, phi), 2, 2), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        partial_trace_detector(np.eye(6), 2, 2)


def test_fig2_joint_state_partial_trace():
    # reduced off-diagonals equal rho_jk <d_k|d_j> = rho_jk / 2
    psi = np.array([1, 3, 2]) / np.sqrt(14)
    d = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]]) / np.sqrt(2)
    amp = sum(psi[k] * np.kron(np.eye(3)[k], d[k]) for k in range(3))
    rs1 = partial_trace_detector(np.outer(amp, amp.conj()), 3, 3)
    rho = np.outer(psi, psi)
    expected = rho / 2 + np.diag(np.diag(rho)) / 2
    assert np.abs(rs1 - expected).max() < 1e-15


def test_validate_accepts_maximally_mixed():
    assert validate_density(np.eye(3) / 3).dim == 3


def test_validate_not_psd_reports_eigenvalue():
    with pytest.raises(NotPSD) as exc:
        validate_density([[0.5, 0.6], [0.6, 0.5]])
    assert exc.value.magnitude == pytest.approx(-0.1, abs=1e-14)
    assert exc.value.report()["invariant"] == "positive-semidefinite"


def test_validate_not_hermitian():
    with pytest.raises(NotHermitian) as exc:
        validate_density([[1, 1j], [1j, 0]])
    assert exc.value.magnitude == pytest.approx(2.0)


def test_validate_bad_trace():
    with pytest.raises(BadTrace):
        validate_density(np.eye(2))


def test_density_is_read_only():
    rho = validate_density(np.eye(2) / 2)
    with pytest.raises(ValueError):
        rho.data[0, 0] = 1


def test_eigenvalues_examples():
    assert np.allclose(eigenvalues_hermitian(np.diag([3, 1, 2])), [1, 2, 3])
    assert np.allclose(eigenvalues_hermitian(SX), [-1, 1])
    # characteristic polynomial (x - 0.5)^2 = 0.36
    assert np.allclose(eigenvalues_hermitian([[0.5, 0.6], [0.6, 0.5]]), [-0.1, 1.1], atol=1e-15)
    with pytest.raises(NotHermitian):
        eigenvalues_hermitian([[0, 1], [0, 0]])


def test_rng_reproducible_and_streams_differ():
    a = random_density_batch(3, 5, RngSpec(7, 0))
    b = random_density_batch(3, 5, RngSpec(7, 0))
    c = random_density_batch(3, 5, RngSpec(7, 1))
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


@pytest.mark.parametrize("ensemble", ["hilbert-schmidt", "pure-haar"])
@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_random_density_valid(n, ensemble):
    batch = random_density_batch(n, 200, RngSpec(3, n), ensemble)
    for rho in batch:
        validate_density(rho)
    lam = np.linalg.eigvalsh(batch)
    assert lam.min() >= -1e-10 and lam.max() <= 1 + 1e-10
    assert np.abs(lam.sum(axis=1) - 1).max() < 1e-10


def test_pure_haar_has_zero_entropy():
    batch = random_density_batch(4, 100, RngSpec(11), "pure-haar")
    assert np.abs(measures.linear_entropy(batch)).max() < 1e-12


def test_hs_mean_purity_n2():
    # induced measure with K = N: <tr rho^2> = 2N / (N^2 + 1) = 0.8 at N = 2
    batch = random_density_batch(2, 100_000, RngSpec(5))
    assert abs(measures.purity(batch).mean() - 0.8) < 0.01


def test_random_unitary_is_unitary():
    u = random_unitary(5, RngSpec(9))
    assert np.abs(u.conj().T @ u - np.eye(5)).max() < 1e-13


def test_pure_state_normalization():
    v = pure_state([1, 3, 2], normalize=True)
    assert abs(np.linalg.norm(v.amplitudes) - 1) < 1e-15
    with pytest.raises(ValueError):
        pure_state([1, 1])


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 4), d=st.integers(2, 4), seed=st.integers(0, 2**32 - 1))
def test_partial_trace_inverts_product(n, d, seed):
    g = RngSpec(seed).generator()
    rs = random_density_batch(n, 1, g)[0]
    rd = random_density_batch(d, 1, g)[0]
    out = partial_trace_detector(tensor_product(rs, rd), n, d)
    assert np.abs(out - rs).max() < 1e-12
