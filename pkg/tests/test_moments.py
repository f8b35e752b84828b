import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from finrank.ensembles import atomic_disk, atomic_polydisk, atomic_real, holomorphic_poly
from finrank.moments import (
    analytic_moment_matrix,
    coordinate_submatrix,
    drop_coordinate,
    harmonic_basis,
    harmonic_moment_matrix,
    twist,
)
from finrank.polyalg import BiPolynomial, DimensionError
from finrank.recovery import numerical_rank
from finrank.weights import Ambient, Atomic, FourierRadial, as_real, pushforward, unitary_to_real


def test_analytic_delta_and_single_atom():
    A = analytic_moment_matrix(Atomic.from_complex([0], [1]), 2).entries
    expected = np.zeros_like(A)
    expected[0, 0] = 1
    assert np.array_equal(A, expected)
    A = analytic_moment_matrix(Atomic.from_complex([0.5], [1]), 1).entries
    assert np.allclose(A, [[1, 0.5], [0.5, 0.25]])


def test_analytic_rank_three_atoms():
    W = atomic_disk(11, 3, separation=0.3)
    assert numerical_rank(analytic_moment_matrix(W, 5))[0] == 3


def test_analytic_labels_and_ambient_check():
    W = atomic_polydisk(0, 2, 2)
    M = analytic_moment_matrix(W, 2)
    assert M.row_labels[:3] == ((0, 0), (1, 0), (0, 1))
    with pytest.raises(DimensionError):
        analytic_moment_matrix(as_real(W), 2)


def test_harmonic_basis_counts():
    assert harmonic_basis(2, 1).counts() == [1, 2]
    assert harmonic_basis(3, 2).counts()[2] == 5
    assert harmonic_basis(2, 0).counts() == [1]
    for k, c in enumerate(harmonic_basis(3, 6).counts()):
        assert c == 2 * k + 1
    for k, c in enumerate(harmonic_basis(4, 4).counts()):
        assert c == (k + 1) ** 2
    with pytest.raises(ValueError):
        harmonic_basis(1, 3)


def test_harmonic_basis_is_harmonic_and_orthonormal():
    B = harmonic_basis(3, 6)
    for p in B.polynomials:
        assert p.laplacian().coefficient_norm() < 1e-10 * p.coefficient_norm()
    G = B.coefficients @ B.coefficients.T
    assert np.allclose(G, np.eye(len(G)), atol=1e-12)


def test_harmonic_delta_rank_one():
    W = Atomic(Ambient.real(2), [[0.0, 0.0]], [1])
    H = harmonic_moment_matrix(W, 1)
    assert numerical_rank(H)[0] == 1


def test_harmonic_random_atoms_rank():
    W = atomic_real(5, 3, 3)
    assert numerical_rank(harmonic_moment_matrix(W, 5), 1e-8)[0] == 3


def test_harmonic_fast_path_matches_gram_route():
    # atoms go through basis evaluation, radial weights through moment Gram matrices
    W = atomic_real(2, 3, 4, complex_masses=True)
    B = harmonic_basis(3, 3)
    direct = np.array([[np.sum(W.masses * p(W.points) * np.conj(q(W.points))) for q in B.polynomials] for p in B.polynomials])
    assert np.allclose(harmonic_moment_matrix(W, 3).entries, direct, atol=1e-13)


def test_cos_radial_rank_grows():
    F = FourierRadial.cos_norm(3)
    r2 = numerical_rank(harmonic_moment_matrix(F, 2))[0]
    r4 = numerical_rank(harmonic_moment_matrix(F, 4))[0]
    assert r4 > r2


def test_twist_examples():
    W = atomic_disk(1, 3)
    assert np.allclose(twist(W, BiPolynomial.constant(1), 3).entries, analytic_moment_matrix(W, 3).entries)
    a = 0.3 + 0.1j
    g = BiPolynomial.z(1, 0) - a
    assert np.allclose(twist(Atomic.from_complex([a], [1]), g, 3).entries, 0, atol=1e-15)
    two = Atomic.from_complex([a, -0.5], [1, 2])
    assert numerical_rank(analytic_moment_matrix(two, 3))[0] == 2
    assert numerical_rank(twist(two, g, 3))[0] == 1
    with pytest.raises(ValueError):
        twist(W, BiPolynomial.zbar(1, 0), 2)


def test_coordinate_submatrix_examples():
    a, b = 0.2 + 0.5j, -0.4j
    W = Atomic.from_complex([[a, b]], [1])
    sub = coordinate_submatrix(W, 0, 3)
    assert np.allclose(sub.entries, analytic_moment_matrix(Atomic.from_complex([b], [1]), 3).entries)
    W = Atomic.from_complex([[1, 1], [-1, 1]], [1, -1])
    assert np.allclose(coordinate_submatrix(W, 0, 3).entries, 0)
    assert len(drop_coordinate(W, 0)) == 0
    with pytest.raises(IndexError):
        coordinate_submatrix(W, 2, 3)


# ----------------------------------------------------------------- properties


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5))
def test_hermitian_psd_for_positive_masses(seed, m):
    rng = np.random.default_rng(seed)
    W = Atomic.from_complex(rng.uniform(-1, 1, m) + 1j * rng.uniform(-1, 1, m), rng.uniform(0.1, 1, m))
    A = analytic_moment_matrix(W, 4).entries
    assert np.allclose(A, A.conj().T, atol=1e-12)
    ev = np.linalg.eigvalsh(A)
    assert ev.min() >= -1e-10 * np.linalg.norm(A, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_unitary_invariance_of_rank(seed):
    rng = np.random.default_rng(seed)
    W = atomic_polydisk(seed, 2, int(rng.integers(1, 5)), separation=0.2)
    U = unitary_group.rvs(2, random_state=rng)
    WU = pushforward(W, unitary_to_real(U), W.ambient)
    assert numerical_rank(analytic_moment_matrix(W, 3), 1e-9)[0] == numerical_rank(analytic_moment_matrix(WU, 3), 1e-9)[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2))
def test_projection_consistency(seed, j):
    W = atomic_polydisk(seed, 3, 3)
    sub = coordinate_submatrix(W, j, 3)
    proj = analytic_moment_matrix(drop_coordinate(W, j), 3)
    assert sub.row_labels == proj.row_labels
    assert np.allclose(sub.entries, proj.entries, rtol=0, atol=1e-12 * np.abs(sub.entries).max())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_twist_never_raises_rank(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    W = atomic_polydisk(seed, d, int(rng.integers(1, 6)))
    g = holomorphic_poly(rng, d, int(rng.integers(1, 4)))
    N = 3 if d == 1 else 2
    assert numerical_rank(twist(W, g, N))[0] <= numerical_rank(analytic_moment_matrix(W, N + g.degree))[0]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_even_dimension_embedding(seed):
    rng = np.random.default_rng(seed)
    W = atomic_disk(seed, int(rng.integers(1, 6)))
    for N in (2, 4):
        rA = numerical_rank(analytic_moment_matrix(W, N))[0]
        rH = numerical_rank(harmonic_moment_matrix(as_real(W), N))[0]
        assert rH >= rA
