import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from finrank.ensembles import atomic_real
from finrank.polyalg import DimensionError
from finrank.weights import Ambient, Atomic, Density, FourierRadial, PointDistribution, DifferentialOperator, TruncationError, WeightError
from finrank.wiener import (
    atom_mass,
    atom_mass_exact,
    classify_discreteness,
    fibonacci_sphere,
    fourier,
    project,
    sphere_average_check,
)

R1 = Ambient.real(1)


def uniform01_value(R):
    """Closed form of R^-1 int h(xi/R) |F 1_[0,1]|^2 dxi = int int exp(-R^2 (x-y)^2 / 4)."""
    a = R**2 / 4
    return np.sqrt(np.pi / a) * erf(np.sqrt(a)) - (1 - np.exp(-a)) / a


def test_fourier_examples():
    d0 = Atomic(Ambient.real(2), [[0.0, 0.0]], [1])
    assert np.allclose(fourier(d0, np.random.default_rng(0).standard_normal((5, 2))), 1)
    two = Atomic(R1, [[1.0], [-1.0]], [0.5, 0.5])
    xi = np.linspace(-5, 5, 11).reshape(-1, 1)
    assert np.allclose(fourier(two, xi), np.cos(xi[:, 0]), atol=1e-15)
    box = Density.builtin("uniform_box", R1, [-1], [1], mass=1.0)
    xi = np.linspace(0.05, 40, 50)
    assert np.max(np.abs(fourier(box, xi.reshape(-1, 1)) - np.sin(xi) / xi)) < 1e-10


def test_fourier_radial_matches_projection_oracle():
    F = FourierRadial.cos_norm(3, K=30, radius=4.0)
    zeta = np.array([0.6, 0.0, 0.8])
    t = np.linspace(-3.9, 3.9, 9)
    assert np.allclose(fourier(F, t[:, None] * zeta), np.cos(t), atol=1e-12)
    with pytest.raises(TruncationError):
        fourier(F, [5.0, 0, 0])


def test_fourier_point_distribution():
    # <d/dx delta_a, e^{-i x xi}> = -i xi e^{-i a xi}
    W = PointDistribution(R1, [[0.3]], (DifferentialOperator.partial(1, (1,)),))
    xi = 1.7
    assert np.isclose(fourier(W, [xi]), -1j * xi * np.exp(-1j * 0.3 * xi))


def test_project_examples():
    W = Atomic(Ambient.real(2), [[1.0, 0.0]], [1])
    P = project(W, [0.0, 1.0])
    assert np.allclose(P.points, [[0.0]]) and np.allclose(P.masses, [1])
    W = Atomic(Ambient.real(2), [[1.0, 0.0], [-1.0, 0.0]], [1, -1])
    assert len(project(W, [0.0, 1.0])) == 0
    with pytest.raises(WeightError):
        project(W, [1.0, 1.0])
    with pytest.raises(WeightError):
        project(Density.builtin("uniform_box", Ambient.real(2), [0, 0], [1, 1]), [1.0, 0.0])
    with pytest.raises(DimensionError):
        project(W, [1.0, 0.0, 0.0])


def test_atom_mass_examples():
    est = atom_mass(Atomic(R1, [[0.4]], [1]))
    assert all(v == 1 for v in est.values) and est.limit == 1
    est = atom_mass(Atomic(R1, [[1.0], [-1.0]], [0.5, 0.5]), [2, 4, 8, 16, 32])
    assert abs(est.limit - 0.5) < 1e-6
    assert est.error_estimate == abs(est.values[-1] - est.values[-2])


def test_atom_mass_uniform_density_matches_closed_form():
    W = Density.builtin("uniform_box", R1, [0], [1])
    est = atom_mass(W)
    for R, v in zip(est.R_schedule, est.values):
        assert np.isclose(v, uniform01_value(R), rtol=1e-10)
    assert all(b < a for a, b in zip(est.values, est.values[1:]))
    # the functional decays like 2 sqrt(pi)/R; at R = 64 it is still above 0.05
    assert np.isclose(est.values[-1], 0.054412620340797, rtol=1e-10)


def test_atom_mass_bandwidth_check():
    W = Density.builtin("uniform_box", R1, [0], [1])
    with pytest.raises(WeightError, match="bandwidth insufficient"):
        atom_mass(W, [64.0], xi_max=64.0)


def test_atom_mass_rejects_bad_inputs():
    with pytest.raises(ValueError):
        atom_mass(Atomic(R1, [[0.0]], [1]), [4, 2])
    W = PointDistribution(R1, [[0.0]], (DifferentialOperator.partial(1, (1,)),))
    with pytest.raises(WeightError):
        atom_mass(W)


def test_atom_mass_closed_form_vs_quadrature():
    # Plancherel cross-check on a frequency grid for R <= 8
    W = atomic_real(3, 1, 3, complex_masses=True)
    for R in (1.0, 2.0, 4.0, 8.0):
        xi, w = np.polynomial.legendre.leggauss(400)
        xi, w = 8 * R * xi, 8 * R * w
        F = fourier(W, xi.reshape(-1, 1))
        quad = np.sum(w * np.exp(-((xi / R) ** 2)) / np.sqrt(np.pi) * np.abs(F) ** 2) / R
        assert abs(quad - atom_mass(W, [R]).limit) < 1e-8


def test_sphere_average_examples():
    one = Atomic(Ambient.real(3), [[0.1, 0.2, 0.3]], [1])
    assert np.allclose(sphere_average_check(one), (1, 1))
    two = Atomic(Ambient.real(3), [[0.1, 0.2, 0.3], [-0.5, 0.0, 0.2]], [1, 1])
    avg, direct = sphere_average_check(two)
    assert direct == 2 and abs(avg - 2) < 0.02
    pm = Atomic(Ambient.real(2), [[0.1, 0.2], [-0.5, 0.0]], [1, -1])
    avg, direct = sphere_average_check(pm)
    assert direct == 2 and abs(avg - 2) < 0.02
    with pytest.raises(DimensionError):
        sphere_average_check(Atomic(Ambient.real(4), [[0, 0, 0, 0]], [1]))


def test_fibonacci_nodes_are_unit_and_balanced():
    P = fibonacci_sphere(500)
    assert np.allclose(np.linalg.norm(P, axis=1), 1)
    assert np.linalg.norm(P.mean(axis=0)) < 1e-2


def test_classify_examples():
    v = classify_discreteness(atomic_real(4, 3, 4), 12, seed=0)
    assert v.verdict == "discrete"
    v = classify_discreteness(Density.builtin("uniform_box", R1, [0], [1]), 10)
    assert v.verdict == "continuous"
    v = classify_discreteness(Atomic.zero(Ambient.real(3)), 10)
    assert v.verdict == "continuous" and v.atom_mass == 0
    with pytest.raises(ValueError):
        classify_discreteness(atomic_real(4, 3, 4), 5)
    with pytest.raises(WeightError):
        classify_discreteness(Density.builtin("uniform_box", Ambient.real(2), [0, 0], [1, 1]), 10)


def test_atom_mass_exact_merges_collisions():
    W = Atomic(R1, [[0.0], [5e-10], [1.0]], [1, 1, 1])
    assert atom_mass_exact(W) == 5


# ----------------------------------------------------------------- properties


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5))
def test_projection_fourier_identity(seed, m):
    rng = np.random.default_rng(seed)
    W = atomic_real(seed, 3, m, complex_masses=True)
    for _ in range(5):
        z = rng.standard_normal(3)
        z /= np.linalg.norm(z)
        t = rng.uniform(-10, 10)
        assert abs(fourier(project(W, z), [t]) - fourier(W, t * z)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5))
def test_atom_mass_monotone_convergence(seed, m):
    # with positive masses every cross term c_j c_k exp(-R^2 s^2 / 4) is
    # positive and decreasing, so the gap to the limit shrinks monotonically
    W = atomic_real(seed, 2, m)
    W = Atomic(W.ambient, W.points, np.abs(W.masses))
    est = atom_mass(W, [1, 2, 4, 8, 16, 32, 64, 128])
    gaps = np.abs(np.array(est.values) - np.sum(np.abs(W.masses) ** 2))
    assert np.all(np.diff(gaps) <= 1e-12)
    assert min(est.values) >= -1e-10


def test_monotone_gap_fails_for_signed_masses():
    # cross terms of opposite sign can cancel at small R and separate later
    W = atomic_real(0, 2, 5, complex_masses=True)
    target = np.sum(np.abs(W.masses) ** 2)
    est = atom_mass(W, [1, 2, 4, 8, 16, 32, 64, 128])
    gaps = np.abs(np.array(est.values) - target)
    assert np.any(np.diff(gaps) > 1e-3)
    assert abs(est.limit - target) < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5))
def test_sphere_average_identity(seed, m):
    W = atomic_real(seed, 3, m, complex_masses=True)
    avg, direct = sphere_average_check(W, 500)
    assert abs(avg - direct) / direct < 0.01
