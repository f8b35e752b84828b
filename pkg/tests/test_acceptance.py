"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every check runs at its stated tolerance and wall-clock limit.
"""

import time

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from finrank import ensembles
from finrank.moments import analytic_moment_matrix, harmonic_moment_matrix, twist
from finrank.polyalg import vandermonde_poly
from finrank.recovery import RecoveryError, cauchy_transform, numerical_rank, recover_1d, recover_multid
from finrank.vandermonde import SymmetricPair, check_annihilation
from finrank.weights import Ambient, Atomic, Density, FourierRadial, as_real, circle_measure
from finrank.wiener import atom_mass, fourier, project, sphere_average_check


@pytest.fixture
def verdict(capsys):
    """Print one status line for the criterion, then assert it."""

    def _report(label, ok, elapsed, limit, detail=""):
        in_time = elapsed < limit
        status = "PASS" if ok and in_time else "FAIL"
        with capsys.disabled():
            print(f"\n[{status}] {label}: {detail} ({elapsed:.2f} s, limit {limit} s)")
        assert ok, detail
        assert in_time, f"took {elapsed:.2f} s, limit {limit} s"

    return _report


def _support_error(true_pts, rec_pts):
    if len(true_pts) != len(rec_pts):
        return np.inf, None, None
    C = np.linalg.norm(true_pts[:, None, :] - rec_pts[None, :, :], axis=2)
    r, c = linear_sum_assignment(C)
    return C[r, c].max(), r, c


def test_c01_rank_equals_atom_count(verdict):
    t0 = time.perf_counter()
    Ws = ensembles.atomic_disk_ensemble(100, seed=1, m_range=(1, 6), separation=0.1, mass_range=(0.1, 1.0))
    hits = sum(numerical_rank(analytic_moment_matrix(W, 2 * len(W)), 1e-8)[0] == len(W) for W in Ws)
    verdict("1 rank equals atom count", hits == 100, time.perf_counter() - t0, 2, f"{hits}/100 ranks correct")


def test_c02_recovery_1d(verdict):
    t0 = time.perf_counter()
    Ws = ensembles.atomic_disk_ensemble(100, seed=1, m_range=(1, 6), separation=0.1, mass_range=(0.1, 1.0))
    worst = [0.0, 0.0, 0.0]
    for W in Ws:
        rep = recover_1d(W, len(W))
        err, r, c = _support_error(W.complex_points, rep.support)
        mass = np.abs(W.masses[r] - rep.masses[c]).max() if r is not None else np.inf
        worst = [max(worst[0], err), max(worst[1], mass), max(worst[2], rep.moment_residual)]
    ok = worst[0] <= 1e-6 and worst[1] <= 1e-6 and worst[2] < 1e-8
    detail = "max support err {:.2e}, mass err {:.2e}, residual {:.2e}".format(*worst)
    verdict("2 1-D recovery round trip", ok, time.perf_counter() - t0, 5, detail)


def test_c03_distribution_recovery(verdict):
    t0 = time.perf_counter()
    Ws = ensembles.point_distribution_ensemble(50, seed=3, max_points=3, max_order=2)
    worst_err = worst_res = 0.0
    for W in Ws:
        rep = recover_1d(W, m_bound=9, order_bound=2)
        err = _support_error(W.complex_points, rep.support)[0]
        worst_err, worst_res = max(worst_err, err), max(worst_res, rep.moment_residual)
    uniform = Density.builtin("uniform_box", Ambient.complex(1), [0, 0], [1, 1])
    try:
        recover_1d(uniform, m_bound=9, order_bound=2)
        control = "recovered (wrong)"
    except RecoveryError as exc:
        control = str(exc)
    ok = worst_err <= 1e-6 and worst_res < 1e-8 and control.startswith("recovery failed")
    detail = f"max support err {worst_err:.2e}, residual {worst_res:.2e}, control: {control[:15]}"
    verdict("3 distributional recovery", ok, time.perf_counter() - t0, 10, detail)


def test_c04_multid_recovery(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(50):
        d = (2, 3)[i % 2]
        W = ensembles.atomic_polydisk(int(rng.integers(1 << 30)), d, int(rng.integers(1, 5)))
        rep = recover_multid(W, m_bound=4, seed=4 + i, max_retries=3)
        err, r, c = _support_error(W.complex_points, rep.support)
        mass = np.abs(W.masses[r] - rep.masses[c]).max() if r is not None else np.inf
        worst = max(worst, err, mass)
    collision = recover_multid(ensembles.collision_case(), m_bound=4, seed=4, max_retries=3)
    c_err = _support_error(ensembles.collision_case().complex_points, collision.support)[0]
    ok = worst <= 1e-5 and c_err <= 1e-5 and 1 <= collision.retries <= 3
    detail = f"max err {worst:.2e}, collision err {c_err:.2e} after {collision.retries} retries"
    verdict("4 multi-dimensional recovery", ok, time.perf_counter() - t0, 20, detail)


def test_c05_twist_monotonicity(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    Ws = ensembles.atomic_disk_ensemble(100, seed=5)
    violations = 0
    for W in Ws:
        g = ensembles.holomorphic_poly(rng, 1, int(rng.integers(1, 4)))
        rt = numerical_rank(twist(W, g, 4), 1e-10)[0]
        r0 = numerical_rank(analytic_moment_matrix(W, 4 + g.degree), 1e-10)[0]
        violations += rt > r0
    verdict("5 twist monotonicity", violations == 0, time.perf_counter() - t0, 5, f"{violations} violations in 100")


def test_c06a_wiener_two_atoms(verdict):
    t0 = time.perf_counter()
    W = Atomic(Ambient.real(1), [[1.0], [-1.0]], [0.5, 0.5])
    est = atom_mass(W, [2, 4, 8, 16, 32])
    verdict("6a Wiener mass of two atoms", abs(est.limit - 0.5) <= 1e-6, time.perf_counter() - t0, 2, f"estimate {est.limit:.12f} at R = 32")


def test_c06b_wiener_uniform_density(verdict):
    # Known red: the exact value of the functional for the unit box at R = 64
    # is sqrt(pi/a) erf(sqrt(a)) - (1 - exp(-a))/a with a = R^2/4, i.e.
    # 0.0544 > 0.05.  The threshold is first met at R = 69.75.
    t0 = time.perf_counter()
    W = Density.builtin("uniform_box", Ambient.real(1), [0], [1])
    est = atom_mass(W, [2, 4, 8, 16, 32, 64])
    verdict("6b Wiener mass of uniform density", est.limit <= 0.05, time.perf_counter() - t0, 2, f"estimate {est.limit:.6f} at R = 64, threshold 0.05")


def test_c07_sphere_average(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        W = ensembles.atomic_real(int(rng.integers(1 << 30)), 3, int(rng.integers(1, 6)))
        avg, direct = sphere_average_check(W, 500)
        worst = max(worst, abs(avg - direct) / direct)
    verdict("7 sphere-average identity", worst < 0.01, time.perf_counter() - t0, 10, f"max rel error {worst:.2e}")


def test_c08_harmonic_ranks(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    bad_odd = 0
    for _ in range(20):
        m = int(rng.integers(1, 5))
        W = ensembles.atomic_real(int(rng.integers(1 << 30)), 3, m)
        bad_odd += numerical_rank(harmonic_moment_matrix(W, 6), 1e-8)[0] != m
    bad_even = 0
    for W in ensembles.atomic_disk_ensemble(20, seed=8):
        rh = numerical_rank(harmonic_moment_matrix(as_real(W), 4), 1e-10)[0]
        ra = numerical_rank(analytic_moment_matrix(W, 4), 1e-10)[0]
        bad_even += rh < ra
    ok = bad_odd == 0 and bad_even == 0
    verdict("8 harmonic ranks", ok, time.perf_counter() - t0, 20, f"R^3 mismatches {bad_odd}/20, embedding violations {bad_even}/20")


def test_c09_cos_norm_rank_growth(verdict):
    t0 = time.perf_counter()
    F = FourierRadial.cos_norm(3, K=24)
    ranks = [numerical_rank(harmonic_moment_matrix(F, k), 1e-10)[0] for k in range(2, 9)]
    ok = all(b > a for a, b in zip(ranks, ranks[1:]))
    verdict("9 cos|xi| rank growth", ok, time.perf_counter() - t0, 30, f"ranks {ranks}")


def test_c10_vandermonde(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for N in (2, 3):
        for seed in range(50):
            pair = SymmetricPair.sample(N, 3, seed)
            worst = max(worst, abs(check_annihilation(pair.H1, pair.H2, N)) / pair.scale())
    V = vandermonde_poly(2)
    self_val = check_annihilation(V, V, 2)
    ok = worst < 1e-10 and abs(self_val - 4) <= 1e-12
    verdict("10 Vandermonde annihilation", ok, time.perf_counter() - t0, 2, f"max scaled value {worst:.2e}, self pairing {self_val}")


def test_c11_cauchy_vanishing(verdict):
    t0 = time.perf_counter()
    W = circle_measure(2048, subtract_center=True)
    worst = 0.0
    for r in (1.5, 2.0, 3.0):
        for z in r * np.exp(2j * np.pi * (np.arange(8) + 0.25) / 8):
            worst = max(worst, abs(cauchy_transform(W, z)))
    verdict("11 Cauchy vanishing", worst < 1e-10, time.perf_counter() - t0, 2, f"max |G| {worst:.2e}")


def test_c12_projection_fourier(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(50):
        W = ensembles.atomic_real(int(rng.integers(1 << 30)), 3, int(rng.integers(1, 6)), complex_masses=True)
        for _ in range(20):
            zeta = rng.standard_normal(3)
            zeta /= np.linalg.norm(zeta)
            t = rng.uniform(-10, 10)
            worst = max(worst, abs(fourier(project(W, zeta), [t]) - fourier(W, t * zeta)))
    verdict("12 projection-Fourier identity", worst < 1e-12, time.perf_counter() - t0, 2, f"max error {worst:.2e}")
