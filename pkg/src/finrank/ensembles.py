"""Seeded random weight ensembles shared by the experiment runner and the tests.

Every generator is a pure function of its arguments and the seed.
"""

from __future__ import annotations

import numpy as np

from .polyalg import BiPolynomial, graded_lex
from .weights import Ambient, Atomic, DifferentialOperator, PointDistribution

__all__ = [
    "disk_points",
    "random_masses",
    "atomic_disk",
    "atomic_disk_ensemble",
    "point_distribution",
    "point_distribution_ensemble",
    "atomic_polydisk",
    "atomic_real",
    "holomorphic_poly",
    "collision_case",
]


def disk_points(rng: np.random.Generator, m: int, separation: float = 0.1, radius: float = 1.0, d: int = 1) -> np.ndarray:
    """``m`` points uniform in the polydisk ``|z_i| < radius`` with pairwise distance >= separation."""
    pts: list[np.ndarray] = []
    for _ in range(100000):
        if len(pts) == m:
            break
        z = radius * np.sqrt(rng.uniform(size=d)) * np.exp(2j * np.pi * rng.uniform(size=d))
        if all(np.linalg.norm(z - p) >= separation for p in pts):
            pts.append(z)
    else:
        raise RuntimeError("could not place points at the requested separation")
    return np.array(pts).reshape(m, d)


def random_masses(rng: np.random.Generator, m: int, lo: float = 0.1, hi: float = 1.0, real: bool = False) -> np.ndarray:
    """Masses with modulus uniform in ``[lo, hi]`` and uniform phase (or random sign when ``real``)."""
    mod = rng.uniform(lo, hi, m)
    if real:
        return mod * rng.choice([-1.0, 1.0], m)
    return mod * np.exp(2j * np.pi * rng.uniform(size=m))


def atomic_disk(seed, m: int, separation: float = 0.1, mass_range=(0.1, 1.0)) -> Atomic:
    rng = np.random.default_rng(seed)
    z = disk_points(rng, m, separation)
    return Atomic.from_complex(z, random_masses(rng, m, *mass_range))


def atomic_disk_ensemble(count: int, seed: int, m_range=(1, 6), separation: float = 0.1, mass_range=(0.1, 1.0)) -> list:
    """``count`` atomic measures on C^1 with ``m`` drawn uniformly from ``m_range`` (inclusive)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        z = disk_points(rng, m, separation)
        out.append(Atomic.from_complex(z, random_masses(rng, m, *mass_range)))
    return out


def point_distribution(rng: np.random.Generator, max_points: int = 3, max_order: int = 2, separation: float = 0.25):
    """Random point distribution on C^1: each point carries all ``d^gamma``, ``|gamma| <= order``."""
    n = int(rng.integers(1, max_points + 1))
    z = disk_points(rng, n, separation)
    ops = []
    for _ in range(n):
        order = int(rng.integers(0, max_order + 1))
        terms = {g: complex(*rng.uniform(-1, 1, 2)) for g in graded_lex(2, order)}
        ops.append(DifferentialOperator(2, terms))
    return PointDistribution.from_complex(z, ops)


def point_distribution_ensemble(count: int, seed: int, max_points: int = 3, max_order: int = 2) -> list:
    rng = np.random.default_rng(seed)
    return [point_distribution(rng, max_points, max_order) for _ in range(count)]


def atomic_polydisk(seed, d: int, m: int, separation: float = 0.1) -> Atomic:
    """``m`` atoms in the unit polydisk of C^d with complex masses."""
    rng = np.random.default_rng(seed)
    z = disk_points(rng, m, separation, radius=1.0, d=d)
    return Atomic.from_complex(z, random_masses(rng, m))


def atomic_real(seed, D: int, m: int, separation: float = 0.1, complex_masses: bool = False) -> Atomic:
    """``m`` atoms in the cube ``[-1, 1]^D`` with separation, moduli in [0.1, 1]."""
    rng = np.random.default_rng(seed)
    pts: list[np.ndarray] = []
    while len(pts) < m:
        x = rng.uniform(-1, 1, D)
        if all(np.linalg.norm(x - p) >= separation for p in pts):
            pts.append(x)
    masses = random_masses(rng, m) if complex_masses else random_masses(rng, m, real=True)
    return Atomic(Ambient.real(D), np.array(pts), masses)


def holomorphic_poly(rng: np.random.Generator, d: int, degree: int) -> BiPolynomial:
    """Dense random holomorphic polynomial of exact degree ``degree``."""
    out = BiPolynomial(d)
    for alpha in graded_lex(d, degree):
        out = out + BiPolynomial.monomial(alpha, c=complex(*rng.standard_normal(2)))
    return out


def collision_case() -> Atomic:
    """Atoms (1, 1) and (-1, 1) with masses 1 and -1: the second marginal cancels."""
    return Atomic.from_complex(np.array([[1, 1], [-1, 1]], dtype=complex), [1, -1])
