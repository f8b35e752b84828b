"""The Vandermonde witness for non-density of products of symmetric polynomials.

With ``V(Z) = prod_{i<j} (z_i - z_j)`` the operator ``V(D) V(Dbar)``
kills ``H1 conj(H2)`` at the origin whenever ``H1`` or ``H2`` is symmetric,
since ``V(D)`` maps a symmetric polynomial to an antisymmetric one, which
vanishes at 0.  On ``|V|^2`` it returns ``(sum_k C_k^2 k!)^2 > 0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .polyalg import BiPolynomial, DimensionError, apply_diff, vandermonde_poly

__all__ = [
    "MAX_N",
    "SymmetricPair",
    "power_sum",
    "symmetric_sample",
    "check_annihilation",
    "vandermonde_self_pairing",
    "annihilation_table",
]

MAX_N = 4


def _check_n(N: int) -> None:
    if N < 2:
        raise ValueError("need at least 2 variables")
    if N > MAX_N:
        raise ValueError(f"N is capped at {MAX_N} (V has N! terms)")


def power_sum(N: int, k: int) -> BiPolynomial:
    """``p_k = z_1^k + ... + z_N^k``."""
    out = BiPolynomial(N)
    for j in range(N):
        out = out + BiPolynomial.z(N, j) ** k
    return out


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def symmetric_sample(N: int, degree: int, seed: int | np.random.Generator = 0) -> BiPolynomial:
    """Random symmetric holomorphic polynomial in ``N`` variables.

    A random complex combination of the products ``p_lam = prod p_{lam_i}``
    over all partitions ``lam`` with ``1 <= |lam| <= degree``.
    """
    _check_n(N)
    if degree < 1:
        raise ValueError("degree must be >= 1")
    rng = np.random.default_rng(seed)
    p = {k: power_sum(N, k) for k in range(1, degree + 1)}
    out = BiPolynomial(N)
    for size in range(1, degree + 1):
        for lam in _partitions(size):
            term = BiPolynomial.constant(N, complex(rng.standard_normal(), rng.standard_normal()))
            for k in lam:
                term = term * p[k]
            out = out + term
    if not out.is_symmetric():
        raise AssertionError("power-sum combination failed the symmetry check")
    return out


@dataclass(frozen=True)
class SymmetricPair:
    H1: BiPolynomial
    H2: BiPolynomial
    symmetric_flags: tuple

    def __post_init__(self):
        for H, flag in zip((self.H1, self.H2), self.symmetric_flags):
            if not H.is_holomorphic():
                raise ValueError("pair members must be holomorphic")
            if flag and not H.is_symmetric():
                raise ValueError("polynomial flagged symmetric is not invariant under transpositions")

    @classmethod
    def sample(cls, N: int, degree: int, seed: int = 0, second_symmetric: bool = False) -> "SymmetricPair":
        """``H1`` symmetric; ``H2`` symmetric or a random holomorphic polynomial."""
        rng = np.random.default_rng(seed)
        H1 = symmetric_sample(N, degree, rng)
        if second_symmetric:
            H2 = symmetric_sample(N, degree, rng)
        else:
            H2 = BiPolynomial(N)
            for k in range(degree + 1):
                for alpha in _exponents(N, k):
                    H2 = H2 + BiPolynomial.monomial(alpha, c=complex(*rng.standard_normal(2)))
        return cls(H1, H2, (True, second_symmetric))

    def scale(self) -> float:
        return self.H1.coefficient_norm() * self.H2.coefficient_norm()


def _exponents(N: int, k: int):
    for combo in itertools.combinations_with_replacement(range(N), k):
        alpha = [0] * N
        for j in combo:
            alpha[j] += 1
        yield tuple(alpha)


def check_annihilation(H1: BiPolynomial, H2: BiPolynomial, N: int) -> complex:
    """``V(D) V(Dbar) [H1 conj(H2)]`` at the origin, by exact differentiation."""
    _check_n(N)
    if H1.dim != N or H2.dim != N:
        raise DimensionError(f"polynomials must have {N} variables")
    if not (H1.is_holomorphic() and H2.is_holomorphic()):
        raise ValueError("H1 and H2 must be holomorphic")
    V = vandermonde_poly(N)
    # the two factors commute; applying them in turn keeps intermediates small
    return apply_diff(V, apply_diff(V.conj(), H1 * H2.conj())).constant_term()


def vandermonde_self_pairing(N: int) -> complex:
    """``[V(D) V](0) = sum_k C_k^2 k!``."""
    _check_n(N)
    V = vandermonde_poly(N)
    return apply_diff(V, V).constant_term()


def annihilation_table(N: int, seeds, degree: int = 3, rtol: float = 1e-10) -> list[dict]:
    """One row per seed: value, scale and pass flag for a sampled symmetric pair."""
    rows = []
    for s in seeds:
        pair = SymmetricPair.sample(N, degree, seed=s)
        val = check_annihilation(pair.H1, pair.H2, N)
        rows.append({"seed": int(s), "value": val, "scale": pair.scale(), "pass": abs(val) < rtol * pair.scale()})
    return rows
