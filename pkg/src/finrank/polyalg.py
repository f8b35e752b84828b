"""Sparse polynomial algebra over complex coefficients.

Three families live here:

* :class:`BiPolynomial` -- polynomials in ``(z, zbar)`` on C^d, keyed by a pair
  of multi-indices ``(alpha, beta)`` standing for ``z**alpha * zbar**beta``.
* :class:`RealPolynomial` -- polynomials in real coordinates ``x`` on R^D.
* :class:`UniPolynomial` -- dense univariate polynomials (used for the
  annihilating polynomials of the recovery loop).

Complex points are encoded in real coordinates as ``z_j = x_{2j-1} + i x_{2j}``.
Where a deterministic order is needed, terms are sorted graded-lexicographically
(total degree first, then descending lexicographic exponents, so ``x1**2``
precedes ``x1*x2`` precedes ``x2**2``).
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "BiPolynomial",
    "RealPolynomial",
    "UniPolynomial",
    "DimensionError",
    "graded_lex",
    "grlex_key",
    "apply_diff",
    "multiply",
    "complexify",
    "vandermonde_poly",
    "falling_factorial",
    "multi_factorial",
]


class DimensionError(ValueError):
    """Raised when operands live in spaces of different dimension."""


MultiIndex = tuple


@lru_cache(maxsize=4096)
def falling_factorial(n: int, k: int) -> int:
    """``n (n-1) ... (n-k+1)``; zero when ``k > n``."""
    if k > n:
        return 0
    out = 1
    for i in range(k):
        out *= n - i
    return out


@lru_cache(maxsize=None)
def graded_lex(dim: int, max_degree: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length ``dim`` with total degree <= ``max_degree``.

    Ordered by degree, then descending lexicographically within a degree.
    """
    out: list[MultiIndex] = []
    for deg in range(max_degree + 1):
        out.extend(_compositions(dim, deg))
    return tuple(out)


@lru_cache(maxsize=None)
def _compositions(dim: int, deg: int) -> tuple[MultiIndex, ...]:
    if dim == 1:
        return ((deg,),)
    out = []
    for first in range(deg, -1, -1):
        for rest in _compositions(dim - 1, deg - first):
            out.append((first,) + rest)
    return tuple(out)


def grlex_key(key) -> tuple:
    """Sort key implementing the graded-lex order on (possibly nested) exponents."""
    flat = _flatten(key)
    return (sum(flat),) + tuple(-e for e in flat)


def _flatten(key) -> tuple[int, ...]:
    if key and isinstance(key[0], tuple):
        return tuple(itertools.chain.from_iterable(key))
    return tuple(key)


def _add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def _fmt_coef(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return f"{c.real:.12g}"
    if c.real == 0:
        return f"{c.imag:.12g}i"
    return f"({c.real:.12g}{c.imag:+.12g}i)"


class _Sparse:
    """Shared machinery: canonical dict of nonzero terms, ring operations."""

    __slots__ = ("dim", "_terms")

    def __init__(self, dim: int, terms: Mapping | None = None):
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        self.dim = int(dim)
        clean = {}
        for key, coef in (terms or {}).items():
            key = self._check_key(key)
            coef = complex(coef)
            if coef != 0:
                clean[key] = clean.get(key, 0) + coef
        self._terms = {k: v for k, v in clean.items() if v != 0}

    # subclasses define _check_key, _mul_keys, _var_names
    def _check_key(self, key):
        raise NotImplementedError

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """Terms in graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _same(self, other) -> None:
        if type(other) is not type(self):
            raise DimensionError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def _new(self, terms):
        return type(self)(self.dim, terms)

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = self._new({self._one_key(): other})
        self._same(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0) + v
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self._new({k: v * other for k, v in self._terms.items()})
        self._same(other)
        out: dict = {}
        for k1, v1 in self._terms.items():
            for k2, v2 in other._terms.items():
                k = self._mul_keys(k1, k2)
                out[k] = out.get(k, 0) + v1 * v2
        return self._new(out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n: int):
        out = self._new({self._one_key(): 1})
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and other.dim == self.dim and other._terms == self._terms

    def __hash__(self):
        return hash((type(self).__name__, self.dim, frozenset(self._terms.items())))

    def coefficient_norm(self) -> float:
        return float(np.sqrt(sum(abs(v) ** 2 for v in self._terms.values())))

    def allclose(self, other, rtol: float = 1e-12, atol: float = 0.0) -> bool:
        """Coefficientwise comparison relative to the larger coefficient norm."""
        self._same(other)
        scale = max(self.coefficient_norm(), other.coefficient_norm())
        diff = (self - other).coefficient_norm()
        return diff <= rtol * scale + atol

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, {str(self)!r})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for key, coef in self.items():
            mono = self._render_monomial(key)
            if mono == "1":
                parts.append(_fmt_coef(coef))
            elif coef == 1:
                parts.append(mono)
            elif coef == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{_fmt_coef(coef)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


class BiPolynomial(_Sparse):
    """Polynomial in ``z`` and ``zbar`` on C^d.

    ``terms`` maps ``(alpha, beta)`` to the coefficient of
    ``z**alpha * conj(z)**beta``.  ``z`` and ``zbar`` are formally independent,
    so ``diff`` with respect to ``zbar`` is the Wirtinger derivative.
    """

    __slots__ = ()

    def _check_key(self, key):
        alpha, beta = key
        alpha, beta = tuple(int(a) for a in alpha), tuple(int(b) for b in beta)
        if len(alpha) != self.dim or len(beta) != self.dim:
            raise DimensionError(f"exponent length must be {self.dim}")
        if min(alpha + beta) < 0:
            raise ValueError("exponents must be nonnegative")
        return (alpha, beta)

    def _one_key(self):
        zero = (0,) * self.dim
        return (zero, zero)

    @staticmethod
    def _mul_keys(k1, k2):
        return (_add(k1[0], k2[0]), _add(k1[1], k2[1]))

    def _render_monomial(self, key) -> str:
        alpha, beta = key
        names = []
        sub = (lambda j: "") if self.dim == 1 else (lambda j: str(j + 1))
        for j, a in enumerate(alpha):
            if a:
                names.append(f"z{sub(j)}" + (f"^{a}" if a > 1 else ""))
        for j, b in enumerate(beta):
            if b:
                names.append(f"zb{sub(j)}" + (f"^{b}" if b > 1 else ""))
        return "*".join(names) or "1"

    @classmethod
    def constant(cls, dim: int, c: complex = 1.0) -> "BiPolynomial":
        zero = (0,) * dim
        return cls(dim, {(zero, zero): c})

    @classmethod
    def monomial(cls, alpha: Sequence[int], beta: Sequence[int] | None = None, c: complex = 1.0):
        alpha = tuple(alpha)
        beta = tuple(beta) if beta is not None else (0,) * len(alpha)
        return cls(len(alpha), {(alpha, beta): c})

    @classmethod
    def z(cls, dim: int, j: int) -> "BiPolynomial":
        """The coordinate function ``z_j`` (0-based ``j``)."""
        e = tuple(int(i == j) for i in range(dim))
        return cls(dim, {(e, (0,) * dim): 1.0})

    @classmethod
    def zbar(cls, dim: int, j: int) -> "BiPolynomial":
        e = tuple(int(i == j) for i in range(dim))
        return cls(dim, {((0,) * dim, e): 1.0})

    @property
    def bidegree(self) -> tuple[int, int]:
        if not self._terms:
            return (0, 0)
        return (max(sum(a) for a, _ in self._terms), max(sum(b) for _, b in self._terms))

    @property
    def degree(self) -> int:
        return max((sum(a) + sum(b) for a, b in self._terms), default=0)

    def is_holomorphic(self) -> bool:
        return all(not any(b) for _, b in self._terms)

    def conj(self) -> "BiPolynomial":
        """Pointwise complex conjugate: swaps ``z`` and ``zbar`` and conjugates coefficients."""
        return BiPolynomial(self.dim, {(b, a): np.conj(c) for (a, b), c in self._terms.items()})

    def diff(self, alpha: Sequence[int], beta: Sequence[int] | None = None) -> "BiPolynomial":
        """Apply ``D**alpha Dbar**beta`` (Wirtinger derivatives) exactly."""
        alpha = tuple(alpha)
        beta = tuple(beta) if beta is not None else (0,) * self.dim
        if len(alpha) != self.dim or len(beta) != self.dim:
            raise DimensionError("derivative order length must match dimension")
        out = {}
        for (a, b), c in self._terms.items():
            f = 1
            for ai, di in zip(a + b, alpha + beta):
                f *= falling_factorial(ai, di)
                if f == 0:
                    break
            if f:
                key = (tuple(x - y for x, y in zip(a, alpha)), tuple(x - y for x, y in zip(b, beta)))
                out[key] = out.get(key, 0) + c * f
        return BiPolynomial(self.dim, out)

    def permute(self, perm: Sequence[int]) -> "BiPolynomial":
        """Relabel variables: variable ``j`` becomes variable ``perm[j]``."""
        def move(e):
            out = [0] * self.dim
            for j, v in enumerate(e):
                out[perm[j]] = v
            return tuple(out)

        return BiPolynomial(self.dim, {(move(a), move(b)): c for (a, b), c in self._terms.items()})

    def is_symmetric(self) -> bool:
        """Exact invariance under every adjacent transposition of variables."""
        for j in range(self.dim - 1):
            perm = list(range(self.dim))
            perm[j], perm[j + 1] = perm[j + 1], perm[j]
            if self.permute(perm) != self:
                return False
        return True

    def __call__(self, z) -> np.ndarray | complex:
        """Evaluate at complex point(s) ``z`` of shape ``(d,)`` or ``(n, d)``."""
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        z = np.atleast_2d(z)
        if z.shape[1] != self.dim:
            raise DimensionError(f"point dimension {z.shape[1]} != {self.dim}")
        zc = z.conj()
        out = np.zeros(z.shape[0], dtype=complex)
        for (a, b), c in self._terms.items():
            out += c * np.prod(z ** np.array(a), axis=1) * np.prod(zc ** np.array(b), axis=1)
        return complex(out[0]) if single else out

    def constant_term(self) -> complex:
        return complex(self._terms.get(self._one_key(), 0))


class RealPolynomial(_Sparse):
    """Polynomial in real coordinates ``x_1..x_D`` with complex coefficients."""

    __slots__ = ()

    def _check_key(self, key):
        key = tuple(int(e) for e in key)
        if len(key) != self.dim:
            raise DimensionError(f"exponent length must be {self.dim}")
        if key and min(key) < 0:
            raise ValueError("exponents must be nonnegative")
        return key

    def _one_key(self):
        return (0,) * self.dim

    @staticmethod
    def _mul_keys(k1, k2):
        return _add(k1, k2)

    def _render_monomial(self, key) -> str:
        names = [f"x{j + 1}" + (f"^{e}" if e > 1 else "") for j, e in enumerate(key) if e]
        return "*".join(names) or "1"

    @classmethod
    def constant(cls, dim: int, c: complex = 1.0) -> "RealPolynomial":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def monomial(cls, gamma: Sequence[int], c: complex = 1.0) -> "RealPolynomial":
        return cls(len(gamma), {tuple(gamma): c})

    @classmethod
    def x(cls, dim: int, j: int) -> "RealPolynomial":
        return cls(dim, {tuple(int(i == j) for i in range(dim)): 1.0})

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self._terms), default=0)

    def is_homogeneous(self, k: int) -> bool:
        return all(sum(key) == k for key in self._terms)

    def conj(self) -> "RealPolynomial":
        return RealPolynomial(self.dim, {k: np.conj(c) for k, c in self._terms.items()})

    def diff(self, gamma: Sequence[int]) -> "RealPolynomial":
        gamma = tuple(gamma)
        if len(gamma) != self.dim:
            raise DimensionError("derivative order length must match dimension")
        out = {}
        for key, c in self._terms.items():
            f = 1
            for e, g in zip(key, gamma):
                f *= falling_factorial(e, g)
                if f == 0:
                    break
            if f:
                k = tuple(e - g for e, g in zip(key, gamma))
                out[k] = out.get(k, 0) + c * f
        return RealPolynomial(self.dim, out)

    def laplacian(self) -> "RealPolynomial":
        out = RealPolynomial(self.dim)
        for j in range(self.dim):
            out = out + self.diff(tuple(2 * (i == j) for i in range(self.dim)))
        return out

    def __call__(self, x) -> np.ndarray | complex:
        """Evaluate at real point(s) ``x`` of shape ``(D,)`` or ``(n, D)``."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.dim:
            raise DimensionError(f"point dimension {x.shape[1]} != {self.dim}")
        out = np.zeros(x.shape[0], dtype=complex)
        for key, c in self._terms.items():
            out += c * np.prod(x ** np.array(key), axis=1)
        return complex(out[0]) if single else out

    def constant_term(self) -> complex:
        return complex(self._terms.get(self._one_key(), 0))


class UniPolynomial:
    """Dense univariate polynomial ``c_0 + c_1 w + ... + c_m w^m``.

    Trailing (leading-degree) exact zeros are stripped so that the leading
    coefficient is nonzero unless the polynomial is zero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex]):
        c = np.array(list(coeffs), dtype=complex)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(0, dtype=complex)
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    def __call__(self, w):
        return np.polynomial.polynomial.polyval(w, self.coeffs) if self.coeffs.size else 0 * np.asarray(w)

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPolynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self) -> str:
        return f"UniPolynomial({self.coeffs.tolist()})"

    def monic(self) -> "UniPolynomial":
        if self.is_zero():
            raise ValueError("zero polynomial has no monic normalization")
        return UniPolynomial(self.coeffs / self.coeffs[-1])

    def roots(self, deflation_tol: float = 1e-8) -> np.ndarray:
        """Roots as eigenvalues of the companion matrix of the monic normalization.

        Leading coefficients smaller than ``deflation_tol * ||h||`` are dropped
        first (degree deflation).
        """
        c = self.coeffs
        if c.size == 0:
            raise ValueError("zero polynomial has no finite root set")
        norm = np.linalg.norm(c)
        m = len(c) - 1
        while m > 0 and abs(c[m]) < deflation_tol * norm:
            m -= 1
        if m == 0:
            return np.zeros(0, dtype=complex)
        monic = c[: m + 1] / c[m]
        companion = np.zeros((m, m), dtype=complex)
        companion[1:, :-1] = np.eye(m - 1)
        companion[:, -1] = -monic[:m]
        return np.linalg.eigvals(companion)

    def to_list(self) -> list[list[float]]:
        return [[float(c.real), float(c.imag)] for c in self.coeffs]


def multiply(p, q):
    """Exact sparse product of two polynomials of the same family."""
    return p * q


def apply_diff(operator, target):
    """Read ``operator`` as a constant-coefficient differential operator and apply it.

    For :class:`BiPolynomial` the exponent pair ``(alpha, beta)`` acts as
    ``D**alpha Dbar**beta``; for :class:`RealPolynomial`, ``gamma`` acts as
    ``d**gamma``.
    """
    if type(operator) is not type(target):
        raise DimensionError("operator and target must be the same polynomial family")
    if operator.dim != target.dim:
        raise DimensionError(f"dimension mismatch: {operator.dim} vs {target.dim}")
    out = type(target)(target.dim)
    if isinstance(operator, BiPolynomial):
        for (a, b), c in operator._terms.items():
            out = out + target.diff(a, b) * c
    else:
        for g, c in operator._terms.items():
            out = out + target.diff(g) * c
    return out


def complexify(p: BiPolynomial) -> RealPolynomial:
    """Rewrite ``p(z, zbar)`` in real coordinates ``z_j = x_{2j-1} + i x_{2j}``."""
    d = p.dim
    D = 2 * d
    cache: dict = {}

    def power(j, k, bar):
        key = (j, k, bar)
        if key not in cache:
            if k == 0:
                cache[key] = RealPolynomial.constant(D)
            else:
                lin = RealPolynomial.x(D, 2 * j) + RealPolynomial.x(D, 2 * j + 1) * (-1j if bar else 1j)
                cache[key] = power(j, k - 1, bar) * lin
        return cache[key]

    out = RealPolynomial(D)
    for (a, b), c in p._terms.items():
        term = RealPolynomial.constant(D, c)
        for j in range(d):
            if a[j]:
                term = term * power(j, a[j], False)
            if b[j]:
                term = term * power(j, b[j], True)
        out = out + term
    return out


def vandermonde_poly(n: int) -> BiPolynomial:
    """``V(Z) = prod_{i<j} (z_i - z_j)`` expanded; holomorphic, degree ``n(n-1)/2``."""
    if n < 1:
        raise ValueError("Vandermonde needs at least one variable")
    out = BiPolynomial.constant(n)
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (BiPolynomial.z(n, i) - BiPolynomial.z(n, j))
    return out


def multi_factorial(gamma: Sequence[int]) -> int:
    return math.prod(math.factorial(g) for g in gamma)
