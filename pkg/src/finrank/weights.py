"""Compactly supported weights and the pairing engine ``<W, p>``.

Four families are supported: finite atomic measures, point-supported
distributions ``sum_q L_q delta_{x_q}``, densities on an axis-aligned box
(integrated with tensor Gauss-Legendre quadrature) and radial distributions
given by a truncated power series of their Fourier transform in ``|xi|^2``.

Points are always stored in real coordinates.  On ``C^d`` a point is a
length-``2d`` vector with ``z_j = x_{2j-1} + i x_{2j}``, and derivative
operators act through real partial derivatives ``d^gamma``; Wirtinger
derivatives are expressed through them.

Fourier convention: ``FW(xi) = <W, exp(-i x.xi)>``, so that
``<W, x^gamma> = i^{|gamma|} d^gamma (FW)(0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .polyalg import (
    BiPolynomial,
    DimensionError,
    RealPolynomial,
    complexify,
    falling_factorial,
)

__all__ = [
    "Ambient",
    "DifferentialOperator",
    "Atomic",
    "PointDistribution",
    "Density",
    "FourierRadial",
    "Weight",
    "WeightError",
    "TruncationError",
    "apply_operator",
    "pair",
    "bi_moments",
    "real_moments",
    "pushforward",
    "unitary_to_real",
    "as_real",
    "merge_close",
    "circle_measure",
    "DENSITIES",
]


class WeightError(ValueError):
    """Invalid weight construction or unsupported operation for a family."""


class TruncationError(WeightError):
    """A truncated Fourier series was asked for more than it can deliver."""


# --------------------------------------------------------------------------- ambient


@dataclass(frozen=True)
class Ambient:
    kind: str  # "complex" or "real"
    dim: int

    def __post_init__(self):
        if self.kind not in ("complex", "real"):
            raise WeightError(f"ambient kind must be 'complex' or 'real', got {self.kind!r}")
        if int(self.dim) < 1:
            raise WeightError("ambient dimension must be >= 1")

    @classmethod
    def complex(cls, d: int) -> "Ambient":
        return cls("complex", d)

    @classmethod
    def real(cls, d: int) -> "Ambient":
        return cls("real", d)

    @property
    def real_dim(self) -> int:
        return 2 * self.dim if self.kind == "complex" else self.dim

    @property
    def is_complex(self) -> bool:
        return self.kind == "complex"

    def to_json(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}


# --------------------------------------------------------------------------- operators


class DifferentialOperator:
    """Constant-coefficient operator ``sum_gamma c_gamma d^gamma`` in real coordinates."""

    __slots__ = ("dim", "_terms")

    def __init__(self, dim: int, terms: Mapping[Sequence[int], complex]):
        self.dim = int(dim)
        clean: dict = {}
        for g, c in terms.items():
            g = tuple(int(e) for e in g)
            if len(g) != self.dim or min(g) < 0:
                raise DimensionError(f"bad multi-index {g} for dimension {self.dim}")
            clean[g] = clean.get(g, 0) + complex(c)
        self._terms = {g: c for g, c in clean.items() if c != 0}

    @classmethod
    def identity(cls, dim: int, c: complex = 1.0) -> "DifferentialOperator":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def partial(cls, dim: int, gamma: Sequence[int], c: complex = 1.0) -> "DifferentialOperator":
        return cls(dim, {tuple(gamma): c})

    @classmethod
    def wirtinger(cls, d: int, j: int, bar: bool = False) -> "DifferentialOperator":
        """``d/dz_j = (d_x - i d_y)/2`` or ``d/dzbar_j = (d_x + i d_y)/2`` on C^d."""
        ex = tuple(int(i == 2 * j) for i in range(2 * d))
        ey = tuple(int(i == 2 * j + 1) for i in range(2 * d))
        return cls(2 * d, {ex: 0.5, ey: 0.5j if bar else -0.5j})

    @classmethod
    def from_symbol(cls, symbol: RealPolynomial) -> "DifferentialOperator":
        return cls(symbol.dim, symbol.terms)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def order(self) -> int:
        return max((sum(g) for g in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self._terms.values())))

    def symbol(self) -> RealPolynomial:
        """The operator as a polynomial in formal derivative symbols."""
        return RealPolynomial(self.dim, self._terms)

    def wirtinger_symbol(self) -> BiPolynomial:
        """Rewrite through ``d_x = D + Dbar``, ``d_y = i(D - Dbar)`` (needs even dim)."""
        if self.dim % 2:
            raise DimensionError("Wirtinger form needs an even real dimension")
        d = self.dim // 2
        out = BiPolynomial(d)
        for g, c in self._terms.items():
            term = BiPolynomial.constant(d, c)
            for j in range(d):
                dz, dzb = BiPolynomial.z(d, j), BiPolynomial.zbar(d, j)
                term = term * (dz + dzb) ** g[2 * j] * ((dz - dzb) * 1j) ** g[2 * j + 1]
            out = out + term
        return out

    def __add__(self, other: "DifferentialOperator") -> "DifferentialOperator":
        if other.dim != self.dim:
            raise DimensionError("operator dimension mismatch")
        t = dict(self._terms)
        for g, c in other._terms.items():
            t[g] = t.get(g, 0) + c
        return DifferentialOperator(self.dim, t)

    def __mul__(self, c: complex) -> "DifferentialOperator":
        return DifferentialOperator(self.dim, {g: v * c for g, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, DifferentialOperator) and other.dim == self.dim and other._terms == self._terms

    def __repr__(self) -> str:
        return f"DifferentialOperator({self.dim}, {self._terms})"

    def to_json(self) -> list:
        return [[list(g), [c.real, c.imag]] for g, c in sorted(self._terms.items())]


def apply_operator(L: DifferentialOperator, p, x) -> complex:
    """``(L p)(x)`` by exact differentiation of the sparse polynomial ``p``.

    ``x`` is a real point.  A :class:`BiPolynomial` on C^d is accepted with a
    length-``2d`` real ``x``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if L.dim != x.size:
        raise DimensionError(f"operator dimension {L.dim} != point dimension {x.size}")
    if isinstance(p, RealPolynomial):
        if p.dim != L.dim:
            raise DimensionError(f"polynomial dimension {p.dim} != operator dimension {L.dim}")
        return sum((c * p.diff(g)(x) for g, c in L.terms.items()), 0j)
    if isinstance(p, BiPolynomial):
        if 2 * p.dim != L.dim:
            raise DimensionError(f"C^{p.dim} polynomial against operator on R^{L.dim}")
        z = x[0::2] + 1j * x[1::2]
        out = 0j
        for (s, t), c in L.wirtinger_symbol().terms.items():
            out += c * p.diff(s, t)(z)
        return out
    raise TypeError(f"unsupported polynomial type {type(p).__name__}")


# --------------------------------------------------------------------------- helpers


def _points_array(points, D: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        pts = np.zeros((0, D))
    pts = np.atleast_2d(pts)
    if pts.shape[1] != D:
        raise DimensionError(f"points must have {D} real coordinates, got shape {pts.shape}")
    return pts


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


def _complex_points(points: np.ndarray) -> np.ndarray:
    return points[:, 0::2] + 1j * points[:, 1::2]


def _real_points(z) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    out = np.empty((z.shape[0], 2 * z.shape[1]))
    out[:, 0::2] = z.real
    out[:, 1::2] = z.imag
    return out


def _ff_table(nmax: int, smax: int) -> np.ndarray:
    t = np.zeros((nmax + 1, smax + 1))
    for n in range(nmax + 1):
        for s in range(smax + 1):
            t[n, s] = falling_factorial(n, s)
    return t


def _safe_pow(base: np.ndarray, expo: np.ndarray) -> np.ndarray:
    # x**e with e possibly negative (masked to 0 by the caller's factor)
    return np.where(expo >= 0, base ** np.maximum(expo, 0), 0)


# --------------------------------------------------------------------------- families


@dataclass(frozen=True, eq=False)
class Atomic:
    """Finite measure ``sum_j c_j delta_{x_j}``.

    Coincident points are merged and zero masses dropped on construction.
    """

    ambient: Ambient
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        D = self.ambient.real_dim
        pts = _points_array(self.points, D)
        c = np.atleast_1d(np.asarray(self.masses, dtype=complex))
        if len(c) != len(pts):
            raise WeightError("points and masses must have the same length")
        merged: dict = {}
        order = []
        for p, m in zip(map(tuple, pts), c):
            if p not in merged:
                merged[p] = 0j
                order.append(p)
            merged[p] += m
        keep = [p for p in order if merged[p] != 0]
        object.__setattr__(self, "points", _freeze(np.array(keep, dtype=float).reshape(len(keep), D)))
        object.__setattr__(self, "masses", _freeze(np.array([merged[p] for p in keep], dtype=complex)))

    @classmethod
    def from_complex(cls, z, masses) -> "Atomic":
        z = np.asarray(z, dtype=complex)
        if z.ndim <= 1:
            z = z.reshape(-1, 1)
        return cls(Ambient.complex(z.shape[1]), _real_points(z), masses)

    @classmethod
    def zero(cls, ambient: Ambient) -> "Atomic":
        return cls(ambient, np.zeros((0, ambient.real_dim)), np.zeros(0))

    @property
    def complex_points(self) -> np.ndarray:
        return _complex_points(self.points)

    def __len__(self) -> int:
        return len(self.masses)

    def bi_moments(self, alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
        z = self.complex_points
        if len(z) == 0:
            return np.zeros(len(alphas), dtype=complex)
        zp = np.prod(z[None, :, :] ** alphas[:, None, :], axis=2)
        zb = np.prod(z.conj()[None, :, :] ** betas[:, None, :], axis=2)
        return (zp * zb) @ self.masses

    def real_moments(self, gammas: np.ndarray) -> np.ndarray:
        if len(self.points) == 0:
            return np.zeros(len(gammas), dtype=complex)
        xp = np.prod(self.points[None, :, :] ** gammas[:, None, :], axis=2)
        return xp @ self.masses

    def bi_moment_matrix(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        z = self.complex_points
        if len(z) == 0:
            return np.zeros((len(rows), len(cols)), dtype=complex)
        er = np.prod(z[None, :, :] ** rows[:, None, :], axis=2)
        ec = np.prod(z[None, :, :] ** cols[:, None, :], axis=2)
        return (er * self.masses[None, :]) @ ec.conj().T

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient.to_json(),
            "type": "atomic",
            "points": self.points.tolist(),
            "masses": [[m.real, m.imag] for m in self.masses],
        }


@dataclass(frozen=True, eq=False)
class PointDistribution:
    """Point-supported distribution acting by ``<F, p> = sum_q (L_q p)(x_q)``."""

    ambient: Ambient
    points: np.ndarray
    operators: tuple

    def __post_init__(self):
        D = self.ambient.real_dim
        pts = _points_array(self.points, D)
        ops = tuple(self.operators)
        if len(ops) != len(pts):
            raise WeightError("points and operators must have the same length")
        merged: dict = {}
        order = []
        for p, L in zip(map(tuple, pts), ops):
            if L.dim != D:
                raise DimensionError(f"operator dimension {L.dim} != {D}")
            if p in merged:
                merged[p] = merged[p] + L
            else:
                merged[p] = L
                order.append(p)
        keep = [p for p in order if not merged[p].is_zero()]
        object.__setattr__(self, "points", _freeze(np.array(keep, dtype=float).reshape(len(keep), D)))
        object.__setattr__(self, "operators", tuple(merged[p] for p in keep))

    @classmethod
    def from_complex(cls, z, operators) -> "PointDistribution":
        z = np.asarray(z, dtype=complex)
        if z.ndim <= 1:
            z = z.reshape(-1, 1)
        return cls(Ambient.complex(z.shape[1]), _real_points(z), tuple(operators))

    @property
    def complex_points(self) -> np.ndarray:
        return _complex_points(self.points)

    @property
    def order(self) -> int:
        return max((L.order for L in self.operators), default=0)

    def bi_moments(self, alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
        out = np.zeros(len(alphas), dtype=complex)
        if len(self.points) == 0:
            return out
        nmax = int(max(alphas.max(initial=0), betas.max(initial=0)))
        ff = _ff_table(nmax, self.order)
        for z, L in zip(self.complex_points, self.operators):
            for (s, t), c in L.wirtinger_symbol().terms.items():
                s, t = np.array(s), np.array(t)
                fac = np.prod(ff[alphas, s[None, :]], axis=1) * np.prod(ff[betas, t[None, :]], axis=1)
                mono = np.prod(_safe_pow(z[None, :], alphas - s), axis=1) * np.prod(
                    _safe_pow(z.conj()[None, :], betas - t), axis=1
                )
                out += c * fac * mono
        return out

    def real_moments(self, gammas: np.ndarray) -> np.ndarray:
        out = np.zeros(len(gammas), dtype=complex)
        if len(self.points) == 0:
            return out
        ff = _ff_table(int(gammas.max(initial=0)), self.order)
        for x, L in zip(self.points, self.operators):
            for g, c in L.terms.items():
                g = np.array(g)
                fac = np.prod(ff[gammas, g[None, :]], axis=1)
                out += c * fac * np.prod(_safe_pow(x[None, :], gammas - g), axis=1)
        return out

    def bi_moment_matrix(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        r, c = np.repeat(rows, len(cols), axis=0), np.tile(cols, (len(rows), 1))
        return self.bi_moments(r, c).reshape(len(rows), len(cols))

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient.to_json(),
            "type": "point_distribution",
            "points": self.points.tolist(),
            "operators": [L.to_json() for L in self.operators],
        }


def _uniform_box(lo, hi, mass: float = 1.0):
    vol = float(np.prod(np.asarray(hi) - np.asarray(lo)))
    value = mass / vol

    def f(x):
        return np.full(len(x), value, dtype=complex)

    return f


def _gaussian(lo, hi, center=None, sigma: float = 0.25, amplitude: float = 1.0):
    center = np.zeros(len(lo)) if center is None else np.asarray(center, dtype=float)

    def f(x):
        return amplitude * np.exp(-np.sum((x - center) ** 2, axis=1) / (2 * sigma**2)).astype(complex)

    return f


DENSITIES: dict[str, Callable] = {"uniform_box": _uniform_box, "gaussian": _gaussian}


@dataclass(frozen=True, eq=False)
class Density:
    """Density on an axis-aligned box, integrated by tensor Gauss-Legendre.

    ``density`` maps an ``(n, D)`` array of real points to ``n`` complex values
    and must be re-entrant.  ``name``/``params`` identify a built-in from
    :data:`DENSITIES` for serialization.
    """

    ambient: Ambient
    lo: np.ndarray
    hi: np.ndarray
    density: Callable = field(repr=False)
    order: int = 64
    name: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        D = self.ambient.real_dim
        lo, hi = np.asarray(self.lo, dtype=float).ravel(), np.asarray(self.hi, dtype=float).ravel()
        if lo.size != D or hi.size != D:
            raise DimensionError(f"box bounds must have {D} entries")
        if np.any(hi <= lo):
            raise WeightError("density box must have positive volume")
        if int(self.order) < 1:
            raise WeightError("quadrature order must be >= 1")
        object.__setattr__(self, "lo", _freeze(lo))
        object.__setattr__(self, "hi", _freeze(hi))

    @classmethod
    def builtin(cls, name: str, ambient: Ambient, lo, hi, order: int = 64, **params) -> "Density":
        if name not in DENSITIES:
            raise WeightError(f"unknown built-in density {name!r}; known: {sorted(DENSITIES)}")
        if np.any(np.asarray(hi, dtype=float) <= np.asarray(lo, dtype=float)):
            raise WeightError("density box must have positive volume")
        return cls(ambient, lo, hi, DENSITIES[name](lo, hi, **params), order, name, dict(params))

    def nodes(self, order: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Tensor Gauss-Legendre nodes ``(n^D, D)`` and weights on the box."""
        n = int(order or self.order)
        t, w = np.polynomial.legendre.leggauss(n)
        half = (self.hi - self.lo) / 2
        mid = (self.hi + self.lo) / 2
        axes = [mid[i] + half[i] * t for i in range(len(half))]
        wts = [half[i] * w for i in range(len(half))]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(half))
        wgrid = np.ones(1)
        for wi in wts:
            wgrid = np.multiply.outer(wgrid, wi).ravel()
        return grid, wgrid

    @cached_property
    def _quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = self.nodes()
        return x, w * np.asarray(self.density(x), dtype=complex)

    def bi_moments(self, alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
        x, wf = self._quadrature
        z = _complex_points(x)
        out = np.empty(len(alphas), dtype=complex)
        for i, (a, b) in enumerate(zip(alphas, betas)):
            out[i] = np.sum(wf * np.prod(z**a, axis=1) * np.prod(z.conj() ** b, axis=1))
        return out

    def real_moments(self, gammas: np.ndarray) -> np.ndarray:
        x, wf = self._quadrature
        return np.array([np.sum(wf * np.prod(x**g, axis=1)) for g in gammas], dtype=complex)

    def bi_moment_matrix(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        x, wf = self._quadrature
        z = _complex_points(x)
        er = np.prod(z[None, :, :] ** rows[:, None, :], axis=2)
        ec = np.prod(z[None, :, :] ** cols[:, None, :], axis=2)
        return (er * wf[None, :]) @ ec.conj().T

    def to_json(self) -> dict:
        if self.name is None:
            raise WeightError("only built-in densities are serializable")
        return {
            "ambient": self.ambient.to_json(),
            "type": "density",
            "name": self.name,
            "box": [self.lo.tolist(), self.hi.tolist()],
            "order": int(self.order),
            "params": self.params,
        }


@dataclass(frozen=True, eq=False)
class FourierRadial:
    """Radial distribution with ``FW(xi) = sum_{k<=K} a_k |xi|^{2k}``.

    Moments up to order ``2K`` are exact.  ``radius`` bounds the ``|xi|``
    where the truncated series is trusted for pointwise evaluation.
    """

    ambient: Ambient
    series: np.ndarray
    radius: float = 4.0

    def __post_init__(self):
        a = np.asarray(self.series, dtype=float).ravel()
        if a.size == 0:
            raise WeightError("Fourier series needs at least one coefficient")
        object.__setattr__(self, "series", _freeze(a))

    @classmethod
    def cos_norm(cls, D: int, K: int = 24, radius: float = 4.0) -> "FourierRadial":
        """The distribution whose Fourier transform is ``cos|xi|`` on R^D."""
        a = [(-1) ** k / math.factorial(2 * k) for k in range(K + 1)]
        return cls(Ambient.real(D), a, radius)

    @property
    def truncation(self) -> int:
        return len(self.series) - 1

    def real_moments(self, gammas: np.ndarray) -> np.ndarray:
        out = np.zeros(len(gammas), dtype=complex)
        K = self.truncation
        for i, g in enumerate(np.asarray(gammas)):
            if g.sum() > 2 * K:
                raise TruncationError(f"truncation exceeded: moment order {g.sum()} > 2K = {2 * K}")
            if np.any(g % 2):
                continue
            delta = g // 2
            k = int(delta.sum())
            val = self.series[k] * math.factorial(k) * (-1) ** k
            for dj in delta:
                val *= math.factorial(2 * dj) / math.factorial(dj)
            out[i] = val
        return out

    def bi_moments(self, alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
        d = alphas.shape[1]
        out = np.empty(len(alphas), dtype=complex)
        for i, (a, b) in enumerate(zip(alphas, betas)):
            rp = complexify(BiPolynomial(d, {(tuple(a), tuple(b)): 1.0}))
            out[i] = _pair_real_terms(self, rp)
        return out

    def bi_moment_matrix(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        r, c = np.repeat(rows, len(cols), axis=0), np.tile(cols, (len(rows), 1))
        return self.bi_moments(r, c).reshape(len(rows), len(cols))

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient.to_json(),
            "type": "fourier_radial",
            "series": self.series.tolist(),
            "radius": self.radius,
        }


Weight = Union[Atomic, PointDistribution, Density, FourierRadial]


# --------------------------------------------------------------------------- pairing


def _as_index_array(keys, width: int) -> np.ndarray:
    return np.asarray(list(keys), dtype=int).reshape(-1, width)


def bi_moments(W: Weight, pairs: Sequence[tuple]) -> np.ndarray:
    """``<W, z^alpha zbar^beta>`` for a list of ``(alpha, beta)`` pairs."""
    if not W.ambient.is_complex:
        raise DimensionError("bi-moments need a weight on C^d")
    d = W.ambient.dim
    if len(pairs) == 0:
        return np.zeros(0, dtype=complex)
    a = _as_index_array((p[0] for p in pairs), d)
    b = _as_index_array((p[1] for p in pairs), d)
    return W.bi_moments(a, b)


def real_moments(W: Weight, gammas: Sequence[Sequence[int]]) -> np.ndarray:
    """``<W, x^gamma>`` in the real encoding of the ambient space."""
    if len(gammas) == 0:
        return np.zeros(0, dtype=complex)
    return W.real_moments(_as_index_array(gammas, W.ambient.real_dim))


def _pair_real_terms(W: Weight, p: RealPolynomial) -> complex:
    keys = list(p.terms)
    if not keys:
        return 0j
    m = W.real_moments(_as_index_array(keys, p.dim))
    return complex(np.dot(np.array([p.terms[k] for k in keys]), m))


def pair(W: Weight, p) -> complex:
    """``<W, p>`` for a polynomial test function, extended linearly over terms.

    A weight on C^d pairs with :class:`BiPolynomial` of dimension ``d``; a
    weight on R^D pairs with :class:`RealPolynomial` of dimension ``D``.
    """
    amb = W.ambient
    if isinstance(p, BiPolynomial):
        if not amb.is_complex or p.dim != amb.dim:
            raise DimensionError(f"BiPolynomial on C^{p.dim} cannot pair with a weight on {amb}")
        keys = list(p.terms)
        if not keys:
            return 0j
        m = bi_moments(W, keys)
        return complex(np.dot(np.array([p.terms[k] for k in keys]), m))
    if isinstance(p, RealPolynomial):
        if amb.is_complex or p.dim != amb.dim:
            raise DimensionError(f"RealPolynomial on R^{p.dim} cannot pair with a weight on {amb}")
        return _pair_real_terms(W, p)
    raise TypeError(f"cannot pair with {type(p).__name__}")


# --------------------------------------------------------------------------- maps


def unitary_to_real(U: np.ndarray) -> np.ndarray:
    """Real ``2d x 2d`` matrix of the complex-linear map ``z -> U z``."""
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    T = np.zeros((2 * d, 2 * d))
    T[0::2, 0::2] = U.real
    T[0::2, 1::2] = -U.imag
    T[1::2, 0::2] = U.imag
    T[1::2, 1::2] = U.real
    return T


def _pushforward_operator(L: DifferentialOperator, T: np.ndarray) -> DifferentialOperator:
    # chain rule: d_i (phi o T) = sum_k T[k, i] (d_k phi) o T
    Dout = T.shape[0]
    lin = [sum((RealPolynomial.x(Dout, k) * T[k, i] for k in range(Dout)), RealPolynomial(Dout)) for i in range(T.shape[1])]
    out = RealPolynomial(Dout)
    for g, c in L.terms.items():
        term = RealPolynomial.constant(Dout, c)
        for i, e in enumerate(g):
            if e:
                term = term * lin[i] ** e
        out = out + term
    return DifferentialOperator.from_symbol(out)


def pushforward(W: Weight, T: np.ndarray, ambient: Ambient, merge_tol: float | None = None) -> Weight:
    """Image of ``W`` under the real-linear map ``x -> T x`` into ``ambient``.

    ``<T_* W, phi> = <W, phi o T>``.  Atomic and point-supported weights are
    mapped exactly; a radial weight is invariant under orthogonal ``T``.
    With ``merge_tol`` set, image points closer than it are merged.
    """
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if T.shape != (ambient.real_dim, W.ambient.real_dim):
        raise DimensionError(f"map shape {T.shape} does not fit {W.ambient} -> {ambient}")
    if isinstance(W, Atomic):
        out = Atomic(ambient, W.points @ T.T, W.masses)
    elif isinstance(W, PointDistribution):
        out = PointDistribution(ambient, W.points @ T.T, tuple(_pushforward_operator(L, T) for L in W.operators))
    elif isinstance(W, FourierRadial):
        if T.shape[0] != T.shape[1] or not np.allclose(T.T @ T, np.eye(T.shape[0]), atol=1e-12):
            raise WeightError("radial weights only map under orthogonal transformations")
        return FourierRadial(ambient, W.series, W.radius)
    else:
        raise WeightError(f"pushforward of {type(W).__name__} is not supported")
    return merge_close(out, merge_tol) if merge_tol else out


def merge_close(W: Weight, tol: float = 1e-9, drop_rtol: float = 1e-14) -> Weight:
    """Merge points within ``tol`` of an earlier point; drop negligible results.

    Masses (or operators) of merged points are summed at the first point of
    each cluster.  Merged masses below ``drop_rtol`` times the largest input
    mass are treated as exact cancellations.
    """
    if not isinstance(W, (Atomic, PointDistribution)) or len(W.points) == 0:
        return W
    reps: list[int] = []
    label = np.empty(len(W.points), dtype=int)
    for i, p in enumerate(W.points):
        for r_idx, r in enumerate(reps):
            if np.linalg.norm(p - W.points[r]) <= tol:
                label[i] = r_idx
                break
        else:
            label[i] = len(reps)
            reps.append(i)
    pts = W.points[reps]
    if isinstance(W, Atomic):
        masses = np.zeros(len(reps), dtype=complex)
        np.add.at(masses, label, W.masses)
        scale = np.abs(W.masses).max()
        masses[np.abs(masses) <= drop_rtol * scale] = 0
        return Atomic(W.ambient, pts, masses)
    ops = [None] * len(reps)
    for i, L in zip(label, W.operators):
        ops[i] = L if ops[i] is None else ops[i] + L
    return PointDistribution(W.ambient, pts, tuple(ops))


def as_real(W: Weight) -> Weight:
    """Reinterpret a weight on C^d as the same weight on R^{2d}."""
    if not W.ambient.is_complex:
        return W
    amb = Ambient.real(W.ambient.real_dim)
    if isinstance(W, Atomic):
        return Atomic(amb, W.points, W.masses)
    if isinstance(W, PointDistribution):
        return PointDistribution(amb, W.points, W.operators)
    if isinstance(W, Density):
        return Density(amb, W.lo, W.hi, W.density, W.order, W.name, W.params)
    return FourierRadial(amb, W.series, W.radius)


def circle_measure(n: int, radius: float = 1.0, center: complex = 0.0, subtract_center: bool = False) -> Atomic:
    """Arclength measure on a circle in C, discretized with ``n`` equispaced nodes.

    With ``subtract_center`` the atom ``-2 pi r delta_center`` is added, which
    kills every holomorphic moment ``<W, (w - center)^k>`` for ``k < n``.
    """
    theta = 2 * np.pi * np.arange(n) / n
    z = center + radius * np.exp(1j * theta)
    masses = np.full(n, 2 * np.pi * radius / n, dtype=complex)
    if subtract_center:
        z = np.append(z, center)
        masses = np.append(masses, -2 * np.pi * radius)
    return Atomic.from_complex(z, masses)
