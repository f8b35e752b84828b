"""Truncated analytic and harmonic moment matrices.

The analytic matrix of a weight on C^d has entries ``<W, z^alpha zbar^beta>``
for ``|alpha|, |beta| <= N`` (full bidegree box, graded-lex order).  The
harmonic matrix on R^D pairs ``W`` against ``f_a conj(f_b)`` for an
orthonormalized basis of harmonic polynomials of degree ``<= k_max``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .polyalg import BiPolynomial, DimensionError, RealPolynomial, graded_lex
from .weights import Ambient, Atomic, Weight, pushforward

__all__ = [
    "MomentMatrix",
    "HarmonicBasis",
    "analytic_moment_matrix",
    "harmonic_basis",
    "harmonic_moment_matrix",
    "twist",
    "coordinate_submatrix",
    "drop_coordinate",
    "marginal",
    "PROJECTION_MERGE_TOL",
]

PROJECTION_MERGE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    basis_kind: str  # "monomial_bi" or "harmonic"
    row_labels: tuple
    col_labels: tuple
    degree_cutoff: int
    entries: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def to_json(self) -> dict:
        return {
            "basis_kind": self.basis_kind,
            "degree_cutoff": self.degree_cutoff,
            "row_labels": [_label_json(lab) for lab in self.row_labels],
            "col_labels": [_label_json(lab) for lab in self.col_labels],
            "entries": [[[v.real, v.imag] for v in row] for row in self.entries],
        }


def _label_json(label):
    return list(label) if isinstance(label, tuple) else label


@dataclass(frozen=True, eq=False)
class HarmonicBasis:
    """Orthonormal (in coefficient space) harmonic polynomials, grouped by degree."""

    dim: int
    by_degree: tuple  # tuple of tuples of RealPolynomial
    monomials: tuple  # graded-lex monomials of degree <= k_max
    coefficients: np.ndarray = field(repr=False)  # (n_basis, n_monomials)

    @property
    def k_max(self) -> int:
        return len(self.by_degree) - 1

    @property
    def labels(self) -> tuple:
        return tuple(f"h{k}.{i}" for k, polys in enumerate(self.by_degree) for i in range(len(polys)))

    @property
    def polynomials(self) -> list:
        return [p for polys in self.by_degree for p in polys]

    def counts(self) -> list[int]:
        return [len(p) for p in self.by_degree]


def _ambient_check(W: Weight, kind: str) -> None:
    if W.ambient.kind != kind:
        raise DimensionError(f"expected a weight on a {kind} space, got {W.ambient}")


def analytic_moment_matrix(W: Weight, N: int) -> MomentMatrix:
    """``a_{alpha beta} = <W, z^alpha zbar^beta>`` for ``|alpha|, |beta| <= N``."""
    if N < 0:
        raise ValueError("degree cutoff must be >= 0")
    _ambient_check(W, "complex")
    labels = graded_lex(W.ambient.dim, N)
    idx = np.array(labels, dtype=int)
    return MomentMatrix("monomial_bi", labels, labels, N, W.bi_moment_matrix(idx, idx))


@lru_cache(maxsize=None)
def _laplacian_matrix(D: int, k: int) -> np.ndarray:
    src = graded_lex_homogeneous(D, k)
    if k < 2:
        return np.zeros((0, len(src)))
    dst = graded_lex_homogeneous(D, k - 2)
    pos = {m: i for i, m in enumerate(dst)}
    L = np.zeros((len(dst), len(src)))
    for c, mono in enumerate(src):
        for j in range(D):
            e = mono[j]
            if e >= 2:
                tgt = list(mono)
                tgt[j] -= 2
                L[pos[tuple(tgt)], c] += e * (e - 1)
    return L


def graded_lex_homogeneous(D: int, k: int) -> tuple:
    return tuple(m for m in graded_lex(D, k) if sum(m) == k)


@lru_cache(maxsize=None)
def harmonic_basis(D: int, k_max: int) -> HarmonicBasis:
    """Basis of harmonic polynomials of degree ``<= k_max`` on R^D.

    For each degree the Laplacian is assembled as a matrix from homogeneous
    degree-``k`` coefficients to degree ``k-2`` coefficients, and an
    orthonormal basis of its nullspace is extracted by SVD.
    """
    if D < 2:
        raise ValueError("harmonic bases need D >= 2")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    monomials = graded_lex(D, k_max)
    col = {m: i for i, m in enumerate(monomials)}
    by_degree = []
    rows = []
    for k in range(k_max + 1):
        src = graded_lex_homogeneous(D, k)
        L = _laplacian_matrix(D, k)
        null = np.eye(len(src)) if L.shape[0] == 0 else scipy.linalg.null_space(L)
        polys = []
        for v in null.T:
            v = v / v[np.argmax(np.abs(v))] * np.abs(v).max()  # fix sign deterministically
            polys.append(RealPolynomial(D, {m: c for m, c in zip(src, v) if abs(c) > 1e-15}))
            row = np.zeros(len(monomials))
            for m, c in zip(src, v):
                row[col[m]] = c
            rows.append(row)
        by_degree.append(tuple(polys))
    coeffs = np.array(rows).reshape(-1, len(monomials))
    coeffs.setflags(write=False)
    return HarmonicBasis(D, tuple(by_degree), monomials, coeffs)


def harmonic_moment_matrix(W: Weight, k_max: int) -> MomentMatrix:
    """``<W, f_a conj(f_b)>`` over the harmonic basis of degree ``<= k_max``."""
    _ambient_check(W, "real")
    D = W.ambient.dim
    basis = harmonic_basis(D, k_max)
    B = basis.coefficients
    mons = np.array(basis.monomials, dtype=int)
    if isinstance(W, Atomic):
        if len(W.points) == 0:
            H = np.zeros((B.shape[0], B.shape[0]), dtype=complex)
        else:
            E = np.prod(W.points[:, None, :] ** mons[None, :, :], axis=2)  # (n_pts, n_mono)
            F = B @ E.T  # basis values at atoms
            H = (F * W.masses[None, :]) @ F.conj().T
    else:
        sums = graded_lex(D, 2 * k_max)
        pos = {m: i for i, m in enumerate(sums)}
        M = W.real_moments(np.array(sums, dtype=int))
        idx = np.array([[pos[tuple(a + b)] for b in mons] for a in mons])
        G = M[idx]
        H = B @ G @ B.conj().T
    return MomentMatrix("harmonic", basis.labels, basis.labels, k_max, H)


def twist(W: Weight, g: BiPolynomial, N: int) -> MomentMatrix:
    """Moment matrix of ``|g|^2 W``: entries ``<W, g z^alpha conj(g z^beta)>``.

    Assembled as linear combinations of rows and columns of the untwisted
    matrix at cutoff ``N + deg g``.
    """
    if not g.is_holomorphic():
        raise ValueError("twist needs a holomorphic g (no zbar terms)")
    _ambient_check(W, "complex")
    if g.dim != W.ambient.dim:
        raise DimensionError("g and weight live in different dimensions")
    deg = g.bidegree[0]
    big = analytic_moment_matrix(W, N + deg)
    pos = {lab: i for i, lab in enumerate(big.row_labels)}
    labels = graded_lex(W.ambient.dim, N)
    S = np.zeros((len(labels), len(big.row_labels)), dtype=complex)
    for r, alpha in enumerate(labels):
        for (a, _), c in g.terms.items():
            S[r, pos[tuple(x + y for x, y in zip(alpha, a))]] += c
    return MomentMatrix("monomial_bi", labels, labels, N, S @ big.entries @ S.conj().T)


def _selection(D_in: int, keep_real: list[int]) -> np.ndarray:
    T = np.zeros((len(keep_real), D_in))
    for r, c in enumerate(keep_real):
        T[r, c] = 1.0
    return T


def drop_coordinate(W: Weight, j: int) -> Weight:
    """Pushforward of a weight on C^d under ``Z -> Z'`` forgetting ``z_j``."""
    d = W.ambient.dim
    if not W.ambient.is_complex or d < 2:
        raise DimensionError("dropping a coordinate needs a weight on C^d with d >= 2")
    if not 0 <= j < d:
        raise IndexError(f"coordinate {j} out of range for C^{d}")
    keep = [r for i in range(d) if i != j for r in (2 * i, 2 * i + 1)]
    return pushforward(W, _selection(2 * d, keep), Ambient.complex(d - 1), merge_tol=PROJECTION_MERGE_TOL)


def marginal(W: Weight, j: int) -> Weight:
    """Pushforward of a weight on C^d onto the single coordinate ``z_j``."""
    d = W.ambient.dim
    if not W.ambient.is_complex:
        raise DimensionError("marginals need a weight on C^d")
    if not 0 <= j < d:
        raise IndexError(f"coordinate {j} out of range for C^{d}")
    return pushforward(W, _selection(2 * d, [2 * j, 2 * j + 1]), Ambient.complex(1), merge_tol=PROJECTION_MERGE_TOL)


def coordinate_submatrix(W: Weight, j: int, N: int) -> MomentMatrix:
    """Submatrix of the analytic moment matrix with ``alpha_j = beta_j = 0``.

    Labels are the remaining ``d-1`` exponents, so the result is directly
    comparable with the analytic matrix of :func:`drop_coordinate`.
    """
    d = W.ambient.dim
    if d < 2:
        raise DimensionError("coordinate submatrix needs d >= 2")
    if not 0 <= j < d:
        raise IndexError(f"coordinate {j} out of range for C^{d}")
    full = analytic_moment_matrix(W, N)
    keep = [i for i, lab in enumerate(full.row_labels) if lab[j] == 0]
    labels = tuple(full.row_labels[i][:j] + full.row_labels[i][j + 1 :] for i in keep)
    return MomentMatrix("monomial_bi", labels, labels, N, full.entries[np.ix_(keep, keep)])
