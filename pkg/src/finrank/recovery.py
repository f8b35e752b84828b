"""Recovery of point-supported weights from their moments.

The 1-D loop works on the moment table ``t[k][l] = <F, z^k zbar^l>``:

1. find the lowest-degree ``h`` with ``sum_l t[k][l] c_l = 0`` for all rows,
   i.e. ``<F, z^k h(zbar)> = 0``;
2. the conjugated roots of ``h`` are support candidates;
3. replace the table by that of ``G`` with ``dG/dzbar = h(zbar) F``,
   ``<G, z^k zbar^l> = -(l+1)^{-1} <h F, z^k zbar^{l+1}>``, and repeat until
   the table vanishes.

Candidates are clustered, operator coefficients are fitted by least squares
against the original moments, positions are polished by variable projection,
and negligible terms are pruned.  Several variables are handled by
recovering every coordinate marginal, intersecting, and fitting on the full
moment table, retrying under random unitary coordinate changes when
projections cancel.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.stats import unitary_group

from .moments import MomentMatrix, marginal
from .polyalg import DimensionError, UniPolynomial, graded_lex
from .weights import (
    Ambient,
    Atomic,
    Density,
    DifferentialOperator,
    PointDistribution,
    Weight,
    WeightError,
    pushforward,
    unitary_to_real,
)

__all__ = [
    "RecoveryError",
    "RecoveryReport",
    "MomentTable",
    "numerical_rank",
    "null_polynomial",
    "reduce_moments",
    "recover_1d",
    "recover_multid",
    "reconstruct",
    "cauchy_transform",
]

log = logging.getLogger(__name__)

FAIL_RESIDUAL = 1e-6
NULL_RATIO = 1e-8
TABLE_NULL_TOL = 1e-12
PRUNE_RTOL = 1e-9
CLUSTER_TOL = 1e-3
RANK_EPS = 1e-8


class RecoveryError(RuntimeError):
    """Recovery failed: the weight is not point-supported within the given bounds."""

    def __init__(self, message: str, report: "RecoveryReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass
class RecoveryReport:
    support: np.ndarray  # (n, d) complex
    operators: list
    rank_used: int
    singular_values: np.ndarray
    moment_residual: float
    stage_polynomials: list = field(default_factory=list)
    retries: int = 0

    @property
    def masses(self) -> np.ndarray:
        """Zeroth-order coefficients (the masses, for plain measures)."""
        return np.array([L.terms.get((0,) * L.dim, 0j) for L in self.operators], dtype=complex)

    def to_json(self) -> dict:
        return {
            "support": [[[z.real, z.imag] for z in p] for p in self.support],
            "operators": [L.to_json() for L in self.operators],
            "rank_used": int(self.rank_used),
            "singular_values": [float(s) for s in self.singular_values],
            "moment_residual": float(self.moment_residual),
            "stage_polynomials": [h.to_list() for h in self.stage_polynomials],
            "retries": int(self.retries),
        }


def numerical_rank(M, eps_rel: float = 1e-10) -> tuple[int, np.ndarray]:
    """Count singular values above ``eps_rel * sigma_1``; the zero matrix has rank 0."""
    A = M.entries if isinstance(M, MomentMatrix) else np.asarray(M)
    if A.size == 0:
        raise ValueError("numerical rank of an empty matrix")
    if not 0 < eps_rel < 1:
        raise ValueError("eps_rel must lie in (0, 1)")
    s = scipy.linalg.svdvals(A)
    if s[0] == 0:
        return 0, s
    return int(np.sum(s > eps_rel * s[0])), s


# --------------------------------------------------------------------------- tables


class MomentTable:
    """1-D moment table ``t[k][l] = <F, z^k zbar^l>``, ``k <= K``, ``l <= L``.

    ``scale`` is carried through reductions so that nullity is judged against
    the original weight.
    """

    def __init__(self, t: np.ndarray, scale: float | None = None):
        self.t = np.asarray(t, dtype=complex)
        self.scale = float(np.abs(self.t).max(initial=0.0)) if scale is None else float(scale)

    @classmethod
    def from_weight(cls, W: Weight, K: int, L: int) -> "MomentTable":
        if not W.ambient.is_complex or W.ambient.dim != 1:
            raise DimensionError("moment tables are for weights on C^1")
        k = np.arange(K + 1).reshape(-1, 1)
        l = np.arange(L + 1).reshape(-1, 1)
        return cls(W.bi_moment_matrix(k, l))

    @property
    def rows(self) -> int:
        return self.t.shape[0] - 1

    @property
    def cols(self) -> int:
        return self.t.shape[1] - 1

    def is_null(self, tol: float = TABLE_NULL_TOL) -> bool:
        return self.scale == 0 or np.abs(self.t).max(initial=0.0) < tol * self.scale


def _null_vector(T: MomentTable, m: int) -> tuple[np.ndarray, float]:
    block = T.t[:, : m + 1]
    _, s, vh = np.linalg.svd(block)
    ratio = s[-1] / s[0] if len(s) == m + 1 and s[0] > 0 else 0.0
    return vh[-1].conj(), ratio


def null_polynomial(T: MomentTable, m: int) -> UniPolynomial:
    """``h(w) = sum_l c_l w^l`` from the smallest right singular vector of the first ``m+1`` columns.

    Returns the zero polynomial when the table is identically zero.
    """
    if m < 0 or m > T.cols:
        raise ValueError(f"need 0 <= m <= {T.cols}")
    if np.abs(T.t).max(initial=0.0) == 0:
        return UniPolynomial([])
    c, _ = _null_vector(T, m)
    return UniPolynomial(c)


def _minimal_null_polynomial(T: MomentTable, m_max: int, ratio_tol: float, gap: float = 1e-4) -> UniPolynomial | None:
    """Lowest-degree null polynomial whose singular-value ratio is below ``ratio_tol``.

    A ratio just under the threshold can be a near-dependency of a smooth
    table rather than a true one (high-multiplicity roots); the degree is
    therefore raised while the next ratio drops by more than ``1/gap``.
    """
    top = min(m_max, T.cols)
    for m in range(top + 1):
        c, ratio = _null_vector(T, m)
        if ratio < ratio_tol:
            while m < top:
                c_next, r_next = _null_vector(T, m + 1)
                if r_next >= gap * ratio:
                    break
                m, c, ratio = m + 1, c_next, r_next
            if m == 0:
                return UniPolynomial([1.0])
            return UniPolynomial(c / c[np.argmax(np.abs(c))])
    return None


def reduce_moments(T: MomentTable, h: UniPolynomial) -> MomentTable:
    """Table of ``G`` with ``dG/dzbar = h(zbar) F``.

    ``t'[k][l] = -(l+1)^{-1} sum_j h_j t[k][l+1+j]``; the table loses
    ``deg h + 1`` columns.
    """
    if h.is_zero():
        raise ValueError("reduction needs a nonzero polynomial")
    width = T.cols - h.degree  # new cols index range 0..width-1
    if width < 1:
        raise ValueError(f"table too narrow: {T.cols + 1} columns, deg h = {h.degree}")
    out = np.zeros((T.t.shape[0], width), dtype=complex)
    for j, hj in enumerate(h.coeffs):
        out += hj * T.t[:, 1 + j : 1 + j + width]
    out *= -1.0 / np.arange(1, width + 1)[None, :]
    return MomentTable(out, scale=T.scale)


# --------------------------------------------------------------------------- fitting


def _delta_block(points: np.ndarray, rows_a: np.ndarray, rows_b: np.ndarray, d: int) -> np.ndarray:
    """``z_q^alpha conj(z_q)^beta`` for every row and every point ``q`` at once."""
    z = points[:, 0::2] + 1j * points[:, 1::2]  # (n, d)
    top = int(max(rows_a.max(initial=0), rows_b.max(initial=0)))
    P = z[:, :, None] ** np.arange(top + 1)  # (n, d, top+1)
    out = np.ones((len(rows_a), len(points)), dtype=complex)
    for i in range(d):
        out *= (P[:, i, rows_a[:, i]] * P[:, i, rows_b[:, i]].conj()).T
    return out


def _columns(points: np.ndarray, patterns: list, rows_a, rows_b, d: int):
    """Moments of ``d^gamma delta_p`` for each point and each ``gamma`` in its pattern."""
    D = 2 * d
    zero = (0,) * D
    delta = _delta_block(points, rows_a, rows_b, d) if len(points) else None
    cols, labels = [], []
    for q, (p, pat) in enumerate(zip(points, patterns)):
        for g in pat:
            if g == zero:
                cols.append(delta[:, q])
            else:
                W = PointDistribution(Ambient.complex(d), p.reshape(1, D), (DifferentialOperator.partial(D, g),))
                cols.append(W.bi_moments(rows_a, rows_b))
            labels.append((q, g))
    if not cols:
        return np.zeros((len(rows_a), 0), dtype=complex), labels
    return np.stack(cols, axis=1), labels


def _design(points: np.ndarray, orders: list[int], rows_a: np.ndarray, rows_b: np.ndarray, d: int):
    """Columns: moments of ``d^gamma delta_p`` for each candidate and ``|gamma| <= order``."""
    return _columns(points, [graded_lex(2 * d, o) for o in orders], rows_a, rows_b, d)


def _fit(points, orders, rows_a, rows_b, target, d):
    A, labels = _design(points, orders, rows_a, rows_b, d)
    if A.shape[1] == 0:
        return np.zeros(0, dtype=complex), labels, target.copy()
    coef = scipy.linalg.lstsq(A, target, lapack_driver="gelsd")[0]
    return coef, labels, target - A @ coef


def _operators_from_fit(n_points, coef, labels, D):
    terms = [dict() for _ in range(n_points)]
    for c, (q, g) in zip(coef, labels):
        terms[q][g] = c
    return [DifferentialOperator(D, t) for t in terms]


def _prune(points, ops, rtol=PRUNE_RTOL):
    """Drop negligible coefficients and then empty candidates."""
    scale = max((abs(c) for L in ops for c in L.terms.values()), default=0.0)
    keep_pts, keep_ops = [], []
    for p, L in zip(points, ops):
        t = {g: c for g, c in L.terms.items() if abs(c) > rtol * scale}
        if t:
            keep_pts.append(p)
            keep_ops.append(DifferentialOperator(L.dim, t))
    return np.array(keep_pts).reshape(len(keep_pts), -1), keep_ops


def _fit_with_terms(points, ops, rows_a, rows_b, target, d):
    """Refit only the coefficient patterns present in ``ops``."""
    A, labels = _columns(points, [sorted(L.terms) for L in ops], rows_a, rows_b, d)
    if A.shape[1] == 0:
        return ops, target.copy()
    coef = scipy.linalg.lstsq(A, target, lapack_driver="gelsd")[0]
    return _operators_from_fit(len(points), coef, labels, 2 * d), target - A @ coef


def _polish(points, ops, rows_a, rows_b, target, d):
    """Variable-projection refinement of support positions (coefficients eliminated)."""
    D = 2 * d
    patterns = [sorted(L.terms) for L in ops]

    def resid(x):
        A = _columns(x.reshape(-1, D), patterns, rows_a, rows_b, d)[0]
        coef = scipy.linalg.lstsq(A, target, lapack_driver="gelsd")[0]
        r = target - A @ coef
        return np.concatenate([r.real, r.imag])

    x0 = np.asarray(points, dtype=float).ravel()
    sol = scipy.optimize.least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * (x0.size + 1))
    if np.linalg.norm(resid(sol.x)) <= np.linalg.norm(resid(x0)):
        return sol.x.reshape(-1, D)
    return np.asarray(points, dtype=float)


def _fit_rows(d: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    labels = np.array(graded_lex(d, N), dtype=int)
    a = np.repeat(labels, len(labels), axis=0)
    b = np.tile(labels, (len(labels), 1))
    return a, b


def _fit_support(candidates: np.ndarray, orders: list[int], W: Weight, N_fit: int, polish: bool = True):
    """Least-squares operator fit on moments ``|alpha|, |beta| <= N_fit``; returns (points, ops, residual)."""
    d = W.ambient.dim
    D = 2 * d
    rows_a, rows_b = _fit_rows(d, N_fit)
    target = W.bi_moments(rows_a, rows_b)
    norm = np.linalg.norm(target)
    if norm == 0:
        return np.zeros((0, D)), [], 0.0
    pts = np.asarray(candidates, dtype=float).reshape(-1, D)
    if len(pts) == 0:
        return pts, [], 1.0
    coef, labels, _ = _fit(pts, orders, rows_a, rows_b, target, d)
    ops = _operators_from_fit(len(pts), coef, labels, D)
    pts, ops = _prune(pts, ops)
    if not ops:
        return pts, ops, 1.0
    ops, r = _fit_with_terms(pts, ops, rows_a, rows_b, target, d)
    if polish and np.linalg.norm(r) > 1e-13 * norm:
        pts = _polish(pts, ops, rows_a, rows_b, target, d)
        ops, r = _fit_with_terms(pts, ops, rows_a, rows_b, target, d)
        pts, ops = _prune(pts, ops)
        ops, r = _fit_with_terms(pts, ops, rows_a, rows_b, target, d)
    return pts, ops, float(np.linalg.norm(r) / norm)


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Single-linkage clusters of complex numbers."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        hits = [g for g in groups if any(abs(v - values[j]) <= tol for j in g)]
        merged = [i] + [j for g in hits for j in g]
        groups = [g for g in groups if g not in hits] + [merged]
    return [values[g] for g in groups]


def _to_real(z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(z)
    out = np.empty((z.shape[0], 2 * z.shape[1]))
    out[:, 0::2] = z.real
    out[:, 1::2] = z.imag
    return out


# --------------------------------------------------------------------------- 1-D


def _recover_1d(W: Weight, m_bound: int, order_bound: int, cluster_tol: float = CLUSTER_TOL) -> RecoveryReport:
    K = 2 * m_bound + 1
    L = (order_bound + 2) * (m_bound + 1) + m_bound
    table = MomentTable.from_weight(W, K, L)
    N_rank = 2 * m_bound
    A = W.bi_moment_matrix(np.arange(N_rank + 1).reshape(-1, 1), np.arange(N_rank + 1).reshape(-1, 1))
    if table.scale == 0:
        return RecoveryReport(np.zeros((0, 1), dtype=complex), [], 0, np.zeros(N_rank + 1), 0.0)
    rank, sv = numerical_rank(A, RANK_EPS)
    if rank > m_bound:
        return RecoveryReport(np.zeros((0, 1), dtype=complex), [], rank, sv, 1.0)

    roots, stages = [], []
    T = table
    for _ in range(order_bound + 1):
        if T.is_null():
            break
        h = _minimal_null_polynomial(T, m_bound, NULL_RATIO)
        if h is None:
            break
        stages.append(h)
        roots.extend(np.conj(h.roots()))
        if T.cols - h.degree < 1:
            break
        T = reduce_moments(T, h)

    clusters = _cluster(np.array(roots, dtype=complex), cluster_tol)
    centers = np.array([c.mean() for c in clusters], dtype=complex)
    orders = [max(order_bound, len(c) - 1) for c in clusters]
    pts, ops, resid = _fit_support(_to_real(centers.reshape(-1, 1)), orders, W, 2 * m_bound)
    support = (pts[:, 0] + 1j * pts[:, 1]).reshape(-1, 1)
    return RecoveryReport(support, ops, rank, sv, resid, stages)


def recover_1d(W: Weight, m_bound: int, order_bound: int = 0, cluster_tol: float = CLUSTER_TOL) -> RecoveryReport:
    """Recover ``F = sum_q L_q delta_{z_q}`` on C^1 from its moments.

    ``m_bound`` bounds the rank (and so the number of points); ``order_bound``
    bounds the derivative order, giving at most ``order_bound + 1`` reduction
    stages.  Raises :class:`RecoveryError` when the relative moment residual
    of the reconstruction exceeds 1e-6.
    """
    if m_bound < 1 or order_bound < 0:
        raise ValueError("need m_bound >= 1 and order_bound >= 0")
    if not W.ambient.is_complex or W.ambient.dim != 1:
        raise DimensionError("recover_1d needs a weight on C^1")
    report = _recover_1d(W, m_bound, order_bound, cluster_tol)
    if report.rank_used > m_bound:
        raise RecoveryError(
            f"recovery failed: weight not point-supported at given bounds (rank {report.rank_used} > {m_bound})",
            report,
        )
    if report.moment_residual > FAIL_RESIDUAL:
        raise RecoveryError(
            f"recovery failed: weight not point-supported at given bounds (residual {report.moment_residual:.3g})",
            report,
        )
    return report


# --------------------------------------------------------------------------- d >= 2


def reconstruct(report: RecoveryReport, d: int | None = None) -> PointDistribution:
    """The weight described by a recovery report."""
    d = report.support.shape[1] if d is None else d
    return PointDistribution.from_complex(report.support.reshape(-1, d), report.operators) if len(
        report.support
    ) else PointDistribution(Ambient.complex(d), np.zeros((0, 2 * d)), ())


def _attempt_multid(W: Weight, m_bound: int, order_bound: int, cluster_tol: float):
    d = W.ambient.dim
    per_coord = []
    for j in range(d):
        marg = marginal(W, j)
        rep = _recover_1d(marg, m_bound, order_bound, cluster_tol)
        if rep.moment_residual > FAIL_RESIDUAL:
            return None
        per_coord.append(rep.support[:, 0])
    grid = np.array(list(itertools.product(*per_coord)), dtype=complex).reshape(-1, d)
    pts, ops, resid = _fit_support(_to_real(grid) if len(grid) else np.zeros((0, 2 * d)), [order_bound] * len(grid), W, 2 * m_bound)
    return pts, ops, resid


def recover_multid(
    W: Weight,
    m_bound: int,
    order_bound: int = 0,
    seed: int = 0,
    max_retries: int = 3,
    cluster_tol: float = CLUSTER_TOL,
) -> RecoveryReport:
    """Recover a point-supported weight on C^d, ``d >= 2``.

    Each coordinate marginal is recovered in 1-D, candidates are the
    Cartesian product of the marginal supports, and operators are fitted on
    the full moment table.  If a projection loses atoms (masses cancelling),
    a seeded random unitary change of coordinates is applied and the
    recovered support is mapped back.
    """
    if not W.ambient.is_complex or W.ambient.dim < 2:
        raise DimensionError("recover_multid needs a weight on C^d with d >= 2")
    if isinstance(W, Density):
        raise RecoveryError("recovery failed: densities are not point-supported")
    d = W.ambient.dim
    rng = np.random.default_rng(seed)
    N_rank = 2 * m_bound
    labels = np.array(graded_lex(d, N_rank), dtype=int)
    rank, sv = numerical_rank(W.bi_moment_matrix(labels, labels), RANK_EPS)
    best = None
    for attempt in range(max_retries + 1):
        if attempt == 0:
            U = np.eye(d, dtype=complex)
            Wt = W
        else:
            U = unitary_group.rvs(d, random_state=rng)
            Wt = pushforward(W, unitary_to_real(U), W.ambient)
        out = _attempt_multid(Wt, m_bound, order_bound, cluster_tol)
        if out is None:
            continue
        pts, ops, resid = out
        if best is None or resid < best[2]:
            best = (pts, ops, resid, U, attempt)
        if resid <= FAIL_RESIDUAL:
            break
    if best is None:
        raise RecoveryError("recovery failed: no coordinate projection could be recovered")
    pts, ops, resid, U, attempt = best
    if attempt:
        back = pushforward(PointDistribution(W.ambient, pts, tuple(ops)), unitary_to_real(U.conj().T), W.ambient)
        pts, ops = back.points, list(back.operators)
    support = pts[:, 0::2] + 1j * pts[:, 1::2]
    report = RecoveryReport(support, ops, rank, sv, resid, [], retries=attempt)
    if resid > FAIL_RESIDUAL:
        raise RecoveryError(f"recovery failed after {max_retries} retries (residual {resid:.3g})", report)
    return report


# --------------------------------------------------------------------------- Cauchy transform


def cauchy_transform(W: Weight, z: complex, min_distance: float = 1e-6) -> complex:
    """``G(z) = <W, 1/(pi (z - w))>``, the dbar-antiderivative of ``W`` away from its support."""
    if not W.ambient.is_complex or W.ambient.dim != 1:
        raise DimensionError("Cauchy transform needs a weight on C^1")
    z = complex(z)
    if isinstance(W, (Atomic, PointDistribution)):
        w = W.points[:, 0] + 1j * W.points[:, 1]
        if len(w) and np.min(np.abs(z - w)) <= min_distance:
            raise WeightError(f"Cauchy transform evaluated within {min_distance} of the support")
        if isinstance(W, Atomic):
            return complex(np.sum(W.masses / (np.pi * (z - w))))
        total = 0j
        for wq, Lq in zip(w, W.operators):
            # phi(w) = 1/(pi (z - w)) is holomorphic: only pure d/dw terms survive
            for (s, t), c in Lq.wirtinger_symbol().terms.items():
                if t[0] == 0:
                    k = s[0]
                    total += c * math.factorial(k) / (np.pi * (z - wq) ** (k + 1))
        return complex(total)
    if isinstance(W, Density):
        lo, hi = W.lo, W.hi
        dx = max(lo[0] - z.real, 0, z.real - hi[0])
        dy = max(lo[1] - z.imag, 0, z.imag - hi[1])
        if np.hypot(dx, dy) <= min_distance:
            raise WeightError("Cauchy transform of a density evaluated on or near its box")
        x, w = W.nodes()
        wz = x[:, 0] + 1j * x[:, 1]
        return complex(np.sum(w * W.density(x) / (np.pi * (z - wz))))
    raise WeightError(f"Cauchy transform of {type(W).__name__} is not supported")
