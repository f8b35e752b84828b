import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finrank.polyalg import (
    BiPolynomial,
    DimensionError,
    RealPolynomial,
    UniPolynomial,
    apply_diff,
    complexify,
    graded_lex,
    multi_factorial,
    multiply,
    vandermonde_poly,
)

z = lambda d, j: BiPolynomial.z(d, j)  # noqa: E731
zb = lambda d, j: BiPolynomial.zbar(d, j)  # noqa: E731


def test_graded_lex_order():
    assert graded_lex(2, 2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert len(graded_lex(3, 4)) == math.comb(7, 3)


def test_multiply_examples():
    assert multiply(z(1, 0), zb(1, 0)) == BiPolynomial(1, {((1,), (1,)): 1})
    lhs = multiply(z(2, 0) - z(2, 1), z(2, 0) + z(2, 1))
    assert lhs == z(2, 0) ** 2 - z(2, 1) ** 2
    assert multiply(z(2, 0), BiPolynomial(2)).is_zero()


def test_multiply_dimension_mismatch():
    with pytest.raises(DimensionError):
        multiply(z(1, 0), z(2, 0))


def test_no_zero_coefficients_stored():
    p = z(1, 0) - z(1, 0)
    assert p.is_zero() and len(p) == 0
    assert BiPolynomial(1, {((1,), (0,)): 0.0}).is_zero()


def test_apply_diff_examples():
    op = z(2, 0) - z(2, 1)
    assert apply_diff(op, op) == BiPolynomial.constant(2, 2)
    assert apply_diff(z(2, 0), z(2, 1)).is_zero()
    V = vandermonde_poly(2)
    assert apply_diff(V, V).constant_term() == 2


def test_apply_diff_family_mismatch():
    with pytest.raises(DimensionError):
        apply_diff(z(1, 0), RealPolynomial.x(1, 0))


def test_complexify_examples():
    x1, x2 = RealPolynomial.x(2, 0), RealPolynomial.x(2, 1)
    assert complexify(z(1, 0)) == x1 + 1j * x2
    assert complexify(z(1, 0) * zb(1, 0)) == x1**2 + x2**2
    assert complexify(z(1, 0) ** 2) == x1**2 - x2**2 + 2j * x1 * x2


def test_vandermonde_examples():
    assert vandermonde_poly(1) == BiPolynomial.constant(1)
    assert vandermonde_poly(2) == z(2, 0) - z(2, 1)
    # oracle: expand (z1 - z2)(z1 - z3)(z2 - z3) by brute force over the six
    # permutations, V = sum sign(s) z^(s applied to (2, 1, 0))
    V3 = vandermonde_poly(3)
    oracle = {}
    for perm in itertools.permutations(range(3)):
        sign = np.linalg.det(np.eye(3)[list(perm)])
        alpha = [0, 0, 0]
        for pos, var in enumerate(perm):
            alpha[var] = 2 - pos
        oracle[(tuple(alpha), (0, 0, 0))] = round(sign)
    assert len(V3) == 6
    assert V3.terms == oracle
    assert V3.bidegree == (3, 0)
    with pytest.raises(ValueError):
        vandermonde_poly(0)


def test_vandermonde_degree_is_n_choose_2():
    for n in range(1, 5):
        assert vandermonde_poly(n).degree == n * (n - 1) // 2


def test_self_pairing_sum_of_squares():
    # [V(D) V](0) = sum_k C_k^2 k!, with C_k = +-1 on the N! permutation terms
    for n in (2, 3):
        V = vandermonde_poly(n)
        oracle = sum(abs(c) ** 2 * multi_factorial(a) for (a, _), c in V.terms.items())
        assert apply_diff(V, V).constant_term() == oracle
    assert apply_diff(vandermonde_poly(3), vandermonde_poly(3)).constant_term() == 12


def test_conj_and_symmetry():
    p = (1 + 2j) * z(2, 0) * zb(2, 1)
    assert p.conj() == (1 - 2j) * zb(2, 0) * z(2, 1)
    assert (z(2, 0) + z(2, 1)).is_symmetric()
    assert not vandermonde_poly(2).is_symmetric()


def test_bipolynomial_evaluation():
    p = z(1, 0) ** 2 * zb(1, 0) + 3
    w = 0.3 - 0.4j
    assert np.isclose(p(np.array([[w]]))[0], w**2 * np.conj(w) + 3)


def test_canonical_string():
    p = z(1, 0) + 2 * zb(1, 0) + 1
    assert str(p) == str(BiPolynomial(1, dict(reversed(list(p.terms.items())))))


def test_unipolynomial_roots_and_deflation():
    h = UniPolynomial([2, -3, 1])  # (w-1)(w-2)
    assert np.allclose(np.sort(h.roots().real), [1, 2])
    assert UniPolynomial([1, 2, 0, 0]).degree == 1
    tiny = UniPolynomial([-1, 1, 1e-14])
    assert np.allclose(tiny.roots(), [1])
    assert UniPolynomial([]).is_zero()


# ----------------------------------------------------------------- properties

coef = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


@st.composite
def bipolys(draw, d=2, max_deg=3):
    keys = graded_lex(d, max_deg)
    terms = draw(st.dictionaries(st.sampled_from(keys), coef, max_size=4))
    bterms = draw(st.lists(st.sampled_from(keys), min_size=len(terms), max_size=len(terms)))
    return BiPolynomial(d, {(a, b): c for (a, c), b in zip(terms.items(), bterms)})


@st.composite
def int_bipolys(draw, d=2, max_deg=3):
    keys = graded_lex(d, max_deg)
    terms = draw(st.dictionaries(st.tuples(st.sampled_from(keys), st.sampled_from(keys)), st.integers(-5, 5), max_size=4))
    return BiPolynomial(d, terms)


@settings(max_examples=60, deadline=None)
@given(int_bipolys(), int_bipolys(), int_bipolys())
def test_multiply_commutative_associative(p, q, r):
    # integer coefficients keep float arithmetic exact
    assert multiply(p, q) == multiply(q, p)
    assert multiply(multiply(p, q), r) == multiply(p, multiply(q, r))


@settings(max_examples=60, deadline=None)
@given(int_bipolys(d=1), int_bipolys(d=1))
def test_complexify_is_ring_homomorphism(p, q):
    assert complexify(p * q) == complexify(p) * complexify(q)
    assert complexify(p + q) == complexify(p) + complexify(q)


@settings(max_examples=60, deadline=None)
@given(bipolys(d=1), st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_complexify_preserves_values(p, w):
    x = np.array([[w.real, w.imag]])
    assert np.isclose(complexify(p)(x)[0], p(np.array([[w]]))[0], rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=3, max_size=3), st.lists(st.integers(0, 3), min_size=3, max_size=3))
def test_monomial_orthogonality(g, h):
    xg = RealPolynomial.monomial(g)
    xh = RealPolynomial.monomial(h)
    val = apply_diff(xg, xh).constant_term()
    assert val == (multi_factorial(g) if g == h else 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=5))
def test_roots_reconstruct_polynomial(rts):
    c = np.polynomial.polynomial.polyfromroots(rts)
    found = UniPolynomial(c).roots()
    assert len(found) == len(rts)
    # value test is robust to root ordering and multiplicity clusters
    assert np.allclose(np.polynomial.polynomial.polyval(found, c), 0, atol=1e-6 * np.abs(c).max())
