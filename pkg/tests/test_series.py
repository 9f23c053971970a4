import random

import pytest
from hypothesis import given, settings, strategies as st

from kdescent.errors import ParameterError
from kdescent.exact import build_triangle
from kdescent.series import (
    TruncatedSeries2D, build_series, identity_polynomials, identity_residual, poly, verify_gen_identity,
)


def dense(cap, seed):
    rng = random.Random(seed)
    return poly(cap, {(i, d - i): rng.randint(-50, 50) for d in range(cap + 1) for i in range(d + 1)})


coeff_dicts = st.dictionaries(
    st.tuples(st.integers(0, 6), st.integers(0, 6)), st.integers(-10**20, 10**20), max_size=10,
)


@settings(max_examples=30, deadline=None)
@given(coeff_dicts, coeff_dicts, coeff_dicts)
def test_ring_axioms(a, b, c):
    cap = 8
    A, B, C = poly(cap, a), poly(cap, b), poly(cap, c)
    assert A * B == B * A
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C
    assert A - A == TruncatedSeries2D.zero(cap)


def test_dense_products_commute():
    A, B = dense(10, 1), dense(10, 2)
    assert A * B == B * A


def test_multiplication_respects_cap():
    x = poly(3, {(1, 0): 1})
    assert (x * x * x).coeff(3, 0) == 1
    assert (x * x * x * x) == TruncatedSeries2D.zero(3)
    with pytest.raises(ParameterError):
        x.coeff(2, 2)


def test_build_series_examples():
    s = build_series(build_triangle(3, 30), 24)
    assert s.T.coeff(1, 1) == 1
    assert s.T.coeff(3, 2) == 0
    assert [s.F.coeff(0, n) for n in range(1, 8)] == [1, 2, 5, 17, 70, 349, 2017]
    assert [s.G.coeff(n, n) for n in range(1, 7)] == [1, 1, 3, 9, 39, 189]


def test_substituted_g_matches_diagonal():
    tri = build_triangle(3, 30)
    s = build_series(tri, 24)
    for n in range(1, 13):
        assert s.G.coeff(n, n) == tri.entry(n + 1, n + 1)
        assert s.G.coeff(n, n - 1) == 0 if n >= 1 else True


def test_lowest_degree_hand_expansion():
    s = build_series(build_triangle(3, 30), 24)
    mult, P, Q, R = identity_polynomials(24)
    lhs = s.T * mult
    rhs = P * s.F + Q * s.G + R
    assert lhs.coeff(1, 1) == rhs.coeff(1, 1) == -1
    assert lhs.coeff(2, 1) == rhs.coeff(2, 1) == 3


@pytest.mark.parametrize("N", [8, 12, 16, 24])
def test_identity_holds(N):
    assert verify_gen_identity(N) == 0


def test_identity_holds_through_the_cap():
    chk = identity_residual(24)
    assert chk.residual.nonzero_locations(24) == []


def test_perturbation_is_detected():
    tri = build_triangle(3, 20)
    s = build_series(tri, 16)
    mult, P, Q, R = identity_polynomials(16)
    res = (s.T + poly(16, {(2, 5): 1})) * mult - (P * s.F + Q * s.G + R)
    assert res.max_abs(12) != 0


def test_guards():
    with pytest.raises(ParameterError):
        verify_gen_identity(7)
    with pytest.raises(ParameterError):
        build_series(build_triangle(3, 5), 24)
    with pytest.raises(ParameterError):
        build_series(build_triangle(4, 30), 24)


def test_csv_dump():
    text = poly(2, {(1, 1): 7}).to_csv()
    assert text.splitlines()[0] == "i,j,coefficient"
    assert "1,1,7" in text
