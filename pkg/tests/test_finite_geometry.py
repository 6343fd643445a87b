import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import hermitian_oracle, pair_coverage, pg2_oracle, poly_add, poly_mul
from unital16.finite_geometry import (GF, SUPPORTED_ORDERS, ConfigurationError, FieldElement,
                                      build_pg2, collineation, field_ops, hermitian_unital,
                                      pg2_points, point_index, random_collineation)
from unital16.incidence import validate_design

FIELDS = [2, 3, 4, 5, 7, 8, 9, 13, 16]


@pytest.mark.parametrize("q", FIELDS)
def test_tables_match_polynomial_arithmetic(q):
    f = GF(q)
    for a in range(q):
        for b in range(q):
            assert f.mul[a][b] == poly_mul(a, b, q)
            assert f.add[a][b] == poly_add(a, b, q)


@pytest.mark.parametrize("q", FIELDS)
def test_field_axioms(q):
    f = GF(q)
    for a in range(1, q):
        assert f.mul[a][f.inv[a]] == 1
        assert f.pow(a, q - 1) == 1
    for a in range(q):
        assert f.add[a][f.neg[a]] == 0


def test_frobenius_is_additive_in_gf16():
    f = GF(16)
    for a in range(16):
        for b in range(16):
            assert f.pow(f.add[a][b], 2) == f.add[f.pow(a, 2)][f.pow(b, 2)]


def test_field_is_cached():
    assert GF(16) is GF(16)


def test_unsupported_order():
    with pytest.raises(ConfigurationError):
        GF(6)
    with pytest.raises(ConfigurationError):
        build_pg2(10)


def test_field_element_ops():
    a, b = FieldElement(3, 16), FieldElement(7, 16)
    assert field_ops(a, b, "add") == a + b
    assert (a * b) / b == a
    assert field_ops(a, None, "inv") * a == FieldElement(1, 16)
    assert field_ops(a, 15, "pow") == FieldElement(1, 16)
    assert a - a == FieldElement(0, 16)
    with pytest.raises(ZeroDivisionError):
        FieldElement(0, 4).inverse()
    with pytest.raises(ValueError):
        a + FieldElement(1, 4)
    with pytest.raises(ValueError):
        field_ops(a, b, "xor")


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([4, 8, 9, 16]), st.data())
def test_distributivity(q, data):
    x, y, z = (FieldElement(data.draw(st.integers(0, q - 1)), q) for _ in range(3))
    assert x * (y + z) == x * y + x * z


@pytest.mark.parametrize("q", [2, 3, 4, 8, 9, 16])
def test_pg2_matches_oracle(q):
    pts, lines = pg2_oracle(q)
    s = build_pg2(q)
    assert list(pg2_points(q)) == pts
    assert [frozenset(b) for b in s.blocks] == lines


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_pg2_is_projective_plane(q):
    s = build_pg2(q)
    n = q * q + q + 1
    assert s.v == s.b == n and s.block_sizes == {q + 1} and s.order == q
    cov = pair_coverage(s.blocks, s.v)
    assert len(cov) == n * (n - 1) // 2 and set(cov.values()) == {1}
    assert validate_design(s).symmetric


def test_point_index_normalizes():
    f = GF(16)
    assert point_index(16, (0, 0, 5)) == point_index(16, (0, 0, 1))
    t = (3, 7, 9)
    s = [f.mul[6][c] for c in t]
    assert point_index(16, s) == point_index(16, t)


@pytest.mark.parametrize("q0", [2, 3, 4])
def test_hermitian_matches_oracle(q0):
    h = hermitian_unital(q0)
    assert list(h) == hermitian_oracle(q0)
    assert len(h) == q0 ** 3 + 1


@pytest.mark.parametrize("q", [4, 9, 16])
def test_random_collineation_preserves_lines(q):
    s = build_pg2(q)
    lines = set(s.blocks)
    g = random_collineation(q, random.Random(q))
    assert sorted(g) == list(range(s.v))
    assert {tuple(sorted(g[x] for x in blk)) for blk in s.blocks} == lines


def test_singular_matrix_rejected():
    with pytest.raises(ValueError):
        collineation(4, [[1, 0, 0], [1, 0, 0], [0, 0, 1]])


def test_supported_orders_sorted():
    assert list(SUPPORTED_ORDERS) == sorted(SUPPORTED_ORDERS) and 16 in SUPPORTED_ORDERS
