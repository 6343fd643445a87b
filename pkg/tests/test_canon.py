import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_group_order, brute_isomorphic, pgammal3_order
from unital16.canon import are_isomorphic, automorphism_group, canonical_form, refine
from unital16.finite_geometry import build_pg2, hermitian_unital
from unital16.incidence import ColoredGraph, to_incidence_graph
from unital16.permgroup import ResourceError, backtrack_automorphism_order


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return ColoredGraph(10, outer + inner + [(i, i + 5) for i in range(5)])


def test_refine_equitable():
    g = petersen()
    cells = refine(g, [list(range(10))])
    assert cells == [list(range(10))]
    cells = refine(g, [[0], list(range(1, 10))])
    assert sorted(map(len, cells)) == [1, 3, 6]
    with pytest.raises(ValueError):
        refine(g, [[0, 1]])


@pytest.mark.parametrize("graph, order", [
    (petersen(), 120),
    (ColoredGraph(6, [(i, (i + 1) % 6) for i in range(6)]), 12),
    (ColoredGraph(5, []), 120),
    (ColoredGraph(4, [(0, 1), (2, 3)]), 8),
])
def test_known_orders(graph, order):
    res = automorphism_group(graph)
    assert res.order == order
    assert all(graph.is_automorphism(g.images) for g in res.generators)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_plane_orders_match_oracle(q):
    g = to_incidence_graph(build_pg2(q))
    assert automorphism_group(g).order == pgammal3_order(q)
    sd = to_incidence_graph(build_pg2(q), self_dual=True)
    assert automorphism_group(sd).order == 2 * pgammal3_order(q) == \
        backtrack_automorphism_order(sd.neighbors, sd.colors)


def test_plane_pg8_self_dual():
    g = to_incidence_graph(build_pg2(8), self_dual=True)
    assert automorphism_group(g).order == 2 * pgammal3_order(8)


small_graphs = st.integers(1, 7).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]),
             max_size=12),
    st.lists(st.integers(0, 1), min_size=n, max_size=n)))


def _norm_colors(c):
    m = {x: i for i, x in enumerate(sorted(set(c)))}
    return [m[x] for x in c]


@settings(max_examples=80, deadline=None)
@given(small_graphs)
def test_order_matches_brute_force(spec):
    n, edges, colors = spec
    g = ColoredGraph(n, edges, _norm_colors(colors))
    assert automorphism_group(g).order == brute_group_order(g.neighbors, g.colors)


@settings(max_examples=60, deadline=None)
@given(small_graphs, small_graphs)
def test_certificate_decides_isomorphism(a, b):
    g1 = ColoredGraph(a[0], a[1], _norm_colors(a[2]))
    g2 = ColoredGraph(b[0], b[1], _norm_colors(b[2]))
    same = g1.n == g2.n and brute_isomorphic(g1.n, g1.edges(), g1.colors, g2.edges(), g2.colors)
    c1, _ = canonical_form(g1)
    c2, _ = canonical_form(g2)
    assert (c1 == c2) == same
    iso = are_isomorphic(g1, g2)
    assert (iso is not None) == same
    if iso is not None:
        assert g1.relabel(iso.images) == g2


@settings(max_examples=40, deadline=None)
@given(small_graphs, st.randoms())
def test_canonical_labeling_gives_canonical_graph(spec, rnd):
    n, edges, colors = spec
    g = ColoredGraph(n, edges, _norm_colors(colors))
    perm = list(range(n))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    _, l1 = canonical_form(g)
    _, l2 = canonical_form(h)
    assert g.relabel(l1.images) == h.relabel(l2.images)


def test_hermitian_marked_graph_isomorphism():
    s = build_pg2(4)
    h = hermitian_unital(2)
    g = to_incidence_graph(s, marked=h)
    perm = list(range(g.n))
    random.Random(2).shuffle(perm)
    iso = are_isomorphic(g, g.relabel(perm))
    assert iso is not None and g.relabel(iso.images) == g.relabel(perm)
    other = to_incidence_graph(s, marked=list(range(9)))
    assert are_isomorphic(g, other) is None


def test_budget_exhaustion_raises():
    g = to_incidence_graph(build_pg2(4))
    with pytest.raises(ResourceError):
        automorphism_group(g, budget=1)


def test_certificate_layout():
    g = ColoredGraph(3, [(0, 1)], [0, 0, 1])
    cert, lab = canonical_form(g)
    data = cert.data
    assert data[:4] == (3).to_bytes(4, "big") and len(data) == 4 + 2 * 3 + 1
    assert len(cert.hex()) == 2 * len(data) and len(cert.digest()) == 64
