import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import pair_coverage
from unital16.finite_geometry import build_pg2, hermitian_unital
from unital16.incidence import (MAX_VIOLATIONS, ColoredGraph, IncidenceStructure, dual,
                                line_profile, relabel_structure, to_incidence_graph,
                                validate_design)

FANO = [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)]


def test_structure_rejects_bad_blocks():
    with pytest.raises(ValueError):
        IncidenceStructure(3, [(0, 0, 1)])
    with pytest.raises(ValueError):
        IncidenceStructure(3, [(0, 3)])


def test_fano_valid():
    r = validate_design(IncidenceStructure(7, FANO))
    assert r.valid and r.symmetric and r.k == 3 and r.n_violations == 0


def test_violations_listed():
    blocks = list(FANO)
    blocks[0] = (0, 1, 3)
    r = validate_design(IncidenceStructure(7, blocks))
    assert not r.valid
    cov = pair_coverage(blocks, 7)
    expect = sorted([(p, cov.get(p, 0)) for p in
                     [(i, j) for i in range(7) for j in range(i + 1, 7)] if cov.get(p, 0) != 1])
    assert sorted(r.violations) == expect
    assert "violation" in r.summary()


def test_wrong_block_size_reported():
    r = validate_design(IncidenceStructure(7, FANO[:-1] + [(2, 4)]), k=3)
    assert (("block", 6), 2) in r.violations


def test_violation_cap():
    s = IncidenceStructure(100, [range(100)] * 2)
    r = validate_design(s, k=100)
    assert r.n_violations == 4950 and len(r.violations) == MAX_VIOLATIONS and r.truncated


def test_pg16_design_and_dual():
    s = build_pg2(16)
    r = validate_design(s, 2, 17, 1)
    assert r.valid and r.symmetric and (r.v, r.b) == (273, 273)
    assert dual(s) == s  # point i <-> line i is a polarity


def test_dual_requires_square():
    with pytest.raises(ValueError):
        dual(IncidenceStructure(3, [(0, 1)]))


def test_dual_involution():
    s = IncidenceStructure(7, FANO)
    assert dual(dual(s)) == s


def test_incidence_graph_colors():
    s = IncidenceStructure(7, FANO)
    g = to_incidence_graph(s)
    assert g.n == 14 and g.colors == (0,) * 7 + (1,) * 7 and g.is_bipartite()
    g = to_incidence_graph(s, marked=[0, 1, 2])
    assert g.colors[:7] == (1, 1, 1, 0, 0, 0, 0) and set(g.colors[7:]) == {2}
    g = to_incidence_graph(s, self_dual=True)
    assert set(g.colors) == {0}
    g = to_incidence_graph(s, marked=range(7))
    assert g.colors == (0,) * 7 + (1,) * 7
    with pytest.raises(IndexError):
        to_incidence_graph(s, marked=[7])


def test_line_profile_hermitian():
    s = build_pg2(16)
    assert line_profile(s, hermitian_unital(4)) == {1: 65, 5: 208}
    assert line_profile(s, []) == {0: 273}


def test_colored_graph_checks():
    with pytest.raises(ValueError):
        ColoredGraph(3, [(0, 0)])
    with pytest.raises(ValueError):
        ColoredGraph(3, [(0, 1)], colors=[0, 2, 2])
    g = ColoredGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert g.has_edge(0, 1) and not g.has_edge(0, 2) and g.degree(0) == 2
    assert g.is_automorphism([1, 2, 3, 0]) and not g.is_automorphism([0, 2, 1, 3])
    assert ColoredGraph.from_neighbors(g.neighbors) == g


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(7))))
def test_relabel_preserves_validity(perm):
    s = relabel_structure(IncidenceStructure(7, FANO), perm)
    assert validate_design(s).valid


def test_relabel_blocks():
    s = IncidenceStructure(7, FANO)
    bp = list(range(7))
    random.Random(3).shuffle(bp)
    t = relabel_structure(s, list(range(7)), bp)
    assert sorted(t.blocks) == sorted(s.blocks) and t.blocks[bp[0]] == s.blocks[0]
