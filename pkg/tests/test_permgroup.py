import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_group_order, pgammal3_order
from unital16.finite_geometry import build_pg2, collineation, hermitian_unital
from unital16.incidence import to_incidence_graph
from unital16.permgroup import (Permutation, ResourceError, SeedConfig,
                                backtrack_automorphism_order, enumerate_automorphisms,
                                membership, orbits, random_element, schreier_sims,
                                setwise_stabilizer_oracle, subgroup_seeds)


def closure(gens, n):
    """All elements by breadth-first multiplication (small groups only)."""
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                x = tuple(g[h[i]] for i in range(n))
                if x not in seen:
                    seen.add(x)
                    nxt.append(x)
        frontier = nxt
    return seen


def test_permutation_basics():
    p = Permutation.from_cycles(5, [(0, 1, 2)])
    q = Permutation.from_cycles(5, [(3, 4)])
    assert (p * q)(3) == 4 and (p * q)(0) == 1
    assert p.order() == 3 and (p * q).order() == 6
    assert (p ** 3).is_identity() and p ** -1 == p.inverse()
    assert p * p.inverse() == Permutation.identity(5)
    assert sorted(map(tuple, p.cycles())) == [(0, 1, 2), (3,), (4,)]


def test_composition_convention():
    p = Permutation([1, 2, 0])
    q = Permutation([0, 2, 1])
    assert all((p * q)(x) == p(q(x)) for x in range(3))


@pytest.mark.parametrize("n", [1, 5, 8])
def test_symmetric_group(n):
    gens = [Permutation.from_cycles(n, [tuple(range(n))])] if n > 1 else []
    if n > 2:
        gens.append(Permutation.from_cycles(n, [(0, 1)]))
    assert schreier_sims(gens, n).order == math.factorial(n)


def test_cyclic_and_trivial():
    assert schreier_sims([Permutation.from_cycles(7, [range(7)])], 7).order == 7
    assert schreier_sims([], 4).order == 1


def test_dihedral_membership():
    r = Permutation.from_cycles(6, [range(6)])
    s = Permutation([0, 5, 4, 3, 2, 1])
    c = schreier_sims([r, s], 6)
    assert c.order == 12
    assert membership(c, r * s * r)
    assert not membership(c, Permutation.from_cycles(6, [(0, 1)]))
    with pytest.raises(ValueError):
        membership(c, Permutation.identity(5))


random_gens = st.lists(st.permutations(list(range(7))), min_size=1, max_size=3)


@settings(max_examples=60, deadline=None)
@given(random_gens)
def test_order_matches_closure(gens):
    c = schreier_sims(gens, 7)
    elems = closure([tuple(g) for g in gens], 7)
    assert c.order == len(elems)
    for g in list(elems)[:20]:
        assert membership(c, Permutation(g))


@settings(max_examples=30, deadline=None)
@given(random_gens, st.integers(0, 10 ** 6))
def test_random_elements_are_members(gens, seed):
    c = schreier_sims(gens, 7)
    assert membership(c, random_element(c, seed))


def test_elements_enumeration():
    gens = [(1, 2, 0, 3), (0, 1, 3, 2)]
    c = schreier_sims(gens, 4)
    assert {e.images for e in c.elements()} == closure(gens, 4)


def test_orbits():
    assert orbits([(1, 0, 2, 4, 3)], 5) == [[0, 1], [2], [3, 4]]


def test_seeded_chain_is_deterministic():
    gens = [random.Random(1).sample(range(30), 30) for _ in range(2)]
    a = schreier_sims(gens, 30, seed=5)
    b = schreier_sims(gens, 30, seed=5)
    assert a.base == b.base and a.order == b.order


@pytest.mark.parametrize("q", [2, 3])
def test_backtrack_oracle_small_planes(q):
    g = to_incidence_graph(build_pg2(q))
    expect = pgammal3_order(q)
    assert backtrack_automorphism_order(g.neighbors, g.colors) == expect
    assert len(list(enumerate_automorphisms(g.neighbors, g.colors))) == expect


def test_backtrack_oracle_vs_brute():
    nb = [(1, 4), (0, 2), (1, 3), (2, 4), (3, 0), ()]
    colors = [0, 0, 0, 0, 0, 1]
    assert backtrack_automorphism_order(nb, colors) == brute_group_order(nb, colors) == 10


def test_setwise_oracle_hermitian_pg4():
    s = build_pg2(4)
    gens = [collineation(4, [[0, 1, 0], [0, 0, 1], [1, 0, 0]]),
            collineation(4, [[1, 1, 0], [0, 1, 0], [0, 0, 1]]),
            collineation(4, [[2, 0, 0], [0, 1, 0], [0, 0, 1]]),
            collineation(4, [[1, 0, 0], [0, 1, 0], [0, 0, 1]], frobenius=1)]
    c = schreier_sims(gens, s.v)
    assert c.order == pgammal3_order(4)
    assert setwise_stabilizer_oracle(c, hermitian_unital(2)) == 432
    assert setwise_stabilizer_oracle(c, []) == c.order
    with pytest.raises(ResourceError):
        setwise_stabilizer_oracle(c, [0], max_order=10)


def test_subgroup_seeds():
    g = Permutation.from_cycles(6, [range(6)])
    c = schreier_sims([g], 6)
    seeds = subgroup_seeds(c, SeedConfig(seed=1, samples=50))
    orders = {schreier_sims(s, 6).order for s in seeds}
    assert {2, 3} <= orders
    assert seeds == subgroup_seeds(c, SeedConfig(seed=1, samples=50))
    assert subgroup_seeds(schreier_sims([], 6)) == [[]]
    assert len(subgroup_seeds(c, SeedConfig(max_seeds=1))) == 1
    keys = [tuple(sorted(x.images for x in s)) for s in seeds]
    assert len(keys) == len(set(keys))
