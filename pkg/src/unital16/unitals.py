"""Unital predicates, stabilizer orders and isomorphism classification."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import isqrt
from typing import Iterable, Sequence

import numpy as np

from .canon import DEFAULT_NODE_BUDGET, Certificate, automorphism_group
from .incidence import IncidenceStructure, dual, to_incidence_graph
from .permgroup import Permutation

__all__ = [
    "PROVENANCES",
    "UnitalRecord",
    "UnitalClass",
    "point_set",
    "unital_q",
    "line_counts",
    "is_unital",
    "is_line_unital",
    "stabilizer_order",
    "unital_invariants",
    "tangent_secant_counts",
    "make_record",
    "classify_nonisomorphic",
    "cross_representation_match",
]

PROVENANCES = ("appendix", "search", "constructed")


def point_set(plane: IncidenceStructure, points: Iterable[int]) -> tuple:
    """Sorted, duplicate-free tuple of 0-based point indices."""
    pts = sorted(int(x) for x in points)
    if len(set(pts)) != len(pts):
        raise ValueError("point set has repeated points")
    if pts and (pts[0] < 0 or pts[-1] >= plane.v):
        raise IndexError(f"point outside [0, {plane.v})")
    return tuple(pts)


def unital_q(plane: IncidenceStructure) -> int:
    """``q`` with plane order ``q**2``; raises ``ValueError`` otherwise."""
    n = plane.order
    if n is None:
        raise ValueError(f"{plane.name or 'structure'} is not a projective plane")
    q = isqrt(n)
    if q * q != n:
        raise ValueError(f"plane order {n} is not a perfect square")
    return q


def line_counts(plane: IncidenceStructure, points: Sequence[int]) -> np.ndarray:
    """Number of points of ``points`` on each line."""
    m = plane.incidence_matrix()
    return m[:, list(points)].sum(axis=1)


def is_unital(plane: IncidenceStructure, points: Iterable[int]) -> bool:
    q = unital_q(plane)
    pts = point_set(plane, points)
    if len(pts) != q ** 3 + 1:
        return False
    c = line_counts(plane, pts)
    return bool(np.all((c == 1) | (c == q + 1)))


def is_line_unital(plane: IncidenceStructure, lines: Iterable[int]) -> bool:
    """Unital condition with the roles of points and lines exchanged."""
    return is_unital(dual(plane), lines)


def tangent_secant_counts(plane: IncidenceStructure,
                          points: Iterable[int]) -> tuple:
    pts = point_set(plane, points)
    if not is_unital(plane, pts):
        raise ValueError("not a unital of this plane")
    c = line_counts(plane, pts)
    return int(np.sum(c == 1)), int(np.sum(c > 1))


def unital_invariants(plane: IncidenceStructure, points: Iterable[int],
                      self_dual: bool = False,
                      budget: int = DEFAULT_NODE_BUDGET) -> tuple:
    """``(stabilizer order, certificate, canonical labeling)`` from one
    search over the marked incidence graph."""
    g = to_incidence_graph(plane, point_set(plane, points), self_dual=self_dual)
    res = automorphism_group(g, budget, canonical=True)
    return res.order, res.certificate, res.canonical_labeling


def stabilizer_order(plane: IncidenceStructure, points: Iterable[int],
                     self_dual: bool = False,
                     budget: int = DEFAULT_NODE_BUDGET) -> int:
    """Order of the automorphism group of the incidence graph with
    ``points`` marked.

    By default points and lines carry different colors, so the result is the
    collineation stabilizer.  ``self_dual=True`` also admits dualities.
    """
    g = to_incidence_graph(plane, point_set(plane, points), self_dual=self_dual)
    return automorphism_group(g, budget).order


@dataclass(frozen=True)
class UnitalRecord:
    plane_name: str
    points: tuple
    stabilizer_order: int
    certificate: Certificate
    provenance: str = "constructed"
    self_dual: bool = False

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")


def make_record(plane: IncidenceStructure, points: Iterable[int],
                provenance: str = "constructed", self_dual: bool = False,
                budget: int = DEFAULT_NODE_BUDGET) -> UnitalRecord:
    pts = point_set(plane, points)
    if not is_unital(plane, pts):
        raise ValueError("not a unital of this plane")
    order, cert, _ = unital_invariants(plane, pts, self_dual, budget)
    return UnitalRecord(plane.name, pts, order, cert, provenance, self_dual)


def cross_representation_match(u1: UnitalRecord, u2: UnitalRecord) -> bool:
    """Same plane and unital up to relabeling, whatever the source encoding."""
    return u1.self_dual == u2.self_dual and u1.certificate == u2.certificate


@dataclass(frozen=True)
class UnitalClass:
    """One isomorphism class.

    ``members`` index into the classified list; ``witnesses[i]`` is a
    collineation (point permutation) carrying the first member onto
    ``members[i]``.  Under the self-dual coloring the witnesses are full
    incidence-graph permutations instead.
    """
    certificate: Certificate
    stabilizer_order: int
    members: tuple
    witnesses: tuple


def _invariants_job(args):
    plane, pts, self_dual, budget = args
    return unital_invariants(plane, pts, self_dual, budget)


def classify_nonisomorphic(plane: IncidenceStructure, sets, self_dual: bool = False,
                           budget: int = DEFAULT_NODE_BUDGET,
                           workers: int = 1) -> list:
    """Partition ``sets`` by certificate of the marked incidence graph.

    Classes are sorted by (stabilizer order, certificate).
    """
    sets = [point_set(plane, s) for s in sets]
    for i, s in enumerate(sets):
        if not is_unital(plane, s):
            raise ValueError(f"set {i} is not a unital of this plane")
    jobs = [(plane, s, self_dual, budget) for s in sets]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            inv = list(ex.map(_invariants_job, jobs))
    else:
        inv = [_invariants_job(j) for j in jobs]
    groups = {}
    for i, (order, cert, lab) in enumerate(inv):
        groups.setdefault(cert, (order, []))[1].append(i)
    v = plane.v
    out = []
    for cert, (order, members) in groups.items():
        rep_lab = inv[members[0]][2]
        wit = []
        for i in members:
            g = inv[i][2].inverse() * rep_lab
            wit.append(g if self_dual else Permutation(g.images[:v]))
        out.append(UnitalClass(cert, order, tuple(members), tuple(wit)))
    out.sort(key=lambda c: (c.stabilizer_order, c.certificate.data))
    return out
