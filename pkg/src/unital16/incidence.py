"""Incidence structures, design validation and incidence graphs."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "IncidenceStructure",
    "ColoredGraph",
    "ValidationReport",
    "validate_design",
    "dual",
    "to_incidence_graph",
    "line_profile",
    "relabel_structure",
    "MAX_VIOLATIONS",
]

MAX_VIOLATIONS = 1000


class IncidenceStructure:
    """``v`` points and a list of blocks, each a sorted tuple of point indices.

    Blocks are sorted on construction; duplicate or out-of-range indices
    raise ``ValueError``.
    """

    __slots__ = ("v", "blocks", "name", "_matrix")

    def __init__(self, v: int, blocks: Iterable[Iterable[int]], name: str = ""):
        self.v = int(v)
        bs = []
        for j, blk in enumerate(blocks):
            b = tuple(sorted(int(x) for x in blk))
            if len(set(b)) != len(b):
                raise ValueError(f"block {j} repeats a point")
            if b and (b[0] < 0 or b[-1] >= self.v):
                raise ValueError(f"block {j} has a point outside [0, {self.v})")
            bs.append(b)
        self.blocks = tuple(bs)
        self.name = name
        self._matrix = None

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> set:
        return {len(b) for b in self.blocks}

    @property
    def order(self) -> int | None:
        """Plane order ``n`` when every block has ``n + 1`` points and
        ``v = n^2 + n + 1``; otherwise ``None``."""
        ks = self.block_sizes
        if len(ks) != 1:
            return None
        n = next(iter(ks)) - 1
        if self.v == n * n + n + 1 == self.b:
            return n
        return None

    def incidence_matrix(self) -> np.ndarray:
        """``b x v`` 0/1 matrix, cached."""
        if self._matrix is None:
            m = np.zeros((self.b, self.v), dtype=np.int32)
            for j, blk in enumerate(self.blocks):
                m[j, list(blk)] = 1
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def point_blocks(self) -> tuple:
        """For each point, the sorted tuple of blocks containing it."""
        pb = [[] for _ in range(self.v)]
        for j, blk in enumerate(self.blocks):
            for x in blk:
                pb[x].append(j)
        return tuple(tuple(x) for x in pb)

    def __eq__(self, other):
        if not isinstance(other, IncidenceStructure):
            return NotImplemented
        return self.v == other.v and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.v, self.blocks))

    def __repr__(self):
        return f"IncidenceStructure(name={self.name!r}, v={self.v}, b={self.b})"


@dataclass(frozen=True)
class ValidationReport:
    v: int
    b: int
    k: int | None
    lam: int
    valid: bool
    symmetric: bool
    violations: list = field(default_factory=list)
    n_violations: int = 0

    @property
    def truncated(self) -> bool:
        return self.n_violations > len(self.violations)

    def summary(self) -> str:
        if self.valid:
            kind = "symmetric " if self.symmetric else ""
            return f"valid {kind}2-({self.v},{self.k},{self.lam}) design, b={self.b}"
        return (f"not a 2-({self.v},{self.k},{self.lam}) design: "
                f"{self.n_violations} violation(s)")


def validate_design(s: IncidenceStructure, t: int = 2, k: int | None = None,
                    lam: int = 1) -> ValidationReport:
    """Check ``s`` against 2-(v, k, lam).

    Violations are listed as ``((i, j), count)`` for point pairs covered the
    wrong number of times, and ``(('block', j), size)`` for blocks of the
    wrong size.  At most ``MAX_VIOLATIONS`` are listed.
    """
    if t != 2:
        raise NotImplementedError("only t = 2 is supported")
    sizes = Counter(len(b) for b in s.blocks)
    if k is None:
        k = sizes.most_common(1)[0][0] if sizes else 0
    violations = []
    n_bad = 0
    for j, blk in enumerate(s.blocks):
        if len(blk) != k:
            n_bad += 1
            if len(violations) < MAX_VIOLATIONS:
                violations.append((("block", j), len(blk)))
    m = s.incidence_matrix()
    pairs = m.T @ m
    iu, ju = np.triu_indices(s.v, 1)
    bad = np.nonzero(pairs[iu, ju] != lam)[0]
    n_bad += len(bad)
    for idx in bad[: max(0, MAX_VIOLATIONS - len(violations))]:
        i, j = int(iu[idx]), int(ju[idx])
        violations.append(((i, j), int(pairs[i, j])))
    valid = n_bad == 0
    symmetric = False
    if valid and s.v == s.b:
        lines = m @ m.T
        off = lines[np.triu_indices(s.b, 1)]
        reps = np.diag(pairs)
        symmetric = bool(np.all(off == lam) and np.all(reps == k))
    return ValidationReport(s.v, s.b, k, lam, valid, symmetric, violations, n_bad)


def dual(s: IncidenceStructure) -> IncidenceStructure:
    """Swap points and blocks: block ``j`` of the result lists the blocks of
    ``s`` through point ``j``."""
    if s.v != s.b:
        raise ValueError(f"dual needs v == b, got v={s.v}, b={s.b}")
    return IncidenceStructure(s.b, s.point_blocks(), name=f"{s.name}^dual")


def relabel_structure(s: IncidenceStructure, point_perm: Sequence[int],
                      block_perm: Sequence[int] | None = None,
                      name: str | None = None) -> IncidenceStructure:
    """Isomorphic copy: point ``i`` becomes ``point_perm[i]`` and block ``j``
    moves to position ``block_perm[j]``."""
    b = len(s.blocks)
    new = [None] * b
    for j, blk in enumerate(s.blocks):
        dest = block_perm[j] if block_perm is not None else j
        new[dest] = [point_perm[x] for x in blk]
    return IncidenceStructure(s.v, new, name=s.name if name is None else name)


class ColoredGraph:
    """Undirected vertex-colored graph on ``0..n-1``.

    Adjacency is held both as neighbour tuples and as integer bitsets.
    Colors must be nonnegative and form a contiguous range from 0.
    """

    __slots__ = ("n", "neighbors", "adj", "colors")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]],
                 colors: Sequence[int] | None = None):
        self.n = n
        nb = [set() for _ in range(n)]
        for u, w in edges:
            if not (0 <= u < n and 0 <= w < n):
                raise ValueError(f"edge ({u}, {w}) outside 0..{n - 1}")
            if u == w:
                raise ValueError(f"self-loop at {u}")
            nb[u].add(w)
            nb[w].add(u)
        self.neighbors = tuple(tuple(sorted(x)) for x in nb)
        self.adj = tuple(sum(1 << w for w in x) for x in self.neighbors)
        if colors is None:
            colors = [0] * n
        colors = tuple(int(c) for c in colors)
        if len(colors) != n:
            raise ValueError("need one color per vertex")
        if colors and set(colors) != set(range(max(colors) + 1)):
            raise ValueError("colors must form a contiguous range from 0")
        self.colors = colors

    @classmethod
    def from_neighbors(cls, neighbors, colors=None) -> "ColoredGraph":
        edges = [(u, w) for u, nb in enumerate(neighbors) for w in nb if u < w]
        return cls(len(neighbors), edges, colors)

    def edges(self):
        return [(u, w) for u, nb in enumerate(self.neighbors) for w in nb if u < w]

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def has_edge(self, u: int, w: int) -> bool:
        return bool(self.adj[u] >> w & 1)

    @property
    def n_colors(self) -> int:
        return max(self.colors) + 1 if self.colors else 0

    def relabel(self, perm: Sequence[int]) -> "ColoredGraph":
        """Copy with vertex ``v`` renamed ``perm[v]``; colors move along."""
        colors = [0] * self.n
        for v, c in enumerate(self.colors):
            colors[perm[v]] = c
        return ColoredGraph(self.n, [(perm[u], perm[w]) for u, w in self.edges()],
                            colors)

    def is_automorphism(self, perm: Sequence[int]) -> bool:
        if any(self.colors[perm[v]] != self.colors[v] for v in range(self.n)):
            return False
        nb = self.neighbors
        return all(set(perm[w] for w in nb[u]) == set(nb[perm[u]])
                   for u in range(self.n))

    def is_bipartite(self) -> bool:
        side = [-1] * self.n
        for s in range(self.n):
            if side[s] >= 0:
                continue
            side[s] = 0
            stack = [s]
            while stack:
                u = stack.pop()
                for w in self.neighbors[u]:
                    if side[w] < 0:
                        side[w] = 1 - side[u]
                        stack.append(w)
                    elif side[w] == side[u]:
                        return False
        return True

    def __eq__(self, other):
        if not isinstance(other, ColoredGraph):
            return NotImplemented
        return (self.n, self.neighbors, self.colors) == (
            other.n, other.neighbors, other.colors)

    def __hash__(self):
        return hash((self.n, self.neighbors, self.colors))

    def __repr__(self):
        m = sum(len(x) for x in self.neighbors) // 2
        return f"ColoredGraph(n={self.n}, m={m}, colors={self.n_colors})"


def to_incidence_graph(s: IncidenceStructure, marked: Iterable[int] | None = None,
                       self_dual: bool = False) -> ColoredGraph:
    """Bipartite incidence graph: points are ``0..v-1``, block ``j`` is
    vertex ``v + j``.

    Colors: with a marking, unmarked points 0, marked points 1, blocks 2;
    without, points 0 and blocks 1.  ``self_dual=True`` drops the point/block
    distinction (marked points 1, everything else 0) so that dualities count
    as automorphisms.
    """
    v = s.v
    marked = set() if marked is None else set(marked)
    for x in marked:
        if not 0 <= x < v:
            raise IndexError(f"marked point {x} outside [0, {v})")
    n = v + s.b
    edges = [(x, v + j) for j, blk in enumerate(s.blocks) for x in blk]
    if self_dual:
        colors = [1 if i in marked else 0 for i in range(v)] + [0] * s.b
    elif marked:
        colors = [1 if i in marked else 0 for i in range(v)] + [2] * s.b
    else:
        colors = [0] * v + [1] * s.b
    if marked and len(marked) == v:
        # every point marked: shift so the color range stays contiguous
        colors = [c - 1 if c else c for c in colors]
    return ColoredGraph(n, edges, colors)


def line_profile(s: IncidenceStructure, points: Iterable[int]) -> dict:
    """Map intersection size -> number of blocks meeting ``points`` in that
    many points."""
    pts = set(points)
    for x in pts:
        if not 0 <= x < s.v:
            raise IndexError(f"point {x} outside [0, {s.v})")
    return dict(sorted(Counter(sum(1 for x in blk if x in pts)
                               for blk in s.blocks).items()))
