"""Automorphism groups and canonical forms of vertex-colored graphs.

A plain individualization-refinement search in the style of nauty:

* partitions are refined to the coarsest equitable refinement by counting
  neighbours into splitter cells;
* the target cell is the non-singleton cell joined non-trivially to the most
  other cells (``TARGET_MODE = "smallest"`` selects the first smallest
  non-singleton cell instead), and its vertices are tried in ascending order;
* leaves equivalent to the first leaf give automorphisms (with a jump back
  to the first-path level they hang from); leaves equivalent to the best leaf
  give automorphisms too;
* orbits of the automorphisms found so far prune sibling branches, and node
  invariants prune branches that can neither reach the first leaf's class nor
  beat the best leaf.

The canonical leaf is the one maximizing (invariant sequence, relabeled
adjacency), which makes the result independent of the input labeling.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .incidence import ColoredGraph
from .permgroup import Permutation, ResourceError, schreier_sims

__all__ = [
    "Certificate",
    "AutResult",
    "refine",
    "automorphism_group",
    "canonical_form",
    "are_isomorphic",
    "DEFAULT_NODE_BUDGET",
]

DEFAULT_NODE_BUDGET = 10**8
TARGET_MODE = "joins"


@dataclass(frozen=True)
class Certificate:
    """Canonical encoding of a colored graph.

    Layout: vertex count as 4-byte big-endian, then one 2-byte big-endian
    color per vertex in canonical order, then the strict upper triangle of the
    canonical adjacency matrix, row-major, packed 8 bits per byte (most
    significant bit first, zero padded).
    """
    data: bytes

    def hex(self) -> str:
        return self.data.hex()

    def digest(self) -> str:
        import hashlib
        return hashlib.sha256(self.data).hexdigest()

    def __lt__(self, other):
        return self.data < other.data


@dataclass
class AutResult:
    generators: list
    order: int
    orbits: list
    canonical_labeling: Permutation
    certificate: Certificate | None = None
    nodes: int = 0


# --- partition refinement -------------------------------------------------

def _refine(nb, lab, cell_of, csize, active):
    """Refine in place to the coarsest equitable partition; returns a trace
    hash that depends only on cell positions and counts."""
    heap = list(active)
    heapq.heapify(heap)
    queued = set(heap)
    trace = []
    while heap:
        w = heapq.heappop(heap)
        queued.discard(w)
        cnt = {}
        get = cnt.get
        for u in lab[w:w + csize[w]]:
            for x in nb[u]:
                cnt[x] = get(x, 0) + 1
        by_cell = {}
        for x in cnt:
            s = cell_of[x]
            if csize[s] > 1:
                if s in by_cell:
                    by_cell[s].append(x)
                else:
                    by_cell[s] = [x]
        for s in sorted(by_cell):
            members = by_cell[s]
            size = csize[s]
            groups = {}
            for x in members:
                c = cnt[x]
                if c in groups:
                    groups[c].append(x)
                else:
                    groups[c] = [x]
            if len(members) < size:
                mset = set(members)
                groups[0] = [x for x in lab[s:s + size] if x not in mset]
            if len(groups) == 1:
                trace.append((w, s, next(iter(groups))))
                continue
            keys = sorted(groups)
            pos = s
            starts = []
            for key in keys:
                grp = groups[key]
                lab[pos:pos + len(grp)] = grp
                for x in grp:
                    cell_of[x] = pos
                csize[pos] = len(grp)
                starts.append(pos)
                pos += len(grp)
            trace.append((w, s, tuple((k, len(groups[k])) for k in keys)))
            if s in queued:
                for st in starts[1:]:
                    heapq.heappush(heap, st)
                    queued.add(st)
            else:
                big = max(range(len(starts)), key=lambda i: (csize[starts[i]], -i))
                for i, st in enumerate(starts):
                    if i != big:
                        heapq.heappush(heap, st)
                        queued.add(st)
    return hash(tuple(trace))


def _initial(g: ColoredGraph):
    order = sorted(range(g.n), key=lambda v: (g.colors[v], v))
    lab = list(order)
    cell_of = [0] * g.n
    csize = [0] * g.n
    starts = []
    i = 0
    while i < g.n:
        j = i
        c = g.colors[lab[i]]
        while j < g.n and g.colors[lab[j]] == c:
            cell_of[lab[j]] = i
            j += 1
        csize[i] = j - i
        starts.append(i)
        i = j
    return lab, cell_of, csize, starts


def refine(g: ColoredGraph, partition) -> list:
    """Coarsest equitable refinement of ``partition`` (a sequence of cells).

    Cells must be monochromatic and cover every vertex exactly once.  The
    result lists cells (sorted) in refinement order.
    """
    cells = [list(c) for c in partition]
    flat = [v for c in cells for v in c]
    if sorted(flat) != list(range(g.n)):
        raise ValueError("partition must cover every vertex exactly once")
    for c in cells:
        if len({g.colors[v] for v in c}) > 1:
            raise ValueError("partition cell mixes colors")
    lab = flat
    cell_of = [0] * g.n
    csize = [0] * g.n
    starts = []
    pos = 0
    for c in cells:
        if not c:
            continue
        for v in c:
            cell_of[v] = pos
        csize[pos] = len(c)
        starts.append(pos)
        pos += len(c)
    _refine(g.neighbors, lab, cell_of, csize, starts)
    out = []
    i = 0
    while i < g.n:
        out.append(sorted(lab[i:i + csize[i]]))
        i += csize[i]
    return out


# --- search ---------------------------------------------------------------

class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            if a < b:
                self.parent[b] = a
            else:
                self.parent[a] = b


class _CellOrbits:
    """Union-find restricted to one cell; roots are minimal elements."""
    __slots__ = ("parent", "cell")

    def __init__(self, cell):
        self.cell = cell
        self.parent = {x: x for x in cell}

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def merge(self, g):
        for x in self.cell:
            a, b = self.find(x), self.find(g[x])
            if a != b:
                if a < b:
                    self.parent[b] = a
                else:
                    self.parent[a] = b


class _Search:
    def __init__(self, g: ColoredGraph, canon: bool, budget: int):
        self.g = g
        self.n = g.n
        self.nb = g.neighbors
        self.canon = canon
        self.budget = budget
        self.nodes = 0
        self.target_mode = TARGET_MODE
        self.gens = []            # image tuples
        self.gen_fix = []         # first-path fix level of each generator

    # partition helpers
    def _target(self, lab, csize):
        n = self.n
        mode = self.target_mode
        if mode == "smallest":
            best_s, best_size = -1, n + 1
            i = 0
            while i < n:
                sz = csize[i]
                if 1 < sz < best_size:
                    best_s, best_size = i, sz
                    if sz == 2:
                        break
                i += sz
            return best_s
        if mode == "largest":
            best_s, best_size = -1, 1
            i = 0
            while i < n:
                sz = csize[i]
                if sz > best_size:
                    best_s, best_size = i, sz
                i += sz
            return best_s
        # "joins": the cell non-trivially joined to the most cells
        starts = []
        i = 0
        while i < n:
            starts.append(i)
            i += csize[i]
        cands = [s for s in starts if csize[s] > 1]
        if not cands:
            return -1
        if len(cands) == 1:
            return cands[0]
        cell_of = [0] * n
        for s in starts:
            for x in lab[s:s + csize[s]]:
                cell_of[x] = s
        nb = self.nb
        best_s, best_score = -1, -1
        for s in cands:
            size = csize[s]
            seen = {}
            # one representative per cell decides the count (partition equitable)
            for u in lab[s:s + size]:
                for x in nb[u]:
                    seen[x] = seen.get(x, 0) + 1
            score = 0
            for c in starts:
                if csize[c] == 1:
                    continue
                k = seen.get(lab[c], 0)
                if 0 < k < size:
                    score += 1
            if score > best_score:
                best_s, best_score = s, score
        return best_s

    def _child(self, state, s, v):
        lab, cell_of, csize = state
        lab = lab[:]
        cell_of = cell_of[:]
        csize = csize[:]
        size = csize[s]
        i = lab.index(v, s, s + size)
        lab[s], lab[i] = lab[i], lab[s]
        csize[s] = 1
        csize[s + 1] = size - 1
        for x in lab[s + 1:s + size]:
            cell_of[x] = s + 1
        cell_of[v] = s
        self.nodes += 1
        if self.nodes > self.budget:
            raise ResourceError(
                f"canonical search exceeded {self.budget} tree nodes")
        tr = _refine(self.nb, lab, cell_of, csize, [s])
        return (lab, cell_of, csize), hash((s, size, tr))

    def _cert(self, lab):
        pos = [0] * self.n
        for i, v in enumerate(lab):
            pos[v] = i
        nb = self.nb
        return tuple(sum(1 << pos[x] for x in nb[v]) for v in lab)

    # automorphism bookkeeping
    def _add_gen(self, src_lab, dst_lab):
        img = [0] * self.n
        for a, b in zip(src_lab, dst_lab):
            img[a] = b
        img = tuple(img)
        fp = self.first_path
        f = 0
        while f < len(fp) and img[fp[f]] == fp[f]:
            f += 1
        self.gens.append(img)
        self.gen_fix.append(f)
        for k in range(min(f, len(fp) - 1) + 1):
            uf = self.level_uf[k]
            for x in range(self.n):
                uf.union(x, img[x])

    def run(self):
        g = self.g
        lab, cell_of, csize, starts = _initial(g)
        inv0 = _refine(self.nb, lab, cell_of, csize, starts)
        state = (lab, cell_of, csize)
        self.root_inv = inv0
        # first path
        path_states, path_invs, first_path, targets = [], [], [], []
        while True:
            s = self._target(state[0], state[2])
            if s < 0:
                break
            cell = sorted(state[0][s:s + state[2][s]])
            path_states.append(state)
            targets.append((s, cell))
            v = cell[0]
            first_path.append(v)
            state, inv = self._child(state, s, v)
            path_invs.append(inv)
        self.first_path = first_path
        self.first_invs = tuple(path_invs)
        self.first_lab = state[0]
        self.first_cert = self._cert(state[0])
        self.best = (self.first_invs, self.first_cert, state[0], tuple(first_path))
        self.level_uf = [_UnionFind(self.n) for _ in first_path]

        for k in range(len(first_path) - 1, -1, -1):
            s, cell = targets[k]
            uf = self.level_uf[k]
            prefix = first_path[:k]
            for v in cell[1:]:
                if uf.find(v) != v:
                    continue
                self._explore(path_states[k], s, v, prefix + [v],
                              list(path_invs[:k]), True, k)
        return self._result()

    def _explore(self, parent, s, v, path, invs, first_eq, depth):
        """Explore the child of ``parent`` individualizing ``v``.  Returns a
        jump level or ``None``."""
        state, inv = self._child(parent, s, v)
        invs.append(inv)
        d = depth + 1
        try:
            if first_eq and (depth >= len(self.first_invs)
                             or inv != self.first_invs[depth]):
                first_eq = False
            cur = tuple(invs)
            best_invs = self.best[0]
            bp = best_invs[:d]
            cmp = (cur > bp) - (cur < bp) if self.canon else -1
            if not first_eq and cmp < 0:
                return None
            t = self._target(state[0], state[2])
            if t < 0:
                return self._leaf(state[0], path, cur, first_eq)
            cell = sorted(state[0][t:t + state[2][t]])
            orb = _CellOrbits(cell)
            seen = 0
            for w in cell:
                if seen != len(self.gens):
                    # automorphisms fixing the path permute this cell
                    for gg in self.gens[seen:]:
                        if all(gg[p] == p for p in path):
                            orb.merge(gg)
                    seen = len(self.gens)
                if orb.find(w) != w:
                    continue
                j = self._explore(state, t, w, path + [w], invs, first_eq, d)
                if j is not None and j < d:
                    return j
            return None
        finally:
            invs.pop()

    def _leaf(self, lab, path, invs, first_eq):
        cert = self._cert(lab)
        if first_eq and cert == self.first_cert:
            self._add_gen(self.first_lab, lab)
            return _common(path, self.first_path)
        if not self.canon:
            return None
        b_invs, b_cert, b_lab, b_path = self.best
        key, bkey = (invs, cert), (b_invs, b_cert)
        if key > bkey:
            self.best = (invs, cert, lab, tuple(path))
            return None
        if key == bkey:
            self._add_gen(b_lab, lab)
            return _common(path, b_path)
        return None

    def _result(self):
        n = self.n
        order = 1
        for k, v in enumerate(self.first_path):
            uf = self.level_uf[k]
            r = uf.find(v)
            order *= sum(1 for x in range(n) if uf.find(x) == r)
        best_lab = self.best[2]
        labeling = [0] * n
        for i, v in enumerate(best_lab):
            labeling[v] = i
        return order, labeling, best_lab


def _common(a, b):
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


def _certificate(g: ColoredGraph, labeling) -> Certificate:
    n = g.n
    colors = [0] * n
    for v, p in enumerate(labeling):
        colors[p] = g.colors[v]
    head = n.to_bytes(4, "big") + b"".join(c.to_bytes(2, "big") for c in colors)
    if n < 2:
        return Certificate(head)
    mat = np.zeros((n, n), dtype=bool)
    lab = np.asarray(labeling)
    edges = g.edges()
    if edges:
        e = np.asarray(edges)
        a, b = lab[e[:, 0]], lab[e[:, 1]]
        mat[a, b] = True
        mat[b, a] = True
    bits = mat[np.triu_indices(n, 1)]
    return Certificate(head + np.packbits(bits).tobytes())


def _orbits_from(gens, n):
    uf = _UnionFind(n)
    for g in gens:
        for x in range(n):
            uf.union(x, g[x])
    groups = {}
    for x in range(n):
        groups.setdefault(uf.find(x), []).append(x)
    return [groups[r] for r in sorted(groups)]


def _run(g: ColoredGraph, canon: bool, budget: int) -> AutResult:
    search = _Search(g, canon, budget)
    order, labeling, _ = search.run()
    gens = [Permutation(x) for x in search.gens]
    if gens:
        chain = schreier_sims(gens, g.n, base=search.first_path)
        if chain.order != order:
            raise AssertionError(
                f"orbit product {order} disagrees with stabilizer chain {chain.order}")
    cert = _certificate(g, labeling) if canon else None
    return AutResult(gens, order, _orbits_from(search.gens, g.n),
                     Permutation(labeling), cert, search.nodes)


def automorphism_group(g: ColoredGraph, budget: int = DEFAULT_NODE_BUDGET,
                       canonical: bool = False) -> AutResult:
    """Generators, exact order and orbits of the color-preserving
    automorphism group.

    With ``canonical=True`` the same search also produces the canonical
    labeling and certificate.
    """
    return _run(g, canonical, budget)


def canonical_form(g: ColoredGraph, budget: int = DEFAULT_NODE_BUDGET):
    """Return ``(certificate, labeling)``; ``labeling[v]`` is the canonical
    position of vertex ``v``."""
    res = _run(g, True, budget)
    return res.certificate, res.canonical_labeling


def are_isomorphic(g1: ColoredGraph, g2: ColoredGraph,
                   budget: int = DEFAULT_NODE_BUDGET) -> Permutation | None:
    """A color- and adjacency-preserving map ``g1 -> g2``, or ``None``."""
    if g1.n != g2.n or sorted(g1.colors) != sorted(g2.colors):
        return None
    c1, l1 = canonical_form(g1, budget)
    c2, l2 = canonical_form(g2, budget)
    if c1 != c2:
        return None
    return l2.inverse() * l1
