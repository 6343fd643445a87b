"""Permutation groups: stabilizer chains, orbits, sampling and small oracles.

Permutations act on ``0..n-1`` from the left; ``(p * q)(x) = p(q(x))``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "Permutation",
    "GroupChain",
    "ResourceError",
    "schreier_sims",
    "orbits",
    "membership",
    "random_element",
    "setwise_stabilizer_oracle",
    "SeedConfig",
    "subgroup_seeds",
    "enumerate_automorphisms",
    "backtrack_automorphism_order",
]


class ResourceError(RuntimeError):
    """A search exceeded its configured budget."""


class Permutation:
    """A bijection of ``0..n-1`` stored as its image tuple."""

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int]):
        self.images = tuple(images)
        self._hash = None

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        img = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                img[a] = b
        return cls(img)

    def check(self) -> "Permutation":
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError("not a permutation")
        return self

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __getitem__(self, x: int) -> int:
        return self.images[x]

    def __len__(self):
        return len(self.images)

    def __mul__(self, other: "Permutation") -> "Permutation":
        if len(other.images) != len(self.images):
            raise ValueError("degree mismatch")
        return Permutation(map(self.images.__getitem__, other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, x in enumerate(self.images):
            inv[x] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.images))

    def cycles(self) -> list:
        seen = [False] * len(self.images)
        out = []
        for i in range(len(self.images)):
            if seen[i]:
                continue
            cyc = [i]
            seen[i] = True
            j = self.images[i]
            while j != i:
                seen[j] = True
                cyc.append(j)
                j = self.images[j]
            out.append(cyc)
        return out

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycles())) if self.images else 1

    def __pow__(self, e: int) -> "Permutation":
        img = [0] * len(self.images)
        for cyc in self.cycles():
            m = len(cyc)
            s = e % m
            for i, x in enumerate(cyc):
                img[x] = cyc[(i + s) % m]
        return Permutation(img)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.images == other.images

    def __lt__(self, other):
        return self.images < other.images

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.images)
        return self._hash

    def __repr__(self):
        cyc = [c for c in self.cycles() if len(c) > 1]
        body = "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "()"
        return f"Permutation({body}, n={len(self.images)})"


def _compose(p, q):
    """Tuple-level ``p . q``."""
    return tuple(map(p.__getitem__, q))


def _inverse(p):
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


@dataclass
class _Level:
    point: int
    gens: list = field(default_factory=list)      # tuple permutations
    trans: dict = field(default_factory=dict)     # orbit point -> u, u(point) = key
    trans_inv: dict = field(default_factory=dict)

    def rebuild(self, n):
        ident = tuple(range(n))
        trans = {self.point: ident}
        queue = [self.point]
        gens = self.gens
        for x in queue:
            u = trans[x]
            for g in gens:
                y = g[x]
                if y not in trans:
                    trans[y] = _compose(g, u)
                    queue.append(y)
        self.trans = trans
        self.trans_inv = {}

    def inv(self, y):
        u = self.trans_inv.get(y)
        if u is None:
            u = self.trans_inv[y] = _inverse(self.trans[y])
        return u


class GroupChain:
    """Base and strong generating set with explicit transversals.

    Built by :func:`schreier_sims`; treat as immutable afterwards.
    """

    def __init__(self, degree: int, levels: list, generators: list):
        self.degree = degree
        self._levels = levels
        self.generators = [Permutation(g) for g in generators]

    @property
    def base(self) -> list:
        return [lv.point for lv in self._levels]

    @property
    def strong_generators(self) -> list:
        return [[Permutation(g) for g in lv.gens] for lv in self._levels]

    @property
    def transversals(self) -> list:
        return [{x: Permutation(u) for x, u in lv.trans.items()}
                for lv in self._levels]

    def basic_orbits(self) -> list:
        return [sorted(lv.trans) for lv in self._levels]

    @property
    def order(self) -> int:
        return math.prod(len(lv.trans) for lv in self._levels)

    def sift(self, g) -> tuple:
        """Return ``(residue, level)`` where sifting stopped."""
        h = g.images if isinstance(g, Permutation) else tuple(g)
        for i, lv in enumerate(self._levels):
            y = h[lv.point]
            if y not in lv.trans:
                return h, i
            h = _compose(lv.inv(y), h)
        return h, len(self._levels)

    def __contains__(self, g) -> bool:
        return membership(self, g)

    def random_element(self, rng: random.Random) -> Permutation:
        h = tuple(range(self.degree))
        for lv in self._levels:
            keys = sorted(lv.trans)
            h = _compose(h, lv.trans[keys[rng.randrange(len(keys))]])
        return Permutation(h)

    def elements(self):
        """Iterate over every group element (small groups only)."""
        ident = tuple(range(self.degree))

        def rec(i, h):
            if i == len(self._levels):
                yield Permutation(h)
                return
            lv = self._levels[i]
            for x in sorted(lv.trans):
                yield from rec(i + 1, _compose(h, lv.trans[x]))

        return rec(0, ident)

    def __repr__(self):
        return f"GroupChain(degree={self.degree}, base={self.base}, order={self.order})"


def _as_tuple(g):
    return g.images if isinstance(g, Permutation) else tuple(g)


def schreier_sims(generators: Sequence, degree: int | None = None,
                  base: Sequence[int] = (), seed: int = 0,
                  random_rounds: int = 30) -> GroupChain:
    """Stabilizer chain of the group generated by ``generators``.

    A seeded random phase builds most of the chain cheaply; a deterministic
    pass then sifts every Schreier generator, so the returned chain (and its
    order) is exact.  ``base`` fixes a prefix of the base; further base points
    are the smallest point of the longest cycle of the element that needed
    them.
    """
    gens = [_as_tuple(g) for g in generators]
    if degree is None:
        if not gens:
            raise ValueError("degree required when there are no generators")
        degree = len(gens[0])
    if any(len(g) != degree for g in gens):
        raise ValueError("generators have different degrees")
    ident = tuple(range(degree))
    gens = [g for g in dict.fromkeys(gens) if g != ident]
    levels = [_Level(b) for b in base]
    chain = GroupChain(degree, levels, gens)

    def new_point(h):
        best = None
        for cyc in Permutation(h).cycles():
            if len(cyc) > 1 and (best is None or len(cyc) > len(best)):
                best = cyc
        return min(best)

    def add_gen(h, j, lo=0):
        # h fixes base points 0..j-1; it belongs to the groups of levels lo..j
        if j == len(levels):
            levels.append(_Level(new_point(h)))
        for lv in levels[lo:j + 1]:
            lv.gens.append(h)
            lv.rebuild(degree)

    def sift_from(h, start):
        for i in range(start, len(levels)):
            lv = levels[i]
            y = h[lv.point]
            if y not in lv.trans:
                return h, i
            h = _compose(lv.inv(y), h)
        return h, len(levels)

    for lv in levels:
        lv.rebuild(degree)
    if not gens:
        return chain
    if not levels:
        levels.append(_Level(new_point(gens[0])))
    for g in gens:
        h, i = sift_from(g, 0)
        if h != ident:
            add_gen(h, i)

    # random phase
    rng = random.Random(seed)
    pool = list(gens) * max(1, (10 // len(gens)) + 1)
    acc = ident
    for _ in range(50):
        i, j = rng.sample(range(len(pool)), 2) if len(pool) > 1 else (0, 0)
        pool[i] = _compose(pool[i], pool[j])
        acc = _compose(acc, pool[i])
    streak = 0
    while streak < random_rounds:
        i, j = rng.sample(range(len(pool)), 2) if len(pool) > 1 else (0, 0)
        pool[i] = _compose(pool[i], pool[j])
        acc = _compose(acc, pool[i])
        h, lvl = sift_from(acc, 0)
        if h == ident:
            streak += 1
        else:
            streak = 0
            add_gen(h, lvl)

    # deterministic completion: every Schreier generator must sift to 1
    i = len(levels) - 1
    while i >= 0:
        lv = levels[i]
        redo = None
        for x in sorted(lv.trans):
            ux = lv.trans[x]
            for s in list(lv.gens):
                y = s[x]
                sg = _compose(lv.inv(y), _compose(s, ux))
                if sg == ident:
                    continue
                h, j = sift_from(sg, i + 1)
                if h != ident:
                    add_gen(h, j, i + 1)
                    redo = j
                    break
            if redo is not None:
                break
        if redo is not None:
            i = redo
            continue
        i -= 1
    return chain


def orbits(generators: Sequence, n: int) -> list:
    """Orbits on ``0..n-1`` as sorted lists, ordered by smallest element."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in generators:
        img = _as_tuple(g)
        for x in range(n):
            a, b = find(x), find(img[x])
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    groups: dict = {}
    for x in range(n):
        groups.setdefault(find(x), []).append(x)
    return [groups[r] for r in sorted(groups)]


def membership(chain: GroupChain, g) -> bool:
    h = _as_tuple(g)
    if len(h) != chain.degree:
        raise ValueError("degree mismatch")
    res, _ = chain.sift(h)
    return all(i == x for i, x in enumerate(res))


def random_element(chain: GroupChain, seed) -> Permutation:
    """Uniform random element; ``seed`` is an int or a ``random.Random``."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return chain.random_element(rng)


def setwise_stabilizer_oracle(chain: GroupChain, points: Iterable[int],
                              max_order: int = 10**7,
                              node_budget: int = 10**7) -> int:
    """Order of ``{g : g(points) = points}`` by backtracking through a chain.

    The chain is rebased so that points of the set come first, and a branch
    is cut as soon as a base point is sent across the set boundary.  Meant as
    an independent check for small groups only.
    """
    target = frozenset(points)
    if chain.order > max_order:
        raise ResourceError(
            f"group order {chain.order} exceeds oracle limit {max_order}")
    if not target or len(target) == chain.degree:
        return chain.order
    gens = [g.images for g in chain.generators]
    c = schreier_sims(gens, chain.degree, base=sorted(target))
    levels = c._levels
    inside = [x in target for x in range(chain.degree)]
    nodes = 0
    count = 0

    def rec(i, h):
        nonlocal nodes, count
        nodes += 1
        if nodes > node_budget:
            raise ResourceError(f"setwise stabilizer search exceeded {node_budget} nodes")
        if i == len(levels):
            if all(inside[h[x]] for x in target):
                count += 1
            return
        lv = levels[i]
        want = inside[lv.point]
        for x, u in lv.trans.items():
            # image of the base point under h . u is h(x)
            if inside[h[x]] == want:
                rec(i + 1, _compose(h, u))

    rec(0, tuple(range(chain.degree)))
    return count


@dataclass(frozen=True)
class SeedConfig:
    """Policy for :func:`subgroup_seeds` (an original heuristic, not taken
    from any published search)."""
    seed: int = 0
    samples: int = 200
    primes: tuple = (2, 3, 5, 7, 11, 13, 17)
    pair_count: int = 20
    include_trivial: bool = False
    max_seeds: int | None = None


def _canonical_cyclic(h):
    """Smallest image tuple among the generators of ``<h>``."""
    p = Permutation(h)
    m = p.order()
    return min((p ** e).images for e in range(1, m) if math.gcd(e, m) == 1)


def subgroup_seeds(chain: GroupChain, config: SeedConfig = SeedConfig()) -> list:
    """Generator lists of small subgroups of the chain's group.

    Random elements ``g`` contribute cyclic groups ``<g^(|g|/p)>`` of prime
    order ``p``; then up to ``pair_count`` two-generator groups are formed
    from consecutive pairs of those.  Subgroups with identical (canonicalized,
    sorted) generator images are merged.  Output order is deterministic for a
    fixed seed.  This selection policy is original to this package; no
    published subgroup list is reproduced.
    """
    if chain.order == 1:
        return [[]]
    rng = random.Random(config.seed)
    seen = set()
    cyclic = []
    for _ in range(config.samples):
        g = chain.random_element(rng)
        m = g.order()
        for p in config.primes:
            if m % p == 0:
                h = _canonical_cyclic((g ** (m // p)).images)
                key = (h,)
                if key not in seen:
                    seen.add(key)
                    cyclic.append(h)
    seeds = [[Permutation(h)] for h in cyclic]
    pairs = []
    for a, b in zip(cyclic, cyclic[1:]):
        if len(pairs) >= config.pair_count:
            break
        key = tuple(sorted((a, b)))
        if a != b and key not in seen:
            seen.add(key)
            pairs.append([Permutation(x) for x in key])
    seeds.extend(pairs)
    if config.include_trivial:
        seeds.insert(0, [])
    if config.max_seeds is not None:
        seeds = seeds[: config.max_seeds]
    return seeds


# --- refinement-free automorphism oracles --------------------------------

def _vertex_order(neighbors, colors):
    """Vertex order in which each vertex (after the first of its component)
    has an already-ordered neighbour."""
    n = len(neighbors)
    order, seen = [], [False] * n
    for s in sorted(range(n), key=lambda v: (colors[v], v)):
        if seen[s]:
            continue
        seen[s] = True
        queue = [s]
        for u in queue:
            order.append(u)
            for w in neighbors[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    return order


def _constrained_order(neighbors, start, fallback):
    """Greedy order: next is the vertex with most already-ordered neighbours,
    ties broken by position in ``fallback``."""
    n = len(neighbors)
    rank = {v: i for i, v in enumerate(fallback)}
    placed = [False] * n
    score = [0] * n
    order = []

    def place(v):
        placed[v] = True
        order.append(v)
        for w in neighbors[v]:
            score[w] += 1

    for v in start:
        place(v)
    while len(order) < n:
        v = max((w for w in range(n) if not placed[w]),
                key=lambda w: (score[w], -rank[w]))
        place(v)
    return order


def _extend(neighbors, colors, fixed, budget):
    """Backtracking over color- and adjacency-consistent bijections that
    agree with the partial map ``fixed``.  Yields complete image tuples."""
    n = len(neighbors)
    nbsets = [frozenset(x) for x in neighbors]
    deg = [len(x) for x in neighbors]
    order = list(fixed) + [v for v in _vertex_order(neighbors, colors)
                           if v not in fixed]
    img = [-1] * n
    used = [False] * n
    for v, w in fixed.items():
        if colors[v] != colors[w] or deg[v] != deg[w] or used[w]:
            return
        img[v] = w
        used[w] = True
    for v in fixed:
        for u in fixed:
            if (u in nbsets[v]) != (img[u] in nbsets[img[v]]):
                return
    order = _constrained_order(neighbors, list(fixed), order)
    pos = {v: i for i, v in enumerate(order)}
    prev_nb = [[u for u in neighbors[v] if pos[u] < pos[v]] for v in range(n)]
    nodes = 0

    def rec(i):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise ResourceError(f"automorphism backtrack exceeded {budget} nodes")
        if i == n:
            yield tuple(img)
            return
        v = order[i]
        pn = prev_nb[v]
        pool = neighbors[img[pn[0]]] if pn else range(n)
        for w in pool:
            if used[w] or colors[w] != colors[v] or deg[w] != deg[v]:
                continue
            nbw = nbsets[w]
            # w must see exactly the images of v's earlier neighbours
            if any(img[u] not in nbw for u in pn):
                continue
            if sum(1 for x in nbw if used[x]) != len(pn):
                continue
            img[v] = w
            used[w] = True
            yield from rec(i + 1)
            used[w] = False
            img[v] = -1

    yield from rec(len(fixed))


def enumerate_automorphisms(neighbors: Sequence[Sequence[int]],
                            colors: Sequence[int] | None = None,
                            budget: int = 10**7):
    """Every color-preserving automorphism, by plain backtracking."""
    colors = colors if colors is not None else [0] * len(neighbors)
    for img in _extend(neighbors, colors, {}, budget):
        yield Permutation(img)


def backtrack_automorphism_order(neighbors: Sequence[Sequence[int]],
                                 colors: Sequence[int] | None = None,
                                 budget: int = 10**7) -> int:
    """Automorphism group order without partition refinement.

    Uses the orbit-stabilizer product along a point stabilizer chain; each
    orbit is found by asking the backtracker for one extension per candidate
    image.
    """
    n = len(neighbors)
    colors = list(colors) if colors is not None else [0] * n
    fixed: dict = {}
    order = 1
    for b in _vertex_order(neighbors, colors):
        if _only_identity(neighbors, colors, fixed, budget):
            break
        orbit = 0
        for w in range(n):
            if colors[w] != colors[b] or w in fixed:
                continue
            trial = dict(fixed)
            trial[b] = w
            if next(_extend(neighbors, colors, trial, budget), None) is not None:
                orbit += 1
        order *= orbit
        fixed[b] = b
    return order


def _only_identity(neighbors, colors, fixed, budget):
    sols = _extend(neighbors, colors, fixed, budget)
    next(sols, None)
    return next(sols, None) is None
