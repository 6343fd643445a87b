"""Heuristic unital search by unions of subgroup orbits.

The pipeline is a reconstruction, not a published algorithm:

1. draw small subgroups of the plane's collineation group
   (:func:`~unital16.permgroup.subgroup_seeds`), keep those whose orbit sizes
   can sum to the target, and visit them coarsest partition first;
2. enumerate unions of orbits depth-first, largest orbits first, pruning any
   union that puts more than ``q + 1`` points on a line;
3. unions of exactly ``q^3 + 1`` points are tested directly; unions of at
   least ``min_partial`` points are handed to :func:`complete_partial`;
4. every unital found is re-verified and deduplicated by the certificate of
   its marked incidence graph.

All budgets are explicit and exhaustion is recorded in the stats, so a
result with an empty ``exhausted`` list is complete for its configuration.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .canon import DEFAULT_NODE_BUDGET, automorphism_group
from .incidence import IncidenceStructure, to_incidence_graph
from .permgroup import GroupChain, Permutation, SeedConfig, orbits, schreier_sims, subgroup_seeds
from .unitals import UnitalRecord, is_unital, line_counts, point_set, unital_invariants, unital_q

__all__ = [
    "SearchConfig",
    "SearchStats",
    "SearchResult",
    "Completions",
    "orbit_combinations",
    "complete_partial",
    "collineation_chain",
    "find_unitals",
]


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    subgroup_budget: int = 16
    combination_budget: int = 200_000   # DFS nodes per subgroup
    completion_budget: int = 20_000     # backtracking nodes per completion
    completions_per_subgroup: int = 16
    time_budget: float = 3600.0         # seconds
    target: int | None = None           # default q^3 + 1
    min_partial: int | None = None      # default round(45 * target / 65)
    exhaustive: bool = False
    self_dual: bool = False
    samples: int = 200
    workers: int = 1

    def __post_init__(self):
        for name in ("subgroup_budget", "combination_budget", "completion_budget",
                     "completions_per_subgroup", "samples"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.time_budget < 0:
            raise ValueError("time_budget must be nonnegative")


@dataclass
class SearchStats:
    subgroups_available: int = 0
    subgroups_tried: int = 0
    orbit_nodes: int = 0
    line_pruned: int = 0
    candidates_tested: int = 0
    completions_run: int = 0
    completion_nodes: int = 0
    incomplete_completions: int = 0
    unital_sets: int = 0
    classes: int = 0
    exhausted: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_text(self, include_time: bool = False) -> str:
        """``key=value`` lines; wall time only on request so that the text is
        reproducible."""
        d = asdict(self)
        d["exhausted"] = ",".join(self.exhausted) or "none"
        if not include_time:
            d.pop("wall_time")
        else:
            d["wall_time"] = f"{self.wall_time:.3f}"
        return "".join(f"{k}={v}\n" for k, v in d.items())


@dataclass
class SearchResult:
    records: list
    stats: SearchStats


class Completions(list):
    """List of completed point sets; ``incomplete`` is set when the node
    budget ran out."""

    def __init__(self, sets=(), incomplete=False, nodes=0):
        super().__init__(sets)
        self.incomplete = incomplete
        self.nodes = nodes


# --- orbit unions ----------------------------------------------------------

def orbit_combinations(sizes, target: int, budget: int | None = None) -> list:
    """Index subsets of ``sizes`` summing exactly to ``target``.

    Depth-first over sizes sorted descending (ties by index), including an
    orbit before excluding it; at most ``budget`` subsets are returned.
    """
    if any(s <= 0 for s in sizes):
        raise ValueError("orbit sizes must be positive")
    order = sorted(range(len(sizes)), key=lambda i: (-sizes[i], i))
    srt = [sizes[i] for i in order]
    reach = _suffix_sums(srt, target)
    out = []
    chosen = []

    def dfs(i, total):
        if budget is not None and len(out) >= budget:
            return
        if total == target:
            out.append(tuple(sorted(order[j] for j in chosen)))
            return
        if not reach[i] >> (target - total) & 1:
            return
        if total + srt[i] <= target:
            chosen.append(i)
            dfs(i + 1, total + srt[i])
            chosen.pop()
        dfs(i + 1, total)

    dfs(0, 0)
    return out


def _suffix_sums(sizes, target):
    """``out[i]`` is a bitset of the subset sums (up to ``target``) of
    ``sizes[i:]``."""
    mask = (1 << (target + 1)) - 1
    out = [1] * (len(sizes) + 1)
    for i in range(len(sizes) - 1, -1, -1):
        out[i] = out[i + 1] | (out[i + 1] << sizes[i]) & mask
    return out


def _sum_reachable(sizes, target):
    return bool(_suffix_sums(sizes, target)[0] >> target & 1)


# --- completion --------------------------------------------------------------

class _Budget(Exception):
    pass


def complete_partial(plane: IncidenceStructure, partial=(), forbidden=(),
                     budget: int | None = None, target: int | None = None) -> Completions:
    """All unitals containing ``partial`` and avoiding ``forbidden``.

    Branches on the lowest undecided point (include first).  Propagation:
    a line reaching ``q + 1`` points closes and its other points are
    excluded; a line with at least two points must still be fillable to
    ``q + 1``; an empty line keeps at least one candidate; a chosen point lies
    on at most ``q^2`` lines with two or more chosen points; forced points
    are included at once.  ``budget`` caps the number of search nodes.
    """
    q = unital_q(plane)
    k = q + 1
    target = q ** 3 + 1 if target is None else target
    partial = point_set(plane, partial)
    forbidden = point_set(plane, forbidden)
    if set(partial) & set(forbidden):
        raise ValueError("partial and forbidden sets overlap")
    c = line_counts(plane, partial) if partial else np.zeros(plane.b, dtype=int)
    if np.any(c > k):
        raise ValueError("a line already meets the partial set in more than q + 1 points")
    if len(partial) > target:
        raise ValueError("partial set larger than the target")

    lines_of = plane.point_blocks()
    pts_of = plane.blocks
    v, b = plane.v, plane.b
    max_sec = q * q

    # state: per point 0 undecided, 1 chosen, 2 excluded
    state = [0] * v
    cnt = [0] * b
    free = [len(blk) for blk in pts_of]
    sec = [0] * v
    out = Completions()
    nodes = [0]

    class _Fail(Exception):
        pass

    def include(st, p, queue):
        st["state"][p] = 1
        st["n_in"] += 1
        st["n_free"] -= 1
        cn, fr, sc, s = st["cnt"], st["free"], st["sec"], st["state"]
        mine = 0
        for ln in lines_of[p]:
            cn[ln] += 1
            fr[ln] -= 1
            if cn[ln] > k:
                raise _Fail
            if cn[ln] >= 2:
                mine += 1
            if cn[ln] == 2:
                for x in pts_of[ln]:
                    if x != p and s[x] == 1:
                        sc[x] += 1
                        if sc[x] > max_sec:
                            raise _Fail
            if cn[ln] == k:
                for x in pts_of[ln]:
                    if s[x] == 0:
                        queue.append((x, 2))
            elif cn[ln] >= 2 and cn[ln] + fr[ln] == k:
                for x in pts_of[ln]:
                    if s[x] == 0:
                        queue.append((x, 1))
        sc[p] = mine
        if mine > max_sec:
            raise _Fail

    def exclude(st, p, queue):
        st["state"][p] = 2
        st["n_free"] -= 1
        cn, fr, s = st["cnt"], st["free"], st["state"]
        for ln in lines_of[p]:
            fr[ln] -= 1
            if cn[ln] >= 2 and cn[ln] + fr[ln] < k:
                raise _Fail
            if cn[ln] == 0 and fr[ln] == 0:
                raise _Fail
            if cn[ln] == 0 and fr[ln] == 1 or cn[ln] >= 2 and cn[ln] + fr[ln] == k:
                for x in pts_of[ln]:
                    if s[x] == 0:
                        queue.append((x, 1))

    def propagate(st, queue):
        s = st["state"]
        while queue:
            x, what = queue.pop()
            if s[x] == what:
                continue
            if s[x] != 0:
                raise _Fail
            if what == 1:
                include(st, x, queue)
            else:
                exclude(st, x, queue)
            if st["n_in"] > target or st["n_in"] + st["n_free"] < target:
                raise _Fail

    def copy(st):
        return {"state": st["state"][:], "cnt": st["cnt"][:], "free": st["free"][:],
                "sec": st["sec"][:], "n_in": st["n_in"], "n_free": st["n_free"]}

    def finished(st):
        return all(x == 1 or x == k for x in st["cnt"])

    def search(st):
        nodes[0] += 1
        if budget is not None and nodes[0] > budget:
            raise _Budget
        if st["n_in"] == target:
            if finished(st):
                out.append(tuple(i for i, x in enumerate(st["state"]) if x == 1))
            return
        s = st["state"]
        p = next((i for i in range(v) if s[i] == 0), None)
        if p is None:
            return
        for what in (1, 2):
            child = copy(st)
            try:
                propagate(child, [(p, what)])
            except _Fail:
                continue
            search(child)

    root = {"state": state, "cnt": cnt, "free": free, "sec": sec, "n_in": 0, "n_free": v}
    try:
        queue = [(p, 1) for p in partial] + [(p, 2) for p in forbidden]
        for item in queue[::-1]:
            propagate(root, [item])
        search(root)
    except _Fail:
        pass
    except _Budget:
        out.incomplete = True
    out.nodes = min(nodes[0], budget) if budget is not None else nodes[0]
    return out


# --- pipeline --------------------------------------------------------------

def collineation_chain(plane: IncidenceStructure,
                       budget: int = DEFAULT_NODE_BUDGET) -> GroupChain:
    """Schreier-Sims chain of the collineation group acting on points."""
    res = automorphism_group(to_incidence_graph(plane), budget)
    gens = [Permutation(g.images[: plane.v]) for g in res.generators]
    return schreier_sims(gens, degree=plane.v)


def _union_work(args):
    """Orbit unions for one subgroup: returns (unital point sets, stats)."""
    plane, orbs, config, q, target, min_partial, deadline = args
    k = q + 1
    m = plane.incidence_matrix()
    order = sorted(range(len(orbs)), key=lambda i: (-len(orbs[i]), orbs[i][0]))
    orbs = [orbs[i] for i in order]
    vecs = [m[:, o].sum(axis=1) for o in orbs]
    sizes = [len(o) for o in orbs]
    reach = _suffix_sums(sizes, target)
    st = {"orbit_nodes": 0, "line_pruned": 0, "candidates_tested": 0,
          "completions_run": 0, "completion_nodes": 0, "incomplete_completions": 0,
          "exhausted": set()}
    found = []
    partials = []
    chosen = []

    class _Stop(Exception):
        pass

    def dfs(i, total, lc):
        st["orbit_nodes"] += 1
        if st["orbit_nodes"] > config.combination_budget:
            st["exhausted"].add("combination")
            raise _Stop
        if total == target:
            st["candidates_tested"] += 1
            if np.all((lc == 1) | (lc == k)):
                found.append(tuple(sorted(x for j in chosen for x in orbs[j])))
            return
        if total >= min_partial and len(partials) < config.completions_per_subgroup:
            partials.append(tuple(chosen))
        if not reach[i] >> (target - total) & 1:
            return
        if total + sizes[i] <= target:
            nxt = lc + vecs[i]
            if nxt.max() > k:
                st["line_pruned"] += 1
            else:
                chosen.append(i)
                dfs(i + 1, total + sizes[i], nxt)
                chosen.pop()
        dfs(i + 1, total, lc)

    try:
        dfs(0, 0, np.zeros(plane.b, dtype=np.int64))
    except _Stop:
        pass
    for combo in partials:
        if time.monotonic() > deadline:
            st["exhausted"].add("time")
            break
        pts = [x for j in combo for x in orbs[j]]
        res = complete_partial(plane, pts, (), config.completion_budget, target)
        st["completions_run"] += 1
        st["completion_nodes"] += res.nodes
        if res.incomplete:
            st["incomplete_completions"] += 1
            st["exhausted"].add("completion")
        found.extend(res)
    return found, st


def find_unitals(plane: IncidenceStructure, chain: GroupChain | None,
                 config: SearchConfig = SearchConfig()) -> SearchResult:
    """Search ``plane`` for unitals; see the module docstring.

    ``chain`` is the collineation group on points (``None`` computes it).
    Records are sorted by (stabilizer order, certificate).
    """
    t0 = time.monotonic()
    deadline = t0 + config.time_budget
    q = unital_q(plane)
    target = config.target or q ** 3 + 1
    min_partial = config.min_partial
    if min_partial is None:
        min_partial = round(45 * target / 65)
    stats = SearchStats()
    candidates = []
    exhausted = set()

    if config.exhaustive:
        if config.subgroup_budget > 0:
            stats.subgroups_available = stats.subgroups_tried = 1
            res = complete_partial(plane, (), (), config.completion_budget, target)
            stats.completions_run = 1
            stats.completion_nodes = res.nodes
            if res.incomplete:
                stats.incomplete_completions = 1
                exhausted.add("completion")
            candidates.extend(res)
    elif config.subgroup_budget > 0:
        if chain is None:
            chain = collineation_chain(plane)
        seeds = subgroup_seeds(chain, SeedConfig(seed=config.seed, samples=config.samples))
        ranked = []
        for idx, gens in enumerate(seeds):
            orbs = orbits([g.images for g in gens], plane.v)
            if _sum_reachable([len(o) for o in orbs], target):
                ranked.append((len(orbs), idx, orbs))
        ranked.sort(key=lambda t: t[:2])
        stats.subgroups_available = len(ranked)
        if len(ranked) > config.subgroup_budget:
            exhausted.add("subgroup")
        jobs = [(plane, orbs, config, q, target, min_partial, deadline)
                for _, _, orbs in ranked[: config.subgroup_budget]]
        if config.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(config.workers) as ex:
                results = list(ex.map(_union_work, jobs))
        else:
            results = []
            for job in jobs:
                if time.monotonic() > deadline:
                    exhausted.add("time")
                    break
                results.append(_union_work(job))
        stats.subgroups_tried = len(results)
        for found, st in results:
            candidates.extend(found)
            exhausted |= st.pop("exhausted")
            for key, val in st.items():
                setattr(stats, key, getattr(stats, key) + val)

    distinct = sorted(set(candidates))
    stats.unital_sets = len(distinct)
    by_cert = {}
    for pts in distinct:
        # independent re-check before anything is emitted
        if not is_unital(plane, pts):
            raise AssertionError("search produced a non-unital")
        order, cert, _ = unital_invariants(plane, pts, config.self_dual)
        if cert not in by_cert:
            by_cert[cert] = UnitalRecord(plane.name, pts, order, cert, "search",
                                         config.self_dual)
    records = sorted(by_cert.values(),
                     key=lambda r: (r.stabilizer_order, r.certificate.data))
    stats.classes = len(records)
    stats.exhausted = sorted(exhausted)
    stats.wall_time = time.monotonic() - t0
    return SearchResult(records, stats)
