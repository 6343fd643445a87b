"""Command-line interface: ``unital16 <command> ...``.

The workspace root is ``--workspace``, else ``$UNITAL_WORKSPACE``, else
``./unital-workspace``.  Planes are stored in native format under
``planes/``, search and classification output under ``catalogs/``, timing
logs under ``logs/``.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import time
from collections import Counter
from math import isqrt
from pathlib import Path

from . import __version__
from .canon import DEFAULT_NODE_BUDGET, automorphism_group
from .finite_geometry import ConfigurationError, build_pg2, hermitian_unital
from .formats import (EMBEDDED_CATALOGS, PLANE_KINDS, CatalogParseError, CatalogRecord,
                      ParseError, PlaneValidationError, _atomic_write, embedded_catalog,
                      fetch_cached, load_plane, parse_unital_catalog, reference_tables,
                      write_native, write_unital_catalog)
from .incidence import IncidenceStructure, dual, line_profile, to_incidence_graph, validate_design
from .permgroup import ResourceError
from .search import SearchConfig, find_unitals
from .unitals import classify_nonisomorphic, is_unital, tangent_secant_counts, unital_invariants

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def workspace_root(args) -> Path:
    return Path(args.workspace or os.environ.get("UNITAL_WORKSPACE") or "unital-workspace")


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.()+,-]", "-", name)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, text.encode("ascii"))


def _log(args, name, line):
    path = workspace_root(args) / "logs" / f"{name}.log"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {line}\n")


def resolve_plane(args) -> IncidenceStructure:
    name = args.plane
    path = Path(name)
    if path.is_file():
        return load_plane(path, args.kind or "native", order=args.order).structure
    stored = workspace_root(args) / "planes" / f"{_safe(name)}.plane"
    if stored.is_file():
        return load_plane(stored, "native").structure
    m = re.fullmatch(r"pg2_(\d+)", name)
    if m:
        return build_pg2(int(m.group(1)))
    raise CliError(f"unknown plane {name!r}: not a file, not stored in "
                   f"{stored.parent}, not pg2_<q>")


def _plane_group(args, plane, marked=None):
    g = to_incidence_graph(plane, marked, self_dual=args.self_dual_coloring)
    return automorphism_group(g, args.budget_nodes).order


def _coloring(args):
    return "self-dual" if args.self_dual_coloring else "points/lines"


def _store(args, plane: IncidenceStructure):
    rep = validate_design(plane)
    path = workspace_root(args) / "planes" / f"{_safe(plane.name)}.plane"
    _write(path, write_native(plane))
    print(f"stored {plane.name} -> {path}")
    print(f"v={plane.v} b={plane.b} k={rep.k} {rep.summary()}")
    if args.group:
        print(f"group order ({_coloring(args)} coloring): {_plane_group(args, plane)}")


def cmd_construct(args):
    plane = build_pg2(args.q)
    if args.name:
        plane = IncidenceStructure(plane.v, plane.blocks, name=args.name)
    _store(args, plane)
    return EXIT_OK


def cmd_ingest(args):
    src = args.source
    if re.match(r"https?://", src):
        src = fetch_cached(src, workspace_root(args) / "cache")
        print(f"cached copy: {src}")
    pf = load_plane(src, args.kind, name=args.name, order=args.order)
    print(f"sha256 {pf.digest}")
    _store(args, pf.structure)
    return EXIT_OK


def _load_catalogs(specs, size, max_label):
    """Records from catalog paths or ``embedded:<kind>``; returns (source, record)
    pairs and a list of error strings."""
    out, errors = [], []
    for spec in specs:
        errs = []
        if spec.startswith("embedded:"):
            kind = spec.split(":", 1)[1]
            if kind not in EMBEDDED_CATALOGS:
                raise CliError(f"unknown embedded catalog {kind!r}")
            recs = embedded_catalog(kind, errs)
        else:
            text = Path(spec).read_text(encoding="ascii")
            recs = parse_unital_catalog(text, errs, size=size, max_label=max_label)
        errors += [f"{spec}: {e}" for e in errs]
        out += [(spec, r) for r in recs]
    return out, errors


def _unital_size(plane):
    q = isqrt(plane.order or 0)
    return q ** 3 + 1


def _select(pairs, args):
    if args.select:
        pairs = [(s, r) for s, r in pairs if r.plane_name == args.select]
    return pairs


def cmd_verify(args):
    plane = resolve_plane(args)
    size = _unital_size(plane)
    sets = []
    errors = []
    if args.hermitian:
        q0 = isqrt(plane.order or 0)
        if not plane.name.startswith("pg2_") or q0 * q0 != plane.order:
            raise CliError("--hermitian needs a constructed pg2_<q^2> plane")
        sets.append(("hermitian", None, hermitian_unital(q0)))
    if args.points:
        labels = [int(t) for t in re.split(r"[\s,]+", args.points.strip()) if t]
        sets.append(("points", None, tuple(x - 1 for x in labels)))
    pairs, errors = _load_catalogs(args.catalog, size, plane.v)
    for src, r in _select(pairs, args):
        sets.append((f"{src}:{r.plane_name}:{r.unital_index}", r.stabilizer_order,
                     tuple(x - 1 for x in r.points)))
    for e in errors:
        print(f"ERROR {e}")
    failures = len(errors)
    for label, recorded, pts in sets:
        if any(not 0 <= x < plane.v for x in pts) or len(set(pts)) != len(pts):
            print(f"FAIL {label}: labels out of range or repeated")
            failures += 1
            continue
        if not is_unital(plane, pts):
            prof = line_profile(plane, pts)
            print(f"FAIL {label}: not a unital ({len(pts)} points; line sizes "
                  + " ".join(f"{s}:{c}" for s, c in prof.items()) + ")")
            failures += 1
            continue
        t, s = tangent_secant_counts(plane, pts)
        order, _, _ = unital_invariants(plane, pts, args.self_dual_coloring,
                                        args.budget_nodes)
        ok = recorded is None or recorded == order
        status = "PASS" if ok else "FAIL"
        note = "" if recorded is None else f" recorded={recorded}"
        print(f"{status} {label}: unital tangents={t} secants={s} order={order}{note}")
        failures += not ok
    print(f"{len(sets)} set(s), {failures} failure(s), coloring={_coloring(args)}")
    return EXIT_FAIL if failures else EXIT_OK


# --- reports ------------------------------------------------------------------

def _counts(records):
    return Counter(r.plane_name for r in records)


def report_counts(ref, royle, moor):
    rows = [f"{'plane':<10} {'royle':>6} {'moorhouse':>10} {'literature':>11}"]
    cr, cm = _counts(royle), _counts(moor)
    planes = list(ref["unital_counts"])
    planes = list(dict.fromkeys(planes + list(cr) + list(cm)))
    for p in planes:
        lit = ref["unital_counts"].get(p, {}).get("literature", "-")
        rows.append(f"{p:<10} {cr.get(p, 0):>6} {cm.get(p, 0):>10} {lit:>11}")
    rows.append(f"{'TOTAL':<10} {len(royle):>6} {len(moor):>10} "
                f"{ref['unital_count_totals']['literature']:>11}")
    return "\n".join(rows)


def report_orders(records):
    rows = [f"{'plane':<10} orders by unital number"]
    by = {}
    for r in records:
        by.setdefault(r.plane_name, []).append(r)
    for p, rs in by.items():
        rs.sort(key=lambda r: r.unital_index)
        rows.append(f"{p:<10} " + " ".join(str(r.stabilizer_order) for r in rs))
    return "\n".join(rows)


def report_planes(ref, dread):
    groups = {d["plane"]: d["group_order"] for d in ref["dreadnaut_planes"]}
    cd = _counts(dread)
    heads = {}
    for r in dread:
        if r.plane_group_order is not None:
            heads[r.plane_name] = r.plane_group_order
    rows = [f"{'plane':<10} {'|Aut(G)|':>12} {'unitals':>8}"]
    for p in list(groups) + [p for p in cd if p not in groups]:
        rows.append(f"{p:<10} {heads.get(p, groups.get(p, '-')):>12} {cd.get(p, 0):>8}")
    rows.append(f"{'Total':<10} {'':>12} {len(dread):>8}")
    return "\n".join(rows)


def paper_diff(ref, royle, moor, dread):
    out = []
    cr, cm, cd = _counts(royle), _counts(moor), _counts(dread)
    for p, c in ref["unital_counts"].items():
        if cr.get(p, 0) != c["royle"]:
            out.append(f"royle {p}: catalog {cr.get(p, 0)}, table {c['royle']}")
        if cm.get(p, 0) != c["moorhouse"]:
            out.append(f"moorhouse {p}: catalog {cm.get(p, 0)}, table {c['moorhouse']}")
    tot = ref["unital_count_totals"]
    if len(royle) != tot["royle"]:
        out.append(f"royle total: catalog {len(royle)}, table {tot['royle']}")
    if len(moor) != tot["moorhouse"]:
        out.append(f"moorhouse total: catalog {len(moor)}, table {tot['moorhouse']}")
    for p, orders in ref["royle_stabilizer_orders"].items():
        got = {r.unital_index: r.stabilizer_order for r in royle if r.plane_name == p}
        for i, o in enumerate(orders, start=1):
            if got.get(i) != o:
                out.append(f"royle {p} No {i}: catalog order {got.get(i, '-')}, table {o}")
    for d in ref["dreadnaut_planes"]:
        if cd.get(d["plane"], 0) != d["unitals"]:
            out.append(f"dreadnaut {d['plane']}: catalog {cd.get(d['plane'], 0)}, "
                       f"table {d['unitals']}")
    if len(dread) != ref["dreadnaut_total"]:
        out.append(f"dreadnaut total: catalog {len(dread)}, table {ref['dreadnaut_total']}")
    return out


def cmd_report(args):
    if args.scope == "workspace":
        cats = sorted((workspace_root(args) / "catalogs").glob("*.cat"))
        print(f"{'catalog':<40} {'plane':<12} {'unitals':>8} orders")
        missing = 0
        for path in cats:
            errs = []
            recs = parse_unital_catalog(path.read_text(), errs, size=_guess_size(path),
                                        max_label=10 ** 9)
            missing += len(errs)
            by = {}
            for r in recs:
                by.setdefault(r.plane_name, []).append(r.stabilizer_order)
            for p, orders in by.items():
                ms = " ".join(f"{o}x{c}" for o, c in sorted(Counter(orders).items()))
                print(f"{path.name:<40} {p:<12} {len(orders):>8} {ms}")
        if missing:
            print(f"{missing} unreadable record(s)")
        return EXIT_OK
    ref = reference_tables()
    royle = embedded_catalog("royle")
    moor = embedded_catalog("moorhouse")
    dread = embedded_catalog("dreadnaut")
    blocks = {"counts": report_counts(ref, royle, moor),
              "orders": report_orders(royle),
              "planes": report_planes(ref, dread)}
    which = list(blocks) if args.table == "all" else [args.table]
    print("\n\n".join(blocks[w] for w in which))
    if args.paper_diff:
        diffs = paper_diff(ref, royle, moor, dread)
        print(f"\n{len(diffs)} discrepancy(ies) between bundled catalogs and tables")
        for d in diffs:
            print(f"  {d}")
    return EXIT_OK


def _guess_size(path):
    # catalogs written by this tool carry sets of one size
    text = path.read_text()
    m = re.findall(r"\|= \d+\n((?:[\d ]+\n)+)", text)
    return len(m[0].split()) if m else 65


# --- search / classify / group ----------------------------------------------

def cmd_search(args):
    plane = resolve_plane(args)
    if args.dual:
        plane = dual(plane)
    b = args.budget
    cfg = SearchConfig(
        seed=args.seed,
        subgroup_budget=b if b is not None else args.budget_subgroups,
        combination_budget=b if b is not None else args.budget_combinations,
        completion_budget=b if b is not None else args.budget_completion,
        time_budget=args.budget_time,
        exhaustive=args.exhaustive,
        self_dual=args.self_dual_coloring,
        workers=args.workers)
    res = find_unitals(plane, None, cfg)
    recs = [CatalogRecord(plane.name, i, r.stabilizer_order,
                          tuple(x + 1 for x in r.points))
            for i, r in enumerate(res.records, start=1)]
    out_dir = workspace_root(args) / "catalogs"
    cat_path = out_dir / f"{_safe(plane.name)}.search.cat"
    _write(cat_path, write_unital_catalog(recs))
    _write(out_dir / f"{_safe(plane.name)}.search.stats", res.stats.to_text())
    _log(args, "search", f"plane={plane.name} seed={args.seed} "
                         f"classes={len(recs)} wall_time={res.stats.wall_time:.3f}")
    print(res.stats.to_text(), end="")
    print(f"{len(recs)} class(es) -> {cat_path}")
    return EXIT_OK


def cmd_classify(args):
    plane = resolve_plane(args)
    size = _unital_size(plane)
    pairs, errors = _load_catalogs(args.catalog, size, plane.v)
    pairs = _select(pairs, args)
    for e in errors:
        print(f"ERROR {e}")
    good, failures = [], len(errors)
    for src, r in pairs:
        pts = tuple(x - 1 for x in r.points)
        if max(pts) >= plane.v or not is_unital(plane, pts):
            print(f"FAIL {src}:{r.plane_name}:{r.unital_index}: not a unital of {plane.name}")
            failures += 1
        else:
            good.append((src, r, pts))
    classes = classify_nonisomorphic(plane, [p for _, _, p in good],
                                     self_dual=args.self_dual_coloring,
                                     budget=args.budget_nodes, workers=args.workers)
    reps = []
    for k, c in enumerate(classes, start=1):
        names = [f"{good[i][0]}:{good[i][1].plane_name}:{good[i][1].unital_index}"
                 for i in c.members]
        print(f"class {k}: order={c.stabilizer_order} size={len(c.members)} "
              f"digest={c.certificate.digest()[:16]} members={' '.join(names)}")
        first = good[c.members[0]]
        reps.append(CatalogRecord(plane.name, k, c.stabilizer_order, first[1].points))
    path = workspace_root(args) / "catalogs" / f"{_safe(plane.name)}.classes.cat"
    _write(path, write_unital_catalog(reps))
    print(f"{len(good)} unital(s), {len(classes)} class(es), {failures} failure(s), "
          f"coloring={_coloring(args)}")
    return EXIT_FAIL if failures else EXIT_OK


def cmd_group(args):
    plane = resolve_plane(args)
    marked = None
    if args.points:
        marked = [int(t) - 1 for t in re.split(r"[\s,]+", args.points.strip()) if t]
    order = _plane_group(args, plane, marked)
    print(f"{plane.name}: group order {order} ({_coloring(args)} coloring"
          f"{', marked set' if marked else ''})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unital16",
                                     description="Projective planes of order 16 and their unitals")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--workspace", help="workspace root (default $UNITAL_WORKSPACE)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plane=True):
        if plane:
            p.add_argument("--plane", required=True,
                           help="stored plane name, pg2_<q>, or a plane file")
            p.add_argument("--kind", choices=PLANE_KINDS, help="format when --plane is a file")
            p.add_argument("--order", type=int, default=16, help="plane order for royle/moorhouse files")
        p.add_argument("--self-dual-coloring", action="store_true",
                       help="one color for points and lines, so dualities count")
        p.add_argument("--budget-nodes", type=int, default=DEFAULT_NODE_BUDGET,
                       help="search-tree node budget for group computations")

    p = sub.add_parser("construct", help="build PG(2,q) and store it")
    p.add_argument("q", type=int)
    p.add_argument("--name")
    p.add_argument("--group", action="store_true", help="also print the graph group order")
    common(p, plane=False)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("ingest", help="parse, validate and store a plane file or URL")
    p.add_argument("source")
    p.add_argument("--kind", choices=PLANE_KINDS, required=True)
    p.add_argument("--name")
    p.add_argument("--order", type=int, default=16)
    p.add_argument("--group", action="store_true")
    common(p, plane=False)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("verify", help="check point sets against a plane")
    common(p)
    p.add_argument("catalog", nargs="*", help="catalog files or embedded:<kind>")
    p.add_argument("--select", help="only records of this plane section")
    p.add_argument("--points", help="1-based labels of one set")
    p.add_argument("--hermitian", action="store_true", help="the Hermitian unital of pg2_<q>")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="print count and order tables")
    p.add_argument("--scope", choices=("embedded", "workspace"), default="embedded")
    p.add_argument("--table", choices=("counts", "orders", "planes", "all"), default="all")
    p.add_argument("--paper-diff", action="store_true",
                   help="list differences between bundled catalogs and reference tables")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("search", help="orbit-union unital search")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, help="set every count budget at once")
    p.add_argument("--budget-subgroups", type=int, default=SearchConfig.subgroup_budget)
    p.add_argument("--budget-combinations", type=int, default=SearchConfig.combination_budget)
    p.add_argument("--budget-completion", type=int, default=SearchConfig.completion_budget)
    p.add_argument("--budget-time", type=float, default=SearchConfig.time_budget)
    p.add_argument("--exhaustive", action="store_true", help="complete from the empty set")
    p.add_argument("--dual", action="store_true", help="search the dual plane")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("classify", help="isomorphism classes of catalog unitals")
    common(p)
    p.add_argument("catalog", nargs="+")
    p.add_argument("--select")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("group", help="automorphism group order of a plane graph")
    common(p)
    p.add_argument("--points", help="1-based labels to mark")
    p.set_defaults(func=cmd_group)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ParseError, CatalogParseError, PlaneValidationError,
            ConfigurationError, ResourceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
