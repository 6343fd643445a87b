"""Readers and writers for plane files and unital catalogs.

Plane encodings:

``native``     ``plane <name> v=<v> b=<b>`` then one line per block of
               1-based, sorted, space-separated point labels.
``royle``      one line per block, ``n + 1`` labels, 0-based.
``moorhouse``  as ``royle`` but 1-based.
``dreadnaut``  the static graph subset of nauty's dreadnaut language
               (``$=``, ``n=``, ``g`` with adjacency lists, ``f=[...]``).

Unital catalogs use the appendix layout: section headers naming a plane,
``Unitals No <k>``, ``|Aut(G,M65)|= <order>`` and the point labels, written
16 per row.
"""

from __future__ import annotations

import hashlib
import os
import re
import tempfile
import threading
import urllib.request
from dataclasses import dataclass
import json
from pathlib import Path

from .incidence import ColoredGraph, IncidenceStructure, validate_design

__all__ = [
    "ParseError",
    "CatalogError",
    "PlaneValidationError",
    "PlaneFile",
    "CatalogRecord",
    "parse_native",
    "write_native",
    "parse_royle",
    "parse_moorhouse",
    "write_royle",
    "parse_dreadnaut",
    "write_dreadnaut",
    "incidence_from_graph",
    "parse_unital_catalog",
    "write_unital_catalog",
    "load_plane",
    "fetch_cached",
    "PLANE_KINDS",
    "EMBEDDED_CATALOGS",
    "embedded_catalog",
    "embedded_text",
    "reference_tables",
]

PLANE_KINDS = ("royle", "moorhouse", "dreadnaut", "native")


class ParseError(ValueError):
    """Malformed input; ``line`` is 1-based, ``position`` a character offset."""

    def __init__(self, message: str, line: int | None = None,
                 position: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"offset {position}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.position = position


class PlaneValidationError(ValueError):
    pass


# --- native ---------------------------------------------------------------

_NATIVE_HEADER = re.compile(r"^plane (\S+) v=(\d+) b=(\d+)$")


def parse_native(text: str) -> IncidenceStructure:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty input", line=1)
    m = _NATIVE_HEADER.match(lines[0].rstrip("\r"))
    if not m:
        raise ParseError(f"bad header {lines[0]!r}", line=1)
    name, v, b = m.group(1), int(m.group(2)), int(m.group(3))
    body = lines[1:]
    if len(body) != b:
        raise ParseError(f"expected {b} block lines, found {len(body)}",
                         line=len(lines))
    blocks = [_read_labels(ln, i + 2, v, base=1) for i, ln in enumerate(body)]
    return IncidenceStructure(v, blocks, name=name)


def _read_labels(line, lineno, v, base):
    out = []
    for tok in line.split():
        try:
            x = int(tok)
        except ValueError:
            raise ParseError(f"not an integer: {tok!r}", line=lineno) from None
        if not base <= x < v + base:
            raise ParseError(f"label {x} outside [{base}, {v + base - 1}]",
                             line=lineno)
        out.append(x - base)
    if len(set(out)) != len(out):
        raise ParseError("duplicate label in block", line=lineno)
    return out


def write_native(s: IncidenceStructure) -> str:
    name = re.sub(r"\s+", "_", s.name) or "unnamed"
    rows = [f"plane {name} v={s.v} b={s.b}"]
    rows += [" ".join(str(x + 1) for x in blk) for blk in s.blocks]
    return "\n".join(rows) + "\n"


# --- Royle / Moorhouse line lists -----------------------------------------

def _parse_line_list(text, base, order, name):
    v = order * order + order + 1
    k = order + 1
    blocks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) != k:
            raise ParseError(f"expected {k} labels per line, found {len(toks)}",
                             line=lineno)
        blocks.append(_read_labels(line, lineno, v, base))
    if len(blocks) != v:
        raise ParseError(f"expected {v} lines of {k} labels, found {len(blocks)}")
    return IncidenceStructure(v, blocks, name=name)


def parse_royle(text: str, order: int = 16, name: str = "royle") -> IncidenceStructure:
    """Lines of ``order + 1`` labels numbered from 0."""
    return _parse_line_list(text, 0, order, name)


def parse_moorhouse(text: str, order: int = 16,
                    name: str = "moorhouse") -> IncidenceStructure:
    """Lines of ``order + 1`` labels numbered from 1."""
    return _parse_line_list(text, 1, order, name)


def write_royle(s: IncidenceStructure, base: int = 0) -> str:
    return "".join(" ".join(str(x + base) for x in blk) + "\n" for blk in s.blocks)


# --- dreadnaut --------------------------------------------------------------

_TOKEN = re.compile(r'\s+|"[^"]*"|\$=|n=|f=|-?\d+|[:;,.\[\]|]|g|\S')


def parse_dreadnaut(text: str) -> ColoredGraph:
    """Read a static dreadnaut graph definition.

    Supported: ``$=<base>``, ``n=<N>``, ``g`` followed by adjacency lists
    (``v:`` selects a vertex, ``;`` advances to the next one, ``.`` ends the
    graph) and ``f=[cell|cell|...]`` where cells hold labels or ``a:b``
    ranges.  Quoted strings are comments.  Anything else is rejected.
    """
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        tok = m.group(0)
        if not (tok.isspace() or tok.startswith('"')):
            toks.append((tok, pos))
        pos = m.end()
    i = 0
    base = 0
    n = None
    edges = None
    cells = None

    def expect_int(j, what):
        if j >= len(toks) or not re.fullmatch(r"-?\d+", toks[j][0]):
            at = toks[j][1] if j < len(toks) else len(text)
            raise ParseError(f"expected {what}", position=at)
        return int(toks[j][0])

    while i < len(toks):
        tok, at = toks[i]
        if tok == "$=":
            base = expect_int(i + 1, "label base")
            i += 2
        elif tok == "n=":
            n = expect_int(i + 1, "vertex count")
            if n < 0:
                raise ParseError("negative vertex count", position=at)
            i += 2
        elif tok == "g":
            if n is None:
                raise ParseError("'g' before 'n='", position=at)
            edges, i = _read_graph(toks, i + 1, n, base, len(text))
        elif tok == "f=":
            if n is None:
                raise ParseError("'f=' before 'n='", position=at)
            cells, i = _read_partition(toks, i + 1, n, base, len(text))
        else:
            raise ParseError(f"unsupported directive {tok!r}", position=at)
    if n is None:
        raise ParseError("missing 'n='", position=len(text))
    colors = [0] * n
    if cells is not None:
        listed = set()
        nonempty = [c for c in cells if c]
        for ci, cell in enumerate(nonempty):
            for x in cell:
                if x in listed:
                    raise ParseError(f"vertex {x + base} in two cells")
                listed.add(x)
                colors[x] = ci
        if len(listed) < n:
            for x in range(n):
                if x not in listed:
                    colors[x] = len(nonempty)
    return ColoredGraph(n, edges or [], colors)


def _read_graph(toks, i, n, base, end):
    edges = []
    cur = 0
    while True:
        if i >= len(toks):
            raise ParseError("unterminated adjacency list (missing '.')",
                             position=end)
        tok, at = toks[i]
        if tok == ".":
            return edges, i + 1
        if tok == ";":
            cur += 1
            i += 1
            continue
        if tok == ",":
            i += 1
            continue
        if re.fullmatch(r"-?\d+", tok):
            x = int(tok) - base
            if not 0 <= x < n:
                raise ParseError(f"vertex {tok} out of range", position=at)
            if i + 1 < len(toks) and toks[i + 1][0] == ":":
                cur = x
                i += 2
                continue
            if not 0 <= cur < n:
                raise ParseError(f"adjacency list for vertex {cur + base} "
                                 f"beyond n={n}", position=at)
            if x == cur:
                raise ParseError(f"self-loop at {tok}", position=at)
            edges.append((cur, x))
            i += 1
            continue
        raise ParseError(f"unexpected {tok!r} in adjacency list", position=at)


def _read_partition(toks, i, n, base, end):
    if i >= len(toks) or toks[i][0] != "[":
        at = toks[i][1] if i < len(toks) else end
        raise ParseError("expected '[' after 'f='", position=at)
    i += 1
    cells = [[]]
    while True:
        if i >= len(toks):
            raise ParseError("unterminated partition (missing ']')", position=end)
        tok, at = toks[i]
        if tok == "]":
            return cells, i + 1
        if tok == "|":
            cells.append([])
            i += 1
        elif tok == ",":
            i += 1
        elif re.fullmatch(r"-?\d+", tok):
            a = int(tok) - base
            b = a
            if i + 2 < len(toks) and toks[i + 1][0] == ":":
                if not re.fullmatch(r"-?\d+", toks[i + 2][0]):
                    raise ParseError("bad range in partition", position=toks[i + 2][1])
                b = int(toks[i + 2][0]) - base
                i += 2
            for x in range(a, b + 1):
                if not 0 <= x < n:
                    raise ParseError(f"vertex {x + base} out of range", position=at)
                cells[-1].append(x)
            i += 1
        else:
            raise ParseError(f"unexpected {tok!r} in partition", position=at)


def write_dreadnaut(g: ColoredGraph, base: int = 0) -> str:
    out = [f"n={g.n} $={base} g"]
    for v, nb in enumerate(g.neighbors):
        later = [w for w in nb if w > v]
        out.append(f"{v + base}: " + " ".join(str(w + base) for w in later) + ";")
    out[-1] = out[-1][:-1] + "."
    if g.n_colors > 1:
        cells = [[v for v in range(g.n) if g.colors[v] == c]
                 for c in range(g.n_colors)]
        out.append("f=[" + " | ".join(" ".join(str(v + base) for v in c)
                                      for c in cells) + "]")
    return "\n".join(out) + "\n"


def incidence_from_graph(g: ColoredGraph, v: int | None = None,
                         name: str = "dreadnaut") -> IncidenceStructure:
    """Read a bipartite incidence graph whose first ``v`` vertices are the
    points (default: half the vertices)."""
    if v is None:
        if g.n % 2:
            raise ValueError("odd vertex count; give the number of points")
        v = g.n // 2
    blocks = []
    for u in range(g.n):
        nb = g.neighbors[u]
        if u < v:
            if any(w < v for w in nb):
                raise ValueError(f"point vertex {u} adjacent to a point")
        else:
            if any(w >= v for w in nb):
                raise ValueError(f"block vertex {u} adjacent to a block")
            blocks.append(nb)
    return IncidenceStructure(v, blocks, name=name)


# --- plane files --------------------------------------------------------------

@dataclass(frozen=True)
class PlaneFile:
    source_kind: str
    structure: IncidenceStructure
    origin: str
    digest: str = ""


def parse_plane(text: str, kind: str, name: str = "plane",
                order: int = 16) -> IncidenceStructure:
    if kind == "native":
        return parse_native(text)
    if kind == "royle":
        return parse_royle(text, order, name)
    if kind == "moorhouse":
        return parse_moorhouse(text, order, name)
    if kind == "dreadnaut":
        return incidence_from_graph(parse_dreadnaut(text), name=name)
    raise ValueError(f"unknown plane kind {kind!r}; expected one of {PLANE_KINDS}")


def load_plane(path, kind: str, name: str | None = None,
               order: int = 16) -> PlaneFile:
    """Parse a plane file and check it is a 2-(v, k, 1) design."""
    path = Path(path)
    data = path.read_bytes()
    text = data.decode("ascii")
    s = parse_plane(text, kind, name or path.stem, order)
    if name and kind == "native":
        s = IncidenceStructure(s.v, s.blocks, name=name)
    rep = validate_design(s, 2, None, 1)
    if not rep.valid or s.order is None:
        raise PlaneValidationError(f"{path}: {rep.summary()}")
    return PlaneFile(kind, s, str(path), hashlib.sha256(data).hexdigest())


_cache_lock = threading.Lock()


def fetch_cached(url: str, cache_dir, timeout: float = 60.0) -> Path:
    """Download ``url`` once into ``cache_dir``; returns the local copy.

    Files are stored under their SHA-256 digest and written atomically.
    """
    cache_dir = Path(cache_dir)
    index = cache_dir / "index.tsv"
    with _cache_lock:
        if index.exists():
            for row in index.read_text().splitlines():
                u, digest, fname = row.split("\t")
                if u == url and (cache_dir / fname).exists():
                    return cache_dir / fname
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        data = resp.read()
    digest = hashlib.sha256(data).hexdigest()
    fname = f"{digest[:16]}-{Path(url.split('?')[0]).name or 'download'}"
    with _cache_lock:
        cache_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write(cache_dir / fname, data)
        with open(index, "a") as fh:
            fh.write(f"{url}\t{digest}\t{fname}\n")
    return cache_dir / fname


def _atomic_write(path: Path, data: bytes):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


# --- unital catalogs ------------------------------------------------------

@dataclass(frozen=True)
class CatalogRecord:
    plane_name: str
    unital_index: int
    stabilizer_order: int
    points: tuple
    plane_group_order: int | None = None


@dataclass(frozen=True)
class CatalogError:
    line: int
    plane_name: str | None
    unital_index: int | None
    message: str

    def __str__(self):
        who = f"{self.plane_name} No {self.unital_index}" if self.unital_index else "catalog"
        return f"line {self.line}: {who}: {self.message}"


class CatalogParseError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(map(str, self.errors[:5]))
                         + (" ..." if len(self.errors) > 5 else ""))


_UNITAL_HEAD = re.compile(r"^(?:unitals?\s*no|brresh)\s*=?\s*(\d+)$", re.I)
_ORDER_LINE = re.compile(
    r"^\$?\s*\|\s*(?:\\text\{\s*)?Aut\s*\}?\s*\(\s*G\s*,\s*M65\s*\)\s*\|\s*=\s*"
    r"([0-9]+(?:\.[0-9]*)?)\s*\$?$")
_NATIVE_SECTION = re.compile(r"^plane\s+(\S+)(?:\s+group order\s+(\d+))?$")
_GROUP_ORDER = re.compile(
    r"(?:group order\s*=?\s*|AutG\}?\s*\|\s*=\s*|Aut\(G546\)\|\s*=\s*)(\d+)", re.I)


def _section_header(line):
    m = _NATIVE_SECTION.match(line)
    if m:
        return m.group(1), int(m.group(2)) if m.group(2) else None
    low = line.lower()
    if not ("graph" in low or ".da" in low or "pp16" in low or "pp-16" in low
            or "group order" in low or "autg" in low):
        return None
    g = _GROUP_ORDER.search(line)
    order = int(g.group(1)) if g else None
    m = re.search(r",\s*(\S+)\s+graph\b", line)
    if m:
        return m.group(1), order
    head = line.split(",")[0].strip()
    name = re.split(r"[\\/ ]", head)[-1]
    name = re.sub(r"\.DA\w*$", "", name, flags=re.I)
    return name, order


def parse_unital_catalog(text: str, errors: list | None = None, size: int = 65,
                         max_label: int = 273) -> list:
    """Read catalog records.

    Bad records (non-integral order, wrong point count, repeated or
    out-of-range labels) are skipped and described in ``errors``; when
    ``errors`` is not given, a :class:`CatalogParseError` listing all of them
    is raised after the whole text has been read.
    """
    collected = []
    records = []
    plane, gorder = None, None
    cur = None

    def close():
        nonlocal cur
        if cur is None:
            return
        lineno, idx, order, pts = cur
        cur = None
        problem = None
        if order is None:
            problem = "missing |Aut(G,M65)| line"
        elif isinstance(order, str):
            problem = f"non-integral order {order}"
        elif len(pts) != size:
            problem = f"{len(pts)} labels, expected {size}"
        elif len(set(pts)) != len(pts):
            problem = "repeated label"
        elif any(not 1 <= x <= max_label for x in pts):
            problem = f"label outside [1, {max_label}]"
        if problem:
            collected.append(CatalogError(lineno, plane, idx, problem))
        else:
            records.append(CatalogRecord(plane or "", idx, order, tuple(pts), gorder))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        toks = line.split()
        if all(t.isdigit() for t in toks):
            if cur is None:
                collected.append(CatalogError(lineno, plane, None,
                                              "labels outside a unital record"))
            else:
                cur[3].extend(int(t) for t in toks)
            continue
        m = _UNITAL_HEAD.match(line)
        if m:
            close()
            cur = [lineno, int(m.group(1)), None, []]
            continue
        m = _ORDER_LINE.match(line)
        if m:
            if cur is None:
                collected.append(CatalogError(lineno, plane, None,
                                              "order line outside a unital record"))
                continue
            val = m.group(1)
            whole, _, frac = val.partition(".")
            cur[2] = int(whole) if not frac.strip("0") else val
            continue
        sec = _section_header(line)
        if sec is not None:
            close()
            plane, gorder = sec
            continue
        collected.append(CatalogError(lineno, plane, cur[1] if cur else None,
                                      f"unrecognized line {line[:40]!r}"))
    close()
    if errors is not None:
        errors.extend(collected)
    elif collected:
        raise CatalogParseError(collected)
    return records


def write_unital_catalog(records) -> str:
    out = []
    section = None
    for r in records:
        name = re.sub(r"\s+", "_", r.plane_name) or "unnamed"
        key = (name, r.plane_group_order)
        if key != section:
            section = key
            head = f"plane {name}"
            if r.plane_group_order is not None:
                head += f" group order {r.plane_group_order}"
            out.append(head)
        out.append(f"Unitals No {r.unital_index}")
        out.append(f"|Aut(G,M65)|= {r.stabilizer_order}")
        pts = list(r.points)
        for i in range(0, len(pts), 16):
            out.append(" ".join(map(str, pts[i:i + 16])))
    return "\n".join(out) + "\n" if out else ""


# --- embedded catalogs -------------------------------------------------------

EMBEDDED_CATALOGS = ("royle", "moorhouse", "dreadnaut")


class ManifestError(RuntimeError):
    pass


def _data_file(name: str) -> bytes:
    from importlib.resources import files
    return files("unital16").joinpath("data", name).read_bytes()


def embedded_text(name: str) -> str:
    """Text of a bundled data file, checked against the SHA-256 manifest."""
    manifest = {}
    for row in _data_file("MANIFEST.sha256").decode("ascii").splitlines():
        digest, fname = row.split(None, 1)
        manifest[fname] = digest
    if name not in manifest:
        raise KeyError(f"{name} is not a bundled data file")
    data = _data_file(name)
    if hashlib.sha256(data).hexdigest() != manifest[name]:
        raise ManifestError(f"{name} does not match its manifest digest")
    return data.decode("ascii")


def embedded_catalog(kind: str, errors: list | None = None) -> list:
    """Bundled unital catalog for ``kind`` in ``EMBEDDED_CATALOGS``."""
    if kind not in EMBEDDED_CATALOGS:
        raise ValueError(f"unknown catalog {kind!r}; expected one of {EMBEDDED_CATALOGS}")
    return parse_unital_catalog(embedded_text(f"{kind}.cat"), errors)


def reference_tables() -> dict:
    return json.loads(embedded_text("reference_tables.json"))
