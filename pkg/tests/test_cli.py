import random
from pathlib import Path

import pytest

from unital16.cli import main
from unital16.finite_geometry import build_pg2, hermitian_unital
from unital16.formats import parse_unital_catalog, write_royle, write_unital_catalog, CatalogRecord


@pytest.fixture
def ws(tmp_path, monkeypatch):
    monkeypatch.setenv("UNITAL_WORKSPACE", str(tmp_path / "ws"))
    return tmp_path / "ws"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_and_group(ws, capsys):
    code, out, _ = run(capsys, "construct", "16")
    assert code == 0 and "v=273 b=273 k=17" in out
    assert (ws / "planes" / "pg2_16.plane").is_file()
    code, out, _ = run(capsys, "group", "--plane", "pg2_4")
    assert code == 0 and "group order 120960" in out
    code, out, _ = run(capsys, "group", "--plane", "pg2_4", "--self-dual-coloring")
    assert "241920" in out


def test_ingest_and_truncated(ws, tmp_path, capsys):
    f = tmp_path / "p4.txt"
    f.write_text(write_royle(build_pg2(4)))
    code, out, _ = run(capsys, "ingest", str(f), "--kind", "royle", "--order", "4",
                       "--name", "four", "--group")
    assert code == 0 and "group order" in out and "120960" in out
    code, out, _ = run(capsys, "group", "--plane", "four")
    assert "120960" in out
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(f.read_text().splitlines()[:10]))
    code, _, err = run(capsys, "ingest", str(bad), "--kind", "royle", "--order", "4")
    assert code != 0 and "error" in err


def test_verify_hermitian_and_random(ws, capsys):
    code, out, _ = run(capsys, "verify", "--plane", "pg2_16", "--hermitian")
    assert code == 0 and "PASS hermitian" in out and "order=249600" in out
    rnd = random.Random(1)
    labels = " ".join(str(x + 1) for x in rnd.sample(range(273), 65))
    code, out, _ = run(capsys, "verify", "--plane", "pg2_16", "--points", labels)
    assert code == 1 and "not a unital" in out and "line sizes" in out


def test_verify_catalog(ws, tmp_path, capsys):
    h = tuple(x + 1 for x in hermitian_unital(4))
    cat = tmp_path / "c.cat"
    cat.write_text(write_unital_catalog([CatalogRecord("pg2_16", 1, 249600, h),
                                         CatalogRecord("pg2_16", 2, 5, h)]))
    code, out, _ = run(capsys, "verify", "--plane", "pg2_16", str(cat))
    assert code == 1 and out.count("PASS") == 1 and "recorded=5" in out
    empty = tmp_path / "e.cat"
    empty.write_text("")
    code, out, _ = run(capsys, "verify", "--plane", "pg2_16", str(empty))
    assert code == 0 and "0 set(s)" in out


def test_report_tables(ws, capsys):
    code, out, _ = run(capsys, "report", "--table", "planes")
    assert code == 0 and "pp-16-1" in out and "34217164800" in out
    assert out.strip().splitlines()[-1].split()[-1] == "256"
    code, out, _ = run(capsys, "report", "--table", "counts")
    last = out.strip().splitlines()[-1].split()
    assert last[0] == "TOTAL" and last[-1] == "95"
    code, out, _ = run(capsys, "report", "--paper-diff")
    assert "discrepancy" in out and "royle total: catalog 148, table 149" in out


def test_report_empty_workspace(ws, capsys):
    code, out, _ = run(capsys, "report", "--scope", "workspace")
    assert code == 0 and len(out.strip().splitlines()) == 1


def test_search_and_classify(ws, capsys):
    code, out, _ = run(capsys, "search", "--plane", "pg2_4", "--exhaustive")
    assert code == 0 and "1 class(es)" in out
    cat = ws / "catalogs" / "pg2_4.search.cat"
    first = cat.read_bytes()
    recs = parse_unital_catalog(first.decode(), size=9, max_label=21)
    assert len(recs) == 1 and recs[0].stabilizer_order == 432
    code, _, _ = run(capsys, "search", "--plane", "pg2_4", "--exhaustive")
    assert cat.read_bytes() == first
    code, out, _ = run(capsys, "classify", "--plane", "pg2_4", str(cat), str(cat))
    assert code == 0 and "2 unital(s), 1 class(es)" in out
    code, out, _ = run(capsys, "report", "--scope", "workspace")
    assert "pg2_4" in out and "432x1" in out


def test_search_zero_budget(ws, capsys):
    code, out, _ = run(capsys, "search", "--plane", "pg2_4", "--budget", "0")
    assert code == 0
    assert (ws / "catalogs" / "pg2_4.search.cat").read_text() == ""
    assert "classes=0" in (ws / "catalogs" / "pg2_4.search.stats").read_text()


def test_unknown_plane(ws, capsys):
    code, _, err = run(capsys, "group", "--plane", "nope")
    assert code == 2 and "unknown plane" in err
