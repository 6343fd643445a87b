import random

import pytest

from oracles import (collineation_stabilizer_oracle, line_scan_is_unital, pg2_oracle,
                     pgammal3_order)
from unital16.finite_geometry import (GF, build_pg2, collineation, hermitian_unital,
                                      point_index, random_collineation)
from unital16.formats import embedded_catalog
from unital16.incidence import IncidenceStructure, relabel_structure
from unital16.permgroup import schreier_sims, setwise_stabilizer_oracle
from unital16.unitals import (classify_nonisomorphic, cross_representation_match, is_line_unital,
                              is_unital, make_record, stabilizer_order, tangent_secant_counts)

P16 = build_pg2(16)
H16 = hermitian_unital(4)


def metz_unital(alpha=1, beta=2):
    """Orthogonal Buekenhout-Metz set y = alpha x^2 + beta x^5 + r, r in GF(4)."""
    f = GF(16)
    sub = [x for x in range(16) if f.pow(x, 4) == x]
    pts = {point_index(16, (0, 1, 0))}
    for x in range(16):
        base = f.add[f.mul[alpha][f.pow(x, 2)]][f.mul[beta][f.pow(x, 5)]]
        for r in sub:
            pts.add(point_index(16, (x, f.add[base][r], 1)))
    return sorted(pts)


BM16 = metz_unital()


def test_hermitian_is_unital():
    assert is_unital(P16, H16)
    assert line_scan_is_unital(P16.blocks, H16, 4)


def test_metz_is_unital():
    assert is_unital(P16, BM16) and line_scan_is_unital(P16.blocks, BM16, 4)


def test_line_plus_padding_is_not_unital():
    line = set(P16.blocks[0])
    pad = [x for x in range(273) if x not in line][:48]
    assert not is_unital(P16, sorted(line) + pad)


def test_wrong_size_and_domain():
    assert not is_unital(P16, H16[:-1])
    with pytest.raises(ValueError):
        is_unital(build_pg2(8), range(9))
    with pytest.raises(ValueError):
        is_unital(IncidenceStructure(4, [(0, 1)]), [0])
    with pytest.raises(ValueError):
        is_unital(P16, [0, 0])


def test_line_unital_through_duality():
    # polarity (point i <-> line i) composed with a collineation
    c = random_collineation(16, random.Random(7))
    lines = [c[x] for x in H16]
    assert is_line_unital(P16, lines)
    # independent check: every point lies on 1 or 5 of the chosen lines
    chosen = [P16.blocks[j] for j in lines]
    for p in range(273):
        assert sum(p in blk for blk in chosen) in (1, 5)


def test_line_unital_negative_and_empty():
    rnd = random.Random(11)
    assert not is_line_unital(P16, rnd.sample(range(273), 65))
    assert not is_line_unital(P16, [])


def test_tangent_secant_counts():
    assert tangent_secant_counts(P16, H16) == (65, 208)
    assert tangent_secant_counts(P16, BM16) == (65, 208)
    assert tangent_secant_counts(build_pg2(4), hermitian_unital(2)) == (9, 12)
    with pytest.raises(ValueError):
        tangent_secant_counts(P16, range(65))


def test_one_tangent_per_point():
    u = set(H16)
    tangents = [blk for blk in P16.blocks if len(u.intersection(blk)) == 1]
    for p in H16:
        assert sum(p in blk for blk in tangents) == 1


def test_stabilizer_orders_pg16():
    assert stabilizer_order(P16, H16) == 249600
    assert stabilizer_order(P16, BM16) == 768


def test_hermitian_pg4_matches_oracles():
    s = build_pg2(4)
    h = hermitian_unital(2)
    pts, _ = pg2_oracle(4)
    expect = collineation_stabilizer_oracle(4, pts, h)
    gens = [collineation(4, [[0, 1, 0], [0, 0, 1], [1, 0, 0]]),
            collineation(4, [[1, 1, 0], [0, 1, 0], [0, 0, 1]]),
            collineation(4, [[2, 0, 0], [0, 1, 0], [0, 0, 1]]),
            collineation(4, [[1, 0, 0], [0, 1, 0], [0, 0, 1]], frobenius=1)]
    chain = schreier_sims(gens, s.v)
    assert stabilizer_order(s, h) == expect == setwise_stabilizer_oracle(chain, h) == 432


def test_self_dual_flag_on_empty_set():
    assert stabilizer_order(build_pg2(4), [], self_dual=True) == 2 * pgammal3_order(4)


def test_lagrange_and_relabel_invariance():
    s = build_pg2(4)
    total = pgammal3_order(4)
    rnd = random.Random(5)
    perm = list(range(21))
    rnd.shuffle(perm)
    t = relabel_structure(s, perm)
    for size in (1, 2, 3, 4, 5, 7, 9, 12):
        pts = rnd.sample(range(21), size)
        o = stabilizer_order(s, pts)
        assert total % o == 0
        assert stabilizer_order(t, [perm[x] for x in pts]) == o


def test_classify_collineation_images():
    c = random_collineation(16, random.Random(3))
    image = [c[x] for x in H16]
    classes = classify_nonisomorphic(P16, [H16, BM16, image, H16])
    assert [cl.stabilizer_order for cl in classes] == [768, 249600]
    herm = classes[1]
    assert herm.members == (0, 2, 3)
    sets = [H16, BM16, image, H16]
    for w, m in zip(herm.witnesses, herm.members):
        assert sorted(w.images[x] for x in H16) == sorted(sets[m])
        assert {tuple(sorted(w.images[x] for x in b)) for b in P16.blocks} == set(P16.blocks)


def test_classify_rejects_non_unital():
    with pytest.raises(ValueError):
        classify_nonisomorphic(P16, [range(65)])


def test_cross_representation_match():
    rnd = random.Random(9)
    perm = list(range(273))
    rnd.shuffle(perm)
    copy = relabel_structure(P16, perm, name="copy")
    r1 = make_record(P16, H16)
    r2 = make_record(copy, [perm[x] for x in H16], provenance="appendix")
    assert cross_representation_match(r1, r2)
    assert not cross_representation_match(r1, make_record(P16, BM16))
    with pytest.raises(ValueError):
        make_record(P16, range(65))


def test_embedded_records_shape():
    for kind in ("royle", "moorhouse", "dreadnaut"):
        for r in embedded_catalog(kind):
            assert len(set(r.points)) == 65 and min(r.points) >= 1 and max(r.points) <= 273
