from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropsecant.certificates import (
    BELOW_EXPECTED,
    NON_DEFECTIVE,
    Certificate,
    CertificateError,
    Leaf,
    Node,
    TieError,
    bound_rows,
    certificate_from_json,
    certificate_to_json,
    functionals_from_tree,
    glue_stack,
    glue_transform,
    glue_translate,
    make_certificate,
    verify_certificate,
    verify_partition,
)
from tropsecant.geometry import AffineFunctional, affine_dim, induce_partition_lp, winners
from tropsecant.models import AffineMap, ModelSpec, Variety, build_model, expected_cone_dim, signed_permutations
from tropsecant.search import cut_normals, search_certificate


def cut(normal, offset):
    return AffineFunctional(tuple(Fraction(a) for a in normal), Fraction(offset))


def grid_32_tree():
    # three cuts splitting the 4 x 3 grid into four triangles
    return Node(
        cut((1, 0), Fraction(-3, 2)),
        Node(cut((1, 1), Fraction(-3, 2)), Leaf(0), Leaf(1)),
        Node(cut((1, 1), Fraction(-7, 2)), Leaf(2), Leaf(3)),
    )


def random_tree(rng, points):
    normals = cut_normals(len(points[0]))
    counter = [0]

    def build(pts):
        vals = None
        if len(pts) > 1 and rng.random() > 0.3:
            normal = rng.choice(normals)
            vals = sorted({sum(a * x for a, x in zip(normal, p)) for p in pts})
        if not vals or len(vals) < 2:
            counter[0] += 1
            return Leaf(counter[0] - 1)
        v = vals[rng.randrange(len(vals) - 1)]
        c = cut(normal, -Fraction(2 * v + 1, 2))
        return Node(c, build([p for p in pts if c(p) < 0]), build([p for p in pts if c(p) > 0]))

    return build(list(points))


def test_three_cut_picture_of_the_three_by_two_grid():
    model = build_model(ModelSpec(Variety.P1P1, (3, 2)))
    cert = make_certificate(model.points, grid_32_tree(), model.spec)
    rep = verify_certificate(cert)
    assert rep.part_values == [3, 3, 3, 3]
    assert [r.lower_bound for r in rep.rows] == [3, 6, 9, 12]
    assert rep.non_defective and rep.verdict == "non-defective"


def test_parts_ordered_full_first():
    model = build_model(ModelSpec(Variety.P1P1, (2, 2)))
    tree = Node(cut((1, 0), Fraction(-3, 2)), Node(cut((0, 1), Fraction(-3, 2)), Leaf(5), Leaf(7)), Leaf(9))
    cert = make_certificate(model.points, tree, model.spec)
    vals = cert.part_values()
    assert vals == sorted(vals, key=lambda v: v < 3) and vals[0] == 3
    assert cert.deficient_parts() == [i for i, v in enumerate(vals) if v < 3]


def test_tie_on_a_cut_is_rejected():
    model = build_model(ModelSpec(Variety.P1P1, (2, 2)))
    tree = Node(cut((1, 0), -1), Leaf(0), Leaf(1))
    with pytest.raises(TieError):
        make_certificate(model.points, tree, model.spec)


def test_tampered_parts_are_rejected():
    model = build_model(ModelSpec(Variety.P1P1, (3, 2)))
    cert = make_certificate(model.points, grid_32_tree(), model.spec)
    a, b = cert.parts[0], cert.parts[1]
    swapped = (tuple(sorted(a[:2] + b[:1])), tuple(sorted(b[1:] + a[2:]))) + cert.parts[2:]
    with pytest.raises(CertificateError):
        verify_certificate(Certificate(cert.spec, cert.points, cert.tree, swapped))
    with pytest.raises(CertificateError):
        verify_certificate(Certificate(cert.spec, cert.points, cert.tree, cert.parts[:3]))


def test_bound_rows_prefix_sums():
    rows = bound_rows([3, 3, 2], 2, 8)
    assert [r.lower_bound for r in rows] == [3, 6, 8]
    assert [r.verdict for r in rows] == [NON_DEFECTIVE] * 3
    rows = bound_rows([3, 3, 2, 1], 2, 9)
    assert [r.lower_bound for r in rows] == [3, 6, 8, 9]
    assert rows[2].verdict == BELOW_EXPECTED


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=8))
def test_bounds_never_exceed_expected_for_independent_parts(values):
    # values of affinely independent parts of a 3-dimensional model
    dim_v = sum(values)
    for row in bound_rows(values, 3, dim_v):
        assert row.lower_bound <= min(4 * row.k, dim_v)


_SPECS = [
    ModelSpec(Variety.P1P1, (3, 3)), ModelSpec(Variety.P2P1, (2, 1)), ModelSpec(Variety.FLAG, (1, 2)),
    ModelSpec(Variety.P1P1P1, (2, 1, 1)), ModelSpec(Variety.P2, (3,)),
]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(_SPECS))
def test_random_trees_verify_and_respect_expected(seed, spec):
    model = build_model(spec)
    cert = make_certificate(model.points, random_tree(random.Random(seed), model.points), spec)
    rep = verify_certificate(cert)
    for row in rep.rows:
        assert row.lower_bound <= expected_cone_dim(model, row.k)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(_SPECS))
def test_functionals_from_tree_induce_the_parts(seed, spec):
    model = build_model(spec)
    cert = make_certificate(model.points, random_tree(random.Random(seed), model.points), spec)
    funcs = functionals_from_tree(cert)
    assert [set(w) for w in winners(funcs, model.points)] == [set(p) for p in cert.parts]


def test_fewer_functionals_keep_full_winner_sets():
    # keep only k full parts: the LP still separates them and each winner set stays full-dimensional
    model = build_model(ModelSpec(Variety.P2P1, (2, 1)))
    cert = search_certificate(model).certificate
    full = [p for p in cert.parts if affine_dim(p) == model.dim_x]
    rng = random.Random(3)
    for k in range(1, len(full) + 1):
        chosen = rng.sample(full, k)
        funcs = induce_partition_lp(chosen)
        assert funcs is not None
        for part, won in zip(chosen, winners(funcs, model.points)):
            assert set(part) <= won
            assert affine_dim(won) == model.dim_x


def test_json_round_trip_and_format():
    model = build_model(ModelSpec(Variety.P1P1, (3, 2)))
    cert = make_certificate(model.points, grid_32_tree(), model.spec)
    text = certificate_to_json(cert)
    payload = json.loads(text)
    assert payload["model"] == {"variety": "p1p1", "degrees": [3, 2]}
    assert payload["tree"]["cut"] == ["1", "0", "-3/2"]
    assert sorted(i for part in payload["parts"] for i in part) == list(range(12))
    back = certificate_from_json(text)
    assert back == cert
    assert certificate_to_json(back) == text


def test_json_without_model_keeps_points():
    pts = [(5, 5), (6, 5), (5, 6), (9, 9)]
    cert = make_certificate(pts, Node(cut((1, 1), -15), Leaf(0), Leaf(1)))
    back = certificate_from_json(certificate_to_json(cert))
    assert back.points == cert.points and back.parts == cert.parts


def test_verify_partition_uses_the_lp():
    model = build_model(ModelSpec(Variety.P1P1, (1, 1)))
    rep = verify_partition(model, [[(0, 0), (0, 1), (1, 0)], [(1, 1)]])
    assert rep.part_values == [3, 1]
    with pytest.raises(CertificateError):
        verify_partition(model, [[(0, 0), (1, 1)], [(0, 1), (1, 0)]])


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(signed_permutations(2)), st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_transform_preserves_values(mat, shift):
    model = build_model(ModelSpec(Variety.P1P1, (3, 2)))
    cert = make_certificate(model.points, grid_32_tree(), model.spec)
    moved = glue_transform(cert, AffineMap(mat, shift))
    assert sorted(verify_certificate(moved).part_values) == sorted(verify_certificate(cert).part_values)
    assert {AffineMap(mat, shift)(p) for p in cert.points} == set(moved.points)


def _pictures():
    """Small verified pictures on grids of height 3 (P1xP1 with e = 2)."""
    out = []
    for d in range(1, 6):
        model = build_model(ModelSpec(Variety.P1P1, (d, 2)))
        out.append(search_certificate(model).certificate)
    return out


PICTURES = _pictures()


@pytest.mark.parametrize("i", range(len(PICTURES)))
@pytest.mark.parametrize("j", range(len(PICTURES)))
def test_glue_combination_rule(i, j):
    lower, upper = PICTURES[i], PICTURES[j]
    width = max(p[0] for p in lower.points) + 1
    moved = glue_translate(upper, (width, 0))
    combined = glue_stack(lower, moved, axis=0)
    rep_l, rep_u = verify_certificate(lower), verify_certificate(moved)
    direct = verify_certificate(combined)
    rule = rep_l.non_defective and rep_u.non_defective and (rep_l.n_deficient + rep_u.n_deficient <= 1)
    assert direct.non_defective == rule
    assert sorted(direct.part_values) == sorted(rep_l.part_values + rep_u.part_values)


def test_glue_rejects_overlap_and_bad_cut():
    pic = PICTURES[1]
    with pytest.raises(CertificateError):
        glue_stack(pic, pic, axis=0)
    with pytest.raises(CertificateError):
        glue_stack(pic, glue_translate(pic, (10, 0)), axis=1)
