from __future__ import annotations

import itertools
from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from tropsecant.geometry import (
    TYPE_1,
    TYPE_2,
    UNIT_TRIANGLE,
    AffineFunctional,
    affine_dim,
    canonical_shape,
    cell_type,
    decreasing_shift,
    induce_partition_lp,
    rank,
    separating_functional,
    strictly_convex,
    winners,
)
from tropsecant.models import ModelSpec, Variety, build_model, signed_permutations

small = st.integers(-4, 4)
points3 = st.lists(st.tuples(small, small, small), min_size=1, max_size=6)


@settings(max_examples=100, deadline=None)
@given(points3)
def test_affine_dim_matches_sympy(pts):
    p0 = pts[0]
    diffs = [[a - b for a, b in zip(p, p0)] for p in pts[1:]]
    expected = sympy.Matrix(diffs).rank() if diffs else 0
    assert affine_dim(pts) == expected


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=4, max_size=4), min_size=1, max_size=5))
def test_rank_matches_sympy(rows):
    assert rank(rows) == sympy.Matrix(rows).rank()


def test_affine_dim_edge_cases():
    assert affine_dim([]) == -1
    assert affine_dim([(3, 1)]) == 0
    assert affine_dim([(0, 0), (1, 1), (2, 2)]) == 1


def test_winners_exclude_ties():
    f = AffineFunctional((Fraction(1), Fraction(0)), Fraction(0))
    g = AffineFunctional((Fraction(0), Fraction(1)), Fraction(0))
    won = winners([f, g], [(0, 0), (1, 0), (0, 1), (1, 1)])
    assert won[0] == {(0, 1)}
    assert won[1] == {(1, 0)}


def _partitions_into_triples(pts):
    pts = list(pts)
    if not pts:
        yield []
        return
    first, rest = pts[0], pts[1:]
    for pair in itertools.combinations(rest, 2):
        remaining = [p for p in rest if p not in pair]
        for tail in _partitions_into_triples(remaining):
            yield [(first,) + pair] + tail


def test_three_by_three_grid_tops_out_at_eight():
    grid = build_model(ModelSpec(Variety.P1P1, (2, 2))).points
    triples = list(_partitions_into_triples(grid))
    assert len(triples) == 280
    # value 9 with three functionals needs three non-collinear triples
    full = [t for t in triples if all(affine_dim(part) == 2 for part in t)]
    assert full
    assert all(induce_partition_lp(t) is None for t in full)
    # value 8 is attained by a triangle, a quadrilateral and a segment: 3 + 3 + 2
    eight = [((0, 0), (0, 1), (1, 0)), ((0, 2), (1, 1), (1, 2), (2, 2)), ((2, 0), (2, 1))]
    funcs = induce_partition_lp(eight)
    assert funcs is not None
    assert sum(1 + affine_dim(w) for w in winners(funcs, grid)) == 8


def test_four_triples_of_the_three_by_two_grid_are_inducible():
    parts = [
        [(0, 0), (0, 1), (1, 0)],
        [(0, 2), (1, 1), (1, 2)],
        [(2, 0), (2, 1), (3, 0)],
        [(2, 2), (3, 1), (3, 2)],
    ]
    funcs = induce_partition_lp(parts)
    assert funcs is not None
    grid = build_model(ModelSpec(Variety.P1P1, (3, 2))).points
    assert [set(w) for w in winners(funcs, grid)] == [set(p) for p in parts]


def test_non_inducible_configurations():
    # two crossing diagonals of a square cannot be separated
    assert separating_functional([(0, 0), (1, 1)], [(0, 1), (1, 0)]) is None
    # a part surrounding another one
    ring = [(x, y) for x in range(3) for y in range(3) if (x, y) != (1, 1)]
    assert induce_partition_lp([ring, [(1, 1)]]) is None


def test_separating_functional_signs():
    below, above = [(0, 0), (0, 1)], [(2, 0), (2, 1)]
    f = separating_functional(below, above)
    assert all(f(p) < 0 for p in below) and all(f(p) > 0 for p in above)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(small, small, small), min_size=1, max_size=4), st.tuples(small, small, small))
def test_decreasing_shift_preserves_comparisons(normals, probe):
    funcs = [AffineFunctional(tuple(Fraction(a) for a in n), Fraction(i)) for i, n in enumerate(normals)]
    z = (1, -1, 1)
    shifted = decreasing_shift(funcs, [z])
    step = tuple(a + b for a, b in zip(probe, z))
    for f, g in zip(funcs, shifted):
        assert g(step) < g(probe)
    for (f1, g1), (f2, g2) in itertools.combinations(zip(funcs, shifted), 2):
        assert f1(probe) - f2(probe) == g1(probe) - g2(probe)


def test_strict_convexity():
    assert strictly_convex([(1, -1, 1)])
    assert strictly_convex([(1, 0), (0, 1)])
    assert not strictly_convex([(1, 0), (-1, 0)])
    assert not strictly_convex([(1, 0), (0, 1), (-1, -1)])


def test_cell_types():
    assert cell_type(TYPE_1) == 1
    assert cell_type(TYPE_2) == 2
    assert cell_type(UNIT_TRIANGLE) == 0
    assert cell_type([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 1)]) is None
    assert cell_type([(0, 0), (2, 0), (0, 1)]) is None


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(signed_permutations(3)), st.tuples(small, small, small), st.sampled_from([TYPE_1, TYPE_2]))
def test_canonical_shape_is_invariant(mat, shift, shape):
    moved = [tuple(sum(a * x for a, x in zip(row, p)) + t for row, t in zip(mat, shift)) for p in shape]
    assert canonical_shape(moved) == canonical_shape(shape)
