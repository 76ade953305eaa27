"""Exact polyhedral primitives: affine dimension, inducibility of partitions by
affine-linear functions, strict convexity of cones.

All arithmetic is over ``Fraction``; no routine here takes a tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from . import lp
from .models import Point, signed_permutations


def rank(rows: Iterable[Sequence]) -> int:
    """Rank of a rational matrix by fraction-exact Gaussian elimination."""
    mat = [[Fraction(v) for v in row] for row in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        prow = mat[r]
        for i in range(r + 1, len(mat)):
            f = mat[i][c]
            if f:
                f = f / prow[c]
                mat[i] = [a - f * b for a, b in zip(mat[i], prow)]
        r += 1
        if r == len(mat):
            break
    return r


def affine_dim(points: Iterable[Sequence[int]]) -> int:
    """Dimension of the affine span; -1 for the empty set."""
    pts = [tuple(p) for p in points]
    if not pts:
        return -1
    p0 = pts[0]
    return rank([[a - b for a, b in zip(p, p0)] for p in pts[1:]])


def affinely_independent(points: Sequence[Sequence[int]]) -> bool:
    return affine_dim(points) == len(points) - 1


@dataclass(frozen=True)
class AffineFunctional:
    """f(x) = normal . x + offset."""

    normal: tuple[Fraction, ...]
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(Fraction(a) for a in self.normal))
        object.__setattr__(self, "offset", Fraction(self.offset))

    def __call__(self, p: Sequence) -> Fraction:
        return sum((a * x for a, x in zip(self.normal, p)), self.offset)

    def __add__(self, other: "AffineFunctional") -> "AffineFunctional":
        return AffineFunctional(
            tuple(a + b for a, b in zip(self.normal, other.normal)),
            self.offset + other.offset,
        )

    def scale(self, s) -> "AffineFunctional":
        return AffineFunctional(tuple(a * s for a in self.normal), self.offset * s)

    def __neg__(self) -> "AffineFunctional":
        return self.scale(-1)

    @classmethod
    def zero(cls, dim: int) -> "AffineFunctional":
        return cls((Fraction(0),) * dim, Fraction(0))


def winners(functionals: Sequence[AffineFunctional], points: Iterable[Sequence]) -> list[set]:
    """For each functional, the points where it is strictly below all others."""
    out = [set() for _ in functionals]
    for p in points:
        vals = [f(p) for f in functionals]
        lo = min(vals)
        idx = [i for i, v in enumerate(vals) if v == lo]
        if len(idx) == 1:
            out[idx[0]].add(tuple(p))
    return out


def _margin_lp(parts, pairs, dim: int):
    """Margin LP restricted to the constraints f_i(p) < f_j(p) for (p, i, j) in ``pairs``."""
    k = len(parts)
    # unknowns per functional: shifted coefficients u = coef + 1 in [0, 2]
    width = dim + 1
    nvars = k * width + 1
    eps = k * width
    A, b = [], []
    for p, i, j in pairs:
        ph = p + (1,)
        row = [0] * nvars
        for t, x in enumerate(ph):
            row[i * width + t] += x
            row[j * width + t] -= x
        row[eps] = 1
        A.append(row)
        b.append(0)
    for v in range(k * width):
        row = [0] * nvars
        row[v] = 1
        A.append(row)
        b.append(2)
    row = [0] * nvars
    row[eps] = 1
    A.append(row)
    b.append(1)
    c = [0] * nvars
    c[eps] = 1
    res = lp.maximize(c, A, b, stop_above=0)
    if res.status == lp.INFEASIBLE or res.objective is None or res.objective <= 0:
        return None
    x = res.x
    return [
        AffineFunctional(tuple(x[i * width + t] - 1 for t in range(dim)), x[i * width + dim] - 1)
        for i in range(k)
    ]


def induce_partition_lp(parts: Sequence[Iterable[Sequence[int]]]) -> list[AffineFunctional] | None:
    """Find affine f_1..f_k with f_i < f_j on part i for all j != i, or None.

    Maximises a margin eps over functionals normalised by
    ||(normal, offset)||_inf <= 1; the partition is inducible iff the
    optimum is positive.  Constraints are generated lazily: the first LP
    only compares each point's part with the parts of its lattice
    neighbours, and violated comparisons are added until the witness
    passes the exact check.  A relaxation without positive margin proves
    the full problem has none.
    """
    parts = [[tuple(p) for p in part] for part in parts]
    owner: dict = {}
    for i, part in enumerate(parts):
        for p in part:
            if p in owner:
                raise ValueError(f"parts are not disjoint: {p} repeated")
            owner[p] = i
    k = len(parts)
    if not owner:
        raise ValueError("no points to partition")
    dim = len(next(iter(owner)))
    if k == 1:
        return [AffineFunctional.zero(dim)]

    steps = [s for s in itertools.product((-1, 0, 1), repeat=dim) if any(s)]
    pairs = set()
    for p, i in owner.items():
        for s in steps:
            j = owner.get(tuple(a + b for a, b in zip(p, s)))
            if j is not None and j != i:
                pairs.add((p, i, j))
    if not pairs:
        pairs = {(p, i, j) for p, i in owner.items() for j in range(k) if j != i}
    while True:
        funcs = _margin_lp(parts, sorted(pairs), dim)
        if funcs is None:
            return None
        missing = {
            (p, i, j)
            for p, i in owner.items()
            for j in range(k)
            if j != i and funcs[i](p) >= funcs[j](p)
        }
        if not missing:
            break
        pairs |= missing
    won = winners(funcs, owner)
    if any(won[i] != set(parts[i]) for i in range(k)):
        raise AssertionError("LP witness failed exact re-check")
    return funcs


def separating_functional(
    below: Iterable[Sequence[int]], above: Iterable[Sequence[int]]
) -> AffineFunctional | None:
    """An affine f with f < 0 on ``below`` and f > 0 on ``above``, or None."""
    funcs = induce_partition_lp([list(below), list(above)])
    if funcs is None:
        return None
    f_below, f_above = funcs
    return f_below + (-f_above)


def _descent_direction(gens: Sequence[Sequence[int]]) -> tuple[Fraction, ...] | None:
    """Linear w with w.g < 0 for every nonzero generator, maximising the margin."""
    gens = [tuple(g) for g in gens if any(g)]
    if not gens:
        return None
    dim = len(gens[0])
    nvars = dim + 1
    A, b = [], []
    for g in gens:
        A.append(list(g) + [1])
        b.append(sum(g))
    for v in range(dim):
        row = [0] * nvars
        row[v] = 1
        A.append(row)
        b.append(2)
    c = [0] * dim + [1]
    res = lp.maximize(c, A, b)
    if res.status != lp.OPTIMAL or res.objective <= 0:
        return None
    return tuple(res.x[t] - 1 for t in range(dim))


def strictly_convex(cone_gen: Sequence[Sequence[int]]) -> bool:
    """True iff the cone spanned by ``cone_gen`` contains no line."""
    if not any(any(g) for g in cone_gen):
        return True
    return _descent_direction(cone_gen) is not None


def decreasing_shift(
    functionals: Sequence[AffineFunctional], cone_gen: Sequence[Sequence[int]]
) -> list[AffineFunctional]:
    """Add one linear f0 to every functional so all strictly decrease along Z.

    Comparisons between functionals at a common point are unchanged, so the
    winner sets on singleton instances are preserved.
    """
    gens = [tuple(g) for g in cone_gen if any(g)]
    if not gens:
        return list(functionals)
    w = _descent_direction(gens)
    if w is None:
        raise ValueError("cone is not strictly convex")
    s = Fraction(0)
    for f in functionals:
        for g in gens:
            slope = sum(a * x for a, x in zip(f.normal, g))
            drop = -sum(a * x for a, x in zip(w, g))
            s = max(s, slope / drop)
    s += 1
    f0 = AffineFunctional(tuple(s * a for a in w), Fraction(0))
    return [f + f0 for f in functionals]


# ------------------------------------------------------------ cell shapes


def normalize_translation(points: Iterable[Sequence[int]]) -> tuple[Point, ...]:
    pts = [tuple(p) for p in points]
    lo = [min(p[i] for p in pts) for i in range(len(pts[0]))]
    return tuple(sorted(tuple(a - b for a, b in zip(p, lo)) for p in pts))


def canonical_shape(points: Iterable[Sequence[int]]) -> tuple[Point, ...]:
    """Representative of the orbit under signed permutations and translations."""
    pts = [tuple(p) for p in points]
    dim = len(pts[0])
    best = None
    for mat in signed_permutations(dim):
        img = [tuple(sum(a * x for a, x in zip(row, p)) for row in mat) for p in pts]
        cand = normalize_translation(img)
        if best is None or cand < best:
            best = cand
    return best


TYPE_1 = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
TYPE_2 = ((1, 0, 0), (0, 0, 0), (0, 1, 0), (0, 1, 1))
UNIT_TRIANGLE = ((0, 0), (1, 0), (0, 1))


@lru_cache(maxsize=None)
def standard_shapes(dim: int) -> frozenset:
    """Canonical forms of the standard full-dimensional cells."""
    if dim == 2:
        return frozenset({canonical_shape(UNIT_TRIANGLE)})
    if dim == 3:
        return frozenset({canonical_shape(TYPE_1), canonical_shape(TYPE_2)})
    if dim == 1:
        return frozenset({((0,), (1,))})
    return frozenset()


def cell_type(points: Sequence[Sequence[int]]) -> int | None:
    """1 or 2 for the two standard tetrahedra (0 for the unit triangle), else None."""
    pts = list(points)
    dim = len(pts[0])
    canon = canonical_shape(pts)
    if dim == 3:
        if canon == canonical_shape(TYPE_1):
            return 1
        if canon == canonical_shape(TYPE_2):
            return 2
        return None
    if dim == 2 and canon == canonical_shape(UNIT_TRIANGLE):
        return 0
    return None
