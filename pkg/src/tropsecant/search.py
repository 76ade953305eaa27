"""Automatic construction of pictures by recursive hyperplane splitting.

A region (a finite set of lattice points) together with a target profile
(how many full cells and which deficient part sizes it must host) is solved
by trying lattice cuts that split both the points and the profile, and
recursing on each side.  Regions are memoised up to translation, so the
many congruent sub-blocks of a grid are solved once.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certificates import (
    APReport,
    Certificate,
    CertificateError,
    Leaf,
    Node,
    make_certificate,
    verify_certificate,
)
from .geometry import AffineFunctional, affinely_independent, canonical_shape, separating_functional, standard_shapes
from .models import Model, Point, Variety, lattice_symmetries
from .theorems import Profile, is_defective, nondefective_profile, profile_ladder, target_profile


class CellShapes(str, enum.Enum):
    TYPES_1_2_ONLY = "types_1_2_only"
    ANY_INDEPENDENT = "any_independent"


@dataclass(frozen=True)
class SearchConfig:
    max_backtracks: int = 20000
    cell_shapes: CellShapes | None = None  # None: pick per variety
    symmetry_breaking: bool = True
    seed: int = 0
    use_table: bool = True

    def __post_init__(self):
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be >= 0")
        if self.cell_shapes is not None:
            object.__setattr__(self, "cell_shapes", CellShapes(self.cell_shapes))


@dataclass
class SearchResult:
    success: bool
    certificate: Certificate | None
    report: APReport | None
    profile: Profile | None
    best_value: int
    expansions: int
    attempts: list[tuple[Profile, str]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.success


class _OutOfBudget(Exception):
    pass


def cut_normals(dim: int) -> list[tuple[int, ...]]:
    """Primitive integer normals with entries in {-2..2}, one per sign class."""
    out = []
    for v in itertools.product(range(-2, 3), repeat=dim):
        if not any(v):
            continue
        if next(a for a in v if a) < 0:
            continue
        if math.gcd(*(abs(a) for a in v)) != 1:
            continue
        out.append(v)
    out.sort(key=lambda v: (sum(abs(a) for a in v), [-abs(a) for a in v], [-a for a in v]))
    return out


def _sub_multisets(items: tuple[int, ...]):
    seen = set()
    for mask in range(1 << len(items)):
        pick = tuple(items[i] for i in range(len(items)) if mask >> i & 1)
        rest = tuple(items[i] for i in range(len(items)) if not mask >> i & 1)
        if pick not in seen:
            seen.add(pick)
            yield pick, rest


def _normalize(pts: Sequence[Point]) -> tuple[tuple[int, ...], tuple[Point, ...]]:
    dim = len(pts[0])
    base = tuple(min(p[i] for p in pts) for i in range(dim))
    return base, tuple(tuple(a - b for a, b in zip(p, base)) for p in pts)


def _shift(tree, base):
    """Move an internal tree from normalised coordinates by ``base``."""
    if tree[0] == "L":
        return ("L", tuple(tuple(a + b for a, b in zip(p, base)) for p in tree[1]))
    _, normal, offset, lo, hi = tree
    off = offset - sum(a * b for a, b in zip(normal, base))
    return ("N", normal, off, _shift(lo, base), _shift(hi, base))


_EXHAUSTIVE = 1 << 62


class _Solver:
    """Memoised AND-OR search over (region, profile) pairs.

    Each node tries only its first ``width`` candidate splits; the caller
    widens the search round by round.  Successes are memoised for good,
    failures together with the width at which they were established
    (``_EXHAUSTIVE`` when no candidate was skipped anywhere below).
    """

    def __init__(self, dim: int, shapes: CellShapes, seed: int):
        self.dim = dim
        self.cell = dim + 1
        self.shapes = shapes
        self.seed = seed
        self.normals = cut_normals(dim)
        self.normal_arr = np.array(self.normals, dtype=np.int64).T
        self.ok: dict = {}
        self.fail: dict = {}
        self.cell_memo: dict = {}
        self.sep_memo: dict = {}
        self.budget = 0
        self.expansions = 0

    # -- cells
    def full_ok(self, pts) -> bool:
        base, norm = _normalize(pts)
        hit = self.cell_memo.get(norm)
        if hit is None:
            if self.shapes is CellShapes.TYPES_1_2_ONLY and self.dim == 3:
                # both standard tetrahedra fit in a unit cube
                hit = max(max(p) for p in norm) <= 1 and canonical_shape(norm) in standard_shapes(3)
            else:
                hit = affinely_independent(norm)
            self.cell_memo[norm] = hit
        return hit

    def deficient_ok(self, pts) -> bool:
        return len(pts) < self.cell and affinely_independent(pts)

    # -- recursion
    def solve(self, pts, n_full: int, defi: tuple[int, ...], width: int):
        """Tree for ``pts`` or None; the second value tells whether a None is final."""
        base, norm = _normalize(pts)
        key = (norm, n_full, defi)
        tree = self.ok.get(key)
        if tree is not None:
            return _shift(tree, base)
        if self.fail.get(key, -1) >= width:
            return None
        self.expansions += 1
        if self.expansions > self.budget:
            raise _OutOfBudget
        tree, final = self.expand(norm, n_full, defi, width)
        if tree is None:
            self.fail[key] = _EXHAUSTIVE if final else width
            return None
        self.ok[key] = tree
        return _shift(tree, base)

    def is_final_failure(self, pts, n_full, defi) -> bool:
        _, norm = _normalize(pts)
        return self.fail.get((norm, n_full, defi), -1) == _EXHAUSTIVE

    def status(self, pts, n_full, defi) -> int:
        """0 solved, 1 unknown, 2 failed for good."""
        _, norm = _normalize(pts)
        key = (norm, n_full, defi)
        if key in self.ok:
            return 0
        return 2 if self.fail.get(key, -1) == _EXHAUSTIVE else 1

    def expand(self, pts, n_full, defi, width, symmetries=None):
        n = len(pts)
        if n_full == 1 and not defi:
            return (("L", pts) if self.full_ok(pts) else None), True
        if n_full == 0 and len(defi) == 1:
            return (("L", pts) if self.deficient_ok(pts) else None), True
        ranked = []
        for rank, cand in enumerate(self.splits(pts, n_full, defi, symmetries)):
            s1, s2, a1, d1, a2, d2, _, _ = cand
            st1 = self.status(s1, a1, d1)
            st2 = self.status(s2, a2, d2)
            if st1 == 2 or st2 == 2:
                continue
            ranked.append((st1 + st2, rank, cand))
        ranked.sort(key=lambda r: r[:2])
        final = len(ranked) <= width
        for _, _, (s1, s2, a1, d1, a2, d2, normal, offset) in ranked[:width]:
            t1 = self.solve(s1, a1, d1, width)
            if t1 is None:
                final = final and self.is_final_failure(s1, a1, d1)
                continue
            t2 = self.solve(s2, a2, d2, width)
            if t2 is None:
                final = final and self.is_final_failure(s2, a2, d2)
                continue
            return ("N", normal, offset, t1, t2), True
        if n <= 2 * self.cell:
            tree, fin = self.enumerate(pts, n_full, defi, width)
            return tree, final and fin
        return None, final

    def _count_table(self, n, n_full, defi):
        table: dict[int, list] = {}
        for d1, d2 in _sub_multisets(defi):
            s1 = sum(d1)
            for a1 in range(n_full + 1):
                n1 = a1 * self.cell + s1
                if n1 == 0 or n1 == n:
                    continue
                table.setdefault(n1, []).append((a1, d1, n_full - a1, d2))
        return table

    def splits(self, pts, n_full, defi, symmetries=None):
        """Lattice cuts compatible with the profile, most balanced first."""
        n = len(pts)
        table = self._count_table(n, n_full, defi)
        if not table:
            return []
        arr = np.array(pts, dtype=np.int64)
        vals = arr @ self.normal_arr
        seen = set()
        full_mask = (1 << n) - 1
        cands = []
        for j, normal in enumerate(self.normals):
            col = vals[:, j]
            order = np.argsort(col, kind="stable")
            sv = col[order]
            mask = 0
            for i in range(1, n):
                mask |= 1 << int(order[i - 1])
                if sv[i - 1] == sv[i] or i not in table:
                    continue
                key = min(mask, full_mask ^ mask)
                if key in seen:
                    continue
                seen.add(key)
                thr = Fraction(int(sv[i - 1]) + int(sv[i]), 2)
                lo = tuple(pts[int(t)] for t in sorted(order[:i]))
                hi = tuple(pts[int(t)] for t in sorted(order[i:]))
                if symmetries is not None:
                    orb = min(tuple(sorted(s(p) for p in lo)) for s in symmetries)
                    orb = min(orb, min(tuple(sorted(s(p) for p in hi)) for s in symmetries))
                    if orb in symmetries.seen:
                        continue
                    symmetries.seen.add(orb)
                imbalance = abs(2 * i - n)
                tie = (mask * 0x9E3779B97F4A7C15 + self.seed) % (1 << 61)
                for a1, d1, a2, d2 in table[i]:
                    cands.append(
                        ((imbalance // self.cell, j, tie), (lo, hi, a1, d1, a2, d2, normal, -thr))
                    )
        cands.sort(key=lambda c: c[0])
        return [c[1] for c in cands]

    def separate(self, cell, others):
        key = (cell, others)
        if key not in self.sep_memo:
            self.sep_memo[key] = separating_functional(cell, others)
        return self.sep_memo[key]

    def enumerate(self, pts, n_full, defi, width):
        """Peel off the part containing the least point, separated by an LP cut."""
        first, rest_pts = pts[0], pts[1:]
        sizes = []
        if n_full:
            sizes.append((self.cell, n_full - 1, defi))
        for d, rest in _sub_multisets(defi):
            if len(d) == 1:
                sizes.append((d[0], n_full, rest))
        final = True
        for size, a_rest, d_rest in sizes:
            for combo in itertools.combinations(rest_pts, size - 1):
                cell = (first,) + combo
                ok = self.full_ok(cell) if size == self.cell else self.deficient_ok(cell)
                if not ok:
                    continue
                chosen = set(combo)
                others = tuple(p for p in rest_pts if p not in chosen)
                if self.status(others, a_rest, d_rest) == 2:
                    continue
                sep = self.separate(cell, others)
                if sep is None:
                    continue
                t_rest = self.solve(others, a_rest, d_rest, width)
                if t_rest is None:
                    final = final and self.is_final_failure(others, a_rest, d_rest)
                    continue
                return ("N", sep.normal, sep.offset, ("L", cell), t_rest), True
        return None, final

    def solve_root(self, pts, profile: Profile, symmetries=None):
        """Widen until success or a final failure; raises _OutOfBudget."""
        width = 1
        while True:
            orbits = None if symmetries is None else _Orbits(symmetries)
            tree, final = self.expand(pts, profile.n_full, profile.deficient, width, orbits)
            if tree is not None:
                return tree
            if final:
                return None
            width *= 2


class _Orbits(list):
    def __init__(self, maps):
        super().__init__(maps)
        self.seen: set = set()


def default_shapes(model: Model) -> CellShapes:
    if model.spec.variety is Variety.FLAG:
        return CellShapes.ANY_INDEPENDENT
    return CellShapes.TYPES_1_2_ONLY


def _to_cut_tree(tree, leaves: list):
    if tree[0] == "L":
        leaves.append(tree[1])
        return Leaf(len(leaves) - 1)
    _, normal, offset, lo, hi = tree
    below = _to_cut_tree(lo, leaves)
    above = _to_cut_tree(hi, leaves)
    return Node(AffineFunctional(normal, offset), below, above)


def solve_region(
    points: Sequence[Point],
    profile: Profile,
    config: SearchConfig = SearchConfig(),
    shapes: CellShapes = CellShapes.ANY_INDEPENDENT,
    symmetries=None,
    spec=None,
) -> tuple[Certificate | None, int]:
    """Search one profile on an arbitrary point set.

    Returns the certificate (or None) and the number of expansions used.
    Raises ``_OutOfBudget`` internally only; exhaustion yields None.
    """
    pts = tuple(sorted(tuple(p) for p in points))
    cell = len(pts[0]) + 1
    if profile.n_full * cell + sum(profile.deficient) != len(pts):
        raise ValueError("profile does not match the number of points")
    # a fresh memo per call keeps results independent of earlier searches
    solver = _Solver(len(pts[0]), shapes, config.seed)
    solver.expansions = 0
    solver.budget = config.max_backtracks
    syms = symmetries if symmetries is not None and len(symmetries) > 1 else None
    try:
        raw = solver.solve_root(pts, profile, syms)
    except _OutOfBudget:
        return None, solver.expansions
    if raw is None:
        return None, solver.expansions
    tree = _to_cut_tree(raw, [])
    return make_certificate(pts, tree, spec), solver.expansions


def search_certificate(
    model: Model, config: SearchConfig = SearchConfig(), profile: Profile | None = None
) -> SearchResult:
    """Find a picture for ``model``.

    Success means a verified non-defective picture.  Otherwise weaker
    profiles are tried in turn and the best verified picture is returned
    with ``success=False``.  When ``config.use_table`` is set and the model
    is a known defective case, profiles better than the table allows are
    not attempted.
    """
    shapes = config.cell_shapes or default_shapes(model)
    cell = model.dim_x + 1
    nd = nondefective_profile(model.dim_v, cell)
    if profile is not None:
        ladder = [profile]
    elif config.use_table and is_defective(model.spec):
        best = target_profile(model.spec)
        ladder = [best] + [
            p for p in profile_ladder(model.dim_v, cell) if p.bounds(cell, 64) < best.bounds(cell, 64)
        ]
    else:
        ladder = [nd] + [p for p in profile_ladder(model.dim_v, cell) if p != nd]
    symmetries = None
    if config.symmetry_breaking and model.spec.variety.is_segre_veronese:
        symmetries = lattice_symmetries(model)
    total = 0
    attempts = []
    for prof in ladder:
        cert, used = solve_region(model.points, prof, config, shapes, symmetries, model.spec)
        total += used
        if cert is None:
            attempts.append((prof, "exhausted" if used > config.max_backtracks else "infeasible"))
            continue
        report = verify_certificate(cert)
        attempts.append((prof, "found"))
        cap = -(-model.dim_v // cell)
        return SearchResult(
            report.non_defective, cert, report, prof, report.bound(cap), total, attempts
        )
    return SearchResult(False, None, None, None, 0, total, attempts)


def check_search_result(result: SearchResult) -> None:
    """Re-verify a search result from scratch (search never self-certifies)."""
    if result.certificate is None:
        return
    rep = verify_certificate(result.certificate)
    if rep.non_defective != result.success:
        raise CertificateError("search verdict disagrees with verification")
