"""Built-in table of the known defective cases and the target part profiles.

For every supported family the table gives, per exceptional k, the true
cone dimension dim kC.  Everything not listed is expected to be
non-defective.  Defectivity itself is never derived here; the oracle
confirms it numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .models import ModelSpec, Variety, closed_form_dim


@dataclass(frozen=True)
class Defect:
    k: int
    expected: int
    actual: int
    source: str

    @property
    def defect(self) -> int:
        return self.expected - self.actual


def _expected(spec: ModelSpec, k: int) -> int:
    return min(k * (spec.variety.dim_x + 1), closed_form_dim(spec))


def _defect(spec: ModelSpec, k: int, actual: int, source: str) -> Defect:
    return Defect(k, _expected(spec, k), actual, source)


def known_defects(spec: ModelSpec) -> list[Defect]:
    """Exceptional secant cones of ``spec`` (empty when non-defective)."""
    v, deg = spec.variety, spec.degrees
    dim_v = closed_form_dim(spec)
    if v is Variety.P1P1:
        d, e = sorted(deg, reverse=True)
        if e == 2 and d % 2 == 0:
            return [_defect(spec, d + 1, dim_v - 1, "P1xP1: e = 2, d even")]
    elif v is Variety.P1P1P1:
        d, e, f = sorted(deg, reverse=True)
        if e == f == 1 and d % 2 == 0:
            return [_defect(spec, d + 1, dim_v - 1, "(P1)^3: e = f = 1, d even")]
        if (d, e, f) == (2, 2, 2):
            return [_defect(spec, 7, dim_v - 1, "(P1)^3: d = e = f = 2")]
    elif v is Variety.P2P1:
        d, e = deg
        if d == 2 and e % 2 == 0:
            h = e // 2
            return [
                _defect(spec, 3 * h + 1, dim_v - 3, "P2xP1: d = 2, e even"),
                _defect(spec, 3 * h + 2, dim_v - 1, "P2xP1: d = 2, e even"),
            ]
        if (d, e) == (3, 1):
            return [_defect(spec, 5, dim_v - 1, "P2xP1: d = 3, e = 1")]
    elif v is Variety.FLAG:
        if deg == (1, 1):
            return [_defect(spec, 2, dim_v - 1, "flag: d = e = 1")]
        if deg == (2, 2):
            return [_defect(spec, 7, dim_v - 1, "flag: d = e = 2")]
    elif v is Variety.P2:
        # classical Veronese exceptions of the plane
        (d,) = deg
        if d == 2:
            return [_defect(spec, 2, 5, "Veronese plane: d = 2")]
        if d == 4:
            return [_defect(spec, 5, 14, "Veronese plane: d = 4")]
    return []


def true_cone_dims(spec: ModelSpec, k_max: int | None = None) -> list[int]:
    """dim kC for k = 1..k_max according to the table."""
    step = spec.variety.dim_x + 1
    dim_v = closed_form_dim(spec)
    if k_max is None:
        k_max = -(-dim_v // step)
    exc = {d.k: d.actual for d in known_defects(spec)}
    return [exc.get(k, _expected(spec, k)) for k in range(1, k_max + 1)]


def is_defective(spec: ModelSpec) -> bool:
    return bool(known_defects(spec))


@dataclass(frozen=True)
class Profile:
    """Target part sizes: ``n_full`` cells of size dim X + 1 plus deficient parts."""

    n_full: int
    deficient: tuple[int, ...]

    def values(self, cell: int) -> list[int]:
        return [cell] * self.n_full + list(self.deficient)

    def bounds(self, cell: int, k_max: int) -> list[int]:
        vals = self.values(cell)
        out, acc = [], 0
        for k in range(k_max):
            if k < len(vals):
                acc += vals[k]
            out.append(acc)
        return out


def nondefective_profile(n_points: int, cell: int) -> Profile:
    q, r = divmod(n_points, cell)
    return Profile(q, (r,) if r else ())


def target_profile(spec: ModelSpec) -> Profile:
    """Best profile compatible with the table's cone dimensions.

    Part values are the increments of k -> dim kC; leftover points (the
    cones stop growing before every point is used) are packed greedily
    into parts no larger than the last increment.
    """
    cell = spec.variety.dim_x + 1
    n = closed_form_dim(spec)
    if not is_defective(spec):
        return nondefective_profile(n, cell)
    dims = true_cone_dims(spec)
    incs = [dims[0]] + [b - a for a, b in zip(dims, dims[1:])]
    incs = [v for v in incs if v > 0]
    left = n - dims[-1]
    cap = incs[-1]
    while left > 0:
        take = min(cap, left)
        incs.append(take)
        left -= take
    full = sum(1 for v in incs if v == cell)
    return Profile(full, tuple(sorted((v for v in incs if v < cell), reverse=True)))


def profile_ladder(n_points: int, cell: int, limit: int = 4) -> list[Profile]:
    """Profiles in decreasing order of their per-k bound vectors.

    Used when the best profile cannot be realised; the first entry is the
    non-defective one.
    """
    q = n_points // cell
    cands = []
    for a in range(q, max(q - 3, -1), -1):
        rest = n_points - a * cell
        for parts in _partitions(rest, cell - 1, 4):
            cands.append(Profile(a, parts))
    k_max = q + 5
    cands.sort(key=lambda p: p.bounds(cell, k_max), reverse=True)
    return cands[:limit]


def _partitions(total: int, largest: int, max_parts: int) -> list[tuple[int, ...]]:
    if total == 0:
        return [()]
    if max_parts == 0:
        return []
    out = []
    for first in range(min(total, largest), 0, -1):
        for rest in _partitions(total - first, first, max_parts - 1):
            out.append((first,) + rest)
    return out
