"""Lattice point sets for equivariant embeddings of low-dimensional varieties.

Every supported embedding comes with a finite set ``B`` of lattice points
that indexes a monomial (or PBW-monomial) basis of the ambient module, so
``dim V == len(B)``.  Points are stored as tuples of ints in lexicographic
order; that order is canonical and is what certificate files refer to.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

Point = tuple[int, ...]

COORD_MIN = -(2**15)
COORD_MAX = 2**15 - 1

# the flag-variety cone direction along which same-weight exponents differ
FLAG_Z = (1, -1, 1)


class Variety(str, enum.Enum):
    P1 = "p1"
    P2 = "p2"
    P1P1 = "p1p1"
    P1P1P1 = "p1p1p1"
    P2P1 = "p2p1"
    FLAG = "flag"

    @property
    def n_degrees(self) -> int:
        return _N_DEGREES[self]

    @property
    def dim_x(self) -> int:
        return _DIM_X[self]

    @property
    def is_segre_veronese(self) -> bool:
        return self is not Variety.FLAG


_N_DEGREES = {
    Variety.P1: 1,
    Variety.P2: 1,
    Variety.P1P1: 2,
    Variety.P1P1P1: 3,
    Variety.P2P1: 2,
    Variety.FLAG: 2,
}
_DIM_X = {
    Variety.P1: 1,
    Variety.P2: 2,
    Variety.P1P1: 2,
    Variety.P1P1P1: 3,
    Variety.P2P1: 3,
    Variety.FLAG: 3,
}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    """A variety together with its highest-weight (degree) coordinates.

    Degree entries must be positive, except that zero is accepted when
    ``internal=True`` (sub-blocks used while gluing pictures).
    """

    variety: Variety
    degrees: tuple[int, ...]
    internal: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variety", Variety(self.variety))
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if len(self.degrees) != self.variety.n_degrees:
            raise ModelError(
                f"{self.variety.value} takes {self.variety.n_degrees} degree(s), "
                f"got {self.degrees}"
            )
        lo = 0 if self.internal else 1
        if any(d < lo for d in self.degrees):
            raise ModelError(f"invalid degrees {self.degrees} for {self.variety.value}")

    def __str__(self) -> str:
        return f"{self.variety.value}{self.degrees}"


@dataclass(frozen=True)
class Model:
    spec: ModelSpec
    dim_x: int
    points: tuple[Point, ...]

    @property
    def dim_v(self) -> int:
        return len(self.points)

    @cached_property
    def index(self) -> dict[Point, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def point_set(self) -> frozenset[Point]:
        return frozenset(self.points)

    def __contains__(self, p) -> bool:
        return tuple(p) in self.point_set


def _grid(bounds: Sequence[int]) -> list[Point]:
    return list(itertools.product(*(range(b + 1) for b in bounds)))


def flag_points(m: int, n: int) -> list[Point]:
    return [
        (n1, n2, n3)
        for n1 in range(m + n + 1)
        for n2 in range(m + 1)
        for n3 in range(n + 1)
        if n1 <= m + n3 - n2
    ]


def in_flag(p: Sequence[int], m: int, n: int) -> bool:
    n1, n2, n3 = p
    return 0 <= n2 <= m and 0 <= n3 <= n and 0 <= n1 <= m + n3 - n2


def _points_for(spec: ModelSpec) -> list[Point]:
    v, deg = spec.variety, spec.degrees
    if v in (Variety.P1, Variety.P1P1, Variety.P1P1P1):
        return _grid(deg)
    if v is Variety.P2:
        (d,) = deg
        return [(x, y) for x in range(d + 1) for y in range(d + 1 - x)]
    if v is Variety.P2P1:
        d, e = deg
        return [
            (x, y, z) for x in range(d + 1) for y in range(d + 1 - x) for z in range(e + 1)
        ]
    if v is Variety.FLAG:
        return flag_points(*deg)
    raise ModelError(f"unsupported variety {v}")


@lru_cache(maxsize=None)
def build_model(spec: ModelSpec) -> Model:
    """Build the point set ``B`` for ``spec``.

    >>> build_model(ModelSpec(Variety.P1P1, (3, 2))).dim_v
    12
    """
    pts = sorted(_points_for(spec))
    for p in pts:
        if any(c < COORD_MIN or c > COORD_MAX for c in p):
            raise ModelError(f"coordinate overflow in {spec}")
    return Model(spec, spec.variety.dim_x, tuple(pts))


def closed_form_dim(spec: ModelSpec) -> int:
    v, deg = spec.variety, spec.degrees
    if v is Variety.P1:
        return deg[0] + 1
    if v is Variety.P2:
        return (deg[0] + 1) * (deg[0] + 2) // 2
    if v is Variety.P1P1:
        return (deg[0] + 1) * (deg[1] + 1)
    if v is Variety.P1P1P1:
        return (deg[0] + 1) * (deg[1] + 1) * (deg[2] + 1)
    if v is Variety.P2P1:
        d, e = deg
        return (d + 1) * (d + 2) * (e + 1) // 2
    m, n = deg
    return (m + 1) * (n + 1) * (m + n + 2) // 2


def expected_cone_dim(model: Model, k: int) -> int:
    """Expected dimension of the k-th secant cone: min(k (dim X + 1), dim V)."""
    if k < 1:
        raise ValueError("k must be positive")
    return min(k * (model.dim_x + 1), model.dim_v)


def capping_k(model: Model) -> int:
    """Smallest k at which the expected secant cone fills V."""
    step = model.dim_x + 1
    return -(-model.dim_v // step)


def flag_transpose(p: Sequence[int], m: int, n: int) -> Point:
    """Map a point of B(m, n) to B(n, m) via (n1, n2, n3) -> (n1, n - n3, m - n2)."""
    if not in_flag(p, m, n):
        raise ModelError(f"{tuple(p)} is not in B({m},{n})")
    n1, n2, n3 = p
    return (n1, n - n3, m - n2)


def weight_map(r: Sequence[int]) -> tuple[int, int]:
    """Weight of an exponent vector in the (alpha1, alpha2) basis.

    The negative roots are beta1 = -a1, beta2 = -a1 - a2, beta3 = -a2.
    """
    r1, r2, r3 = r
    return (-r1 - r2, -r2 - r3)


# ---------------------------------------------------------------- affine maps


@dataclass(frozen=True)
class AffineMap:
    """Lattice map x -> matrix @ x + translation."""

    matrix: tuple[tuple[int, ...], ...]
    translation: tuple[int, ...]

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(
            tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)),
            (0,) * dim,
        )

    @classmethod
    def translate(cls, offset: Sequence[int]) -> "AffineMap":
        ident = cls.identity(len(offset))
        return cls(ident.matrix, tuple(int(v) for v in offset))

    @property
    def dim(self) -> int:
        return len(self.translation)

    def __call__(self, p: Sequence[int]) -> Point:
        return tuple(
            sum(a * x for a, x in zip(row, p)) + t
            for row, t in zip(self.matrix, self.translation)
        )

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """Return self o inner."""
        n = self.dim
        mat = tuple(
            tuple(sum(self.matrix[i][k] * inner.matrix[k][j] for k in range(n)) for j in range(n))
            for i in range(n)
        )
        trans = tuple(
            sum(self.matrix[i][k] * inner.translation[k] for k in range(n)) + self.translation[i]
            for i in range(n)
        )
        return AffineMap(mat, trans)

    def is_signed_permutation(self) -> bool:
        for row in self.matrix:
            if sorted(abs(a) for a in row) != [0] * (len(row) - 1) + [1]:
                return False
        cols = [tuple(row[j] for row in self.matrix) for j in range(self.dim)]
        return all(sorted(abs(a) for a in c) == [0] * (len(c) - 1) + [1] for c in cols)

    def inverse(self) -> "AffineMap":
        if not self.is_signed_permutation():
            raise ValueError("only signed permutation maps are inverted here")
        n = self.dim
        mat = tuple(tuple(self.matrix[j][i] for j in range(n)) for i in range(n))
        trans = tuple(-sum(mat[i][k] * self.translation[k] for k in range(n)) for i in range(n))
        return AffineMap(mat, trans)


def signed_permutations(dim: int) -> list[tuple[tuple[int, ...], ...]]:
    out = []
    for perm in itertools.permutations(range(dim)):
        for signs in itertools.product((1, -1), repeat=dim):
            out.append(
                tuple(
                    tuple(signs[i] if j == perm[i] else 0 for j in range(dim))
                    for i in range(dim)
                )
            )
    return out


def map_onto(points: Iterable[Point], target: Iterable[Point], matrix) -> AffineMap | None:
    """Find the translation making ``matrix`` carry ``points`` onto ``target``."""
    pts = list(points)
    tgt = frozenset(target)
    if len(pts) != len(tgt) or not pts:
        return None
    dim = len(pts[0])
    zero = AffineMap(tuple(tuple(r) for r in matrix), (0,) * dim)
    img = [zero(p) for p in pts]
    lo_img = [min(q[i] for q in img) for i in range(dim)]
    lo_tgt = [min(q[i] for q in tgt) for i in range(dim)]
    shift = tuple(a - b for a, b in zip(lo_tgt, lo_img))
    amap = AffineMap(zero.matrix, shift)
    if all(amap(p) in tgt for p in pts):
        return amap
    return None


def lattice_symmetries(model: Model) -> list[AffineMap]:
    """Signed coordinate permutations plus translations mapping B onto itself."""
    out = []
    for mat in signed_permutations(model.dim_x):
        amap = map_onto(model.points, model.points, mat)
        if amap is not None:
            out.append(amap)
    return out


# ------------------------------------------------------------ flag reduction


@dataclass(frozen=True)
class GeneralizedInstance:
    """An AP instance (A_1, ..., A_n) with a strictly convex cone Z.

    ``labels`` names each set (for the flag model: the basis label b).
    """

    labels: tuple[Point, ...]
    sets: tuple[frozenset[Point], ...]
    cone_gen: tuple[Point, ...]

    def __post_init__(self):
        from .geometry import strictly_convex

        if len(self.labels) != len(self.sets):
            raise ModelError("one label per set required")
        if any(not s for s in self.sets):
            raise ModelError("every A_b must be nonempty")
        if not strictly_convex(self.cone_gen):
            raise ModelError("cone Z must be strictly convex")

    def minimal_elements(self) -> list[Point | None]:
        """Least element of each A_b under p <= q iff p - q in Z, or None.

        Only single-ray cones are handled.
        """
        if len(self.cone_gen) != 1:
            raise NotImplementedError("minimal elements computed for ray cones only")
        (z,) = self.cone_gen
        out = []
        for s in self.sets:
            least = [
                a for a in s
                if all(q == a or _on_ray([x - y for x, y in zip(a, q)], z) for q in s)
            ]
            out.append(least[0] if least else None)
        return out


def _on_ray(v: Sequence[int], z: Sequence[int]) -> bool:
    """True iff v is a positive multiple of z."""
    t = None
    for a, b in zip(v, z):
        if b == 0:
            if a != 0:
                return False
            continue
        if t is None:
            t = (a, b)
        elif a * t[1] != t[0] * b:
            return False
    if t is None:
        return False
    return t[0] * t[1] > 0


def flag_reduce_to_singletons(m: int, n: int) -> tuple[Model, Point]:
    """Singleton AP instance for the flag model and the cone ray z = (1,-1,1).

    Each basis label b is its own representative, which is the unique
    minimal element of A_b for the order p <= q iff p - q in R>=0 z, so
    AP* of the singletons bounds AP* of the full instance from below.
    """
    if m < 1 or n < 1:
        raise ModelError("flag reduction needs m, n >= 1")
    return build_model(ModelSpec(Variety.FLAG, (m, n))), FLAG_Z


# ------------------------------------------------------------- serialization


def model_to_json(model: Model) -> str:
    payload = {
        "variety": model.spec.variety.value,
        "degrees": list(model.spec.degrees),
        "points": [list(p) for p in model.points],
    }
    return json.dumps(payload, sort_keys=True)


def model_from_json(text: str) -> Model:
    payload = json.loads(text)
    spec = ModelSpec(Variety(payload["variety"]), tuple(payload["degrees"]), internal=True)
    model = build_model(spec)
    pts = [tuple(p) for p in payload["points"]]
    if pts != list(model.points):
        raise ModelError("point list does not match the model definition")
    return model
