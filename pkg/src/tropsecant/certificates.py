"""Pictures as hyperplane cut-trees: evaluation, verification, gluing, I/O.

A cut-tree repeatedly halves space; points with ``cut(p) < 0`` go to the
``below`` subtree and points with ``cut(p) > 0`` to ``above``.  A point with
``cut(p) == 0`` is a tie and invalidates the tree.  Every partition
produced this way is induced by affine-linear functions (built explicitly
by :func:`functionals_from_tree`), so verification never needs an LP.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .geometry import AffineFunctional, affine_dim, induce_partition_lp
from .models import (
    AffineMap,
    Model,
    ModelSpec,
    Point,
    Variety,
    build_model,
    capping_k,
)

NON_DEFECTIVE = "non-defective-certified"
BELOW_EXPECTED = "bound-below-expected"


class CertificateError(ValueError):
    pass


class TieError(CertificateError):
    def __init__(self, point):
        super().__init__(f"point {point} lies on a cut")
        self.point = point


@dataclass(frozen=True)
class Leaf:
    part: int


@dataclass(frozen=True)
class Node:
    cut: AffineFunctional
    below: "CutTree"
    above: "CutTree"


CutTree = Union[Leaf, Node]


def tree_leaves(tree: CutTree) -> list[int]:
    if isinstance(tree, Leaf):
        return [tree.part]
    return tree_leaves(tree.below) + tree_leaves(tree.above)


def tree_depth(tree: CutTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.below), tree_depth(tree.above))


def locate(tree: CutTree, p: Sequence) -> int:
    while isinstance(tree, Node):
        v = tree.cut(p)
        if v == 0:
            raise TieError(tuple(p))
        tree = tree.below if v < 0 else tree.above
    return tree.part


def evaluate_tree(points: Iterable[Sequence[int]], tree: CutTree) -> dict[int, list[Point]]:
    """Partition ``points`` by the leaves of ``tree`` (leaf id -> points)."""
    out: dict[int, list[Point]] = {part: [] for part in tree_leaves(tree)}
    for p in points:
        out[locate(tree, p)].append(tuple(p))
    return out


def relabel(tree: CutTree, mapping) -> CutTree:
    if isinstance(tree, Leaf):
        return Leaf(mapping[tree.part])
    return Node(tree.cut, relabel(tree.below, mapping), relabel(tree.above, mapping))


def transform_tree(tree: CutTree, amap: AffineMap) -> CutTree:
    """Carry the cuts along y = M x + t (M a signed permutation)."""
    if isinstance(tree, Leaf):
        return tree
    mat, t = amap.matrix, amap.translation
    n = tree.cut.normal
    new_n = tuple(sum(mat[i][j] * n[j] for j in range(len(n))) for i in range(len(n)))
    new_off = tree.cut.offset - sum(a * b for a, b in zip(new_n, t))
    return Node(
        AffineFunctional(new_n, new_off),
        transform_tree(tree.below, amap),
        transform_tree(tree.above, amap),
    )


# ------------------------------------------------------------- certificate


@dataclass(frozen=True)
class Certificate:
    """A picture: a cut-tree plus the partition it is claimed to induce.

    ``points`` is the covered point set in lexicographic order; it equals
    ``build_model(spec).points`` whenever ``spec`` is set and the picture
    is placed on the model itself.
    """

    spec: ModelSpec | None
    points: tuple[Point, ...]
    tree: CutTree
    parts: tuple[tuple[Point, ...], ...]

    @property
    def dim_x(self) -> int:
        return len(self.points[0])

    @property
    def cell_size(self) -> int:
        return self.dim_x + 1

    def part_values(self) -> list[int]:
        return [1 + affine_dim(p) for p in self.parts]

    def deficient_parts(self) -> list[int]:
        return [i for i, v in enumerate(self.part_values()) if v < self.cell_size]


def _part_key(part: Sequence[Point], full: bool) -> tuple:
    return (0 if full else 1, -len(part), min(part))


def make_certificate(
    points: Iterable[Sequence[int]],
    tree: CutTree,
    spec: ModelSpec | None = None,
) -> Certificate:
    """Evaluate ``tree`` on ``points`` and package the canonical certificate.

    Parts are ordered full cells first (by least point), then the
    deficient parts by decreasing size; leaf ids are rewritten to match.
    """
    pts = tuple(sorted(tuple(p) for p in points))
    groups = evaluate_tree(pts, tree)
    groups = {pid: tuple(sorted(g)) for pid, g in groups.items() if g}
    if len(groups) != len(tree_leaves(tree)):
        empty = set(tree_leaves(tree)) - set(groups)
        raise CertificateError(f"leaves {sorted(empty)} receive no points")
    dim = len(pts[0])
    order = sorted(
        groups,
        key=lambda pid: _part_key(groups[pid], 1 + affine_dim(groups[pid]) == dim + 1),
    )
    mapping = {pid: i for i, pid in enumerate(order)}
    return Certificate(spec, pts, relabel(tree, mapping), tuple(groups[pid] for pid in order))


def certificate_for_model(model: Model, tree: CutTree) -> Certificate:
    return make_certificate(model.points, tree, model.spec)


# ------------------------------------------------------------------ report


@dataclass(frozen=True)
class KRow:
    k: int
    lower_bound: int
    expected: int
    verdict: str


@dataclass
class APReport:
    spec: ModelSpec | None
    dim_x: int
    dim_v: int
    part_values: list[int]
    independent: bool
    n_deficient: int
    rows: list[KRow]
    verdict: str
    issues: list[str] = field(default_factory=list)

    def bound(self, k: int) -> int:
        if k <= len(self.rows):
            return self.rows[k - 1].lower_bound
        return self.rows[-1].lower_bound

    @property
    def non_defective(self) -> bool:
        return self.verdict == "non-defective"

    def to_dict(self) -> dict:
        return {
            "model": None if self.spec is None else _spec_dict(self.spec),
            "dim_x": self.dim_x,
            "dim_v": self.dim_v,
            "part_values": self.part_values,
            "independent": self.independent,
            "n_deficient": self.n_deficient,
            "rows": [
                {"k": r.k, "lower_bound": r.lower_bound, "expected": r.expected, "verdict": r.verdict}
                for r in self.rows
            ],
            "verdict": self.verdict,
            "issues": self.issues,
        }


def bound_rows(values: Sequence[int], dim_x: int, dim_v: int, k_max: int | None = None) -> list[KRow]:
    """Per-k certified bounds from part values (1 + affine dim of each part).

    With k functionals one may keep the k most valuable parts; their winner
    sets only grow, so the bound is the sum of the k largest values.
    """
    vals = sorted(values, reverse=True)
    step = dim_x + 1
    cap = -(-dim_v // step)
    top = max(len(vals), cap) if k_max is None else k_max
    rows = []
    acc = 0
    for k in range(1, top + 1):
        if k <= len(vals):
            acc += vals[k - 1]
        expected = min(k * step, dim_v)
        rows.append(KRow(k, acc, expected, NON_DEFECTIVE if acc == expected else BELOW_EXPECTED))
    return rows


def _report(spec, dim_x, dim_v, parts, issues) -> APReport:
    values = [1 + affine_dim(p) for p in parts]
    independent = all(v == len(p) for v, p in zip(values, parts))
    if not independent:
        issues.append("some part is affinely dependent")
    n_def = sum(1 for v in values if v < dim_x + 1)
    if n_def > 1:
        issues.append(f"{n_def} deficient parts")
    rows = bound_rows(values, dim_x, dim_v)
    verdict = "non-defective" if all(r.verdict == NON_DEFECTIVE for r in rows) else "defective"
    return APReport(spec, dim_x, dim_v, values, independent, n_def, rows, verdict, issues)


def verify_certificate(cert: Certificate) -> APReport:
    """Re-evaluate the tree, compare with the declared parts, and bound AP*.

    Raises ``TieError`` if a point lies on a traversed cut and
    ``CertificateError`` if the declared parts do not match the tree or do
    not partition the point set.
    """
    pts = cert.points
    if cert.spec is not None and tuple(build_model(cert.spec).points) != pts:
        raise CertificateError("certificate points differ from the model's point set")
    if len(set(pts)) != len(pts):
        raise CertificateError("repeated points")
    declared = [set(p) for p in cert.parts]
    union = set()
    for part in declared:
        if union & part:
            raise CertificateError("declared parts overlap")
        union |= part
    if union != set(pts):
        raise CertificateError("declared parts do not cover the point set")
    groups = evaluate_tree(pts, cert.tree)
    if set(groups) != set(range(len(cert.parts))):
        raise CertificateError("leaf ids do not match the declared parts")
    for pid, g in groups.items():
        if set(g) != declared[pid]:
            raise CertificateError(f"part {pid} does not match the tree")
    return _report(cert.spec, cert.dim_x, len(pts), [list(p) for p in cert.parts], [])


def verify_partition(model: Model, parts: Sequence[Iterable[Sequence[int]]]) -> APReport:
    """Verify a flat partition (no tree) through the exact margin LP."""
    parts = [sorted(tuple(p) for p in part) for part in parts]
    union = set()
    for part in parts:
        union |= set(part)
    if union != model.point_set or sum(len(p) for p in parts) != model.dim_v:
        raise CertificateError("parts do not partition the model's points")
    if induce_partition_lp(parts) is None:
        raise CertificateError("partition is not induced by affine-linear functions")
    return _report(model.spec, model.dim_x, model.dim_v, parts, [])


def functionals_from_tree(cert: Certificate) -> list[AffineFunctional]:
    """Explicit affine functions inducing the tree's partition.

    At a node with cut g the two sides start from g and -g and are refined by adding small multiples of the
    subtrees' functions.
    """
    dim = cert.dim_x

    def build(tree, pts) -> dict[int, AffineFunctional]:
        if isinstance(tree, Leaf):
            return {tree.part: AffineFunctional.zero(dim)}
        g = tree.cut
        lo = [p for p in pts if g(p) < 0]
        hi = [p for p in pts if g(p) > 0]
        fb = build(tree.below, lo)
        fa = build(tree.above, hi)
        delta = None
        for p in pts:
            spread = 1 + max(abs(f(p)) for f in fb.values()) + max(abs(f(p)) for f in fa.values())
            cand = abs(g(p)) / spread
            delta = cand if delta is None or cand < delta else delta
        out = {pid: g + f.scale(delta) for pid, f in fb.items()}
        out.update({pid: (-g) + f.scale(delta) for pid, f in fa.items()})
        return out

    funcs = build(cert.tree, cert.points)
    return [funcs[i] for i in range(len(cert.parts))]


# ------------------------------------------------------------------ gluing


def glue_transform(cert: Certificate, amap: AffineMap, spec: ModelSpec | None = None) -> Certificate:
    """Move a picture along a lattice map (signed permutation + translation)."""
    if not amap.is_signed_permutation():
        raise CertificateError("only lattice-preserving signed permutation maps are allowed")
    if any(not isinstance(t, int) for t in amap.translation):
        raise CertificateError("non-lattice offset")
    tree = transform_tree(cert.tree, amap)
    return make_certificate((amap(p) for p in cert.points), tree, spec)


def glue_translate(cert: Certificate, offset: Sequence[int], spec: ModelSpec | None = None) -> Certificate:
    if any(int(v) != v for v in offset):
        raise CertificateError(f"non-lattice offset {tuple(offset)}")
    return glue_transform(cert, AffineMap.translate(tuple(int(v) for v in offset)), spec)


def has_deficient_part(cert: Certificate) -> bool:
    return bool(cert.deficient_parts())


def glue_stack(
    lower: Certificate,
    upper: Certificate,
    axis: int | None = None,
    offset: Fraction | float | None = None,
    spec: ModelSpec | None = None,
    cut: AffineFunctional | None = None,
) -> Certificate:
    """Put two pictures side by side, separated by a hyperplane.

    By default the cut is the coordinate hyperplane ``x[axis] = offset``
    with ``lower`` strictly below it and ``upper`` strictly above.  When
    ``offset`` is omitted the midpoint between the two point sets is used.
    The combined picture is non-defective iff both inputs are and at most
    one of them has a deficient part.
    """
    if set(lower.points) & set(upper.points):
        raise CertificateError("pictures overlap")
    dim = lower.dim_x
    if cut is None:
        if axis is None:
            raise ValueError("either axis or cut must be given")
        if offset is None:
            hi = max(p[axis] for p in lower.points)
            lo = min(p[axis] for p in upper.points)
            offset = Fraction(hi + lo, 2)
        normal = tuple(Fraction(int(i == axis)) for i in range(dim))
        cut = AffineFunctional(normal, -Fraction(offset))
    if any(cut(p) >= 0 for p in lower.points) or any(cut(p) <= 0 for p in upper.points):
        raise CertificateError("no separating hyperplane between the pictures")
    shift = len(lower.parts)
    upper_tree = relabel(upper.tree, {i: i + shift for i in range(len(upper.parts))})
    tree = Node(cut, lower.tree, upper_tree)
    return make_certificate(lower.points + upper.points, tree, spec)


def stack_along(certs: Sequence[Certificate], axis: int, spec: ModelSpec | None = None) -> Certificate:
    """Stack pictures whose point sets are ordered along ``axis``."""
    out = certs[0]
    for nxt in certs[1:]:
        out = glue_stack(out, nxt, axis=axis)
    if spec is not None:
        out = Certificate(spec, out.points, out.tree, out.parts)
    return out


# --------------------------------------------------------------------- I/O


def _spec_dict(spec: ModelSpec) -> dict:
    return {"variety": spec.variety.value, "degrees": list(spec.degrees)}


def _tree_to_obj(tree: CutTree):
    if isinstance(tree, Leaf):
        return {"leaf": tree.part}
    cut = [str(a) for a in tree.cut.normal] + [str(tree.cut.offset)]
    return {"cut": cut, "below": _tree_to_obj(tree.below), "above": _tree_to_obj(tree.above)}


def _tree_from_obj(obj) -> CutTree:
    if "leaf" in obj:
        return Leaf(int(obj["leaf"]))
    vals = [Fraction(s) for s in obj["cut"]]
    return Node(
        AffineFunctional(tuple(vals[:-1]), vals[-1]),
        _tree_from_obj(obj["below"]),
        _tree_from_obj(obj["above"]),
    )


def certificate_to_dict(cert: Certificate) -> dict:
    index = {p: i for i, p in enumerate(cert.points)}
    out = {
        "model": None if cert.spec is None else _spec_dict(cert.spec),
        "tree": _tree_to_obj(cert.tree),
        "parts": [[index[p] for p in part] for part in cert.parts],
    }
    if cert.spec is None:
        out["points"] = [list(p) for p in cert.points]
    return out


def certificate_to_json(cert: Certificate) -> str:
    return json.dumps(certificate_to_dict(cert), sort_keys=True)


def certificate_from_json(text: str) -> Certificate:
    payload = json.loads(text)
    spec = None
    if payload.get("model") is not None:
        spec = ModelSpec(Variety(payload["model"]["variety"]), tuple(payload["model"]["degrees"]), internal=True)
        points = build_model(spec).points
    else:
        points = tuple(sorted(tuple(p) for p in payload["points"]))
    parts = tuple(tuple(sorted(points[i] for i in part)) for part in payload["parts"])
    return Certificate(spec, tuple(points), _tree_from_obj(payload["tree"]), parts)
