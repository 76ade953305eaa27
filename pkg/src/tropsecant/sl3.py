"""The irreducible sl3-module of highest weight m w1 + n w2 in PBW coordinates.

V(m, n) is realised inside S^m(K^3) (x) S^n(L^2 K^3) as the span of the
highest weight vector v = x1^m y12^n under the lowering operators.  Here
x1, x2, x3 are the standard basis of K^3 and y12, y13, y23 the wedges
e1^e2, e1^e3, e2^e3.  The negative root vectors act as derivations:

    X_b1 = E21:  x1 -> x2,  y13 -> y23
    X_b2 = E31:  x1 -> x3,  y12 -> -y23
    X_b3 = E32:  x2 -> x3,  y12 -> y13

The PBW monomial of r = (r1, r2, r3) is m_r = X_b1^r1 X_b2^r2 X_b3^r3 v, and
{m_b : b in B(m, n)} is a basis of V.  Coordinates are taken in the rescaled
basis n_b = m_b / (b1! b2! b3!), in which all three operators have integer
matrices.  Everything here is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .geometry import AffineFunctional, affine_dim
from .models import FLAG_Z, ModelError, Point, _on_ray, flag_points, weight_map

Mono = tuple[tuple[int, int, int], tuple[int, int, int]]  # (x exponents, y exponents)
Poly = dict  # Mono -> Fraction

# images of the variables under each operator: index -> list of (index, sign)
_X_RULES = {
    1: {0: (1, 1)},
    2: {0: (2, 1)},
    3: {1: (2, 1)},
}
_Y_RULES = {
    1: {1: (2, 1)},  # y13 -> y23
    2: {0: (2, -1)},  # y12 -> -y23
    3: {0: (1, 1)},  # y12 -> y13
}


def apply_root(beta: int, poly: Poly) -> Poly:
    """Apply X_beta (beta in 1, 2, 3) as a derivation."""
    out: Poly = {}
    xr, yr = _X_RULES[beta], _Y_RULES[beta]
    for (a, c), coef in poly.items():
        for i, (j, sign) in xr.items():
            if a[i]:
                na = list(a)
                na[i] -= 1
                na[j] += 1
                key = (tuple(na), c)
                out[key] = out.get(key, 0) + coef * a[i] * sign
        for i, (j, sign) in yr.items():
            if c[i]:
                nc = list(c)
                nc[i] -= 1
                nc[j] += 1
                key = (a, tuple(nc))
                out[key] = out.get(key, 0) + coef * c[i] * sign
    return {k: v for k, v in out.items() if v != 0}


def highest_vector(m: int, n: int) -> Poly:
    return {((m, 0, 0), (n, 0, 0)): Fraction(1)}


def pbw_vector(m: int, n: int, r: tuple[int, int, int]) -> Poly:
    v = highest_vector(m, n)
    for beta, times in ((3, r[2]), (2, r[1]), (1, r[0])):
        for _ in range(times):
            v = apply_root(beta, v)
            if not v:
                return {}
    return v


def _poly_weight(mono: Mono) -> tuple[int, int, int]:
    """gl3 weight (e1, e2, e3 multiplicities) of a monomial."""
    a, c = mono
    return (a[0] + c[0] + c[1], a[1] + c[0] + c[2], a[2] + c[1] + c[2])


def _echelon_insert(basis: list, pivots: list, vec: Poly) -> bool:
    """Reduce ``vec`` against a row-echelon list; append it if independent."""
    v = dict(vec)
    for row, piv in zip(basis, pivots):
        c = v.get(piv)
        if c:
            f = c / row[piv]
            for k, val in row.items():
                nv = v.get(k, 0) - f * val
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
    if not v:
        return False
    basis.append(v)
    pivots.append(min(v))
    return True


def cyclic_span_dim(m: int, n: int) -> int:
    """Dimension of the span of v under the simple lowering operators E21, E32."""
    spaces: dict = {}
    frontier = [highest_vector(m, n)]
    total = 0
    while frontier:
        nxt = []
        for vec in frontier:
            w = _poly_weight(next(iter(vec)))
            basis, pivots = spaces.setdefault(w, ([], []))
            if _echelon_insert(basis, pivots, vec):
                total += 1
                for beta in (1, 3):
                    img = apply_root(beta, basis[-1])
                    if img:
                        nxt.append(img)
        frontier = nxt
    return total


def _inverse(mat: list[list]) -> list[list[Fraction]]:
    """Inverse of a square invertible matrix by Gauss-Jordan elimination."""
    n = len(mat)
    rows = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for c in range(n):
        p = next(i for i in range(c, n) if rows[i][c] != 0)
        rows[c], rows[p] = rows[p], rows[c]
        inv = 1 / rows[c][c]
        rows[c] = [x * inv for x in rows[c]]
        for i in range(n):
            if i != c and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return [row[n:] for row in rows]


@dataclass
class Sl3Module:
    m: int
    n: int
    basis_labels: tuple[Point, ...]
    basis_vectors: dict  # label -> n_b as a Poly in S^m (x) S^n coordinates
    op_matrices: dict  # beta -> tuple of integer rows acting on coordinate columns
    highest: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis_labels)

    def index(self, b: Point) -> int:
        return self._index[b]

    def __post_init__(self):
        self._index = {b: i for i, b in enumerate(self.basis_labels)}
        self._solvers: dict = {}
        self._by_weight: dict = {}
        for b in self.basis_labels:
            self._by_weight.setdefault(weight_map(b), []).append(b)

    def coordinates(self, poly: Poly) -> list[Fraction]:
        """Coordinates of a vector of V in the basis (n_b)."""
        out = [Fraction(0)] * self.dim
        groups: dict = {}
        for mono, c in poly.items():
            groups.setdefault(_poly_weight(mono), {})[mono] = c
        for w, part in groups.items():
            labels, keys, inv = self._solver(w)
            rhs = [part.get(k, 0) for k in keys]
            coef = [sum(a * x for a, x in zip(row, rhs)) for row in inv]
            cols = [self.basis_vectors[b] for b in labels]
            for key in set(part).union(*cols):
                if sum(c * col.get(key, 0) for c, col in zip(coef, cols)) != part.get(key, 0):
                    raise ModelError("vector does not lie in V")
            for b, c in zip(labels, coef):
                out[self._index[b]] = c
        return out

    def _solver(self, w):
        """Labels of gl3 weight w, monomials on which they are independent, and the inverse."""
        if w not in self._solvers:
            labels = self._labels_of_gl3_weight(w)
            cols = [self.basis_vectors[b] for b in labels]
            keys, basis, pivots = [], [], []
            for key in sorted(set().union(*cols)):
                row = {i: c[key] for i, c in enumerate(cols) if key in c}
                if _echelon_insert(basis, pivots, row):
                    keys.append(key)
                if len(keys) == len(labels):
                    break
            if len(keys) < len(labels):
                raise ModelError(f"basis vectors of weight {w} are dependent")
            square = [[c.get(k, Fraction(0)) for c in cols] for k in keys]
            self._solvers[w] = (labels, keys, _inverse(square))
        return self._solvers[w]

    def _labels_of_gl3_weight(self, w):
        # gl3 weight of m_r: start at (m+n, n, 0) and move by the root of each step
        m, n = self.m, self.n
        out = []
        for b in self.basis_labels:
            r1, r2, r3 = b
            if (m + n - r1 - r2, n + r1 - r3, r2 + r3) == w:
                out.append(b)
        return out

    def apply(self, beta: int, coords) -> list:
        mat = self.op_matrices[beta]
        return [sum(a * x for a, x in zip(row, coords) if a) for row in mat]

    def pbw_coordinates(self, r) -> list:
        """Coordinates of m_r."""
        vec = list(self.highest)
        for beta, times in ((3, r[2]), (2, r[1]), (1, r[0])):
            for _ in range(times):
                vec = self.apply(beta, vec)
        return vec


@lru_cache(maxsize=None)
def build_sl3_module(m: int, n: int) -> Sl3Module:
    if m < 0 or n < 0:
        raise ModelError("weights must be nonnegative")
    labels = tuple(sorted(flag_points(m, n)))
    vectors = {}
    for b in labels:
        scale = Fraction(1, math.factorial(b[0]) * math.factorial(b[1]) * math.factorial(b[2]))
        vectors[b] = {k: c * scale for k, c in pbw_vector(m, n, b).items()}
    span = cyclic_span_dim(m, n)
    if span != len(labels):
        raise ModelError(f"cyclic span has dimension {span}, expected |B| = {len(labels)}")
    # the m_b must be independent, weight space by weight space
    by_w: dict = {}
    for b in labels:
        by_w.setdefault(weight_map(b), []).append(b)
    for group in by_w.values():
        basis, pivots = [], []
        for b in group:
            if not _echelon_insert(basis, pivots, vectors[b]):
                raise ModelError(f"PBW vectors of weight {weight_map(group[0])} are dependent")
    module = Sl3Module(m, n, labels, vectors, {}, ())
    mats = {}
    for beta in (1, 2, 3):
        cols = [module.coordinates(apply_root(beta, vectors[b])) for b in labels]
        if any(x.denominator != 1 for col in cols for x in col):
            raise ModelError(f"X_b{beta} is not integral in the divided-power basis")
        mats[beta] = tuple(tuple(int(cols[j][i]) for j in range(len(labels))) for i in range(len(labels)))
    module.op_matrices = mats
    hv = [0] * len(labels)
    hv[module.index((0, 0, 0))] = 1
    module.highest = tuple(hv)
    return module


@dataclass
class MonomialData:
    M: frozenset
    A: dict  # b -> frozenset of exponent vectors
    coefficients: dict  # (b, r) -> coefficient of n_b in m_r / prod(r_i!), i.e. of t^r in Psi_b / t0


def compute_M_and_Ab(module: Sl3Module, bound: tuple[int, int, int] | None = None) -> MonomialData:
    """Exponents r with m_r != 0 and, per basis label b, the set A_b.

    A_b collects the r whose m_r has a nonzero b-coordinate.  The search
    box is (m+n, m+n, n) by default; a nonzero m_r on its outer boundary
    means the box was too small and raises ``ModelError``.
    """
    m, n = module.m, module.n
    if bound is None:
        bound = (m + n, m + n, n)
    b1, b2, b3 = bound
    M = set()
    A: dict = {b: set() for b in module.basis_labels}
    coefs = {}
    fact = [1]
    for i in range(1, max(bound) + 2):
        fact.append(fact[-1] * i)
    col3 = list(module.highest)
    for r3 in range(b3 + 2):
        col2 = col3
        for r2 in range(b2 + 2):
            col1 = col2
            for r1 in range(b1 + 2):
                if any(col1):
                    r = (r1, r2, r3)
                    if r1 > b1 or r2 > b2 or r3 > b3:
                        raise ModelError(f"bound {bound} too small: m_{r} != 0")
                    M.add(r)
                    scale = Fraction(1, fact[r1] * fact[r2] * fact[r3])
                    for i, c in enumerate(col1):
                        if c:
                            b = module.basis_labels[i]
                            A[b].add(r)
                            coefs[(b, r)] = c * scale
                col1 = module.apply(1, col1)
            col2 = module.apply(2, col2)
        col3 = module.apply(3, col3)
    return MonomialData(frozenset(M), {b: frozenset(s) for b, s in A.items()}, coefs)


def check_monomial_structure(module: Sl3Module, data: MonomialData) -> list[str]:
    """Problems with the structure of M and the A_b (empty list if none).

    Checks that every A_b meets B only in b, that all of A_b has the weight
    of b, and that for r in M outside B every b of the same weight lies
    strictly below r along z = (1, -1, 1).
    """
    problems = []
    B = set(module.basis_labels)
    for b, A_b in data.A.items():
        if A_b & B != {b}:
            problems.append(f"A_{b} meets B in {sorted(A_b & B)}")
        if any(weight_map(r) != weight_map(b) for r in A_b):
            problems.append(f"A_{b} mixes weights")
    by_w: dict = {}
    for b in B:
        by_w.setdefault(weight_map(b), []).append(b)
    for r in data.M - B:
        for b in by_w.get(weight_map(r), []):
            if not _on_ray([x - y for x, y in zip(b, r)], FLAG_Z):
                problems.append(f"{b} is not below {r} along z")
    return problems


def winners_generalized(sets: dict, functionals) -> list[set]:
    """Winning directions of each functional on a family of finite sets."""
    won = [set() for _ in functionals]
    for A_b in sets.values():
        best = None
        hits = []
        for i, f in enumerate(functionals):
            for a in A_b:
                v = f(a)
                if best is None or v < best:
                    best, hits = v, [(i, a)]
                elif v == best:
                    hits.append((i, a))
        if len(hits) == 1:
            i, a = hits[0]
            won[i].add(a)
    return won


def k1_tropical_sanity(m: int, n: int) -> tuple[bool, int]:
    """Check that f(r) = r1 + r2 + r3 wins 0 and every e_beta.

    Returns (ok, value) with value = 1 + affine dim of the winning set,
    which should equal dim C = 4.
    """
    module = build_sl3_module(m, n)
    data = compute_M_and_Ab(module)
    f = AffineFunctional((1, 1, 1), 0)
    (won,) = winners_generalized(data.A, [f])
    need = {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}
    value = 1 + affine_dim(won)
    return need <= won and value == 4, value
