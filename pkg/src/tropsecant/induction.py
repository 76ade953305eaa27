"""Pictures assembled from smaller ones by the standard gluing schemes.

Every scheme cuts the point set B into translated copies of smaller
models (grids, blocks, prisms, flag sets) separated by coordinate
hyperplanes.  Small base pictures come from :func:`search_certificate`.
The glued picture is non-defective as soon as every piece is and at most
one piece has a deficient part.

Notation: ``Box(a, b, c)`` is the block {0..a} x {0..b} x {0..c} and
``T(d, e)`` the prism {x + y <= d, z <= e}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .certificates import (
    Certificate,
    glue_transform,
    glue_translate,
    make_certificate,
    stack_along,
    verify_certificate,
)
from .models import AffineMap, ModelSpec, Variety, build_model, capping_k
from .search import SearchConfig, SearchResult, search_certificate
from .theorems import is_defective, target_profile


class InductionError(RuntimeError):
    pass


@dataclass
class Trace:
    bases: list[ModelSpec] = field(default_factory=list)
    steps: list[str] = field(default_factory=list)


def _split_mod(total: int, modulus: int, allowed: set[int]) -> tuple[int, int]:
    """Write total = modulus * q + r with r in ``allowed`` and q as large as possible."""
    for q in range(total // modulus, -1, -1):
        r = total - modulus * q
        if r in allowed:
            return q, r
    raise InductionError(f"no decomposition of {total} mod {modulus} into {sorted(allowed)}")


class _Builder:
    def __init__(self, config: SearchConfig):
        self.config = config
        self.cache: dict = {}
        self.trace = Trace()

    # -- plumbing
    def get(self, variety: Variety, degrees: tuple[int, ...]) -> Certificate:
        key = (variety, tuple(degrees))
        if key not in self.cache:
            self.cache[key] = self._dispatch(variety, tuple(degrees))
        return self.cache[key]

    def base(self, variety: Variety, degrees: tuple[int, ...]) -> Certificate:
        spec = ModelSpec(variety, degrees, internal=True)
        res = search_certificate(build_model(spec), self.config)
        if res.certificate is None:
            raise InductionError(f"no base picture found for {spec}")
        self.trace.bases.append(spec)
        return res.certificate

    def note(self, text: str) -> None:
        self.trace.steps.append(text)

    def _dispatch(self, variety, deg):
        if variety in (Variety.P1P1, Variety.P1P1P1):
            return self.box(deg)
        if variety is Variety.P2P1:
            return self.prism(*deg)
        if variety is Variety.FLAG:
            return self.flag(*deg)
        return self.base(variety, deg)

    def at(self, variety, deg, offset) -> Certificate:
        return glue_translate(self.get(variety, deg), offset)

    def block(self, deg, offset) -> Certificate:
        variety = Variety.P1P1 if len(deg) == 2 else Variety.P1P1P1
        return self.at(variety, tuple(deg), offset)

    # -- grids and blocks
    def box(self, deg: tuple[int, ...]) -> Certificate:
        order = sorted(range(len(deg)), key=lambda i: (-deg[i], i))
        srt = tuple(deg[i] for i in order)
        if srt != deg:
            # picture for the sorted degrees, carried over by a coordinate permutation
            variety = Variety.P1P1 if len(deg) == 2 else Variety.P1P1P1
            src = self.get(variety, srt)
            n = len(deg)
            mat = tuple(
                tuple(1 if order[j] == i else 0 for j in range(n)) for i in range(n)
            )
            self.note(f"box {deg} from {srt} by permuting axes")
            return glue_transform(src, AffineMap(mat, (0,) * n))
        if len(deg) == 2:
            return self.grid(*deg)
        return self.block3(*deg)

    def stack(self, pieces: list[tuple[tuple[int, ...], ...]], axis: int) -> Certificate:
        """Stack blocks of the given degrees along ``axis``, starting at 0."""
        certs = []
        pos = 0
        for deg in pieces:
            offset = [0] * len(deg)
            offset[axis] = pos
            certs.append(self.block(deg, offset))
            pos += deg[axis] + 1
        return stack_along(certs, axis)

    def grid(self, d: int, e: int) -> Certificate:
        # d >= e
        if e <= 5 or e in (6, 8):
            if d > 8 and not (e == 2 and d % 2 == 0):
                # peel off six all-full columns: (5, e) is never defective
                self.note(f"grid ({d},{e}) = ({d - 6},{e}) + (5,{e}) along x")
                return self.stack([(d - 6, e), (5, e)], 0)
            return self.base(Variety.P1P1, (d, e))
        q, r = _split_mod(e + 1, 6, {0, 2, 4, 5, 7, 9})
        pieces = [(d, 5)] * q + ([(d, r - 1)] if r else [])
        self.note(f"grid ({d},{e}): e+1 = 6*{q} + {r}")
        return self.stack(pieces, 1)

    def block3(self, d: int, e: int, f: int) -> Certificate:
        # d >= e >= f
        x, y, z = 0, 1, 2
        if f == 1:
            if e == 1:
                if d <= 2:
                    return self.base(Variety.P1P1P1, (d, 1, 1))
                if d % 2:
                    return self.stack([(1, 1, 1)] * ((d + 1) // 2), x)
                return self.stack([(1, 1, 1)] * ((d - 2) // 2) + [(2, 1, 1)], x)
            if e == 2:
                if d <= 5:
                    return self.base(Variety.P1P1P1, (d, 2, 1))
                q, r = _split_mod(d + 1, 4, {3, 4, 5, 6})
                return self.stack([(3, 2, 1)] * q + [(r - 1, 2, 1)], x)
            if e == 3:
                q, r = _split_mod(d + 1, 2, {2, 3})
                return self.stack([(1, 3, 1)] * q + [(r - 1, 3, 1)], x)
            if e == 4:
                if d == 4:
                    return self.base(Variety.P1P1P1, (4, 4, 1))
                if d == 5:
                    self.note("(5,4,1) from (5,1,1) and (5,2,1)")
                    return self.stack([(5, 1, 1), (5, 2, 1)], y)
                q, r = _split_mod(d + 1, 4, {3, 4, 5, 6})
                return self.stack([(3, 4, 1)] * q + [(r - 1, 4, 1)], x)
            if e == 5:
                q, r = _split_mod(d + 1, 2, {2, 3})
                return self.stack([(1, 5, 1)] * q + [(r - 1, 5, 1)], x)
            q, r = _split_mod(e + 1, 4, {3, 4, 5, 6})
            return self.stack([(d, 3, 1)] * q + [(d, r - 1, 1)], y)
        if f == 2:
            if e == 2:
                if d in (2, 3, 4, 6):
                    return self.base(Variety.P1P1P1, (d, 2, 2))
                q, r1 = _split_mod(d + 1, 4, {2, 4, 5, 7})
                return self.stack([(3, 2, 2)] * q + [(r1 - 1, 2, 2)], x)
            if e == 3:
                q, r1 = _split_mod(d + 1, 2, {2, 3})
                return self.stack([(1, 3, 2)] * q + [(r1 - 1, 3, 2)], x)
            if d % 2 == 1:
                q, r1 = _split_mod(e + 1, 2, {2, 3})
                return self.stack([(d, 1, 2)] * q + [(d, r1 - 1, 2)], y)
            if e == 4:
                if d == 4:
                    # 75 points: any split along an axis leaves two deficient pieces
                    return self.base(Variety.P1P1P1, (4, 4, 2))
                q, r1 = _split_mod(d + 1, 4, {3, 5})
                return self.stack([(3, 4, 2)] * q + [(r1 - 1, 4, 2)], x)
            q, r1 = _split_mod(e + 1, 4, {2, 3, 4, 5})
            return self.stack([(d, 3, 2)] * q + [(d, r1 - 1, 2)], y)
        if f == 3:
            q, r1 = _split_mod(e + 1, 2, {2, 3})
            return self.stack([(d, 1, 3)] * q + [(d, r1 - 1, 3)], y)
        if f == 4 and e == 4:
            if d == 4:
                return self.base(Variety.P1P1P1, (4, 4, 4))
            # Box(3, e, f) has 4(e+1)(f+1) points, so it never adds a deficient part
            return self.stack([(3, 4, 4), (d - 4, 4, 4)], x)
        q, r1 = _split_mod((f if f >= 5 else e) + 1, 4, {2, 3, 4, 5})
        if f >= 5:
            return self.stack([(d, e, 3)] * q + [(d, e, r1 - 1)], z)
        return self.stack([(d, 3, f)] * q + [(d, r1 - 1, f)], y)

    # -- prisms
    def prism(self, d: int, e: int) -> Certificate:
        pv = Variety.P2P1
        if d == 2 and e % 2 == 0:
            if e == 2:
                return self.base(pv, (2, 2))
            self.note(f"T(2,{e}) = T(2,{e - 2}) + T(2,1) along z")
            return stack_along([self.get(pv, (2, e - 2)), self.at(pv, (2, 1), (0, 0, e - 1))], 2)
        if e >= 5:
            if (d, e) == (3, 5):
                return self.base(pv, (3, 5))
            self.note(f"T({d},{e}) = T({d},{e - 4}) + T({d},3) along z")
            return stack_along([self.get(pv, (d, e - 4)), self.at(pv, (d, 3), (0, 0, e - 3))], 2)
        if e == 1:
            if d in (1, 2, 3, 4, 7):
                return self.base(pv, (d, 1))
            return self.prism_step(d - 4, e, 4, 1)
        if e in (2, 4):
            if d <= 8 or d == 10:
                return self.base(pv, (d, e))
            return self.prism_step(d - 8, e, 8, 1)
        # e == 3
        if d <= 2:
            return self.base(pv, (d, 3))
        if d % 2:
            return self.prism_step(d - 2, e, 2, 0)
        return self.prism_step(d - 3, e, 3, 0)

    def prism_step(self, d: int, e: int, s: int, j: int) -> Certificate:
        """T(d+s, e) = T(d, e) moved by s in y, over Box(d+j, s-1, e) and T(s-1-j, e)."""
        pv = Variety.P2P1
        self.note(f"T({d + s},{e}) from T({d},{e}) with s={s}, j={j}")
        box = self.block((d + j, s - 1, e), (0, 0, 0))
        small = self.at(pv, (s - 1 - j, e), (d + j + 1, 0, 0))
        lower = stack_along([box, small], 0)
        upper = self.at(pv, (d, e), (0, s, 0))
        return stack_along([lower, upper], 1)

    # -- flag sets
    def flag(self, m: int, n: int) -> Certificate:
        fv = Variety.FLAG
        if is_defective(ModelSpec(fv, (m, n), internal=True)):
            return self.base(fv, (m, n))
        if n == 1:
            if m <= 5:
                return self.base(fv, (m, 1))
            return self.flag_m_step(m, n, 4)
        if m == 1:
            return self.flag_transposed(m, n)
        if n == 2:
            if m <= 8 or m == 10:
                return self.base(fv, (m, 2))
            return self.flag_m_step(m, n, 8)
        if m == 2:
            return self.flag_transposed(m, n)
        if m % 2:
            return self.flag_n_step(m, n, 2)
        if n % 2:
            return self.flag_transposed(m, n)
        if m >= 10:
            return self.flag_m_step(m, n, 8)
        if n >= 10:
            return self.flag_transposed(m, n)
        return self.base(fv, (m, n))

    def flag_transposed(self, m: int, n: int) -> Certificate:
        # (n1, n2, n3) -> (n1, m - n3, n - n2) carries B(n, m) onto B(m, n)
        self.note(f"flag ({m},{n}) by transposing ({n},{m})")
        src = self.get(Variety.FLAG, (n, m))
        amap = AffineMap(((1, 0, 0), (0, 0, -1), (0, -1, 0)), (0, m, n))
        return glue_transform(src, amap)

    def flag_m_step(self, m: int, n: int, s: int) -> Certificate:
        """B(m,n) = B(m-s,n) moved by s in n2, over Box(m-s,s-1,n) and B(s-1,n)."""
        fv = Variety.FLAG
        self.note(f"flag ({m},{n}) from ({m - s},{n}) with s={s}")
        box = self.block((m - s, s - 1, n), (0, 0, 0))
        small = self.at(fv, (s - 1, n), (m - s + 1, 0, 0))
        lower = stack_along([box, small], 0)
        upper = self.at(fv, (m - s, n), (0, s, 0))
        return stack_along([lower, upper], 1)

    def flag_n_step(self, m: int, n: int, s: int) -> Certificate:
        """B(m,n) = B(m,n-s) under Box(n-s,m,s-1) and B(m,s-1), both lifted to n3 > n-s."""
        fv = Variety.FLAG
        self.note(f"flag ({m},{n}) from ({m},{n - s}) with s={s}")
        h = n - s + 1
        box = self.block((n - s, m, s - 1), (0, 0, h))
        small = self.at(fv, (m, s - 1), (h, 0, h))
        upper = stack_along([box, small], 0)
        lower = self.get(fv, (m, n - s))
        return stack_along([lower, upper], 2)


def build_by_induction(spec: ModelSpec, config: SearchConfig = SearchConfig()) -> tuple[Certificate, Trace]:
    builder = _Builder(config)
    cert = builder.get(spec.variety, spec.degrees)
    model = build_model(spec)
    if cert.points != model.points:
        raise InductionError(f"assembled points differ from B for {spec}")
    cert = make_certificate(cert.points, cert.tree, spec)
    return cert, builder.trace


def search_by_induction(model, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Assemble a picture from the gluing schemes; failures propagate as
    ``InductionError`` when a base picture cannot be found."""
    spec = ModelSpec(model.spec.variety, model.spec.degrees)
    if spec.variety not in (Variety.P1P1, Variety.P1P1P1, Variety.P2P1, Variety.FLAG):
        raise InductionError(f"no gluing scheme for {spec.variety.value}")
    cert, trace = build_by_induction(spec, config)
    report = verify_certificate(cert)
    cap = capping_k(model)
    res = SearchResult(report.non_defective, cert, report, None, report.bound(cap), 0)
    res.trace = trace
    return res


def matches_table(result: SearchResult) -> bool:
    """True iff the per-k bounds equal the table's cone dimensions."""
    if result.certificate is None:
        return False
    spec = result.certificate.spec
    cell = spec.variety.dim_x + 1
    prof = target_profile(spec)
    k_max = len(result.report.rows)
    return [result.report.bound(k) for k in range(1, k_max + 1)] == prof.bounds(cell, k_max)
