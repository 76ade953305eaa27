"""Exact rational simplex method.

Solves ``maximize c.x  subject to  A x <= b, x >= 0`` over ``Fraction``
using a dictionary (tableau-without-slack-columns) representation and
Bland's rule, so termination is guaranteed even on degenerate problems.
There are no tolerances anywhere: every comparison is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
STOPPED = "stopped"


@dataclass
class LPResult:
    status: str
    x: list[Fraction] | None = None
    objective: Fraction | None = None
    pivots: int = 0


class _Dictionary:
    # rows:  x_basic[i] + sum_j T[i][j] * x_nonbasic[j] = rhs[i]
    # obj:   z = z0 + sum_j obj[j] * x_nonbasic[j]

    def __init__(self, T, rhs, obj, basic, nonbasic):
        self.T = T
        self.rhs = rhs
        self.obj = obj
        self.z0 = Fraction(0)
        self.basic = basic
        self.nonbasic = nonbasic
        self.pivots = 0

    def pivot(self, r: int, s: int) -> None:
        T, rhs = self.T, self.rhs
        row = T[r]
        p = row[s]
        inv = 1 / p
        ncols = len(row)
        nz = [j for j in range(ncols) if j != s and row[j] != 0]
        new_row = [Fraction(0)] * ncols
        for j in nz:
            new_row[j] = row[j] * inv
        new_row[s] = inv
        rhs_r = rhs[r] * inv
        for i in range(len(T)):
            if i == r:
                continue
            ti = T[i]
            f = ti[s]
            if f == 0:
                continue
            for j in nz:
                ti[j] -= f * new_row[j]
            ti[s] = -f * inv
            rhs[i] -= f * rhs_r
        f = self.obj[s]
        if f != 0:
            obj = self.obj
            for j in nz:
                obj[j] -= f * new_row[j]
            obj[s] = -f * inv
            self.z0 += f * rhs_r
        T[r] = new_row
        rhs[r] = rhs_r
        self.basic[r], self.nonbasic[s] = self.nonbasic[s], self.basic[r]
        self.pivots += 1

    def entering(self) -> int | None:
        best = None
        for j, c in enumerate(self.obj):
            if c > 0 and (best is None or self.nonbasic[j] < self.nonbasic[best]):
                best = j
        return best

    def leaving(self, s: int) -> int | None:
        best = None
        best_ratio = None
        for i, row in enumerate(self.T):
            a = row[s]
            if a > 0:
                ratio = self.rhs[i] / a
                if (
                    best is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self.basic[i] < self.basic[best])
                ):
                    best, best_ratio = i, ratio
        return best

    def run(self, stop: Callable[[Fraction], bool] | None = None) -> str:
        while True:
            if stop is not None and stop(self.z0):
                return STOPPED
            s = self.entering()
            if s is None:
                return OPTIMAL
            r = self.leaving(s)
            if r is None:
                return UNBOUNDED
            self.pivot(r, s)

    def values(self, nvars: int) -> list[Fraction]:
        x = [Fraction(0)] * nvars
        for i, v in enumerate(self.basic):
            if v < nvars:
                x[v] = self.rhs[i]
        return x


def maximize(
    c: Sequence,
    A: Sequence[Sequence],
    b: Sequence,
    stop_above: Fraction | int | None = None,
) -> LPResult:
    """Maximize ``c.x`` subject to ``A x <= b`` and ``x >= 0``.

    If ``stop_above`` is given, the solver returns as soon as a feasible
    basis with objective strictly greater than it is reached (status
    ``"stopped"``); the returned point is feasible but not necessarily
    optimal.
    """
    n = len(c)
    m = len(A)
    c = [Fraction(v) for v in c]
    T = [[Fraction(v) for v in row] for row in A]
    rhs = [Fraction(v) for v in b]
    for row in T:
        if len(row) != n:
            raise ValueError("constraint row length does not match objective")
    stop = None if stop_above is None else (lambda z: z > stop_above)

    # variables 0..n-1 are structural, n..n+m-1 slacks, n+m the phase-one helper
    if all(v >= 0 for v in rhs):
        d = _Dictionary(T, rhs, list(c), list(range(n, n + m)), list(range(n)))
        status = d.run(stop)
        if status == UNBOUNDED:
            return LPResult(UNBOUNDED, pivots=d.pivots)
        return LPResult(status, d.values(n), d.z0, d.pivots)

    aux = n + m
    for row in T:
        row.append(Fraction(-1))
    obj = [Fraction(0)] * n + [Fraction(-1)]
    d = _Dictionary(T, rhs, obj, list(range(n, n + m)), list(range(n)) + [aux])
    r = min(range(m), key=lambda i: (rhs[i], i))
    d.pivot(r, n)
    d.run()
    if d.z0 < 0:
        return LPResult(INFEASIBLE, pivots=d.pivots)
    if aux in d.basic:
        r = d.basic.index(aux)
        s = next((j for j, a in enumerate(d.T[r]) if a != 0), None)
        if s is None:
            # redundant row: aux == 0 identically
            del d.T[r], d.rhs[r], d.basic[r]
        else:
            d.pivot(r, s)
    if aux in d.nonbasic:
        s = d.nonbasic.index(aux)
        for row in d.T:
            del row[s]
        del d.nonbasic[s]
    # re-express the true objective in the current nonbasic variables
    obj = [Fraction(0)] * len(d.nonbasic)
    z0 = Fraction(0)
    for j, v in enumerate(d.nonbasic):
        if v < n:
            obj[j] += c[v]
    for i, v in enumerate(d.basic):
        if v < n and c[v] != 0:
            z0 += c[v] * d.rhs[i]
            for j, a in enumerate(d.T[i]):
                if a != 0:
                    obj[j] -= c[v] * a
    d.obj = obj
    d.z0 = z0
    status = d.run(stop)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, pivots=d.pivots)
    return LPResult(status, d.values(n), d.z0, d.pivots)
