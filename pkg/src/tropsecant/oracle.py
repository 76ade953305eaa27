"""Terracini rank oracle: dim kC as the rank of k stacked Jacobians of Psi.

Psi is the cone parameterization with coordinates indexed by the model's
points.  Segre-Veronese models use products of binomial and trinomial
expansions.  The flag model uses t0 exp(t1 X_b1) exp(t2 X_b2) exp(t3 X_b3) v
in the integral basis of ``sl3``.  Ranks are taken over a random prime field;
the result lower-bounds dim kC and equals it with high probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy

from .models import Model, ModelSpec, Variety, capping_k, expected_cone_dim
from .sl3 import build_sl3_module

PRIME_MIN = 2**30
PRIME_MAX = 2**31


class OracleError(RuntimeError):
    pass


# ---------------------------------------------------------------- Segre-Veronese


def _factors(spec: ModelSpec) -> list[tuple[int, int]]:
    """(number of affine parameters, degree) for each factor."""
    v, deg = spec.variety, spec.degrees
    if v in (Variety.P1, Variety.P1P1, Variety.P1P1P1):
        return [(1, d) for d in deg]
    if v is Variety.P2:
        return [(2, deg[0])]
    if v is Variety.P2P1:
        return [(2, deg[0]), (1, deg[1])]
    raise OracleError(f"{v.value} is not a Segre-Veronese model")


def sv_coefficient(spec: ModelSpec, b) -> int:
    """Multinomial coefficient of the monomial t^b in Psi / t0."""
    out, pos = 1, 0
    for size, d in _factors(spec):
        part = b[pos : pos + size]
        rest = d - sum(part)
        out *= math.factorial(d) // (math.factorial(rest) * math.prod(math.factorial(x) for x in part))
        pos += size
    return out


def _sv_psi(model: Model, params) -> list:
    t0, ts = params[0], params[1:]
    out = []
    for b in model.points:
        val = t0 * sv_coefficient(model.spec, b)
        for t, e in zip(ts, b):
            val = val * t**e
        out.append(val)
    return out


# ---------------------------------------------------------------- flag


@lru_cache(maxsize=None)
def divided_powers(m: int, n: int, beta: int) -> tuple:
    """Integer matrices X_beta^j / j! for j = 1, 2, ... until they vanish."""
    module = build_sl3_module(m, n)
    dim = module.dim
    cols = [[int(i == j) for i in range(dim)] for j in range(dim)]
    out = []
    j = 0
    while True:
        cols = [module.apply(beta, c) for c in cols]
        if not any(any(c) for c in cols):
            return tuple(out)
        j += 1
        fj = math.factorial(j)
        if any(x % fj for c in cols for x in c):
            raise OracleError("divided power is not integral")
        out.append(tuple(tuple(cols[c][r] // fj for c in range(dim)) for r in range(dim)))


def _exp_generic(m: int, n: int, beta: int, t, vec: list) -> list:
    """exp(t X_beta) vec with entries in any ring."""
    acc = list(vec)
    tj = 1
    for mat in divided_powers(m, n, beta):
        tj = tj * t
        for r, row in enumerate(mat):
            s = 0
            for a, x in zip(row, vec):
                if a and x != 0:
                    s = s + a * x
            if s != 0:
                acc[r] = acc[r] + s * tj
    return acc


def _flag_psi(model: Model, params) -> list:
    m, n = model.spec.degrees
    module = build_sl3_module(m, n)
    t0, t1, t2, t3 = params
    w = _exp_generic(m, n, 3, t3, list(module.highest))
    w = _exp_generic(m, n, 2, t2, w)
    w = _exp_generic(m, n, 1, t1, w)
    return [t0 * w[module.index(b)] for b in model.points]


def psi_eval(model: Model, params) -> list:
    """Psi at ``params`` = (t0, t1, ..., t_dimX), exact in the ring of the params."""
    if len(params) != model.dim_x + 1:
        raise OracleError(f"expected {model.dim_x + 1} parameters, got {len(params)}")
    if model.spec.variety is Variety.FLAG:
        return _flag_psi(model, params)
    return _sv_psi(model, params)


# ---------------------------------------------------------------- mod p


_SPLIT = 11  # bits per chunk: 2^31 * 2^11 * 2^11 rows stays below 2^53


def _matvec(mat: np.ndarray, vec: np.ndarray, p: int) -> np.ndarray:
    """mat @ vec mod p for entries in [0, p), exact through float64 chunks."""
    if mat.shape[1] >= 2**10:
        raise OracleError("matrix too wide for exact float64 products")
    fmat = mat.astype(np.float64)
    out = np.zeros(mat.shape[0], dtype=np.int64)
    shift = 0
    rest = vec.astype(np.int64)
    while rest.any():
        chunk = (rest & ((1 << _SPLIT) - 1)).astype(np.float64)
        part = (fmat @ chunk).astype(np.int64) % p
        out = (out + part * pow(2, shift, p)) % p
        rest = rest >> _SPLIT
        shift += _SPLIT
    return out


class _SparseOp:
    """Integer matrix with few nonzeros per row, applied mod p."""

    def __init__(self, rows, p: int):
        r, c = np.nonzero(np.array(rows, dtype=np.int64))
        vals = np.array([rows[i][j] for i, j in zip(r, c)], dtype=np.int64)
        if vals.size and np.abs(vals).max() >= 2**20:
            raise OracleError("operator entries too large for the mod p path")
        self.n = len(rows)
        self.r, self.c, self.v = r, c, vals % p
        self.p = p

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.int64)
        np.add.at(out, self.r, self.v * vec[self.c] % self.p)
        return out % self.p


class _ModP:
    """Jacobian rows of Psi modulo p, in model point order."""

    def __init__(self, model: Model, p: int):
        self.model, self.p = model, p
        self.flag = model.spec.variety is Variety.FLAG
        if self.flag:
            module = build_sl3_module(*model.spec.degrees)
            order = [module.index(b) for b in model.points]
            self.order = np.array(order, dtype=np.int64)
            self.ops = {beta: _SparseOp(module.op_matrices[beta], p) for beta in (1, 2, 3)}
            self.highest = np.array(module.highest, dtype=np.int64)
            self.inv_j = [0] + [pow(j, -1, p) for j in range(1, module.m + module.n + 3)]
        else:
            self.exps = [tuple(b) for b in model.points]
            self.coefs = [sv_coefficient(model.spec, b) % p for b in model.points]

    def _exp(self, beta: int, t: int, vec: np.ndarray) -> np.ndarray:
        p = self.p
        acc = vec.copy()
        term = vec
        j = 0
        while True:
            term = self.ops[beta](term)
            if not term.any():
                return acc
            j += 1
            term = term * (t * self.inv_j[j] % p) % p
            acc = (acc + term) % p

    def jacobian(self, t: list[int]) -> np.ndarray:
        """(dimX + 1) x dimV matrix of partial derivatives at t."""
        p = self.p
        if self.flag:
            t0, t1, t2, t3 = t
            w3 = self._exp(3, t3, self.highest)
            w2 = self._exp(2, t2, w3)
            w1 = self._exp(1, t1, w2)
            d1 = self.ops[1](w1)
            d2 = self._exp(1, t1, self.ops[2](w2))
            d3 = self._exp(1, t1, self._exp(2, t2, self.ops[3](w3)))
            rows = [w1, d1 * t0 % p, d2 * t0 % p, d3 * t0 % p]
            return np.stack([r[self.order] for r in rows])
        t0, ts = t[0], t[1:]
        inv = [pow(x, -1, p) for x in ts]
        rows = [[0] * len(self.exps) for _ in range(len(t))]
        for col, (b, c) in enumerate(zip(self.exps, self.coefs)):
            mono = c
            for x, e in zip(ts, b):
                mono = mono * pow(x, e, p) % p
            rows[0][col] = mono
            for j, e in enumerate(b):
                if e:
                    rows[j + 1][col] = t0 * mono % p * e % p * inv[j] % p
        return np.array(rows, dtype=np.int64)


class _Echelon:
    """Incremental reduced row echelon form over F_p."""

    def __init__(self, ncols: int, p: int):
        self.p = p
        self.rows = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def add(self, row: np.ndarray) -> bool:
        p = self.p
        row = row % p
        if self.pivots:
            c = row[self.pivots]
            row = (row - _matvec(self.rows.T, c, p)) % p
        nz = np.flatnonzero(row)
        if nz.size == 0:
            return False
        piv = int(nz[0])
        row = row * pow(int(row[piv]), -1, p) % p
        if self.pivots:
            col = self.rows[:, piv].copy()
            self.rows = (self.rows - (col[:, None] * row[None, :]) % p) % p
        self.rows = np.vstack([self.rows, row])
        self.pivots.append(piv)
        return True


def random_prime(seed: int) -> int:
    rng = np.random.default_rng(seed)
    start = int(rng.integers(PRIME_MIN, PRIME_MAX - 2**20))
    return int(sympy.nextprime(start))


def prefix_ranks(model: Model, k_max: int, prime: int, rng: np.random.Generator) -> list[int]:
    """Ranks of the first k stacked Jacobians, k = 1..k_max, at random points."""
    jac = _ModP(model, prime)
    ech = _Echelon(model.dim_v, prime)
    out = []
    for _ in range(k_max):
        if ech.rank < model.dim_v:
            t = [int(x) for x in rng.integers(1, prime, size=model.dim_x + 1)]
            for row in jac.jacobian(t):
                ech.add(row)
        out.append(ech.rank)
    return out


@dataclass
class OracleReport:
    spec: ModelSpec
    dim_v: int
    dim_x: int
    prime: int
    seed: int
    trial_seeds: list[int]
    dims: list[int]  # dims[k - 1] = dim kC
    agreeing: list[int]  # trials attaining the max, per k
    trial_dims: list[list[int]] = field(default_factory=list)

    @property
    def unstable(self) -> bool:
        return any(a < len(self.trial_seeds) for a in self.agreeing)

    def dim(self, k: int) -> int:
        if k < 1:
            raise ValueError("k must be positive")
        if k > len(self.dims):
            # past the computed range the rank is known only once it is full
            if not self.dims or self.dims[-1] != self.dim_v:
                raise ValueError(f"dim {k}C was not computed")
            return self.dim_v
        return self.dims[k - 1]

    def to_dict(self) -> dict:
        return {
            "variety": self.spec.variety.value,
            "degrees": list(self.spec.degrees),
            "dim_v": self.dim_v,
            "dim_x": self.dim_x,
            "prime": self.prime,
            "seed": self.seed,
            "trial_seeds": list(self.trial_seeds),
            "dims": list(self.dims),
            "expected": [min(k * (self.dim_x + 1), self.dim_v) for k in range(1, len(self.dims) + 1)],
            "agreeing_trials": list(self.agreeing),
            "trial_dims": [list(d) for d in self.trial_dims],
            "unstable": self.unstable,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "OracleReport":
        d = json.loads(text)
        spec = ModelSpec(Variety(d["variety"]), tuple(d["degrees"]))
        return cls(
            spec, d["dim_v"], d["dim_x"], d["prime"], d["seed"], d["trial_seeds"],
            d["dims"], d["agreeing_trials"], d["trial_dims"],
        )


def terracini_report(
    model: Model, k_max: int | None = None, prime: int | None = None, seed: int = 0, trials: int = 3
) -> OracleReport:
    """dim kC for k = 1..k_max (default: the capping value)."""
    if k_max is None:
        k_max = capping_k(model)
    if k_max < 1:
        raise ValueError("k must be positive")
    if trials < 1:
        raise ValueError("trials must be positive")
    if prime is None:
        prime = random_prime(seed)
    if not (PRIME_MIN < prime < 2**31) or not sympy.isprime(prime):
        raise OracleError(f"{prime} is not a prime in (2^30, 2^31)")
    trial_seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(trials)]
    runs = [prefix_ranks(model, k_max, prime, np.random.default_rng(s)) for s in trial_seeds]
    dims = [max(r[k] for r in runs) for k in range(k_max)]
    agreeing = [sum(r[k] == dims[k] for r in runs) for k in range(k_max)]
    return OracleReport(model.spec, model.dim_v, model.dim_x, prime, seed, trial_seeds, dims, agreeing, runs)


def terracini_dim(model: Model, k: int, prime: int | None = None, seed: int = 0, trials: int = 3) -> int:
    return terracini_report(model, k, prime, seed, trials).dims[k - 1]


def exact_terracini_dim(model: Model, k: int, seed: int = 0, bound: int = 10**6) -> int:
    """Rank over Q at random integer points (slow; meant for small models)."""
    rng = np.random.default_rng(seed)
    syms = sympy.symbols(f"t0:{model.dim_x + 1}")
    psi = psi_eval(model, list(syms))
    jac = sympy.Matrix([[sympy.diff(f, s) for f in psi] for s in syms])
    rows = []
    for _ in range(k):
        vals = dict(zip(syms, (int(x) for x in rng.integers(1, bound, size=len(syms)))))
        rows.append(jac.subs(vals))
    return sympy.Matrix.vstack(*rows).rank()


def check_against_expected(report: OracleReport) -> list[str]:
    """Structural problems with a report (empty list if none)."""
    problems = []
    dims = report.dims
    if dims and dims[0] != report.dim_x + 1:
        problems.append(f"dim 1C = {dims[0]}, expected {report.dim_x + 1}")
    for k in range(1, len(dims) + 1):
        exp = min(k * (report.dim_x + 1), report.dim_v)
        if dims[k - 1] > exp:
            problems.append(f"dim {k}C = {dims[k - 1]} exceeds {exp}")
        if k > 1 and dims[k - 1] < dims[k - 2]:
            problems.append(f"dims decrease at k = {k}")
    return problems


__all__ = [
    "OracleError", "OracleReport", "psi_eval", "sv_coefficient", "terracini_dim",
    "terracini_report", "exact_terracini_dim", "random_prime", "prefix_ranks",
    "check_against_expected", "expected_cone_dim",
]
