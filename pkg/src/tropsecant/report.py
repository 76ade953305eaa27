"""Theorem tables: certificates, oracle ranks and the table of known defects."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .certificates import verify_certificate
from .induction import InductionError, search_by_induction
from .models import Model, ModelSpec, Variety, build_model, capping_k, expected_cone_dim
from .oracle import OracleReport, terracini_report
from .search import SearchConfig, SearchResult, search_certificate
from .theorems import true_cone_dims

DEFAULT_CAPS = {
    Variety.P1: (8,),
    Variety.P2: (6,),
    Variety.P1P1: (8, 8),
    Variety.P2P1: (6, 6),
    Variety.P1P1P1: (6, 6, 4),
    Variety.FLAG: (6, 6),
}


class SoundnessError(RuntimeError):
    """A certified bound exceeds the oracle rank: an implementation bug."""


def degree_tuples(variety: Variety, caps) -> list[tuple[int, ...]]:
    """Degree tuples up to ``caps``, one per isomorphism class of the grid."""
    ranges = [range(1, c + 1) for c in caps]
    out = []
    for deg in itertools.product(*ranges):
        # permuting P1 factors gives the same picture problem
        if variety in (Variety.P1P1, Variety.P1P1P1) and list(deg) != sorted(deg, reverse=True):
            continue
        out.append(deg)
    return out


@dataclass
class TheoremRow:
    variety: str
    degrees: tuple[int, ...]
    k: int
    expected: int
    bound: int
    oracle: int
    table: int

    @property
    def classification(self) -> str:
        if self.oracle == self.expected:
            return "non-defective"
        return f"defective({self.expected - self.oracle})"

    def to_dict(self) -> dict:
        return {
            "variety": self.variety,
            "degrees": list(self.degrees),
            "k": self.k,
            "expected": self.expected,
            "bound": self.bound,
            "oracle": self.oracle,
            "table": self.table,
            "classification": self.classification,
        }


@dataclass
class ModelResult:
    spec: ModelSpec
    method: str
    search: SearchResult
    oracle: OracleReport
    rows: list[TheoremRow]
    problems: list[str] = field(default_factory=list)
    search_gap: bool = False  # certificate below the table at some k

    @property
    def ok(self) -> bool:
        return not self.problems


def certify(model: Model, config: SearchConfig = SearchConfig()) -> tuple[SearchResult, str]:
    """Best verified picture: gluing first, plain search as the fallback."""
    res = None
    if model.spec.variety in (Variety.P1P1, Variety.P1P1P1, Variety.P2P1, Variety.FLAG):
        try:
            res = search_by_induction(model, config)
        except InductionError:
            res = None
    if res is not None and _meets_table(res, model):
        return res, "induction"
    direct = search_certificate(model, config)
    if direct.certificate is None and res is not None:
        return res, "induction"
    return direct, "search"


def _meets_table(res: SearchResult, model: Model) -> bool:
    if res.certificate is None:
        return False
    cap = capping_k(model)
    return [res.report.bound(k) for k in range(1, cap + 1)] == true_cone_dims(model.spec, cap)


def analyse(
    spec: ModelSpec,
    config: SearchConfig = SearchConfig(),
    prime: int | None = None,
    seed: int = 0,
    trials: int = 3,
) -> ModelResult:
    model = build_model(spec)
    res, method = certify(model, config)
    cap = capping_k(model)
    rep = terracini_report(model, cap, prime, seed, trials)
    table = true_cone_dims(spec, cap)
    rows, problems = [], []
    gap = False
    if res.certificate is not None:
        again = verify_certificate(res.certificate)
        if again.part_values != res.report.part_values:
            problems.append("certificate does not re-verify")
    for k in range(1, cap + 1):
        bound = res.report.bound(k) if res.report is not None else 0
        row = TheoremRow(
            spec.variety.value, spec.degrees, k, expected_cone_dim(model, k), bound, rep.dim(k), table[k - 1]
        )
        rows.append(row)
        if bound > row.oracle:
            raise SoundnessError(f"{spec} k={k}: certified bound {bound} > oracle dim {row.oracle}")
        if row.oracle != row.table:
            problems.append(f"k={k}: oracle dim {row.oracle} but the table says {row.table}")
        if bound < row.table:
            gap = True
    if rep.unstable:
        problems.append("oracle ranks vary across trials")
    return ModelResult(spec, method, res, rep, rows, problems, gap)


@dataclass
class TheoremTable:
    variety: Variety
    caps: tuple[int, ...]
    seed: int
    results: list[ModelResult]

    @property
    def rows(self) -> list[TheoremRow]:
        return [r for res in self.results for r in res.rows]

    def exit_status(self, strict: bool = False) -> int:
        if any(not res.ok for res in self.results):
            return 1
        if strict and any(res.search_gap for res in self.results):
            return 1
        return 0

    def defective_rows(self) -> list[TheoremRow]:
        return [r for r in self.rows if r.oracle != r.expected]

    def to_dict(self) -> dict:
        return {
            "variety": self.variety.value,
            "caps": list(self.caps),
            "seed": self.seed,
            "models": [
                {
                    "degrees": list(res.spec.degrees),
                    "method": res.method,
                    "prime": res.oracle.prime,
                    "trial_seeds": res.oracle.trial_seeds,
                    "part_values": None if res.search.report is None else res.search.report.part_values,
                    "search_gap": res.search_gap,
                    "problems": res.problems,
                    "rows": [r.to_dict() for r in res.rows],
                }
                for res in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self, all_rows: bool = False) -> str:
        """Human-readable table; by default only rows that are not full-rank fillers."""
        head = f"{'degrees':<12}{'k':>4}{'expected':>10}{'bound':>8}{'oracle':>8}  classification"
        lines = [f"variety {self.variety.value}, caps {self.caps}, seed {self.seed}", head, "-" * len(head)]
        for res in self.results:
            deg = ",".join(map(str, res.spec.degrees))
            for r in res.rows:
                interesting = r.oracle != r.expected or r.bound != r.table
                if all_rows or interesting or r.k == len(res.rows):
                    lines.append(
                        f"{deg:<12}{r.k:>4}{r.expected:>10}{r.bound:>8}{r.oracle:>8}  {r.classification}"
                    )
            for p in res.problems:
                lines.append(f"{deg:<12}  MISMATCH: {p}")
            if res.search_gap:
                lines.append(f"{deg:<12}  note: certificate below the known dimension ({res.method})")
        lines.append(f"models: {len(self.results)}, defective rows: {len(self.defective_rows())}")
        return "\n".join(lines) + "\n"


def theorem_table(
    variety: Variety,
    caps=None,
    seed: int = 0,
    prime: int | None = None,
    trials: int = 3,
    config: SearchConfig | None = None,
    degrees: list[tuple[int, ...]] | None = None,
) -> TheoremTable:
    caps = tuple(caps or DEFAULT_CAPS[variety])
    config = config or SearchConfig(seed=seed)
    if degrees is None:
        degrees = degree_tuples(variety, caps)
    results = [analyse(ModelSpec(variety, tuple(d)), config, prime, seed, trials) for d in degrees]
    return TheoremTable(variety, caps, seed, results)
