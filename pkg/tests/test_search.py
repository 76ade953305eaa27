from __future__ import annotations

import itertools
import math

from tropsecant.certificates import certificate_to_json, verify_certificate
from tropsecant.models import ModelSpec, Variety, build_model
from tropsecant.search import (
    CellShapes,
    SearchConfig,
    check_search_result,
    cut_normals,
    search_certificate,
    solve_region,
)
from tropsecant.theorems import Profile


def test_cut_normals_are_primitive_and_one_per_sign_class():
    for dim, count in [(2, 8), (3, 49)]:
        normals = cut_normals(dim)
        assert len(normals) == count
        assert len(set(normals)) == count
        assert all(math.gcd(*(abs(a) for a in v)) == 1 for v in normals)
        assert not any(tuple(-a for a in v) in normals for v in normals)
        # every primitive vector with small entries is covered up to sign
        for v in itertools.product(range(-2, 3), repeat=dim):
            if any(v) and math.gcd(*(abs(a) for a in v)) == 1:
                assert v in normals or tuple(-a for a in v) in normals


def test_three_by_two_grid_gives_twelve():
    res = search_certificate(build_model(ModelSpec(Variety.P1P1, (3, 2))))
    assert res.success and res.best_value == 12
    assert res.report.part_values == [3, 3, 3, 3]
    check_search_result(res)


def test_square_grid_without_table_tops_out_at_eight():
    # the full profile is infeasible, the next one gives 3 + 3 + 2 at k = 3
    res = search_certificate(build_model(ModelSpec(Variety.P1P1, (2, 2))), SearchConfig(use_table=False))
    assert not res.success
    assert res.attempts[0] == (Profile(3, ()), "infeasible")
    assert res.report.bound(3) == 8
    assert res.report.part_values == [3, 3, 2, 1]


def test_flag_11_without_table_is_below_expected():
    res = search_certificate(build_model(ModelSpec(Variety.FLAG, (1, 1))), SearchConfig(use_table=False))
    assert not res.success and res.report.bound(2) == 7


def test_search_is_deterministic():
    model = build_model(ModelSpec(Variety.P2P1, (3, 2)))
    a = search_certificate(model, SearchConfig(seed=5))
    b = search_certificate(model, SearchConfig(seed=5))
    assert certificate_to_json(a.certificate) == certificate_to_json(b.certificate)


def test_results_verify_from_scratch():
    for spec in [ModelSpec(Variety.P2, (3,)), ModelSpec(Variety.FLAG, (2, 1)), ModelSpec(Variety.P1P1P1, (2, 1, 1))]:
        res = search_certificate(build_model(spec))
        rep = verify_certificate(res.certificate)
        assert rep.non_defective == res.success
        assert sorted(p for part in res.certificate.parts for p in part) == sorted(build_model(spec).points)


def test_infeasible_profile_returns_none():
    pts = build_model(ModelSpec(Variety.P1P1, (2, 2))).points
    cert, _ = solve_region(pts, Profile(3, ()), SearchConfig(), CellShapes.ANY_INDEPENDENT)
    assert cert is None


def test_zero_budget_gives_up():
    model = build_model(ModelSpec(Variety.P1P1P1, (2, 2, 2)))
    cert, used = solve_region(model.points, Profile(6, (3,)), SearchConfig(max_backtracks=0))
    assert cert is None


def test_explicit_profile_is_respected():
    model = build_model(ModelSpec(Variety.P1P1, (3, 2)))
    res = search_certificate(model, profile=Profile(3, (2, 1)))
    assert res.report.part_values == [3, 3, 3, 2, 1]
