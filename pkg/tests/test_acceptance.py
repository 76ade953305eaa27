from __future__ import annotations

from fractions import Fraction
import random
import subprocess
import sys
import time

import pytest

from tropsecant.certificates import Leaf, Node, make_certificate, verify_certificate
from tropsecant.geometry import AffineFunctional, induce_partition_lp, winners
from tropsecant.models import ModelSpec, Variety, build_model, capping_k, closed_form_dim
from tropsecant.oracle import terracini_report
from tropsecant.report import analyse, certify
from tropsecant.search import SearchConfig, cut_normals, search_certificate
from tropsecant.sl3 import build_sl3_module, check_monomial_structure, compute_M_and_Ab, k1_tropical_sanity
from tropsecant.svg import render_svg

P1P1, P1P1P1, P2P1, FLAG = Variety.P1P1, Variety.P1P1P1, Variety.P2P1, Variety.FLAG


def _oracle(variety, degrees, k_max=None):
    return terracini_report(build_model(ModelSpec(variety, degrees)), k_max, seed=0)


def _fully_nondefective(variety, degrees, cert_log):
    """Certificate non-defective for every k and oracle equal to the expected dims."""
    res = analyse(ModelSpec(variety, degrees))
    cert_log.append(res.search.certificate)
    bad = [r for r in res.rows if not (r.bound == r.expected == r.oracle)]
    return res, bad


@pytest.mark.criterion(1, "basis counts match the closed forms for all degrees <= 6 (< 1 s)")
def test_criterion_1_basis_counts():
    start = time.perf_counter()
    checked = 0
    for d in range(1, 7):
        for e in range(1, 7):
            assert build_model(ModelSpec(P1P1, (d, e))).dim_v == (d + 1) * (e + 1)
            assert build_model(ModelSpec(P2P1, (d, e))).dim_v == (d + 1) * (d + 2) * (e + 1) // 2
            assert build_model(ModelSpec(FLAG, (d, e))).dim_v == (d + 1) * (e + 1) * (d + e + 2) // 2
            for f in range(1, 7):
                assert build_model(ModelSpec(P1P1P1, (d, e, f))).dim_v == (d + 1) * (e + 1) * (f + 1)
                checked += 1
    assert checked == 216
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion(2, "P1xP1 (3,2): 4-part certificate of value 12, oracle dim 4C = 12 (< 5 s)")
def test_criterion_2_three_by_two_grid(cert_log):
    start = time.perf_counter()
    model = build_model(ModelSpec(P1P1, (3, 2)))
    res = search_certificate(model, SearchConfig())
    cert_log.append(res.certificate)
    rep = verify_certificate(res.certificate)
    assert len(res.certificate.parts) == 4
    assert rep.part_values == [3, 3, 3, 3]
    assert rep.bound(4) == 12
    assert rep.bound(4) - 1 == 11
    assert _oracle(P1P1, (3, 2), 4).dim(4) == 12
    assert time.perf_counter() - start < 5.0


@pytest.mark.criterion(3, "P1xP1 scan d >= e, d,e <= 8: non-defective except e=2, d even, defect 1 (< 2 min)")
def test_criterion_3_p1p1_scan(cert_log):
    start = time.perf_counter()
    failures = []
    for d in range(1, 9):
        for e in range(1, d + 1):
            model = build_model(ModelSpec(P1P1, (d, e)))
            res, _ = certify(model)
            cert_log.append(res.certificate)
            rep = verify_certificate(res.certificate)
            cap = capping_k(model)
            if e == 2 and d % 2 == 0:
                k = d + 1
                dims = terracini_report(model, k).dims
                ok = rep.bound(k) == 3 * (d + 1) - 1 and dims[k - 1] == 3 * (d + 1) - 1
                ok = ok and all(rep.bound(j) == min(3 * j, model.dim_v) for j in range(1, k))
            else:
                ok = rep.non_defective and rep.bound(cap) == model.dim_v
            if not ok:
                failures.append((d, e))
    assert failures == []
    assert time.perf_counter() - start < 120


@pytest.mark.criterion(4, "(P1)^3: (1,1,1) 2C = 7, (2,2,2) 7C = 26, (3,2,2) non-defective (< 2 min)")
def test_criterion_4_p1_cubed(cert_log):
    start = time.perf_counter()
    dim_111 = _oracle(P1P1P1, (1, 1, 1), 2).dim(2)
    dim_222 = _oracle(P1P1P1, (2, 2, 2), 7).dim(7)
    _, bad_322 = _fully_nondefective(P1P1P1, (3, 2, 2), cert_log)
    elapsed = time.perf_counter() - start
    assert dim_222 == 26 and closed_form_dim(ModelSpec(P1P1P1, (2, 2, 2))) == 27
    assert bad_322 == []
    assert elapsed < 120
    # checked as stated; the measured value is reported on failure
    assert dim_111 == 7, f"oracle dim 2C for (1,1,1) is {dim_111}, not 7 (dimV = 8)"


@pytest.mark.criterion(5, "P2xP1: (2,2) dims 15, 17 at k = 4, 5; (3,1) 5C = 19; four cases non-defective (< 2 min)")
def test_criterion_5_p2p1(cert_log):
    start = time.perf_counter()
    rep22 = _oracle(P2P1, (2, 2), 5)
    assert rep22.dim(4) == 15 and rep22.dim(5) == 17
    dim_v = closed_form_dim(ModelSpec(P2P1, (2, 2)))
    assert (dim_v - 1 - (rep22.dim(4) - 1), dim_v - 1 - (rep22.dim(5) - 1)) == (3, 1)
    assert _oracle(P2P1, (3, 1), 5).dim(5) == 19
    assert closed_form_dim(ModelSpec(P2P1, (3, 1))) == 20
    for deg in [(1, 1), (2, 1), (4, 1), (3, 2)]:
        _, bad = _fully_nondefective(P2P1, deg, cert_log)
        assert bad == [], deg
    assert time.perf_counter() - start < 120


@pytest.mark.criterion(6, "flag: (1,1) 2C = 7, (2,2) 7C = 26, (2,1) and (3,1) non-defective (< 3 min)")
def test_criterion_6_flag(cert_log):
    start = time.perf_counter()
    assert _oracle(FLAG, (1, 1), 2).dim(2) == 7
    assert _oracle(FLAG, (2, 2), 7).dim(7) == 26
    assert closed_form_dim(ModelSpec(FLAG, (1, 1))) == 8
    assert closed_form_dim(ModelSpec(FLAG, (2, 2))) == 27
    for deg in [(2, 1), (3, 1)]:
        _, bad = _fully_nondefective(FLAG, deg, cert_log)
        assert bad == [], deg
    assert time.perf_counter() - start < 180


def random_cut_tree(rng, points):
    normals = cut_normals(len(points[0]))
    counter = [0]

    def build(pts):
        if len(pts) <= 1 or rng.random() < 0.25:
            counter[0] += 1
            return Leaf(counter[0] - 1)
        normal = rng.choice(normals)
        vals = sorted({sum(a * x for a, x in zip(normal, p)) for p in pts})
        if len(vals) < 2:
            counter[0] += 1
            return Leaf(counter[0] - 1)
        v = vals[rng.randrange(len(vals) - 1)]
        cut = AffineFunctional(tuple(Fraction(a) for a in normal), -Fraction(2 * v + 1, 2))
        below = [p for p in pts if cut(p) < 0]
        above = [p for p in pts if cut(p) > 0]
        return Node(cut, build(below), build(above))

    return build(list(points))


_SMALL_SPECS = [
    ModelSpec(P1P1, (3, 2)), ModelSpec(P1P1, (4, 3)), ModelSpec(P1P1, (2, 2)),
    ModelSpec(Variety.P2, (4,)), ModelSpec(P2P1, (2, 1)), ModelSpec(P2P1, (3, 1)),
    ModelSpec(P1P1P1, (1, 1, 1)), ModelSpec(P1P1P1, (2, 1, 1)), ModelSpec(P1P1P1, (2, 2, 1)),
    ModelSpec(FLAG, (1, 1)), ModelSpec(FLAG, (2, 1)), ModelSpec(FLAG, (1, 2)),
]


@pytest.mark.criterion(8, "200 random cut-trees: induced partitions are LP-feasible (< 1 min)")
def test_criterion_8_random_cut_trees(cert_log):
    start = time.perf_counter()
    rng = random.Random(20240611)
    failures = 0
    for _ in range(200):
        model = build_model(rng.choice(_SMALL_SPECS))
        cert = make_certificate(model.points, random_cut_tree(rng, model.points), model.spec)
        cert_log.append(cert)
        funcs = induce_partition_lp(cert.parts)
        if funcs is None or [set(w) for w in winners(funcs, model.points)] != [set(p) for p in cert.parts]:
            failures += 1
    assert failures == 0
    assert time.perf_counter() - start < 60


@pytest.mark.criterion(9, "flag modules: lower ideal, A_b meets B in b, k=1 sanity gives 4 (< 2 min)")
def test_criterion_9_flag_structure():
    start = time.perf_counter()
    for mn in [(1, 1), (2, 1), (1, 2), (2, 2)]:
        module = build_sl3_module(*mn)
        data = compute_M_and_Ab(module)
        assert check_monomial_structure(module, data) == []
        for b, A_b in data.A.items():
            assert A_b & set(module.basis_labels) == {b}
        ok, value = k1_tropical_sanity(*mn)
        assert ok and value == 4
    assert time.perf_counter() - start < 120


def _cli(*args) -> bytes:
    out = subprocess.run([sys.executable, "-m", "tropsecant", *args], capture_output=True, check=True)
    return out.stdout


@pytest.mark.criterion(10, "identical seeds and prime give byte-identical reports and SVGs")
def test_criterion_10_reproducibility(tmp_path):
    runs = []
    for n in range(2):
        d = tmp_path / f"run{n}"
        d.mkdir()
        _cli("oracle", "--variety", "flag", "--degrees", "2,2", "--seed", "7", "--prime", "1073741827",
             "--out", str(d / "oracle.json"))
        _cli("search", "--variety", "p2p1", "--degrees", "3,2", "--seed", "7",
             "--cert-out", str(d / "cert.json"), "--svg-out", str(d / "cert.svg"))
        _cli("search", "--variety", "p1p1p1", "--degrees", "2,2,1", "--seed", "7", "--svg-out", str(d / "block.svg"))
        table = _cli("theorem", "--variety", "p1p1", "--max-degrees", "4,4", "--seed", "7", "--json")
        runs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())} | {"table": table})
    assert runs[0] == runs[1]
    assert all(runs[0].values())
    # the in-process renderer agrees with the files written by the CLI
    from tropsecant.certificates import certificate_from_json

    cert = certificate_from_json(runs[0]["cert.json"].decode())
    assert render_svg(cert).encode() == runs[0]["cert.svg"]


@pytest.mark.criterion(7, "every certificate in the run: certified bound <= oracle dim for each k")
def test_criterion_7_soundness(cert_log):
    # extra certificates so the check also covers pictures found by plain search
    for spec in [ModelSpec(P1P1, (4, 2)), ModelSpec(P2P1, (2, 2)), ModelSpec(FLAG, (2, 2)), ModelSpec(P1P1P1, (2, 2, 2))]:
        cert_log.append(search_certificate(build_model(spec)).certificate)
    certs = [c for c in cert_log if c is not None and c.spec is not None]
    assert len(certs) >= 200
    reports = [(cert, verify_certificate(cert)) for cert in certs]
    k_needed = {}
    for cert, rep in reports:
        key = (cert.spec.variety, cert.spec.degrees)
        k_needed[key] = max(k_needed.get(key, 1), len(rep.rows))
    oracle_cache = {
        key: terracini_report(build_model(ModelSpec(*key)), k, seed=0) for key, k in k_needed.items()
    }
    violations = []
    for cert, rep in reports:
        key = (cert.spec.variety, cert.spec.degrees)
        orc = oracle_cache[key]
        for row in rep.rows:
            if row.lower_bound > orc.dim(row.k):
                violations.append((key, row.k, row.lower_bound, orc.dim(row.k)))
    assert violations == []
