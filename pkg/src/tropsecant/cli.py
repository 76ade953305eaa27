"""Command-line driver: ``tropsecant <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .certificates import certificate_from_json, certificate_to_json, verify_certificate
from .models import ModelSpec, Variety, build_model, capping_k, model_to_json
from .oracle import terracini_report
from .report import DEFAULT_CAPS, SoundnessError, certify, theorem_table
from .search import SearchConfig, search_certificate
from .svg import emit_svg


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _spec(args) -> ModelSpec:
    return ModelSpec(Variety(args.variety), args.degrees)


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def cmd_model(args) -> int:
    model = build_model(_spec(args))
    if args.json:
        sys.stdout.write(model_to_json(model))
    else:
        print(f"{model.spec}: |B| = {model.dim_v}, dim X = {model.dim_x}, capping k = {capping_k(model)}")
        for p in model.points:
            print(" ", p)
    return 0


def cmd_verify(args) -> int:
    cert = certificate_from_json(Path(args.cert_in).read_text(encoding="utf-8"))
    rep = verify_certificate(cert)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"verdict: {rep.verdict}; part values {rep.part_values}")
        for r in rep.rows:
            print(f"  k={r.k:>3} bound {r.lower_bound:>4} expected {r.expected:>4}  {r.verdict}")
        for issue in rep.issues:
            print("  issue:", issue)
    if args.svg_out:
        emit_svg(cert, args.svg_out)
    return 0 if not rep.issues else 1


def cmd_search(args) -> int:
    model = build_model(_spec(args))
    config = SearchConfig(max_backtracks=args.max_backtracks, seed=args.seed)
    if args.plain:
        res, method = search_certificate(model, config), "search"
    else:
        res, method = certify(model, config)
    if res.certificate is None:
        print(f"{model.spec}: no picture found ({res.expansions} expansions)")
        return 1
    rep = res.report
    print(f"{model.spec}: {rep.verdict} picture via {method}; part values {rep.part_values}")
    for r in rep.rows:
        print(f"  k={r.k:>3} bound {r.lower_bound:>4} expected {r.expected:>4}")
    if args.cert_out:
        _write(args.cert_out, certificate_to_json(res.certificate))
    if args.svg_out:
        emit_svg(res.certificate, args.svg_out)
    if args.strict and not res.success:
        return 1
    return 0


def cmd_oracle(args) -> int:
    model = build_model(_spec(args))
    rep = terracini_report(model, args.k, args.prime, args.seed, args.trials)
    text = rep.to_json()
    if args.out:
        _write(args.out, text)
    if args.json or not args.out:
        sys.stdout.write(text)
    else:
        print(f"{model.spec}: dims {rep.dims} (prime {rep.prime})")
    return 1 if rep.unstable else 0


def cmd_draw(args) -> int:
    cert = certificate_from_json(Path(args.cert_in).read_text(encoding="utf-8"))
    emit_svg(cert, args.svg_out)
    return 0


def cmd_theorem(args) -> int:
    variety = Variety(args.variety)
    caps = args.max_degrees or DEFAULT_CAPS[variety]
    if len(caps) == 1:
        caps = caps * variety.n_degrees
    if len(caps) != variety.n_degrees:
        raise SystemExit(f"{variety.value} takes {variety.n_degrees} degrees")
    config = SearchConfig(max_backtracks=args.max_backtracks, seed=args.seed)
    try:
        table = theorem_table(variety, caps, args.seed, args.prime, args.trials, config)
    except SoundnessError as exc:
        print(f"FATAL: {exc}", file=sys.stderr)
        return 2
    if args.json:
        sys.stdout.write(table.to_json())
    else:
        sys.stdout.write(table.to_text(all_rows=args.all_rows))
    if args.out:
        _write(args.out, table.to_json())
    return table.exit_status(args.strict)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tropsecant", description="Tropical lower bounds for secant dimensions, checked by a rank oracle."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    varieties = [v.value for v in Variety]

    def model_args(p, degrees=True):
        p.add_argument("--variety", required=True, choices=varieties)
        if degrees:
            p.add_argument("--degrees", required=True, type=_ints, help="e.g. 3,2")

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("theorem", help="scan degrees, certify, run the oracle, compare with the table")
    model_args(p, degrees=False)
    common(p)
    p.add_argument("--max-degrees", type=_ints, default=None)
    p.add_argument("--prime", type=int, default=None)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--max-backtracks", type=int, default=20000)
    p.add_argument("--strict", action="store_true", help="fail when a certificate falls short of the table")
    p.add_argument("--all-rows", action="store_true")
    p.add_argument("--out", help="write the JSON table here")
    p.set_defaults(func=cmd_theorem)

    p = sub.add_parser("model", help="print the lattice model")
    model_args(p)
    common(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("verify", help="verify a certificate file")
    p.add_argument("--cert-in", required=True)
    p.add_argument("--svg-out")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="find a picture")
    model_args(p)
    common(p)
    p.add_argument("--max-backtracks", type=int, default=20000)
    p.add_argument("--plain", action="store_true", help="skip the gluing schemes")
    p.add_argument("--cert-out")
    p.add_argument("--svg-out")
    p.add_argument("--strict", action="store_true", help="fail unless the picture is non-defective")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("oracle", help="Terracini ranks over a prime field")
    model_args(p)
    common(p)
    p.add_argument("--k", type=int, default=None, help="largest k (default: capping value)")
    p.add_argument("--prime", type=int, default=None)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("draw", help="render a certificate as SVG")
    p.add_argument("--cert-in", required=True)
    p.add_argument("--svg-out", required=True)
    p.set_defaults(func=cmd_draw)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
