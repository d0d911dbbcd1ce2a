"""Command-line front end: analyze, evaluate, optimize, visibility, lhv,
gallery, check."""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import bell, independence, lhv, network, quantum

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3

JSON_DIGITS = 12
TEXT_DIGITS = 6


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.{JSON_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def emit(data: dict, fmt: str):
    if fmt == "json":
        print(json.dumps(_round_floats(data), indent=2, sort_keys=True))
        return
    for key, value in data.items():
        if isinstance(value, float):
            print(f"{key}: {value:.{TEXT_DIGITS}g}")
        elif isinstance(value, (list, tuple)):
            parts = [
                f"{v:.{TEXT_DIGITS}g}" if isinstance(v, float) else str(v) for v in value
            ]
            print(f"{key}: [{', '.join(parts)}]")
        else:
            print(f"{key}: {value}")


def load_network(location: str) -> network.NetworkTopology:
    if location.startswith("gallery:"):
        return network.gallery(location[len("gallery:") :])
    with open(location, "rb") as handle:
        return network.parse_network(handle.read())


def get_certificate(net: network.NetworkTopology, retries: int) -> independence.IndependenceCertificate:
    return independence.find_certificate(net, retries=retries)


def parse_angles(text: str | None, k: int) -> tuple[float, ...] | None:
    if text is None:
        return None
    values = tuple(float(x) for x in text.split(","))
    if len(values) != k:
        raise ValueError(f"expected {k} angles, got {len(values)}")
    return values


def cmd_analyze(args) -> int:
    net = load_network(args.input)
    cert = get_certificate(net, args.retries)
    data = {"certificate": cert.to_json_dict()}
    if cert.k >= 2:
        parties = ", ".join(cert.independent_parties)
        data["inequality"] = (
            f"|I_{{{net.n},{cert.k}}}|^(1/{cert.k}) + |J_{{{net.n},{cert.k}}}|^(1/{cert.k}) <= 1 "
            f"for the independent parties {{{parties}}}"
        )
    else:
        kmax = independence.kmax_exact(net)
        data["kmax"] = kmax.k
        if kmax.k < 2:
            data["message"] = "no nonlinear inequality of this family (k_max <= 1)"
        else:
            data["certificate"] = kmax.to_json_dict()
    emit(data, args.format)
    return EXIT_OK


def _sweep_csv(net, cert, steps: int = 64):
    constants = quantum.factor_constants(net, cert)
    print("theta,I,J,F")
    for t in range(steps + 1):
        theta = math.pi / 2 * t / steps
        i_value, j_value = quantum.ij_from_constants(constants, (theta,) * cert.k)
        f = bell.root_k(i_value, cert.k) + bell.root_k(j_value, cert.k)
        print(
            f"{theta:.{JSON_DIGITS}g},{i_value:.{JSON_DIGITS}g},"
            f"{j_value:.{JSON_DIGITS}g},{f:.{JSON_DIGITS}g}"
        )


def cmd_evaluate(args) -> int:
    net = load_network(args.input)
    cert = get_certificate(net, args.retries)
    if cert.k < 1:
        print("error: no party with a complete matching; nothing to evaluate", file=sys.stderr)
        return EXIT_VALIDATION
    if args.format == "csv":
        _sweep_csv(net, cert)
        return EXIT_OK
    angles = parse_angles(args.angles, cert.k)
    result = bell.evaluate(net, cert, angles, mode=args.mode, dim_cap=args.dim_cap)
    emit(result.to_json_dict(), args.format)
    return EXIT_OK


def cmd_optimize(args) -> int:
    net = load_network(args.input)
    cert = get_certificate(net, args.retries)
    if cert.k < 1:
        print("error: no party with a complete matching; nothing to optimize", file=sys.stderr)
        return EXIT_VALIDATION
    if args.format == "csv":
        _sweep_csv(net, cert)
        return EXIT_OK
    f_best, angles = bell.optimize_angles(net, cert)
    i_value, j_value = quantum.factorized_IJ(net, cert, angles)
    result = bell.bell_value(
        i_value, j_value, cert.k, provenance="factorized", angles=angles, eps=args.tolerance
    )
    emit(result.to_json_dict(), args.format)
    return EXIT_OK


def cmd_visibility(args) -> int:
    net = load_network(args.input)
    cert = get_certificate(net, args.retries)
    bound = bell.critical_visibility(net, cert)
    emit(bound.to_json_dict(), args.format)
    return EXIT_OK


def cmd_lhv(args) -> int:
    net = load_network(args.input)
    cert = get_certificate(net, args.retries)
    report = lhv.max_classical_F(net, cert, d=args.d, budget=args.budget)
    emit(report.to_json_dict(), args.format)
    return EXIT_OK


def cmd_gallery(args) -> int:
    if args.name is None:
        emit({"entries": network.gallery_names()}, args.format)
        return EXIT_OK
    net = network.gallery(args.name)
    print(network.serialize(net))
    return EXIT_OK


def cmd_check(args) -> int:
    net = load_network(args.input)
    cert = get_certificate(net, args.retries)
    checks: list[tuple[str, bool, str]] = []
    if cert.k < 1:
        print("error: no certificate with k >= 1; nothing to check", file=sys.stderr)
        return EXIT_VALIDATION

    dim = net.total_dimension()
    cap = args.dim_cap if args.dim_cap is not None else quantum.MIXED_DIM_CAP
    rng = np.random.default_rng(7)
    if dim <= cap:
        worst = 0.0
        for _ in range(5):
            angles = tuple(rng.uniform(0, math.pi / 2, size=cert.k))
            fi, fj = quantum.factorized_IJ(net, cert, angles)
            ti, tj = quantum.full_tensor_IJ(net, cert, angles, dim_cap=cap)
            worst = max(worst, abs(fi - ti), abs(fj - tj))
        checks.append(
            ("factorized-vs-tensor", worst < 1e-9, f"max deviation {worst:.3e}")
        )
    else:
        checks.append(
            ("factorized-vs-tensor", True, f"skipped (dimension {dim} > cap {cap})")
        )
    try:
        f_closed, _ = bell.closed_form_max(net, cert)
        f_opt, _ = bell.optimize_angles(net, cert)
        ok = f_opt >= f_closed - 1e-6
        checks.append(
            ("closed-form-vs-optimizer", ok, f"closed {f_closed:.9g}, optimized {f_opt:.9g}")
        )
    except bell.ResourceFamilyError as exc:
        checks.append(("closed-form-vs-optimizer", True, f"skipped ({exc})"))

    all_ok = True
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name}: {detail}")
        all_ok = all_ok and ok
    return EXIT_OK if all_ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netbell",
        description=(
            "Certify k-independence of multi-source networks and evaluate the "
            "associated nonlinear Bell inequalities."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_input=True):
        if with_input:
            p.add_argument("input", help="network JSON file or gallery:NAME")
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.add_argument("--retries", type=int, default=32, help="matching retry budget")
        p.add_argument("--tolerance", type=float, default=1e-6, help="classification epsilon")
        p.add_argument("--dim-cap", type=int, default=None, help="full-tensor dimension cap")

    p = sub.add_parser("analyze", help="certify independent parties")
    add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evaluate", help="quantum value at given or default angles")
    add_common(p)
    p.add_argument("--angles", help="comma-separated angles, one per independent party")
    p.add_argument("--mode", choices=("factorized", "full-tensor"), default="factorized")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("optimize", help="maximize F over measurement angles")
    add_common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("visibility", help="critical visibility product bound")
    add_common(p)
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("lhv", help="brute-force classical maximum of F")
    add_common(p)
    p.add_argument("--d", type=int, default=2, help="hidden-state alphabet size")
    p.add_argument("--budget", type=int, default=lhv.DEFAULT_BUDGET)
    p.set_defaults(func=cmd_lhv)

    p = sub.add_parser("gallery", help="list gallery entries or print one as JSON")
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("check", help="run the cross-validation suite")
    add_common(p)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (quantum.DimensionCapError, independence.SizeLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (network.NetworkError, bell.ResourceFamilyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
