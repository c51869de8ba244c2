"""Batch command-line front end.

Subcommands load a structure or presheaf file, run one operation, and
emit a JSON report on stdout.  Exit codes: 0 on success (or all laws
passing), 1 on a validation or law failure, 2 on usage errors.  The
carrier defaults to the unit interval; set CONTSEM_MODE=extended-nonneg
(or pass --mode) for the extended nonnegative carrier.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dsl import DslError, evaluate
from .laws import SUITES
from .metric import MetricError, projection_map
from .predicate import (
    PredicateError,
    classify,
    envelope,
    serialize_predicate,
)
from .presheaf import PresheafError, classify_presheaf, omega_nu
from .quantale import (
    QuantaleError,
    format_rational,
    parse_modulus,
    serialize_modulus,
)
from .quantifier import QuantifierError, quantify_direct
from .structures import SchemaError, load_presheaf, load_structure
from .subobject import SubobjectError

_CORE_ERRORS = (
    DslError,
    MetricError,
    PredicateError,
    PresheafError,
    QuantaleError,
    QuantifierError,
    SchemaError,
    SubobjectError,
    OSError,
    KeyError,
    ValueError,
)


def _emit(report, pretty):
    if pretty:
        print(json.dumps(report, indent=2))
    else:
        print(json.dumps(report))


def _fail(command, message, pretty):
    _emit({"command": command, "status": "error", "error": str(message)}, pretty)
    return 1


def cmd_validate(args):
    st = load_structure(args.file, mode=args.mode)
    report = {
        "command": "validate",
        "file": args.file,
        "mode": st.quantale.mode,
        "spaces": sorted(st.signature.spaces),
        "maps": sorted(st.signature.maps),
        "predicates": sorted(st.signature.predicates),
        "families": sorted(st.families),
        "status": "ok",
    }
    _emit(report, args.pretty)
    return 0


def cmd_eval(args):
    st = load_structure(args.file, mode=args.mode)
    sig = st.signature
    env = {}
    for item in args.env or []:
        if "=" not in item:
            raise DslError(f"--env entries look like var=name, got {item!r}")
        var, name = item.split("=", 1)
        if name in sig.spaces:
            env[var] = sig.spaces[name]
        elif name in sig.points:
            # bind the variable to a declared point constant
            sig.points[var] = sig.points[name]
        else:
            raise DslError(f"--env target {name!r} is neither a space nor a point")
    result = evaluate(args.formula, sig, env)
    report = {"command": "eval", "formula": args.formula}
    if hasattr(result, "value"):
        report["predicate"] = serialize_predicate(result)
    else:
        report["value"] = format_rational(result)
    report["status"] = "ok"
    _emit(report, args.pretty)
    return 0


def cmd_envelope(args):
    st = load_structure(args.file, mode=args.mode)
    if args.family not in st.families:
        raise SchemaError(f"unknown family {args.family!r}")
    R = st.families[args.family]
    eps = parse_modulus(args.modulus, st.quantale.top)
    P = envelope(R, eps)
    report = {
        "command": "envelope",
        "family": args.family,
        "predicate": serialize_predicate(P),
        "status": "ok",
    }
    _emit(report, args.pretty)
    return 0


def cmd_quantify(args):
    st = load_structure(args.file, mode=args.mode)
    sig = st.signature
    if args.predicate not in sig.predicates:
        raise SchemaError(f"unknown predicate {args.predicate!r}")
    if args.over not in sig.spaces:
        raise SchemaError(f"unknown space {args.over!r}")
    P = sig.predicates[args.predicate]
    over = sig.spaces[args.over]
    if not all(isinstance(p, tuple) and len(p) == 2 for p in P.space.points):
        raise QuantifierError(
            f"predicate {args.predicate!r} does not live on a product space"
        )
    # eliminate the factor matching --over; keep the other one
    over_pts = set(over.points)
    firsts = {p[0] for p in P.space.points}
    seconds = {p[1] for p in P.space.points}
    if firsts <= over_pts:
        pi = projection_map(P.space, 1)
    elif seconds <= over_pts:
        pi = projection_map(P.space, 0)
    else:
        raise QuantifierError(
            f"space {args.over!r} is not a factor of the predicate's domain"
        )
    out = quantify_direct(args.kind, pi, P)
    report = {
        "command": "quantify",
        "kind": args.kind,
        "over": args.over,
        "predicate": serialize_predicate(out),
        "status": "ok",
    }
    _emit(report, args.pretty)
    return 0


def cmd_classify(args):
    st = load_structure(args.file, mode=args.mode)
    sig = st.signature
    if args.predicate not in sig.predicates:
        raise SchemaError(f"unknown predicate {args.predicate!r}")
    P = sig.predicates[args.predicate]
    n = args.grid
    if n is None:
        from math import lcm

        denoms = [v.denominator for _, v in P.value if not isinstance(v, str)]
        n = lcm(*denoms) if denoms else 1
    m = classify(P, n)
    report = {
        "command": "classify",
        "predicate": args.predicate,
        "grid": n,
        "assignment": {
            str(p): format_rational(v) for p, v in m.assignment
        },
        "modulus": serialize_modulus(m.modulus),
        "status": "ok",
    }
    _emit(report, args.pretty)
    return 0


def cmd_presheaf_check(args):
    F, predicates = load_presheaf(args.file, mode=args.mode)
    report = {
        "command": "presheaf-check",
        "file": args.file,
        "objects": list(F.category.objects),
        "morphisms": [m[0] for m in F.category.morphisms],
        "predicates": sorted(predicates),
        "status": "ok",
    }
    _emit(report, args.pretty)
    return 0


def cmd_presheaf_classify(args):
    F, predicates = load_presheaf(args.file, mode=args.mode)
    if args.predicate not in predicates:
        raise SchemaError(f"unknown presheaf predicate {args.predicate!r}")
    phi = classify_presheaf(F, predicates[args.predicate])
    characteristic = {}
    for a in F.category.objects:
        characteristic[a] = {
            str(x): {
                "theta": {f: format_rational(v) for f, v in el.theta},
                "nu": format_rational(omega_nu(el)),
            }
            for x, el in phi[a].items()
        }
    report = {
        "command": "presheaf-classify",
        "predicate": args.predicate,
        "characteristic": characteristic,
        "status": "ok",
    }
    _emit(report, args.pretty)
    return 0


def cmd_laws(args):
    names = [args.suite] if args.suite else sorted(SUITES)
    reports = []
    all_passed = True
    for name in names:
        kwargs = {"seed": args.seed}
        if args.size is not None:
            kwargs["size"] = args.size
        suite = SUITES[name](**kwargs)
        reports.append(suite.report())
        all_passed = all_passed and suite.passed
    report = {
        "command": "laws",
        "seed": args.seed,
        "suites": reports,
        "status": "ok" if all_passed else "failed",
    }
    _emit(report, args.pretty)
    return 0 if all_passed else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="contsem",
        description="Exact semantics for continuous predicates on finite "
        "metric spaces and presheaves.",
    )
    parser.add_argument(
        "--mode",
        choices=["unit-interval", "extended-nonneg"],
        default=os.environ.get("CONTSEM_MODE") or None,
        help="truth-value carrier (default: CONTSEM_MODE or unit-interval)",
    )
    parser.add_argument(
        "--pretty", action="store_true", help="indent the JSON report"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", help="validate a structure file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate a formula over a structure")
    p.add_argument("file")
    p.add_argument("--formula", required=True)
    p.add_argument(
        "--env",
        action="append",
        metavar="VAR=NAME",
        help="bind a free variable to a space (leaves it free) or to a "
        "declared point constant (closes it)",
    )
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("envelope", help="least continuous predicate above a family")
    p.add_argument("file")
    p.add_argument("--family", required=True)
    p.add_argument("--modulus", required=True)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("quantify", help="quantify a product predicate over a factor")
    p.add_argument("file")
    p.add_argument("--kind", choices=["inf", "sup"], required=True)
    p.add_argument("--over", required=True)
    p.add_argument("--predicate", required=True)
    p.set_defaults(func=cmd_quantify)

    p = sub.add_parser("classify", help="materialize a predicate as a grid map")
    p.add_argument("file")
    p.add_argument("--predicate", required=True)
    p.add_argument("--grid", type=int)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("presheaf-check", help="validate a presheaf file")
    p.add_argument("file")
    p.set_defaults(func=cmd_presheaf_check)

    p = sub.add_parser(
        "presheaf-classify", help="characteristic map of a presheaf predicate"
    )
    p.add_argument("file")
    p.add_argument("--predicate", required=True)
    p.set_defaults(func=cmd_presheaf_classify)

    p = sub.add_parser("laws", help="run the law-checking suites")
    p.add_argument("--suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int)
    p.set_defaults(func=cmd_laws)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CORE_ERRORS as exc:
        return _fail(args.subcommand, exc, args.pretty)


if __name__ == "__main__":
    sys.exit(main())
