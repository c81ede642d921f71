"""Command-line front end (``ebs``).

Exit codes: 0 success, 2 usage or parse error, 3 classification failure,
4 numeric verification failure.  JSON goes to stdout, diagnostics to
stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .classify import classify
from .enumerate import MAX_CELLS, cross_validate, enumerate_window_semiheaps, search_window_semiheaps
from .semigroup import DomainError, RangeError, parse_element, product, triple
from .sets import CornerIdeal, Family, family_from_json, padded_closure, parse_window
from .tro import verify_contraction, verify_partial_isometry

EXIT_OK, EXIT_USAGE, EXIT_CLASSIFY, EXIT_NUMERIC = 0, 2, 3, 4
SEARCH_MAX_CELLS = 49


class UsageError(Exception):
    pass


def _element(text):
    try:
        return parse_element(text)
    except (ValueError, RangeError) as exc:
        raise UsageError(str(exc)) from None


def _window(text):
    try:
        return parse_window(text)
    except (ValueError, DomainError) as exc:
        raise UsageError(str(exc)) from None


def _family(text) -> Family:
    try:
        return family_from_json(json.loads(text))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid family: {exc}") from None


def describe(f: Family) -> str:
    parts = []
    for key, value in f.to_json().items():
        if key == "tag" or key == "anchor" and value == [0, 0]:
            continue
        if isinstance(value, list):
            value = f"({','.join(map(str, value))})" if key in ("anchor", "p") else str(value)
        parts.append(f"{key}={value}")
    return " ".join([f.tag] + parts)


def _emit(obj):
    print(json.dumps(obj, indent=2))


def cmd_product(args) -> int:
    r = product(_element(args.a), _element(args.b))
    if args.format == "json":
        _emit({"result": list(r)})
    else:
        print(r)
    return EXIT_OK


def cmd_triple(args) -> int:
    r, case = triple(_element(args.a), _element(args.b), _element(args.c))
    if args.format == "json":
        _emit({"result": list(r), "case": case.value})
    else:
        print(f"{r} [case {case.value}]")
    return EXIT_OK


def cmd_closure(args) -> int:
    inner = _window(args.inner)
    gens = [_element(g) for g in args.generators.split(";") if g.strip()]
    if not gens:
        raise UsageError("no generators given")
    if args.pad < 1:
        raise UsageError("--pad must be >= 1")
    try:
        s = padded_closure(gens, inner, args.pad)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    report = classify(s)
    if args.format == "json":
        _emit({"set": s.to_json(), "classification": report.to_json()})
    else:
        print(s.render(args.charset))
        line = f"case {report.case}"
        if report.family is not None:
            line += f", {describe(report.family)}"
        print(line)
    if not report.ok:
        print(f"classification failed; witness: {' '.join(map(str, report.witness or ()))}",
              file=sys.stderr)
        return EXIT_CLASSIFY
    return EXIT_OK


def cmd_enumerate(args) -> int:
    w = _window(args.window)
    if w.size > SEARCH_MAX_CELLS or args.cross_validate and w.size > MAX_CELLS:
        raise UsageError(f"window {w.spec()} has {w.size} cells; the limit is "
                         f"{MAX_CELLS if args.cross_validate else SEARCH_MAX_CELLS}")
    if args.cross_validate:
        rep = cross_validate(w, args.pad, args.jobs)
        if args.format == "json":
            _emit(rep.to_json())
        else:
            print(f"count: {rep.count}")
            print(f"exact: {rep.exact}")
            print(f"extensions: {rep.extensions}")
            print(f"failures: {len(rep.failures)}")
            print(f"nonoccurrence violations: {len(rep.nonoccurrence)}")
            for f in rep.failures[:5]:
                print(f"failure: {f['report']['case']} closure={f['closure']['members']}",
                      file=sys.stderr)
        return EXIT_OK if not rep.failures else EXIT_CLASSIFY
    if w.size <= MAX_CELLS:
        count, _ = enumerate_window_semiheaps(w, args.jobs)
    else:
        count = sum(1 for _ in search_window_semiheaps(w))
    if args.format == "json":
        _emit({"window": w.to_json(), "count": count})
    else:
        print(f"count: {count}")
    return EXIT_OK


def _corner(text) -> CornerIdeal:
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse corner {text!r}; expected 'i,j'") from None
    return CornerIdeal(i, j)


def cmd_tro_verify(args) -> int:
    if (args.family is None) == (args.corner is None):
        raise UsageError("give exactly one of --family or --corner")
    k = _family(args.family) if args.family is not None else _corner(args.corner)
    if args.trials < 1 or args.n < 2:
        raise UsageError("--trials must be >= 1 and --n >= 2")
    rep = verify_contraction(k, args.trials, args.n, args.seed)
    if args.format == "json":
        _emit(rep.to_json())
    else:
        print(f"passes: {rep.passes}/{rep.trials}")
        print(f"max ratio: {rep.max_ratio:.9f}")
        for f in rep.failures:
            print(f"failure: trial {f['trial']} a={f['a']:.9f} b={f['b']:.9f}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_NUMERIC


def cmd_tro_isometry(args) -> int:
    x = _element(args.element)
    try:
        r = verify_partial_isometry(x, args.n)
    except (DomainError, RangeError) as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        _emit({"element": list(x), "n": args.n, "safe_columns": r.safe_columns,
               "surviving_columns": r.surviving_columns, "exact": r.exact})
    else:
        print(f"safe columns: {r.safe_columns}, exact: {str(r.exact).lower()}")
    return EXIT_OK if r.exact else EXIT_NUMERIC


def cmd_diagram(args) -> int:
    f = _family(args.family)
    s = f.materialize(_window(args.window))
    if args.format == "json":
        _emit(s.to_json())
    else:
        print(s.render(args.charset))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("ascii", "json"), default="ascii")
    fmt.add_argument("--charset", choices=("unicode", "ascii"), default="unicode",
                     help="grid glyphs: unicode dots or '#'/'.'")

    p = argparse.ArgumentParser(prog="ebs", description="Extended bicyclic semigroup toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("product", parents=[fmt], help="a b")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("triple", parents=[fmt], help="a b* c with its case tag")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("c")
    s.set_defaults(func=cmd_triple)

    s = sub.add_parser("closure", parents=[fmt], help="padded closure and classification")
    s.add_argument("generators", help='";"-separated elements, e.g. "(0,0);(0,3)"')
    s.add_argument("--inner", required=True, help="window WxH@(a,b)")
    s.add_argument("--pad", type=int, default=3)
    s.set_defaults(func=cmd_closure)

    s = sub.add_parser("enumerate", parents=[fmt], help="count window-semiheaps")
    s.add_argument("--window", required=True)
    s.add_argument("--cross-validate", action="store_true")
    s.add_argument("--pad", type=int, default=4)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_enumerate)

    tro = sub.add_parser("tro", help="operator-level checks")
    tsub = tro.add_subparsers(dest="tro_command", required=True)
    s = tsub.add_parser("verify", parents=[fmt], help="contraction trials for the projection")
    s.add_argument("--family")
    s.add_argument("--corner")
    s.add_argument("--n", type=int, default=40)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=42)
    s.set_defaults(func=cmd_tro_verify)
    s = tsub.add_parser("isometry", parents=[fmt], help="V V* V = V on safe columns")
    s.add_argument("--element", required=True)
    s.add_argument("--n", type=int, default=16)
    s.set_defaults(func=cmd_tro_isometry)

    s = sub.add_parser("diagram", parents=[fmt], help="render a family over a window")
    s.add_argument("--family", required=True)
    s.add_argument("--window", required=True)
    s.set_defaults(func=cmd_diagram)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ebs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RangeError as exc:
        print(f"ebs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
