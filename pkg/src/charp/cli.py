"""Command-line driver.

    charp verify <suite> [--p P --m M --n N --trunc T --samples S --cases C --seed X --out FILE]
    charp universal {L|P} --p P
    charp cartier --p P --m M --form TEXT
    charp darboux --p P --m M --form TEXT
    charp weyl {center|fiber|power} --p P --n N [--trunc T] [--c C] [--elem TEXT]

Exit codes: 0 all checks pass, 1 some check failed, 2 bad usage or parameters.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import freealg, linalg, poisson, trunccalc, weyl
from .suites import SUITES, BadParams, SuiteSpec, UnknownSuite, default_specs, run_suite
from .text import ParseError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="charp", description="Exact Poisson and quantization checks in characteristic p.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, *, m=False, n=False, trunc=False):
        sp.add_argument("--p", type=int, help="odd prime characteristic")
        if m:
            sp.add_argument("--m", type=int, help="number of variables")
        if n:
            sp.add_argument("--n", type=int, help="number of (x, y) pairs")
        if trunc:
            sp.add_argument("--trunc", type=int, help="h-truncation N")
        sp.add_argument("--out", help="write output here instead of stdout")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help=", ".join(SUITES))
    common(v, m=True, n=True, trunc=True)
    v.add_argument("--samples", type=int)
    v.add_argument("--cases", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical reports)")

    u = sub.add_parser("universal", help="print L or P")
    u.add_argument("which", choices=["L", "P"])
    u.add_argument("--brackets", action="store_true", help="print L through nested brackets")
    common(u)

    c = sub.add_parser("cartier", help="Cartier class of a closed form")
    common(c, m=True)
    c.add_argument("--form", required=True)

    d = sub.add_parser("darboux", help="normalizing substitution of a symplectic form")
    common(d, m=True)
    d.add_argument("--form", required=True)
    d.add_argument("--seed", type=int, default=0)

    w = sub.add_parser("weyl", help="reduced Weyl algebra objects")
    w.add_argument("what", choices=["center", "fiber", "power"])
    common(w, n=True, trunc=True)
    w.add_argument("--c", type=int, default=1, help="fiber parameter h = c")
    w.add_argument("--elem", help="element for 'power', e.g. 'x0 y0 + h'")
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _verify(args) -> int:
    if args.suite not in SUITES:
        raise UnknownSuite(args.suite)
    if args.p is None:
        specs = default_specs(args.suite, args.seed)
        overrides = {k: getattr(args, k) for k in ("m", "n", "trunc", "samples", "cases")
                     if getattr(args, k) is not None}
        specs = [SuiteSpec(**{**s.__dict__, **overrides}) for s in specs]
    else:
        specs = [SuiteSpec(args.suite, args.p, args.m, args.n, args.trunc, args.samples, args.cases, args.seed)]
    reports = [run_suite(s, timing=args.timing) for s in specs]
    body = [r.to_dict() for r in reports]
    payload = body[0] if len(body) == 1 else {"schema": 1, "suite": args.suite, "runs": body,
                                               "failed": sum(r.failed for r in reports)}
    _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise BadParams(f"--{name} is required")


def _universal(args) -> int:
    _need(args, "p")
    p = linalg.check_prime(args.p)
    if args.which == "L":
        L = freealg.universal_L(p)
        _emit(L.bracket_text() if args.brackets else str(L.tensor), args.out)
    else:
        _emit(str(freealg.universal_P(p)), args.out)
    return EXIT_OK


def _cartier(args) -> int:
    _need(args, "p", "m")
    ctx = trunccalc.algebra(args.p, args.m)
    _emit(str(trunccalc.cartier(ctx.parse_form(args.form))), args.out)
    return EXIT_OK


def _darboux(args) -> int:
    _need(args, "p", "m")
    ctx = trunccalc.algebra(args.p, args.m)
    S = poisson.check_symplectic(ctx.parse_form(args.form))
    _emit(str(poisson.darboux_normalize(S, seed=args.seed)), args.out)
    return EXIT_OK


def _weyl(args) -> int:
    _need(args, "p")
    n = args.n or 1
    if args.what == "center":
        D = weyl.WeylCtx(args.p, n, args.trunc or args.p)
        _emit("\n".join(str(z) for z in weyl.center_basis(D)), args.out)
    elif args.what == "fiber":
        D = weyl.WeylCtx(args.p, n, args.trunc)
        report = weyl.fiber_matrix_iso(D, args.c)
        _emit(json.dumps({"schema": 1, **report}, indent=2, sort_keys=True), args.out)
        return EXIT_OK if report["bijective"] else EXIT_FAIL
    else:
        _need(args, "elem")
        D = weyl.WeylCtx(args.p, n, args.trunc)
        _emit(str(weyl.p_power(D.parse(args.elem))), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    handlers = {"verify": _verify, "universal": _universal, "cartier": _cartier,
                "darboux": _darboux, "weyl": _weyl}
    try:
        return handlers[args.command](args)
    except UnknownSuite as exc:
        print(f"charp: unknown suite {exc.args[0]!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
    except (BadParams, ParseError, linalg.BadPrime) as exc:
        print(f"charp: {exc}", file=sys.stderr)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"charp: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
