"""Command-line front end.

Exit codes: 0 success (or Holds), 1 type error, 2 parse or usage error,
3 evaluation stuck or out of fuel, 4 Violated, 5 Inconclusive.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import gen
from .evaluator import DEFAULT_FUEL, FuelExhausted, Stuck, StuckError, eval_term, step
from .lrcheck import (
    DomainSpec, Holds, Inconclusive, PreconditionError, SearchMode, Violated,
    check_erni, check_self_related, check_witness, rel_env_from_witness, render_witness,
)
from .parser import ParseError, SourceProgram, parse, parse_witness
from .pretty import pretty
from .syntax import free_vars, is_value
from .typecheck import TypeCheckError, simple_type_of, subtype, type_of

EXIT_OK, EXIT_TYPE, EXIT_PARSE, EXIT_EVAL, EXIT_VIOLATED, EXIT_INCONCLUSIVE = range(6)


class Reporter:
    def __init__(self, fmt: str, command: str, path: str | None):
        self.fmt = fmt
        self.base = {"command": command}
        if path is not None:
            self.base["file"] = path

    def emit(self, text: str, **record) -> None:
        if self.fmt == "structured":
            print(json.dumps({**self.base, **record}, ensure_ascii=False))
        else:
            print(text)

    def error(self, text: str, **record) -> None:
        if self.fmt == "structured":
            print(json.dumps({**self.base, **record}, ensure_ascii=False))
        else:
            print(text, file=sys.stderr)


def _load(path: str, rep: Reporter) -> SourceProgram | int:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        rep.error(f"error: {exc}", status="error", message=str(exc))
        return EXIT_PARSE
    try:
        return parse(text)
    except ParseError as exc:
        rep.error(f"{path}:{exc}", status="parse-error", line=exc.line, col=exc.col,
                  message=exc.message, expected=list(exc.expected))
        return EXIT_PARSE


def _type_error(path: str, rep: Reporter, exc: TypeCheckError) -> int:
    rec = {"status": "type-error", "kind": exc.kind, "message": exc.message}
    if exc.pos:
        rec.update(line=exc.pos[0], col=exc.pos[1])
    if exc.expected is not None:
        rec["expected"] = pretty(exc.expected)
    if exc.found is not None:
        rec["found"] = pretty(exc.found)
    sep = ":" if exc.pos else ": "
    rep.error(f"{path}{sep}{exc}", **rec)
    return EXIT_TYPE


def cmd_check(args, rep: Reporter) -> int:
    prog = _load(args.file, rep)
    if isinstance(prog, int):
        return prog
    try:
        s = type_of(prog.tyvars, prog.inputs, prog.closed_main())
    except TypeCheckError as exc:
        return _type_error(args.file, rep, exc)
    if prog.observe is not None and not subtype(s, prog.observe):
        exc = TypeCheckError("mismatch", f"program has type {pretty(s)}, not a subtype of the "
                             f"observation type {pretty(prog.observe)}", None, prog.observe, s)
        return _type_error(args.file, rep, exc)
    rep.emit(pretty(s), status="ok", type=pretty(s))
    return EXIT_OK


def _closed_program(args, rep: Reporter):
    prog = _load(args.file, rep)
    if isinstance(prog, int):
        return prog
    if prog.inputs:
        rep.error(f"{args.file}: program declares inputs; use the erni command",
                  status="error", message="program declares inputs")
        return EXIT_PARSE
    e = prog.closed_main()
    try:
        if args.unchecked:
            simple_type_of(prog.tyvars.keys(), {}, e)
        else:
            type_of(prog.tyvars, {}, e)
    except TypeCheckError as exc:
        return _type_error(args.file, rep, exc)
    return e


def cmd_run(args, rep: Reporter) -> int:
    e = _closed_program(args, rep)
    if isinstance(e, int):
        return e
    try:
        v = eval_term(e, args.fuel)
    except FuelExhausted as exc:
        rep.error(f"fuel exhausted after {exc.steps} steps", status="fuel-exhausted",
                  steps=exc.steps)
        return EXIT_EVAL
    except StuckError as exc:
        rep.error(f"stuck: {exc.reason}", status="stuck", message=exc.reason,
                  term=pretty(exc.term))
        return EXIT_EVAL
    rep.emit(pretty(v), status="ok", value=pretty(v))
    return EXIT_OK


def cmd_trace(args, rep: Reporter) -> int:
    e = _closed_program(args, rep)
    if isinstance(e, int):
        return e
    n = 0
    while True:
        rep.emit(f"{n:>4}  {pretty(e)}", step=n, term=pretty(e))
        r = step(e)
        if isinstance(r, Stuck):
            rep.error(f"stuck: {r.reason}", status="stuck", message=r.reason)
            return EXIT_EVAL
        if not hasattr(r, "term"):
            return EXIT_OK
        if n >= args.fuel:
            rep.error(f"fuel exhausted after {n} steps", status="fuel-exhausted", steps=n)
            return EXIT_EVAL
        e = r.term
        n += 1


def parse_carrier(text: str) -> tuple[str, tuple]:
    """``Int=0..9``, ``Int=1,5,7``, ``String=a,aa`` or ``Bool=true,false``."""
    name, sep, rest = text.partition("=")
    name = name.strip()
    if not sep or name not in ("Int", "Bool", "String"):
        raise argparse.ArgumentTypeError(f"bad carrier {text!r}: expected Int=..., Bool=... or String=...")
    items = [x.strip() for x in rest.split(",")] if rest else []
    values: list = []
    try:
        for item in items:
            if name == "Int":
                lo, dots, hi = item.partition("..")
                values.extend(range(int(lo), int(hi) + 1) if dots else [int(item)])
            elif name == "Bool":
                if item not in ("true", "false"):
                    raise ValueError(item)
                values.append(item == "true")
            else:
                values.append(json.loads(item) if item.startswith('"') else item)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad carrier element in {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"empty carrier in {text!r}")
    return name, tuple(dict.fromkeys(values))


def _domain(prog: SourceProgram, args, e) -> DomainSpec:
    carriers = dict(prog.carriers)
    for name, values in args.carrier or ():
        carriers[name] = values
    dom = DomainSpec(fuel=args.fuel, hetero=args.hetero).with_carriers(**carriers)
    return dom.with_literals(e)


def _verdict(rep: Reporter, v) -> int:
    match v:
        case Holds(mode, checked, used):
            rep.emit(f"Holds ({mode}; {checked} instance(s) checked)", verdict="holds",
                     mode=mode, checked=checked, work=used)
            return EXIT_OK
        case Violated(_, _, (o1, o2), detail):
            shown = [pretty(o) if o is not None else "stuck" for o in (o1, o2)]
            text = [f"Violated: outputs {shown[0]} | {shown[1]}"]
            if detail:
                text.append(f"  ({detail})")
            text.append("witness:")
            wit = render_witness(v)
            text.extend("  " + line for line in wit.splitlines())
            rep.emit("\n".join(text), verdict="violated", outputs=shown, witness=wit,
                     detail=detail)
            return EXIT_VIOLATED
        case Inconclusive(reason, checked):
            rep.emit(f"Inconclusive: {reason}", verdict="inconclusive", reason=reason,
                     checked=checked)
            return EXIT_INCONCLUSIVE
    raise AssertionError(v)


def cmd_erni(args, rep: Reporter) -> int:
    prog = _load(args.file, rep)
    if isinstance(prog, int):
        return prog
    if prog.observe is None:
        rep.error(f"{args.file}: no observe declaration", status="error",
                  message="no observe declaration")
        return EXIT_PARSE
    e = prog.closed_main()
    dom = _domain(prog, args, e)
    try:
        if args.mode == "witness":
            if not args.witness:
                rep.error("--mode witness needs --witness FILE", status="error",
                          message="missing witness file")
                return EXIT_PARSE
            try:
                w = parse_witness(Path(args.witness).read_text(encoding="utf-8"), prog)
            except ParseError as exc:
                rep.error(f"{args.witness}:{exc}", status="parse-error", line=exc.line,
                          col=exc.col, message=exc.message)
                return EXIT_PARSE
            except OSError as exc:
                rep.error(f"error: {exc}", status="error", message=str(exc))
                return EXIT_PARSE
            g1, g2 = {}, {}
            for x, (a, b) in w.subst.items():
                g1[x], g2[x] = _as_value(a, args.fuel), _as_value(b, args.fuel)
            rho = rel_env_from_witness(w.rho)
            v = check_witness(prog.tyvars, prog.inputs, e, prog.observe, rho, g1, g2, dom)
        else:
            mode = SearchMode(args.mode, args.samples, args.seed)
            v = check_erni(prog.tyvars, prog.inputs, e, prog.observe, dom, mode)
    except PreconditionError as exc:
        rep.error(f"{args.file}: {exc}", status="type-error", kind="precondition",
                  message=str(exc))
        return EXIT_TYPE
    return _verdict(rep, v)


def _as_value(e, fuel):
    if is_value(e) or free_vars(e):
        return e
    return eval_term(e, fuel)


def cmd_selftest(args, rep: Reporter) -> int:
    """Determinism, safety and self-relatedness on generated terms."""
    rng = random.Random(args.seed)
    failures = 0
    for _ in range(args.count):
        e, _s = gen.closed_term(rng)
        try:
            cur = e
            for _n in range(DEFAULT_FUEL):
                r1, r2 = step(cur), step(cur)
                if r1 != r2:
                    raise AssertionError("nondeterministic step")
                if isinstance(r1, Stuck):
                    raise AssertionError(f"stuck: {r1.reason}")
                if not hasattr(r1, "term"):
                    break
                cur = r1.term
        except AssertionError as exc:
            failures += 1
            rep.emit(f"FAIL safety: {exc}: {pretty(e)}", check="safety", ok=False)
    rep.emit(f"safety and determinism: {args.count} closed terms, {failures} failure(s)",
             check="safety", count=args.count, failures=failures)
    bad = 0
    dom = DomainSpec().with_carriers(Int=(1, 2), String=("", "a"))
    cfg = gen.GenConfig(max_depth=4, ints=(1, 2), strings=("", "a"))
    counts = {"Holds": 0, "Violated": 0, "Inconclusive": 0}
    for _ in range(args.open_count):
        delta, gamma, e, s = gen.open_term(rng, cfg)
        v = check_self_related(delta, gamma, e, s, dom)
        counts[type(v).__name__] += 1
        if isinstance(v, Violated):
            bad += 1
            rep.emit(f"FAIL self-relatedness: {pretty(e)}\n{render_witness(v)}",
                     check="self-related", ok=False)
    rep.emit(f"self-relatedness: {args.open_count} open terms, "
             + ", ".join(f"{k} {n}" for k, n in counts.items()),
             check="self-related", **counts)
    return EXIT_OK if failures == 0 and bad == 0 else EXIT_VIOLATED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="exsec", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    fuel = argparse.ArgumentParser(add_help=False)
    fuel.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="security type check a program")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    for name, func, text in (("run", cmd_run, "evaluate a closed program"),
                             ("trace", cmd_trace, "print every reduction step")):
        p = sub.add_parser(name, parents=[common, fuel], help=text)
        p.add_argument("file")
        p.add_argument("--unchecked", action="store_true",
                       help="skip security typing (simple typing still applies)")
        p.set_defaults(func=func)

    p = sub.add_parser("erni", parents=[common, fuel],
                       help="search for a noninterference violation")
    p.add_argument("file")
    p.add_argument("--mode", choices=("exhaustive", "sampled", "witness"), default="exhaustive")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--carrier", type=parse_carrier, action="append",
                   help="override a carrier, e.g. Int=0..9 or String=a,aa")
    p.add_argument("--hetero", action="store_true",
                   help="let abstract types have different representations on each side")
    p.add_argument("--witness", help="witness file for --mode witness")
    p.set_defaults(func=cmd_erni)

    p = sub.add_parser("selftest", parents=[common], help="run the generated property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=200, help="closed terms to evaluate")
    p.add_argument("--open-count", type=int, default=20, help="open terms to self-relate")
    p.set_defaults(func=cmd_selftest, file=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    rep = Reporter(args.format, args.command, args.file)
    return args.func(args, rep)


if __name__ == "__main__":
    sys.exit(main())
