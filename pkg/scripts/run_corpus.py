"""Type check every bundled program and run the noninterference search on those
that declare an observation type; print one row per program."""

import argparse
import time

from exsec import corpus_path
from exsec.lrcheck import DomainSpec, PreconditionError, SearchMode, check_erni
from exsec.parser import parse
from exsec.pretty import pretty
from exsec.typecheck import TypeCheckError, type_of


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    ap.add_argument("--samples", type=int, default=100)
    args = ap.parse_args()
    files = sorted(p for p in corpus_path("").iterdir() if p.name.endswith(".fsec"))
    print(f"{'program':<20} {'type':<22} {'noninterference':<16} seconds")
    for path in files:
        prog = parse(path.read_text())
        e = prog.closed_main()
        try:
            ty = pretty(type_of(prog.tyvars, prog.inputs, e))
        except TypeCheckError as exc:
            ty = f"rejected ({exc.kind})"
        verdict, elapsed = "-", 0.0
        if prog.observe is not None:
            dom = DomainSpec().with_carriers(**prog.carriers).with_literals(e)
            start = time.perf_counter()
            try:
                v = check_erni(prog.tyvars, prog.inputs, e, prog.observe, dom,
                               SearchMode(args.mode, args.samples))
                verdict = type(v).__name__
            except PreconditionError:
                verdict = "precondition"
            elapsed = time.perf_counter() - start
        print(f"{path.stem:<20} {ty:<22} {verdict:<16} {elapsed:.2f}")


if __name__ == "__main__":
    main()
