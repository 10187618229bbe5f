"""Generate closed security-typed terms and check that each one evaluates to a
value, steps deterministically and keeps its type along the way."""

import argparse
import collections
import random
import time

from exsec import gen
from exsec.evaluator import Done, Stepped, step
from exsec.pretty import pretty
from exsec.typecheck import TypeCheckError, check_against


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=1000)
    ap.add_argument("--depth", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    cfg = gen.GenConfig(max_depth=args.depth)
    outcomes = collections.Counter()
    steps = []
    start = time.perf_counter()
    for _ in range(args.n):
        e, s = gen.closed_term(rng, cfg)
        n = 0
        while True:
            r = step(e)
            if r != step(e):
                outcomes["nondeterministic"] += 1
                print("nondeterministic:", pretty(e))
                break
            if isinstance(r, Done):
                outcomes["value"] += 1
                break
            if not isinstance(r, Stepped):
                outcomes["stuck"] += 1
                print("stuck:", pretty(e))
                break
            e, n = r.term, n + 1
            try:
                check_against({}, {}, e, s)
            except TypeCheckError as exc:
                outcomes["type lost"] += 1
                print("type lost:", exc)
                break
        steps.append(n)
    elapsed = time.perf_counter() - start
    print(f"{args.n} terms in {elapsed:.1f}s; " + ", ".join(f"{k} {v}" for k, v in outcomes.items()))
    steps.sort()
    print(f"steps: median {steps[len(steps) // 2]}, max {steps[-1]}")


if __name__ == "__main__":
    main()
