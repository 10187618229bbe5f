"""Check generated open terms against themselves in the logical relation.

A well-typed term must never produce a violation; the run reports how many
checks held, how many were cut off by a finite bound, and the time taken."""

import argparse
import random
import time

from exsec import gen
from exsec.lrcheck import DomainSpec, SearchMode, Violated, check_self_related, render_witness
from exsec.pretty import pretty


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=100)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--seed", type=int, default=6)
    ap.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    cfg = gen.GenConfig(max_depth=args.depth, ints=(1, 2), strings=("", "a"))
    dom = DomainSpec().with_carriers(Int=(1, 2), Bool=(False, True), String=("", "a"))
    counts = {"Holds": 0, "Violated": 0, "Inconclusive": 0}
    start = time.perf_counter()
    for _ in range(args.n):
        delta, gamma, e, s = gen.open_term(rng, cfg)
        v = check_self_related(delta, gamma, e, s, dom, SearchMode(args.mode))
        counts[type(v).__name__] += 1
        if isinstance(v, Violated):
            print("violation:", pretty(e))
            print(render_witness(v))
    elapsed = time.perf_counter() - start
    print(f"{args.n} terms in {elapsed:.1f}s; " + ", ".join(f"{k} {n}" for k, n in counts.items()))


if __name__ == "__main__":
    main()
