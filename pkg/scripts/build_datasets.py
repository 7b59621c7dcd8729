#!/usr/bin/env python3
"""Build the standard datasets into ./datasets/ (both matrix designs and
both letter-string sets), then sanity-check them with the solver and
verifier."""

import argparse
import sys
import time
from pathlib import Path

from analogykit.core import answers_equivalent
from analogykit.digitmat import build_dataset, bundle
from analogykit.letterstring import build_letterstring_dataset, verify_problem
from analogykit.solver import solve


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--n", type=int, default=100, help="instances per digit-matrix subtype")
    parser.add_argument("--out", type=Path, default=Path("datasets"))
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for name in ("exp1", "exp2"):
        t0 = time.perf_counter()
        ps = build_dataset(bundle(name), args.n, args.seed)
        bad = sum(
            not (r := solve(p.grid)).unique or not answers_equivalent(p.kind, p.answer, r.answer)
            for p in ps.problems
        )
        path = args.out / f"digitmat_{name}.json"
        path.write_text(ps.to_json(), encoding="utf-8")
        print(f"{path}: {len(ps.problems)} problems, {bad} solver disagreements, "
              f"{time.perf_counter()-t0:.1f}s")
        if bad:
            return 1

    for spec, eval_subset in (("full", False), ("eval", True)):
        ps = build_letterstring_dataset(args.seed, eval_subset=eval_subset)
        bad = sum(not verify_problem(p) for p in ps.problems)
        path = args.out / f"letterstring_{spec}.json"
        path.write_text(ps.to_json(), encoding="utf-8")
        print(f"{path}: {len(ps.problems)} problems, {bad} verifier failures")
        if bad:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
