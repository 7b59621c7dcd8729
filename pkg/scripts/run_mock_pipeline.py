#!/usr/bin/env python3
"""End-to-end demonstration on scripted models: generate both matrix
designs, run the oracle and uniform-random mocks (isolated and
progressive), and print accuracy tables by problem type."""

import argparse
import sys

from analogykit.digitmat import build_dataset, bundle
from analogykit.harness import (
    OracleModel,
    UniformRandomModel,
    run_digitmat_experiment,
    run_progressive_experiment,
)
from analogykit.stats import summarize


def show(title: str, records, group: str) -> None:
    table = summarize([r.to_json_dict() for r in records], group)
    print(f"\n{title}")
    print(table.to_csv(), end="")


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--window", type=int, default=4096)
    args = parser.parse_args()

    exp1 = build_dataset(bundle("exp1"), args.n, args.seed)
    oracle = OracleModel(matrix_problems=exp1.problems)
    show("oracle, both modes, by problem type",
         run_digitmat_experiment(oracle, exp1.problems, mode="both"), "problem_type")

    random_model = UniformRandomModel(seed=args.seed)
    show("uniform random, multiple choice, by problem type",
         run_digitmat_experiment(random_model, exp1.problems, mode="mc"), "problem_type")

    exp2 = build_dataset(bundle("exp2"), 1, args.seed)
    oracle42 = OracleModel(matrix_problems=exp2.problems)
    records = run_progressive_experiment(
        oracle42, exp2.problems, context_window_tokens=args.window
    )
    deleted = sum(r.extra.get("deleted", 0) for r in records if r.mode == "generative")
    show(f"oracle, progressive (window={args.window}, {deleted} deletions), by rule count",
         records, "rule_count")
    return 0


if __name__ == "__main__":
    sys.exit(main())
