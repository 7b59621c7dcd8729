"""Procedural generation of digit-matrix problems.

Every candidate grid is gated by the independent solver: a problem is kept
only when the solver finds the generated answer and no conflicting
interpretation, so "correct" is well-defined for scoring. Generation is
pure in (subtype, seed) and byte-deterministic.
"""

from __future__ import annotations

import random
from itertools import permutations
from typing import Optional

from ..core import (
    AnswerKind,
    Cell,
    Family,
    Grid,
    MatrixProblem,
    ProblemId,
    ProblemSet,
    answers_equivalent,
    stable_seed,
)
from ..solver import NoConsistentRule, solve
from .catalog import Subtype, get_subtype
from .distractors import DistractorExhausted, logic_distractors, transformation_distractors
from .rules import LogicOp, LogicRule, Orientation, TransformKind, TransformRule, derive_answer

MAX_ATTEMPTS = 400
MAX_DEDUP_RETRIES = 80


class GenerationExhausted(RuntimeError):
    """No unambiguous instance found within the retry budget."""


class _Retry(Exception):
    """Internal: candidate infeasible, resample."""


def _progression_starts(delta: int, rng: random.Random) -> list[int]:
    lo, hi = (0, 9 - 2 * delta) if delta > 0 else (-2 * delta, 9)
    return [rng.randint(lo, hi) for _ in range(3)]


def _build_transformation(spec: Subtype, rng: random.Random):
    kinds = list(spec.kinds)
    rng.shuffle(kinds)  # bind each rule to a random slot position
    width = len(kinds)
    digits = [[[0] * width for _ in range(3)] for _ in range(3)]
    rules = []

    for slot, kind in enumerate(kinds):
        orientation = spec.orientation or rng.choice((Orientation.ROW, Orientation.COL))
        delta: Optional[int] = None
        value_set: Optional[frozenset[int]] = None

        if kind is TransformKind.CONSTANT:
            line_digits = [[rng.randrange(10)] * 3 for _ in range(3)]
        elif kind is TransformKind.DIST3:
            values = rng.sample(range(10), 3)
            value_set = frozenset(values)
            orderings = rng.sample(list(permutations(values)), 3)  # three distinct orders
            line_digits = [list(o) for o in orderings]
        else:
            magnitude = spec.magnitude or rng.choice((1, 2))
            delta = magnitude * rng.choice((1, -1))
            line_digits = [[s + i * delta for i in range(3)] for s in _progression_starts(delta, rng)]

        for line in range(3):
            for cross in range(3):
                r, c = (line, cross) if orientation is Orientation.ROW else (cross, line)
                digits[r][c][slot] = line_digits[line][cross]
        rules.append(TransformRule(kind, orientation, slot, delta=delta, value_set=value_set))

    rows = [[Cell(tuple(digits[r][c])) for c in range(3)] for r in range(3)]
    answer = rows[2][2]
    rows[2][2] = None
    return Grid.from_rows(rows), answer, rules


def _nonempty_subset(pool: list[int], rng: random.Random) -> frozenset[int]:
    for _ in range(64):
        subset = frozenset(d for d in pool if rng.random() < 0.5)
        if subset:
            return subset
    raise _Retry


def _subset(pool: list[int], rng: random.Random) -> frozenset[int]:
    return frozenset(d for d in pool if rng.random() < 0.5)


def _build_logic(spec: Subtype, rng: random.Random):
    orientation = rng.choice((Orientation.ROW, Orientation.COL))
    target = spec.target_line if spec.target_line is not None else rng.randrange(3)
    size = rng.choice((3, 4))
    universe = rng.sample(range(10), size)
    sources = [i for i in range(3) if i != target]
    content: list[list[frozenset[int]]] = [[frozenset()] * 3 for _ in range(3)]

    if spec.op is LogicOp.OR:
        shuffled = rng.sample(universe, size)
        split = rng.randint(1, size - 1)
        owned = {sources[0]: shuffled[:split], sources[1]: shuffled[split:]}
        for cross in range(3):
            a = _nonempty_subset(owned[sources[0]], rng)
            b = _nonempty_subset(owned[sources[1]], rng)
            content[sources[0]][cross] = a
            content[sources[1]][cross] = b
            content[target][cross] = a | b
    elif spec.op is LogicOp.AND:
        for cross in range(3):
            shared = _nonempty_subset(universe, rng)
            rest = [d for d in universe if d not in shared]
            extra_a = _subset(rest, rng)
            extra_b = _subset([d for d in rest if d not in extra_a], rng)
            if target != 2 and cross == 2:
                # the missing cell sits on a source line: keep it minimal so
                # the derived completion equals the generated cell
                if sources[0] == 2:
                    extra_a = frozenset()
                else:
                    extra_b = frozenset()
            content[sources[0]][cross] = shared | extra_a
            content[sources[1]][cross] = shared | extra_b
            content[target][cross] = shared
    else:  # XOR
        for cross in range(3):
            for _ in range(64):
                a = _nonempty_subset(universe, rng)
                b = _nonempty_subset(universe, rng)
                if a != b:
                    break
            else:
                raise _Retry
            content[sources[0]][cross] = a
            content[sources[1]][cross] = b
            content[target][cross] = a ^ b

    if spec.op is LogicOp.OR and target != 2:
        # source-cell completion must be minimal: guaranteed by disjoint
        # ownership, nothing to adjust
        pass

    if not content[2][2]:
        raise _Retry  # the generative prompt cannot elicit an empty answer

    # per-line slot layouts: width is the number of distinct digits on the
    # line; aligned problems pin each digit to one slot, the target line
    # concatenating the source layouts
    pools: list[list[int]] = []
    for line in range(3):
        seen: list[int] = []
        for cross in range(3):
            for d in sorted(content[line][cross]):
                if d not in seen:
                    seen.append(d)
        pools.append(seen)

    layouts: dict[int, list[int]] = {}
    for line in sources:
        layout = list(pools[line])
        rng.shuffle(layout)
        layouts[line] = layout
    # target slots concatenate the source layouts; digits shared by both
    # sources (AND/XOR) keep their first position only
    target_layout: list[int] = []
    for line in sources:
        for d in layouts[line]:
            if d in pools[target] and d not in target_layout:
                target_layout.append(d)
    layouts[target] = target_layout

    def render(line: int, cross: int) -> Cell:
        cell_content = content[line][cross]
        width = len(pools[line])
        if spec.aligned:
            return Cell(tuple(d if d in cell_content else None for d in layouts[line]))
        slots: list[Optional[int]] = [None] * width
        order = rng.sample(sorted(cell_content), len(cell_content))
        for pos, d in zip(rng.sample(range(width), len(cell_content)), order):
            slots[pos] = d
        return Cell(tuple(slots))

    rows: list[list[Optional[Cell]]] = [[None] * 3 for _ in range(3)]
    answer: Optional[Cell] = None
    for line in range(3):
        for cross in range(3):
            r, c = (line, cross) if orientation is Orientation.ROW else (cross, line)
            cell = render(line, cross)
            if (r, c) == (2, 2):
                answer = cell
            else:
                rows[r][c] = cell

    # digits in first-appearance order over the visible cells, row-major;
    # this is the canonical "order they appear in the problem" used for
    # aligned answer-choice rendering and the distractor digit universe
    appearing: list[int] = []
    for r in range(3):
        for c in range(3):
            if (r, c) == (2, 2):
                continue
            for s in rows[r][c].slots:
                if s is not None and s not in appearing:
                    appearing.append(s)
    if not answer.digit_set <= set(appearing):
        raise _Retry  # answer digit never shown elsewhere; cannot be induced

    rule = LogicRule(spec.op, orientation, target, bool(spec.aligned))
    meta = {"appearing": appearing}
    return Grid.from_rows(rows), answer, rule, meta


def generate_problem(subtype_name: str, seed: int, instance: int = 0) -> MatrixProblem:
    """Generate one solver-validated problem, deterministic in (subtype, seed)."""
    spec = get_subtype(subtype_name)
    rng = random.Random(seed)

    for _ in range(MAX_ATTEMPTS):
        try:
            if spec.family == "transformation":
                grid, answer, rules = _build_transformation(spec, rng)
                kind = AnswerKind.ORDERED_DIGITS
                logic_meta = None
            else:
                grid, answer, rules, logic_meta = _build_logic(spec, rng)
                kind = AnswerKind.DIGIT_SET
        except _Retry:
            continue

        try:
            result = solve(grid)
        except NoConsistentRule:
            continue
        if not result.unique or not answers_equivalent(kind, answer, result.answer):
            continue
        derived = derive_answer(grid, rules)
        if not answers_equivalent(kind, answer, derived):
            continue

        try:
            if spec.family == "transformation":
                wrong = transformation_distractors(grid, answer, rng)
            else:
                appearing = logic_meta["appearing"]
                wrong = logic_distractors(
                    appearing, answer.digit_set, rng, bool(spec.aligned), appearing
                )
        except DistractorExhausted:
            continue

        if spec.family == "logic" and spec.aligned:
            answer_choice = Cell(tuple(d for d in logic_meta["appearing"] if d in answer.digit_set))
        else:
            answer_choice = Cell(answer.digits)
        choices = wrong + [answer_choice]
        rng.shuffle(choices)

        metadata = _problem_metadata(spec, rules)
        return MatrixProblem(
            id=ProblemId(Family.DIGIT_MATRIX, subtype_name, instance, seed),
            grid=grid,
            answer=answer,
            choices=tuple(choices),
            kind=kind,
            metadata=metadata,
        )
    raise GenerationExhausted(f"no unambiguous {subtype_name} instance for seed {seed}")


def _problem_metadata(spec: Subtype, rules) -> dict:
    if spec.family == "logic":
        return {
            "problem_type": "logic",
            "rule_count": 1,
            "rules": [rules.describe()],
            "logic_op": spec.op.value,
            "aligned": bool(spec.aligned),
        }
    kinds = [r.kind for r in rules]
    return {
        "problem_type": spec.problem_type,
        "rule_count": len(rules),
        "rules": [r.describe() for r in sorted(rules, key=lambda r: r.slot)],
        "has_progression": TransformKind.PROGRESSION in kinds,
        "n_unique_rules": len(set(kinds)),
    }


def _grid_key(problem: MatrixProblem) -> tuple:
    grid = tuple(
        tuple(None if cell is None else cell.slots for cell in row) for row in problem.grid.cells
    )
    return grid, problem.answer.slots


def progression_instance_space(subtype_name: str) -> int:
    """Count distinct one-rule progression grids by exhaustive enumeration."""
    spec = get_subtype(subtype_name)
    if spec.kinds != (TransformKind.PROGRESSION,) or spec.magnitude is None:
        raise ValueError("only one-rule progression subtypes are enumerable")
    seen = set()
    for orientation in (Orientation.ROW, Orientation.COL):
        for sign in (1, -1):
            delta = sign * spec.magnitude
            lo, hi = (0, 9 - 2 * delta) if delta > 0 else (-2 * delta, 9)
            starts = range(lo, hi + 1)
            for s0 in starts:
                for s1 in starts:
                    for s2 in starts:
                        digits = [[0] * 3 for _ in range(3)]
                        for line, start in enumerate((s0, s1, s2)):
                            for cross in range(3):
                                r, c = (line, cross) if orientation is Orientation.ROW else (cross, line)
                                digits[r][c] = start + cross * delta
                        key = tuple(tuple(row) for row in digits)
                        seen.add(key)
    return len(seen)


def build_dataset(subtypes: list[str], instances_per_subtype: int, seed: int) -> ProblemSet:
    """Generate a problem set with stable ids and per-subtype deduplication.

    If a subtype's distinct-instance space is smaller than requested the
    full distinct space is emitted and the shortfall recorded in metadata.
    """
    if instances_per_subtype < 1:
        raise ValueError("instancesPerSubtype must be >= 1")
    problems: list[MatrixProblem] = []
    shortfall: dict[str, int] = {}

    for subtype in subtypes:
        seen: set = set()
        produced = 0
        for instance in range(instances_per_subtype):
            accepted = None
            for retry in range(MAX_DEDUP_RETRIES):
                instance_seed = stable_seed(seed, subtype, instance, retry)
                try:
                    candidate = generate_problem(subtype, instance_seed, instance=instance)
                except GenerationExhausted:
                    continue
                key = _grid_key(candidate)
                if key in seen:
                    continue
                seen.add(key)
                accepted = candidate
                break
            if accepted is None:
                shortfall[subtype] = instances_per_subtype - produced
                break
            problems.append(accepted)
            produced += 1

    metadata = {
        "seed": seed,
        "requested_per_subtype": instances_per_subtype,
        "subtypes": list(subtypes),
    }
    spaces = {}
    for subtype in subtypes:
        spec = get_subtype(subtype)
        if spec.kinds == (TransformKind.PROGRESSION,) and spec.magnitude is not None:
            spaces[subtype] = progression_instance_space(subtype)
    if spaces:
        metadata["progression_instance_space"] = spaces
    if shortfall:
        metadata["shortfall"] = shortfall
    return ProblemSet(family=Family.DIGIT_MATRIX, problems=problems, metadata=metadata)
