"""Distractor synthesis for digit-matrix answer choices.

Transformation problems draw each distractor uniformly from a fixed menu of
methods (sample a grid cell; nudge a digit of a cell / the answer / an
earlier distractor by 1 or 2; fresh random digits), with five extra
permutation/recombination methods unlocked for multi-rule problems.
Logic distractors are random subsets of the digits appearing in the
problem, the empty set included, the correct answer excluded.
"""

from __future__ import annotations

import random
from typing import Callable, Optional

from ..core import AnswerKind, Cell, Grid, answers_equivalent

MAX_DRAWS = 600


class DistractorExhausted(RuntimeError):
    """Seven pairwise-distinct distractors could not be formed."""


def _nudged(digits: tuple[int, ...], rng: random.Random) -> tuple[int, ...]:
    pos = rng.randrange(len(digits))
    feasible = [digits[pos] + step for step in (-2, -1, 1, 2) if 0 <= digits[pos] + step <= 9]
    out = list(digits)
    out[pos] = rng.choice(feasible)
    return tuple(out)


def _permuted(digits: tuple[int, ...], rng: random.Random) -> tuple[int, ...]:
    out = list(digits)
    rng.shuffle(out)
    return tuple(out)


def transformation_distractors(grid: Grid, answer: Cell, rng: random.Random) -> list[Cell]:
    """Seven ordered-digit distractors for a transformation problem."""
    cell_digits = [cell.digits for _, _, cell in grid.visible_cells()]
    width = len(answer.digits)
    multi_rule = width > 1
    chosen: list[tuple[int, ...]] = []

    def random_cell() -> tuple[int, ...]:
        return rng.choice(cell_digits)

    def prior() -> Optional[tuple[int, ...]]:
        return rng.choice(chosen) if chosen else None

    def combine(pool: list[tuple[int, ...]]) -> tuple[int, ...]:
        return tuple(rng.choice(pool)[s] for s in range(width))

    methods: list[Callable[[], Optional[tuple[int, ...]]]] = [
        lambda: random_cell(),
        lambda: _nudged(random_cell(), rng),
        lambda: _nudged(answer.digits, rng),
        lambda: (None if (p := prior()) is None else _nudged(p, rng)),
        lambda: tuple(rng.randrange(10) for _ in range(width)),
    ]
    if multi_rule:
        methods.extend(
            [
                lambda: _permuted(answer.digits, rng),
                lambda: _permuted(random_cell(), rng),
                lambda: (None if (p := prior()) is None else _permuted(p, rng)),
                lambda: combine(cell_digits),
                lambda: (None if not chosen else combine(chosen)),
            ]
        )

    for _ in range(MAX_DRAWS):
        candidate = rng.choice(methods)()
        if candidate is None:
            continue
        cell = Cell(candidate)
        if answers_equivalent(AnswerKind.ORDERED_DIGITS, answer, cell):
            continue
        if any(candidate == prev for prev in chosen):
            continue
        chosen.append(candidate)
        if len(chosen) == 7:
            return [Cell(d) for d in chosen]
    raise DistractorExhausted("transformation distractor space exhausted")


def logic_distractors(
    universe: list[int],
    answer_set: frozenset[int],
    rng: random.Random,
    aligned: bool,
    problem_order: list[int],
) -> list[Cell]:
    """Seven set distractors drawn from subsets of the problem's digits.

    Aligned problems list each distractor's digits in the order they appear
    in the problem; permuted problems scatter the order randomly. The empty
    set renders as a single blank slot.
    """
    chosen: list[frozenset[int]] = []
    for _ in range(MAX_DRAWS):
        subset = frozenset(d for d in universe if rng.random() < 0.5)
        if subset == answer_set or subset in chosen:
            continue
        chosen.append(subset)
        if len(chosen) == 7:
            break
    else:
        raise DistractorExhausted("logic distractor space exhausted")

    cells = []
    for subset in chosen:
        if not subset:
            cells.append(Cell((None,)))
        elif aligned:
            cells.append(Cell(tuple(d for d in problem_order if d in subset)))
        else:
            cells.append(Cell(_permuted(tuple(subset), rng)))
    return cells


def generate_distractors(problem, seed: int) -> list[Cell]:
    """Seven fresh distractors for an existing problem, seeded separately.

    Transformation problems use the nudge/permute/recombine menu; logic
    problems draw subsets of the digits appearing in the problem, ordered
    per the problem's alignment mode.
    """
    rng = random.Random(seed)
    if problem.kind is AnswerKind.ORDERED_DIGITS:
        return transformation_distractors(problem.grid, problem.answer, rng)
    appearing: list[int] = []
    for _, _, cell in problem.grid.visible_cells():
        for s in cell.slots:
            if s is not None and s not in appearing:
                appearing.append(s)
    aligned = bool(problem.metadata.get("aligned"))
    return logic_distractors(appearing, problem.answer.digit_set, rng, aligned, appearing)
