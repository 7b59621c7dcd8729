"""Independent rule-induction oracle for digit matrices.

Exhaustively enumerates the rule grammar against the 8 visible cells and
returns every consistent interpretation together with the missing cell it
predicts. Used to validate generated problems (a problem is kept only if
the oracle finds exactly the generated answer, uniquely) and as a scripted
reference model. The checks here are written directly against cell
contents, independent of the generator's rule-application code.

Transformation grammar, per slot and orientation (lines = rows or columns):
  constant     every cell of a line carries the same digit at this slot
  dist3        every line carries the same 3 distinct digits at this slot
  progression  each line is an arithmetic run with a shared delta in
               {-2,-1,+1,+2}

Logic grammar, over whole cells as digit sets:
  one target line equals OR / AND / XOR of the other two lines, matched
  cross-index by cross-index. When the missing cell lies on a source line
  the completion is the minimal set forced by the relation (a solver never
  posits digits the relation does not require). A logic reading is admitted
  only if some fully visible cross-index distinguishes the target from the
  sources; without that the "relation" is vacuous (e.g. any constant grid
  satisfies OR with all-identical lines).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Optional

from .core import Cell, Grid

MAX_INTERPRETATIONS = 64


class NoConsistentRule(ValueError):
    """The grammar cannot explain the visible cells."""


@dataclass(frozen=True)
class Interpretation:
    """One consistent reading of a grid: family plus rule descriptions."""

    family: str  # "transformation" | "logic"
    rules: tuple[str, ...]


@dataclass
class SolveResult:
    answers: list[tuple[Cell, Interpretation]]
    unique: bool

    @property
    def answer(self) -> Cell:
        return self.answers[0][0]


def _transform_slot_hypotheses(grid: Grid, slot: int) -> list[tuple[str, int]]:
    """All consistent (description, completion digit) pairs for one slot."""
    rows = [[grid.cells[r][c] for c in range(3)] for r in range(3)]

    def digit(r: int, c: int) -> Optional[int]:
        cell = rows[r][c]
        return None if cell is None else cell.slots[slot]

    def lines(orient: str) -> list[list[Optional[int]]]:
        if orient == "row":
            return [[digit(r, c) for c in range(3)] for r in range(3)]
        return [[digit(r, c) for r in range(3)] for c in range(3)]

    found: list[tuple[str, int]] = []
    for orient in ("row", "col"):
        lls = lines(orient)
        partial = lls[2]  # the line containing the missing cell, gap last

        # constant: one digit per line
        if all(len({d for d in ll if d is not None}) == 1 for ll in lls):
            found.append((f"constant/{orient}@{slot}", partial[0]))

        # distribution-of-3: same 3-set on every line
        full_sets = [set(ll) for ll in lls[:2]]
        if (
            all(len(s) == 3 for s in full_sets)
            and full_sets[0] == full_sets[1]
            and len({partial[0], partial[1]}) == 2
            and {partial[0], partial[1]} <= full_sets[0]
        ):
            remaining = full_sets[0] - {partial[0], partial[1]}
            found.append((f"dist3/{orient}@{slot}", remaining.pop()))

        # progression: shared arithmetic delta along every line
        for delta in (-2, -1, 1, 2):
            ok = all(
                b - a == delta
                for ll in lls
                for a, b in zip(ll, ll[1:])
                if a is not None and b is not None
            )
            completion = partial[1] + delta
            if ok and 0 <= completion <= 9:
                found.append((f"progression{delta:+d}/{orient}@{slot}", completion))
    return found


def _transform_interpretations(grid: Grid) -> list[tuple[Cell, Interpretation]]:
    width = grid.slot_uniform_width()
    if width is None or grid.has_blanks():
        return []
    per_slot = [_transform_slot_hypotheses(grid, s) for s in range(width)]
    if any(not hyps for hyps in per_slot):
        return []
    combos: list[tuple[Cell, Interpretation]] = []
    for combo in product(*per_slot):
        combos.append(
            (
                Cell(tuple(completion for _, completion in combo)),
                Interpretation("transformation", tuple(desc for desc, _ in combo)),
            )
        )
        if len(combos) >= MAX_INTERPRETATIONS:
            break
    return combos


def _logic_interpretations(grid: Grid) -> list[tuple[Cell, Interpretation]]:
    def cell_set(orient: str, line: int, cross: int) -> Optional[frozenset[int]]:
        r, c = (line, cross) if orient == "row" else (cross, line)
        cell = grid.cells[r][c]
        return None if cell is None else cell.digit_set

    def apply(op: str, a: frozenset[int], b: frozenset[int]) -> frozenset[int]:
        return a | b if op == "or" else a & b if op == "and" else a ^ b

    found: list[tuple[Cell, Interpretation]] = []
    for orient, op, target in product(("row", "col"), ("or", "and", "xor"), range(3)):
        sources = [i for i in range(3) if i != target]
        completion: Optional[frozenset[int]] = None
        consistent = True
        distinguishing = False
        for cross in range(3):
            t = cell_set(orient, target, cross)
            a = cell_set(orient, sources[0], cross)
            b = cell_set(orient, sources[1], cross)
            visible = [s for s in (t, a, b) if s is not None]
            if len(visible) == 3:
                if t != apply(op, a, b):
                    consistent = False
                    break
                if t != a or t != b:
                    distinguishing = True
            elif t is None:
                completion = apply(op, a, b)
            else:
                other = a if a is not None else b
                if op == "or":
                    if not other <= t:
                        consistent = False
                        break
                    completion = t - other
                elif op == "and":
                    if not t <= other:
                        consistent = False
                        break
                    completion = t
                else:
                    completion = t ^ other
        if consistent and distinguishing and completion is not None:
            desc = f"{op}@line{target}/{orient}"
            found.append((Cell(tuple(sorted(completion))) if completion else Cell((None,)), Interpretation("logic", (desc,))))
    return found


def solve(grid: Grid, family_hint: Optional[str] = None) -> SolveResult:
    """Enumerate all consistent interpretations and their completions.

    family_hint ("transformation" or "logic") restricts the search; without
    it both families are tried and the results merged. unique is true iff
    every interpretation predicts the same missing cell: exact digit order
    within each family, digit multiset across families.
    """
    answers: list[tuple[Cell, Interpretation]] = []
    if family_hint in (None, "transformation"):
        answers.extend(_transform_interpretations(grid))
    if family_hint in (None, "logic"):
        answers.extend(_logic_interpretations(grid))
    if not answers:
        raise NoConsistentRule("no rule in the grammar explains this grid")

    transform_answers = {a.digits for a, i in answers if i.family == "transformation"}
    logic_answers = {a.digit_set for a, i in answers if i.family == "logic"}
    unique = len(transform_answers) <= 1 and len(logic_answers) <= 1
    if unique and transform_answers and logic_answers:
        unique = Counter(next(iter(transform_answers))) == Counter(next(iter(logic_answers)))
    return SolveResult(answers=answers, unique=unique)


def is_ambiguous(grid: Grid) -> bool:
    """True iff the grid admits interpretations that disagree on the answer."""
    return not solve(grid).unique
