"""Rule definitions for digit matrices and answer derivation from rules.

Transformation rules (constant, distribution-of-3, progression) each govern
one slot position across all cells. A rule's orientation names the lines it
reads: ROW means every row is one line (the pattern runs left-to-right
within each row), COL means every column is one line (top-to-bottom).

Logic rules (OR, AND, XOR) relate whole cells: one target line holds the
set-operation of the other two lines, matched up cross-index by cross-index
(per column when lines are rows, per row when lines are columns).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ..core import Cell, Grid


class Orientation(str, Enum):
    ROW = "row"
    COL = "col"


class TransformKind(str, Enum):
    CONSTANT = "constant"
    DIST3 = "dist3"
    PROGRESSION = "progression"


class LogicOp(str, Enum):
    OR = "or"
    AND = "and"
    XOR = "xor"


class InconsistentRules(ValueError):
    """Visible cells violate a supplied rule."""


@dataclass(frozen=True)
class TransformRule:
    """One transformation rule bound to a slot position.

    delta is set for progression only; value_set holds the three digits of a
    distribution-of-3 rule. Constant line values are read from the grid.
    """

    kind: TransformKind
    orientation: Orientation
    slot: int
    delta: Optional[int] = None
    value_set: Optional[frozenset[int]] = None

    def describe(self) -> str:
        if self.kind is TransformKind.PROGRESSION:
            return f"progression{self.delta:+d}/{self.orientation.value}@{self.slot}"
        if self.kind is TransformKind.DIST3:
            digits = "".join(str(d) for d in sorted(self.value_set or ()))
            return f"dist3{{{digits}}}/{self.orientation.value}@{self.slot}"
        return f"constant/{self.orientation.value}@{self.slot}"


@dataclass(frozen=True)
class LogicRule:
    """One set-relation rule over whole cells.

    target_line is the row/column index holding the derived set; aligned
    problems keep every digit at a consistent slot within its line, permuted
    problems scatter digits across slot positions cell by cell.
    """

    op: LogicOp
    orientation: Orientation
    target_line: int
    aligned: bool

    def describe(self) -> str:
        mode = "aligned" if self.aligned else "permuted"
        return f"{self.op.value}@line{self.target_line}/{self.orientation.value}/{mode}"


def line_positions(orientation: Orientation, line: int) -> list[tuple[int, int]]:
    """Grid positions of one line, ordered by cross-index."""
    if orientation is Orientation.ROW:
        return [(line, c) for c in range(3)]
    return [(r, line) for r in range(3)]


def _slot_digit(cell: Cell, slot: int) -> int:
    value = cell.slots[slot]
    if value is None:
        raise InconsistentRules(f"blank at slot {slot} in transformation cell")
    return value


def _line_slot_digits(grid: Grid, orientation: Orientation, line: int, slot: int) -> list[Optional[int]]:
    """Digits of one slot along a line; None marks the missing cell."""
    out: list[Optional[int]] = []
    for r, c in line_positions(orientation, line):
        cell = grid.cells[r][c]
        out.append(None if cell is None else _slot_digit(cell, slot))
    return out


def _complete_transform_slot(grid: Grid, rule: TransformRule) -> int:
    """Check one transformation rule on all visible cells and fill the gap."""
    kind, orient, slot = rule.kind, rule.orientation, rule.slot
    lines = [_line_slot_digits(grid, orient, i, slot) for i in range(3)]

    if kind is TransformKind.CONSTANT:
        completion = None
        for digits in lines:
            present = [d for d in digits if d is not None]
            if len(set(present)) != 1:
                raise InconsistentRules(f"constant rule broken on {rule.describe()}")
            if None in digits:
                completion = present[0]
        return completion  # type: ignore[return-value]

    if kind is TransformKind.DIST3:
        value_set = set(rule.value_set or ())
        if len(value_set) != 3:
            raise InconsistentRules("dist3 rule requires exactly 3 distinct digits")
        completion = None
        for digits in lines:
            present = [d for d in digits if d is not None]
            if None in digits:
                if len(set(present)) != 2 or not set(present) <= value_set:
                    raise InconsistentRules(f"dist3 rule broken on {rule.describe()}")
                completion = (value_set - set(present)).pop()
            elif set(digits) != value_set:
                raise InconsistentRules(f"dist3 rule broken on {rule.describe()}")
        return completion  # type: ignore[return-value]

    if kind is TransformKind.PROGRESSION:
        delta = rule.delta
        if delta not in (-2, -1, 1, 2):
            raise InconsistentRules(f"bad progression delta {delta!r}")
        completion = None
        for digits in lines:
            for a, b in zip(digits, digits[1:]):
                if a is not None and b is not None and b - a != delta:
                    raise InconsistentRules(f"progression rule broken on {rule.describe()}")
            if digits[2] is None:
                completion = digits[1] + delta  # type: ignore[operator]
                if not 0 <= completion <= 9:
                    raise InconsistentRules("progression runs out of digit range")
        return completion  # type: ignore[return-value]

    raise InconsistentRules(f"unknown transformation kind {kind!r}")


def _logic_apply(op: LogicOp, a: frozenset[int], b: frozenset[int]) -> frozenset[int]:
    if op is LogicOp.OR:
        return a | b
    if op is LogicOp.AND:
        return a & b
    return a ^ b


def _complete_logic(grid: Grid, rule: LogicRule) -> frozenset[int]:
    """Check a logic rule against visible cells and complete the gap.

    When the missing cell sits on a source line, the completion is the
    minimal set forced by the relation (no optional repeats of target
    elements already covered by the other source).
    """
    orient, target = rule.orientation, rule.target_line
    sources = [i for i in range(3) if i != target]

    def cell_set(line: int, cross: int) -> Optional[frozenset[int]]:
        r, c = line_positions(orient, line)[cross]
        cell = grid.cells[r][c]
        return None if cell is None else cell.digit_set

    completion: Optional[frozenset[int]] = None
    for cross in range(3):
        t = cell_set(target, cross)
        a = cell_set(sources[0], cross)
        b = cell_set(sources[1], cross)
        present = [s for s in (t, a, b) if s is not None]
        if len(present) == 3:
            if t != _logic_apply(rule.op, a, b):
                raise InconsistentRules(f"logic rule broken on {rule.describe()}")
            continue
        if t is None:
            completion = _logic_apply(rule.op, a, b)
        else:
            other = a if a is not None else b
            if rule.op is LogicOp.OR:
                if not other <= t:
                    raise InconsistentRules("OR rule broken: source exceeds target union")
                completion = t - other
            elif rule.op is LogicOp.AND:
                if not t <= other:
                    raise InconsistentRules("AND rule broken: target exceeds source")
                completion = t
            else:
                completion = t ^ other
    if completion is None:
        raise InconsistentRules("grid has no missing cell on this rule's lines")
    return completion


def derive_answer(grid: Grid, rules) -> Cell:
    """Fill the missing cell from the given rules.

    Transformation problems take a list of TransformRule (one per slot) and
    produce an ordered digit tuple; logic problems take a single LogicRule
    and produce the completed digit set (rendered in ascending order).
    Raises InconsistentRules if the visible cells violate any rule.
    """
    if isinstance(rules, LogicRule):
        completion = _complete_logic(grid, rules)
        return Cell(tuple(sorted(completion)))

    rule_list = list(rules)
    if len(rule_list) == 1 and isinstance(rule_list[0], LogicRule):
        return derive_answer(grid, rule_list[0])

    width = grid.slot_uniform_width()
    if width is None or width != len(rule_list):
        raise InconsistentRules("cell width does not match rule count")
    by_slot = {rule.slot: rule for rule in rule_list}
    if sorted(by_slot) != list(range(width)):
        raise InconsistentRules("rules must cover each slot exactly once")
    return Cell(tuple(_complete_transform_slot(grid, by_slot[s]) for s in range(width)))
