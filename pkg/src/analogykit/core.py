"""Shared domain types for matrix problems: cells, grids, answer equivalence.

A digit-matrix problem is a 3x3 grid of bracketed cells, with the
bottom-right cell hidden. Each cell holds an ordered list of slots; a slot
is either a digit 0-9 or a blank (rendered "~"). Transformation problems
never contain blanks; logic problems use blanks as spatial padding.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

BLANK = None  # blank slot sentinel
MISSING_POS = (2, 2)  # the hidden cell, fixed at bottom-right


class AnswerKind(str, Enum):
    ORDERED_DIGITS = "ordered_digits"  # transformation problems: order matters
    DIGIT_SET = "digit_set"  # logic problems: order-insensitive


class Family(str, Enum):
    DIGIT_MATRIX = "digitmat"
    LETTER_STRING = "letterstring"
    VERBAL = "verbal"
    STORY = "story"


class UnparseableAnswer(ValueError):
    """Raised when a generated completion contains no parseable digits."""


@dataclass(frozen=True)
class Cell:
    """One bracketed cell: an ordered tuple of slots (digit or blank)."""

    slots: tuple[Optional[int], ...]

    def __post_init__(self) -> None:
        if not self.slots:
            raise ValueError("cell must contain at least one slot")
        for s in self.slots:
            if s is not None and not (0 <= s <= 9):
                raise ValueError(f"slot out of digit range: {s!r}")

    @property
    def digits(self) -> tuple[int, ...]:
        """Non-blank slots, in slot order."""
        return tuple(s for s in self.slots if s is not None)

    @property
    def digit_set(self) -> frozenset[int]:
        return frozenset(self.digits)

    def render(self) -> str:
        return "[" + " ".join("~" if s is None else str(s) for s in self.slots) + "]"

    @staticmethod
    def of(*digits: int) -> "Cell":
        return Cell(tuple(digits))

    @staticmethod
    def from_strings(tokens: Sequence[str]) -> "Cell":
        slots: list[Optional[int]] = []
        for t in tokens:
            if t == "~":
                slots.append(None)
            elif len(t) == 1 and t.isdigit():
                slots.append(int(t))
            else:
                raise ValueError(f"bad slot token: {t!r}")
        return Cell(tuple(slots))

    def to_strings(self) -> list[str]:
        return ["~" if s is None else str(s) for s in self.slots]


@dataclass(frozen=True)
class Grid:
    """3x3 matrix of cells with the bottom-right cell missing (None)."""

    cells: tuple[tuple[Optional[Cell], ...], ...]

    def __post_init__(self) -> None:
        if len(self.cells) != 3 or any(len(row) != 3 for row in self.cells):
            raise ValueError("grid must be 3x3")
        for r in range(3):
            for c in range(3):
                cell = self.cells[r][c]
                if (r, c) == MISSING_POS:
                    if cell is not None:
                        raise ValueError("bottom-right cell must be missing")
                elif cell is None:
                    raise ValueError(f"cell ({r},{c}) must be visible")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[Optional[Cell]]]) -> "Grid":
        return Grid(tuple(tuple(row) for row in rows))

    def cell(self, r: int, c: int) -> Optional[Cell]:
        return self.cells[r][c]

    def visible_cells(self) -> list[tuple[int, int, Cell]]:
        out = []
        for r in range(3):
            for c in range(3):
                if (r, c) != MISSING_POS:
                    out.append((r, c, self.cells[r][c]))
        return out

    def has_blanks(self) -> bool:
        return any(s is None for _, _, cell in self.visible_cells() for s in cell.slots)

    def slot_uniform_width(self) -> Optional[int]:
        """Common slot count of all visible cells, or None if they differ."""
        widths = {len(cell.slots) for _, _, cell in self.visible_cells()}
        return widths.pop() if len(widths) == 1 else None


@dataclass(frozen=True)
class ProblemId:
    """Stable identity: regenerating from the same tuple is byte-identical."""

    family: Family
    subtype: str
    instance: int
    seed: int

    def __str__(self) -> str:
        return f"{self.family.value}:{self.subtype}:{self.instance}:{self.seed}"

    @staticmethod
    def parse(text: str) -> "ProblemId":
        family, subtype, instance, seed = text.rsplit(":", 3)
        return ProblemId(Family(family), subtype, int(instance), int(seed))


def render_matrix_prompt(grid: Grid) -> str:
    """Render a grid exactly as presented to a completion model.

    Rows joined by newlines, cells rendered "[d d ...]" with single spaces,
    and the missing cell rendered as a lone open bracket.
    """
    lines = []
    for r in range(3):
        parts = []
        for c in range(3):
            cell = grid.cells[r][c]
            parts.append("[" if cell is None else cell.render())
        lines.append(" ".join(parts))
    return "\n".join(lines)


def render_matrix_display(grid: Grid) -> list[list[str]]:
    """3x3 array of cell strings for human display; missing cell is "[ ? ]"."""
    out = []
    for r in range(3):
        row = []
        for c in range(3):
            cell = grid.cells[r][c]
            row.append("[ ? ]" if cell is None else cell.render())
        out.append(row)
    return out


def parse_generated_answer(text: str, kind: AnswerKind) -> Cell:
    """Parse a model completion that follows an open bracket.

    The completion is truncated at the first closing bracket; the remaining
    text is split on whitespace into digit tokens. "~" placeholders are
    ignored. Raises UnparseableAnswer if no digit appears before the
    truncation point or a token is not a digit/"~".
    """
    head = text.split("]", 1)[0]
    digits: list[int] = []
    for token in head.split():
        if token == "~":
            continue
        if len(token) == 1 and token.isdigit():
            digits.append(int(token))
        else:
            raise UnparseableAnswer(f"non-digit token {token!r} in completion {text!r}")
    if not digits:
        raise UnparseableAnswer(f"no digits before closing bracket in {text!r}")
    return Cell(tuple(digits))


def answers_equivalent(kind: AnswerKind, expected: Cell, given: Cell) -> bool:
    """Compare two parsed answers under the family's equivalence rule.

    Ordered (transformation): exact digit sequence match, blanks ignored.
    Set (logic): multiset of digits, order-insensitive, blanks ignored.
    """
    if kind is AnswerKind.ORDERED_DIGITS:
        return expected.digits == given.digits
    return sorted(expected.digits) == sorted(given.digits)


# ---------------------------------------------------------------------------
# Canonical problem-set JSON schema
#
# {"schema": "analogykit/problemset-v1",
#  "family": "digitmat",
#  "metadata": {...},
#  "problems": [{"id": str, "family": str, "subtype": str,
#                "grid": 3x3 array of (array of slot strings | null),
#                "answer": array of slot strings,
#                "choices": 8 arrays of slot strings,
#                "kind": "ordered_digits" | "digit_set",
#                "metadata": {...}}, ...]}
# ---------------------------------------------------------------------------

PROBLEMSET_SCHEMA = "analogykit/problemset-v1"


@dataclass(frozen=True)
class MatrixProblem:
    """A complete digit-matrix item: grid, derived answer, 8 choices."""

    id: ProblemId
    grid: Grid
    answer: Cell
    choices: tuple[Cell, ...]
    kind: AnswerKind
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def subtype(self) -> str:
        return self.id.subtype

    def correct_choice_index(self) -> int:
        for i, ch in enumerate(self.choices):
            if answers_equivalent(self.kind, self.answer, ch):
                return i
        raise ValueError("correct answer missing from choices")

    def to_json_dict(self) -> dict:
        grid_json: list[list[Optional[list[str]]]] = []
        for r in range(3):
            row: list[Optional[list[str]]] = []
            for c in range(3):
                cell = self.grid.cells[r][c]
                row.append(None if cell is None else cell.to_strings())
            grid_json.append(row)
        return {
            "id": str(self.id),
            "family": self.id.family.value,
            "subtype": self.id.subtype,
            "grid": grid_json,
            "answer": self.answer.to_strings(),
            "choices": [ch.to_strings() for ch in self.choices],
            "kind": self.kind.value,
            "metadata": self.metadata,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "MatrixProblem":
        rows: list[list[Optional[Cell]]] = []
        for r in range(3):
            row: list[Optional[Cell]] = []
            for c in range(3):
                cj = d["grid"][r][c]
                row.append(None if cj is None else Cell.from_strings(cj))
            rows.append(row)
        return MatrixProblem(
            id=ProblemId.parse(d["id"]),
            grid=Grid.from_rows(rows),
            answer=Cell.from_strings(d["answer"]),
            choices=tuple(Cell.from_strings(ch) for ch in d["choices"]),
            kind=AnswerKind(d["kind"]),
            metadata=d.get("metadata", {}),
        )


@dataclass
class ProblemSet:
    """Serializable container for a generated problem family."""

    family: Family
    problems: list
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "schema": PROBLEMSET_SCHEMA,
            "family": self.family.value,
            "metadata": self.metadata,
            "problems": [p.to_json_dict() for p in self.problems],
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @staticmethod
    def from_json(text: str) -> "ProblemSet":
        payload = json.loads(text)
        if payload.get("schema") != PROBLEMSET_SCHEMA:
            raise ValueError(f"unknown problem-set schema: {payload.get('schema')!r}")
        family = Family(payload["family"])
        if family is Family.DIGIT_MATRIX:
            problems = [MatrixProblem.from_json_dict(d) for d in payload["problems"]]
        elif family is Family.LETTER_STRING:
            from .letterstring import LetterStringProblem

            problems = [LetterStringProblem.from_json_dict(d) for d in payload["problems"]]
        else:
            raise ValueError(f"no problem codec for family {family}")
        return ProblemSet(family=family, problems=problems, metadata=payload["metadata"])


def stable_seed(*parts) -> int:
    """Derive a 63-bit seed from arbitrary parts, stable across runs."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
