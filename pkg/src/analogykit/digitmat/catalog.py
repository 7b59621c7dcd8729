"""Subtype taxonomy for digit matrices.

6 one-rule subtypes (constant row/col, distribution-of-3 row/col,
progression with step magnitude 1 or 2), all 6 two-rule and all 10
three-rule kind combinations, 10 four-rule and 10 five-rule combinations
sampled once from the full combination space with a fixed catalog seed,
and 10 logic subtypes (3 OR target positions + AND + XOR, each in a
spatially aligned and a spatially permuted variant).

Bundle "exp1" is the 32-subtype design (one- to three-rule + logic);
bundle "exp2" is the 42-subtype easy-to-hard design (one- to five-rule).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Optional

from .rules import LogicOp, Orientation, TransformKind

# Fixed seed for the one-time sampling of four- and five-rule subtypes.
CATALOG_SAMPLING_SEED = 271828

_KIND_INITIAL = {
    TransformKind.CONSTANT: "c",
    TransformKind.DIST3: "d",
    TransformKind.PROGRESSION: "p",
}
_COUNT_WORD = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five"}


@dataclass(frozen=True)
class Subtype:
    """One problem subtype: fixed structure, per-instance parameters sampled."""

    name: str
    family: str  # "transformation" | "logic"
    kinds: tuple[TransformKind, ...] = ()
    orientation: Optional[Orientation] = None  # pinned for one-rule constant/dist3
    magnitude: Optional[int] = None  # pinned |delta| for one-rule progressions
    op: Optional[LogicOp] = None
    target_line: Optional[int] = None  # pinned for OR subtypes
    aligned: Optional[bool] = None

    @property
    def rule_count(self) -> int:
        return 1 if self.family == "logic" else len(self.kinds)

    @property
    def problem_type(self) -> str:
        """Coarse grouping used in result summaries."""
        if self.family == "logic":
            return "logic"
        return f"{_COUNT_WORD[len(self.kinds)]}_rule"


def _transform_subtype(kinds: tuple[TransformKind, ...]) -> Subtype:
    initials = "".join(_KIND_INITIAL[k] for k in kinds)
    return Subtype(
        name=f"{_COUNT_WORD[len(kinds)]}_{initials}",
        family="transformation",
        kinds=kinds,
    )


def _multisets(size: int) -> list[tuple[TransformKind, ...]]:
    order = (TransformKind.CONSTANT, TransformKind.DIST3, TransformKind.PROGRESSION)
    return list(combinations_with_replacement(order, size))


def _build_catalog() -> dict[str, Subtype]:
    subtypes: list[Subtype] = [
        Subtype("one_constant_row", "transformation", (TransformKind.CONSTANT,), orientation=Orientation.ROW),
        Subtype("one_constant_col", "transformation", (TransformKind.CONSTANT,), orientation=Orientation.COL),
        Subtype("one_dist3_row", "transformation", (TransformKind.DIST3,), orientation=Orientation.ROW),
        Subtype("one_dist3_col", "transformation", (TransformKind.DIST3,), orientation=Orientation.COL),
        Subtype("one_progression1", "transformation", (TransformKind.PROGRESSION,), magnitude=1),
        Subtype("one_progression2", "transformation", (TransformKind.PROGRESSION,), magnitude=2),
    ]
    subtypes.extend(_transform_subtype(k) for k in _multisets(2))
    subtypes.extend(_transform_subtype(k) for k in _multisets(3))

    rng = random.Random(CATALOG_SAMPLING_SEED)
    for size in (4, 5):
        combos = _multisets(size)
        picked = sorted(rng.sample(range(len(combos)), 10))
        subtypes.extend(_transform_subtype(combos[i]) for i in picked)

    for aligned in (True, False):
        mode = "aligned" if aligned else "permuted"
        for target in range(3):
            subtypes.append(
                Subtype(f"logic_or{target}_{mode}", "logic", op=LogicOp.OR, target_line=target, aligned=aligned)
            )
        subtypes.append(Subtype(f"logic_and_{mode}", "logic", op=LogicOp.AND, aligned=aligned))
        subtypes.append(Subtype(f"logic_xor_{mode}", "logic", op=LogicOp.XOR, aligned=aligned))

    return {s.name: s for s in subtypes}


CATALOG: dict[str, Subtype] = _build_catalog()


def get_subtype(name: str) -> Subtype:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown subtype {name!r}; known: {', '.join(sorted(CATALOG))}") from None


def _of_rule_count(n: int) -> list[str]:
    return [s.name for s in CATALOG.values() if s.family == "transformation" and len(s.kinds) == n]


def logic_subtypes() -> list[str]:
    return [s.name for s in CATALOG.values() if s.family == "logic"]


def bundle(name: str) -> list[str]:
    """Named subtype bundles mirroring the two experiment designs."""
    if name == "exp1":
        return _of_rule_count(1) + _of_rule_count(2) + _of_rule_count(3) + logic_subtypes()
    if name == "exp2":
        # easy-to-hard: one-rule (constants, dist3s, progressions) then 2..5-rule
        return (
            _of_rule_count(1)
            + _of_rule_count(2)
            + _of_rule_count(3)
            + _of_rule_count(4)
            + _of_rule_count(5)
        )
    raise KeyError(f"unknown bundle {name!r}; known: exp1, exp2")


def resolve_subtypes(spec: str) -> list[str]:
    """Expand a CLI subtype spec: a bundle name or comma-separated names."""
    if spec in ("exp1", "exp2"):
        return bundle(spec)
    names = [s.strip() for s in spec.split(",") if s.strip()]
    for n in names:
        get_subtype(n)
    return names
