"""Four-term verbal analogy datasets and story-analogy materials.

Verbal items are presented in colon notation (A:B::C:D) and scored by the
average log probability a model assigns to the candidate final term (for
the SAT set, to the candidate C and D terms), with each solved problem
appended to the context for the next. Story items present one source and
two target stories and ask for a forced choice; only the forced-choice
verdict is parsed from the response.

The datasets themselves are user-supplied files (loaders validate shape
and expected counts); schemas are documented in the README.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

logger = logging.getLogger(__name__)

VERBAL_DATASETS = {
    "ucla_vat": {"count": 80, "relations": 4, "choices": 2},
    "sternberg": {"count": 200, "relations": 5, "choices": 2},
    "sat": {"count": 374, "relations": None, "choices": 5},
    "jones": {"count": 120, "relations": 3, "choices": 2},
}


class SchemaError(ValueError):
    def __init__(self, message: str, row: Optional[int] = None, fieldname: Optional[str] = None):
        where = "" if row is None else f" (item {row}" + (f", field {fieldname!r})" if fieldname else ")")
        super().__init__(message + where)
        self.row = row
        self.fieldname = fieldname


@dataclass(frozen=True)
class VerbalItem:
    dataset: str
    a: str
    b: str
    c: Optional[str]  # None for SAT items, which carry (C, D) pairs
    choices: tuple  # tuple[str] or tuple[tuple[str, str]] for SAT
    correct_index: int
    relation: str = ""
    distance: Optional[str] = None  # "near" | "far" where annotated

    @property
    def is_pairwise(self) -> bool:
        return self.c is None


@dataclass(frozen=True)
class StoryItem:
    group_id: str
    source: str
    correct_target: str
    incorrect_target: str
    condition: str  # "near" | "far"


class StoryChoice(str, Enum):
    STORY_A = "story_a"
    STORY_B = "story_b"
    BOTH = "both"
    UNPARSEABLE = "unparseable"


class StoryOrder(str, Enum):
    CORRECT_FIRST = "correct_first"
    INCORRECT_FIRST = "incorrect_first"


# ---------------------------------------------------------------------------
# loaders
# ---------------------------------------------------------------------------


def _require(d: dict, key: str, row: int) -> object:
    if key not in d:
        raise SchemaError("missing field", row=row, fieldname=key)
    return d[key]


def _item_from_dict(dataset: str, d: dict, row: int) -> VerbalItem:
    spec = VERBAL_DATASETS[dataset]
    a = str(_require(d, "A", row))
    b = str(_require(d, "B", row))
    correct = _require(d, "correct", row)
    if not isinstance(correct, int):
        raise SchemaError("correct index must be an integer", row=row, fieldname="correct")
    choices_raw = _require(d, "choices", row)
    if dataset == "sat":
        try:
            choices = tuple((str(ch["C"]), str(ch["D"])) for ch in choices_raw)
        except (TypeError, KeyError):
            raise SchemaError("SAT choices must be objects with C and D", row=row, fieldname="choices")
        c = None
    else:
        choices = tuple(str(ch) for ch in choices_raw)
        c = str(_require(d, "C", row))
    if len(choices) != spec["choices"]:
        raise SchemaError(
            f"expected {spec['choices']} choices, got {len(choices)}", row=row, fieldname="choices"
        )
    if not 0 <= correct < len(choices):
        raise SchemaError("correct index out of range", row=row, fieldname="correct")
    distance = d.get("distance")
    if distance is not None:
        distance = str(distance).lower()
        if distance not in ("near", "far"):
            raise SchemaError("distance must be 'near' or 'far'", row=row, fieldname="distance")
    return VerbalItem(
        dataset=dataset,
        a=a,
        b=b,
        c=c,
        choices=choices,
        correct_index=correct,
        relation=str(d.get("relation", "")),
        distance=distance,
    )


def _rows_from_csv(path: Path, dataset: str) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in csv.DictReader(fh):
            d: dict = {k: v for k, v in raw.items() if v not in (None, "")}
            if "correct" in d:
                try:
                    d["correct"] = int(d["correct"])
                except ValueError:
                    pass
            if dataset == "sat":
                pairs = []
                for i in range(1, 6):
                    if f"C{i}" in d and f"D{i}" in d:
                        pairs.append({"C": d.pop(f"C{i}"), "D": d.pop(f"D{i}")})
                d["choices"] = pairs
            else:
                choices = []
                for i in range(1, 8):
                    if f"choice{i}" in d:
                        choices.append(d.pop(f"choice{i}"))
                d["choices"] = choices
            rows.append(d)
    return rows


def load_verbal_dataset(path: Union[str, Path], dataset: str) -> list[VerbalItem]:
    """Load and validate a verbal analogy file (JSON or CSV).

    Raises SchemaError on malformed items; a count differing from the
    published dataset size is logged as a warning, not an error.
    """
    if dataset not in VERBAL_DATASETS:
        raise SchemaError(f"unknown dataset {dataset!r}; known: {', '.join(VERBAL_DATASETS)}")
    path = Path(path)
    if path.suffix.lower() == ".csv":
        raw_items = _rows_from_csv(path, dataset)
    else:
        payload = json.loads(path.read_text(encoding="utf-8"))
        if isinstance(payload, dict):
            declared = payload.get("dataset")
            if declared is not None and declared != dataset:
                raise SchemaError(f"file declares dataset {declared!r}, expected {dataset!r}")
            raw_items = payload.get("items")
        else:
            raw_items = payload
    if not isinstance(raw_items, list) or not raw_items:
        raise SchemaError("no items found")
    items = [_item_from_dict(dataset, d, row) for row, d in enumerate(raw_items)]

    expected = VERBAL_DATASETS[dataset]["count"]
    if len(items) != expected:
        logger.warning(
            "count mismatch for %s: file has %d items, published set has %d",
            dataset, len(items), expected,
        )
    return items


def load_story_items(path: Union[str, Path]) -> list[StoryItem]:
    """Load story materials: one near and one far target pair per source."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    groups = payload["groups"] if isinstance(payload, dict) else payload
    items: list[StoryItem] = []
    for row, g in enumerate(groups):
        group_id = str(_require(g, "id", row))
        source = str(_require(g, "source", row))
        for condition in ("near", "far"):
            block = _require(g, condition, row)
            items.append(
                StoryItem(
                    group_id=group_id,
                    source=source,
                    correct_target=str(_require(block, "correct", row)),
                    incorrect_target=str(_require(block, "incorrect", row)),
                    condition=condition,
                )
            )
    return items


# ---------------------------------------------------------------------------
# prompt rendering and scoring
# ---------------------------------------------------------------------------


def verbal_line(item: VerbalItem, choice_index: int) -> str:
    if item.is_pairwise:
        c, d = item.choices[choice_index]
    else:
        c, d = item.c, item.choices[choice_index]
    return f"{item.a}:{item.b}::{c}:{d}"


def render_verbal_prompt(context: str, item: VerbalItem, choice_index: int) -> str:
    line = verbal_line(item, choice_index)
    return f"{context}\n{line}" if context else line


def _scored_spans(context: str, item: VerbalItem, choice_index: int) -> list[tuple[int, int]]:
    """Character spans of the scored terms within the rendered prompt."""
    prefix_len = len(context) + 1 if context else 0
    head = f"{item.a}:{item.b}::"
    if item.is_pairwise:
        c, d = item.choices[choice_index]
        c_start = prefix_len + len(head)
        d_start = c_start + len(c) + 1
        return [(c_start, c_start + len(c)), (d_start, d_start + len(d))]
    d = item.choices[choice_index]
    d_start = prefix_len + len(head) + len(item.c) + 1
    return [(d_start, d_start + len(d))]


def score_verbal_item(model, context: str, item: VerbalItem) -> tuple[int, str, list[float]]:
    """Pick the choice whose scored terms get the highest mean log
    probability; returns (selected index, new context, per-choice scores).

    Ties break toward the lowest index and are logged. The rendered problem
    with the selected choice is appended to the context.
    """
    scores: list[float] = []
    for idx in range(len(item.choices)):
        prompt = render_verbal_prompt(context, item, idx)
        spans = _scored_spans(context, item, idx)
        completion = model.complete(prompt, max_tokens=0, temperature=0.0)
        token_scores = [
            tok.logprob
            for tok in completion.prompt_tokens
            if any(start <= tok.offset < end for start, end in spans)
        ]
        if not token_scores:
            raise RuntimeError(f"no scored tokens for choice {idx} of {verbal_line(item, idx)!r}")
        scores.append(sum(token_scores) / len(token_scores))
    best = max(scores)
    selected = scores.index(best)
    if scores.count(best) > 1:
        logger.info("tie among choices for %s; selecting lowest index", verbal_line(item, 0))
    return selected, render_verbal_prompt(context, item, selected), scores


STORY_TEMPLATE = (
    "Consider the following story:\n"
    "\n"
    "Story 1: {source}\n"
    "\n"
    "Now consider two more stories:\n"
    "\n"
    "Story A: {story_a}\n"
    "\n"
    "Story B: {story_b}\n"
    "\n"
    "Which of Story A and Story B is a better analogy to Story 1?\n"
    "Is the best answer Story A, Story B, or both are equally analogous?"
)


def render_story_prompt(item: StoryItem, order: StoryOrder) -> str:
    if order is StoryOrder.CORRECT_FIRST:
        a, b = item.correct_target, item.incorrect_target
    else:
        a, b = item.incorrect_target, item.correct_target
    return STORY_TEMPLATE.format(source=item.source, story_a=a, story_b=b)


_EQUAL_MARKERS = ("equally analogous", "equally good", "equally similar", "both are equal")


def parse_story_choice(response: str) -> StoryChoice:
    """Extract the forced-choice verdict from a free-form response.

    Scans sentences in order for the first one naming Story A, Story B, or
    the both-equally option; explanations after the verdict are ignored.
    Returns UNPARSEABLE rather than raising.
    """
    text = response.strip().lower()
    if not text:
        return StoryChoice.UNPARSEABLE
    for sentence in text.replace("\n", " ").split("."):
        has_a = "story a" in sentence
        has_b = "story b" in sentence
        equal = any(m in sentence for m in _EQUAL_MARKERS)
        if equal and ("both" in sentence or has_a == has_b):
            return StoryChoice.BOTH
        if has_a and not has_b:
            return StoryChoice.STORY_A
        if has_b and not has_a:
            return StoryChoice.STORY_B
        if has_a and has_b:
            # verdict sentence naming both: take the named best/better one
            for marker in ("best answer is story", "better analogy is story"):
                pos = sentence.find(marker)
                if pos >= 0:
                    label = sentence[pos + len(marker) :].strip()[:1]
                    if label == "a":
                        return StoryChoice.STORY_A
                    if label == "b":
                        return StoryChoice.STORY_B
            first_a = sentence.find("story a")
            first_b = sentence.find("story b")
            return StoryChoice.STORY_A if first_a < first_b else StoryChoice.STORY_B
    return StoryChoice.UNPARSEABLE


def story_comparisons(items: Sequence[StoryItem]) -> list[tuple[StoryItem, StoryOrder]]:
    """The full counterbalanced design: every item in both target orders."""
    out = []
    for item in items:
        for order in (StoryOrder.CORRECT_FIRST, StoryOrder.INCORRECT_FIRST):
            out.append((item, order))
    return out
