"""Letter-string analogy problems: generation, derivation, verification.

A problem shows a source pair (left string rewritten to right string by one
of six transformations) and a target stem; the answer applies the same
transformation to the stem. Targets may differ from the source along up to
three generalizations: letters-to-numbers, grouping into letter pairs, a
target twice the source length, reversed order, interleaved "x"
distractors, or an alphabetic interval of 2. A separate real-world variant
swaps the alphabet for one of five fixed concept sequences.

Sources always use plain letters at interval 1 with ungrouped tokens; only
the target carries generalizations. When several generalizations combine,
they compose in a fixed canonical order: alphabet interval, then target
length, then grouping, then interleaving, then reversal, then
letter-to-number.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from string import ascii_lowercase as ALPHABET
from typing import Optional, Sequence

from .core import Family, ProblemId, ProblemSet, stable_seed

TRANSFORMATIONS = (
    "extend",
    "successor",
    "predecessor",
    "remove_redundant",
    "fix_alphabetic",
    "sort",
)
GENERALIZATIONS = (
    "letter_to_number",
    "grouping",
    "longer_target",
    "reversed_order",
    "interleaved",
    "larger_interval",
)
REAL_WORLD_TRANSFORMATIONS = ("extend", "successor", "predecessor", "sort")

REAL_WORLD_SEQUENCES = {
    "temperature": ("cold", "cool", "warm", "hot"),
    "affection": ("love", "like", "dislike", "hate"),
    "cards": ("jack", "queen", "king", "ace"),
    "coins": ("penny", "nickel", "dime", "quarter"),
    "time": ("second", "minute", "hour", "day"),
}

INTERLEAVE_TOKEN = "x"

# base letter count of the transformation's sequences (remove_redundant
# stems carry one extra duplicated token on top of this)
_BASE_LETTERS = {
    "extend": 4,
    "successor": 4,
    "predecessor": 4,
    "remove_redundant": 5,
    "fix_alphabetic": 5,
    "sort": 5,
}


class PreconditionViolated(ValueError):
    """Sequence does not instantiate the transformation's structure."""


class InfeasibleAlphabetRange(ValueError):
    """A derived sequence would run off the alphabet."""


class DerivationConflict(ValueError):
    """Two readings of the problem disagree on the answer."""


Tokens = tuple[str, ...]


@dataclass(frozen=True)
class LetterStringProblem:
    id: ProblemId
    source_left: Tokens
    source_right: Tokens
    target_stem: Tokens
    answer: Tokens
    transformation: str
    generalizations: Tokens
    domain: str  # "letters" or a real-world sequence name
    metadata: dict = field(default_factory=dict, compare=False)

    def to_json_dict(self) -> dict:
        return {
            "id": str(self.id),
            "family": self.id.family.value,
            "subtype": self.id.subtype,
            "sourceLeft": list(self.source_left),
            "sourceRight": list(self.source_right),
            "targetStem": list(self.target_stem),
            "answer": list(self.answer),
            "transformation": self.transformation,
            "generalizations": list(self.generalizations),
            "domain": self.domain,
            "metadata": self.metadata,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "LetterStringProblem":
        return LetterStringProblem(
            id=ProblemId.parse(d["id"]),
            source_left=tuple(d["sourceLeft"]),
            source_right=tuple(d["sourceRight"]),
            target_stem=tuple(d["targetStem"]),
            answer=tuple(d["answer"]),
            transformation=d["transformation"],
            generalizations=tuple(d["generalizations"]),
            domain=d["domain"],
            metadata=d.get("metadata", {}),
        )


# ---------------------------------------------------------------------------
# sequence building blocks
# ---------------------------------------------------------------------------


def _letter(index: int) -> str:
    if not 0 <= index < 26:
        raise InfeasibleAlphabetRange(f"letter index {index} outside a-z")
    return ALPHABET[index]


def _index(token: str) -> int:
    if len(token) != 1 or token not in ALPHABET:
        raise PreconditionViolated(f"not a letter token: {token!r}")
    return ALPHABET.index(token)


def _run(start: int, n: int, interval: int) -> list[int]:
    indices = [start + i * interval for i in range(n)]
    if indices[-1] > 25 or indices[0] < 0:
        raise InfeasibleAlphabetRange(f"run {indices} outside a-z")
    return indices


def _detect_run(seq: Sequence[str]) -> tuple[int, int]:
    """(start, interval) of a strictly ascending uniform run, or raise."""
    idx = [_index(t) for t in seq]
    if len(idx) < 2:
        raise PreconditionViolated("sequence too short")
    interval = idx[1] - idx[0]
    if interval <= 0 or any(b - a != interval for a, b in zip(idx, idx[1:])):
        raise PreconditionViolated(f"not an ascending uniform run: {list(seq)}")
    return idx[0], interval


def apply_transformation(seq: Sequence[str], kind: str, interval: Optional[int] = None) -> Tokens:
    """Apply one transformation to a letter sequence, structurally.

    The sequence must instantiate the transformation's precondition (e.g.
    remove_redundant needs exactly one doubled letter); parameters such as
    the anomaly position are detected from the sequence itself. interval
    overrides the detected alphabet step for the successor-style kinds.
    """
    seq = tuple(seq)
    if kind == "extend":
        start, step = _detect_run(seq)
        step = interval or step
        return seq + (_letter(_index(seq[-1]) + step),)
    if kind == "successor":
        start, step = _detect_run(seq)
        step = interval or step
        return seq[:-1] + (_letter(_index(seq[-1]) + step),)
    if kind == "predecessor":
        start, step = _detect_run(seq)
        step = interval or step
        return (_letter(_index(seq[0]) - step),) + seq[1:]
    if kind == "remove_redundant":
        pairs = [i for i in range(len(seq) - 1) if seq[i] == seq[i + 1]]
        if len(pairs) != 1:
            raise PreconditionViolated(f"need exactly one doubled letter: {list(seq)}")
        cleaned = seq[: pairs[0]] + seq[pairs[0] + 1 :]
        _detect_run(cleaned)
        return cleaned
    if kind == "fix_alphabetic":
        fixes = []
        idx = [_index(t) for t in seq]
        for i in range(len(seq)):
            others = [(j, idx[j]) for j in range(len(seq)) if j != i]
            (j0, v0), (j1, v1) = others[0], others[1]
            if (v1 - v0) % (j1 - j0) != 0:
                continue
            step = (v1 - v0) // (j1 - j0)
            if step <= 0:
                continue
            start = v0 - j0 * step
            if all(v == start + j * step for j, v in others) and idx[i] != start + i * step:
                expected = start + i * step
                if 0 <= expected <= 25:
                    fixes.append(seq[:i] + (_letter(expected),) + seq[i + 1 :])
        distinct = set(fixes)
        if not distinct:
            raise PreconditionViolated(f"no out-of-place letter found: {list(seq)}")
        if len(distinct) > 1:
            raise DerivationConflict(f"multiple fixes possible: {list(seq)}")
        return fixes[0]
    if kind == "sort":
        ordered = tuple(sorted(seq, key=_index))
        if ordered == seq:
            raise PreconditionViolated(f"already sorted: {list(seq)}")
        _detect_run(ordered)
        return ordered
    raise ValueError(f"unknown transformation kind {kind!r}")


def _instantiate(kind: str, rng: random.Random, interval: int = 1, letters: Optional[int] = None):
    """Sample one (left, right) instantiation of a transformation."""
    n = letters or _BASE_LETTERS[kind]
    span = (n - 1) * interval
    if kind in ("extend", "successor"):
        span += interval  # the rewritten side reaches one step further
        lo = 0
    elif kind == "predecessor":
        lo = interval
    else:
        lo = 0
    hi = 25 - span
    if hi < lo:
        raise InfeasibleAlphabetRange(f"{kind} with {n} letters at interval {interval}")
    start = rng.randint(lo, hi)
    base = tuple(_letter(i) for i in _run(start, n, interval))

    if kind == "extend":
        return base, base + (_letter(start + n * interval),)
    if kind == "successor":
        return base, base[:-1] + (_letter(_index(base[-1]) + interval),)
    if kind == "predecessor":
        return base, (_letter(start - interval),) + base[1:]
    if kind == "remove_redundant":
        i = rng.randrange(n)
        return base[: i + 1] + (base[i],) + base[i + 1 :], base
    if kind == "fix_alphabetic":
        i = rng.randrange(n)
        wrong = rng.choice([c for c in ALPHABET if c not in base])
        return base[:i] + (wrong,) + base[i + 1 :], base
    if kind == "sort":
        i, j = sorted(rng.sample(range(n), 2))
        swapped = list(base)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        return tuple(swapped), base
    raise ValueError(f"unknown transformation kind {kind!r}")


# ---------------------------------------------------------------------------
# representation mappings (applied to the target side only)
# ---------------------------------------------------------------------------


def _represent(seq: Sequence[str], generalizations: Sequence[str]) -> Tokens:
    """Rewrite a plain letter sequence into its generalized representation."""
    gens = set(generalizations)
    out = list(seq)
    if "grouping" in gens:
        out = [t for t in out for _ in range(2)]
    if "interleaved" in gens:
        out = [t for token in out for t in (token, INTERLEAVE_TOKEN)]
    if "reversed_order" in gens:
        out = out[::-1]
    if "letter_to_number" in gens:
        out = [str(_index(t) + 1) for t in out]
    return tuple(out)


def _invert_representation(seq: Sequence[str], generalizations: Sequence[str]) -> Tokens:
    """Undo _represent, validating the representation's structure."""
    gens = set(generalizations)
    out = list(seq)
    if "letter_to_number" in gens:
        mapped = []
        for t in out:
            if not t.isdigit() or not 1 <= int(t) <= 26:
                raise PreconditionViolated(f"not an alphabetic index: {t!r}")
            mapped.append(ALPHABET[int(t) - 1])
        out = mapped
    if "reversed_order" in gens:
        out = out[::-1]
    if "interleaved" in gens:
        if len(out) % 2 or any(t != INTERLEAVE_TOKEN for t in out[1::2]):
            raise PreconditionViolated(f"broken interleave pattern: {list(seq)}")
        out = out[0::2]
    if "grouping" in gens:
        if len(out) % 2 or any(out[i] != out[i + 1] for i in range(0, len(out), 2)):
            raise PreconditionViolated(f"broken letter groups: {list(seq)}")
        out = out[0::2]
    return tuple(out)


def generate_target(
    source_stem: Sequence[str],
    generalizations: Sequence[str],
    seed: int,
    transformation: Optional[str] = None,
) -> Tokens:
    """Generalize a plain target stem: identity when no generalizations.

    Interval and length generalizations rebuild the underlying sequence
    (keeping its start letter) and re-place any structural anomaly, which
    needs the transformation kind when the stem is not a clean run.
    """
    rng = random.Random(seed)
    gens = set(generalizations)
    if len(gens) != len(tuple(generalizations)):
        raise ValueError("generalization kinds must be distinct")
    stem = tuple(source_stem)

    if gens & {"larger_interval", "longer_target"}:
        interval = 2 if "larger_interval" in gens else 1
        kind = transformation or "successor"
        base, params = _analyze_stem(stem, kind)
        n = len(base) * 2 if "longer_target" in gens else len(base)
        start = _index(base[0])
        if start + (n - 1) * interval > 25:
            raise InfeasibleAlphabetRange("rebuilt stem runs off the alphabet")
        rebuilt = tuple(_letter(i) for i in _run(start, n, interval))
        stem = _replant_anomaly(rebuilt, kind, params, rng, interval)
    return _represent(stem, gens)


def _analyze_stem(stem: Tokens, kind: str) -> tuple[Tokens, dict]:
    """Split a plain stem into its clean base run and anomaly parameters."""
    if kind in ("extend", "successor", "predecessor"):
        _detect_run(stem)
        return stem, {}
    if kind == "remove_redundant":
        pairs = [i for i in range(len(stem) - 1) if stem[i] == stem[i + 1]]
        if len(pairs) != 1:
            raise PreconditionViolated(f"need exactly one doubled letter: {list(stem)}")
        base = stem[: pairs[0]] + stem[pairs[0] + 1 :]
        _detect_run(base)
        return base, {"index": pairs[0]}
    if kind == "fix_alphabetic":
        fixed = apply_transformation(stem, "fix_alphabetic")
        index = next(i for i in range(len(stem)) if stem[i] != fixed[i])
        return fixed, {"index": index, "wrong": stem[index]}
    if kind == "sort":
        base = apply_transformation(stem, "sort")
        moved = [i for i in range(len(stem)) if stem[i] != base[i]]
        return base, {"swap": (moved[0], moved[-1])}
    raise ValueError(f"unknown transformation kind {kind!r}")


def _replant_anomaly(base: Tokens, kind: str, params: dict, rng: random.Random, interval: int) -> Tokens:
    if kind in ("extend", "successor", "predecessor"):
        return base
    n = len(base)
    if kind == "remove_redundant":
        i = rng.randrange(n)
        return base[: i + 1] + (base[i],) + base[i + 1 :]
    if kind == "fix_alphabetic":
        i = rng.randrange(n)
        wrong = rng.choice([c for c in ALPHABET if c not in base])
        return base[:i] + (wrong,) + base[i + 1 :]
    if kind == "sort":
        i, j = sorted(rng.sample(range(n), 2))
        swapped = list(base)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        return tuple(swapped)
    raise ValueError(f"unknown transformation kind {kind!r}")


# ---------------------------------------------------------------------------
# answer derivation and verification
# ---------------------------------------------------------------------------


def _real_world_answer(stem: Tokens, kind: str, domain: str) -> Tokens:
    seq = REAL_WORLD_SEQUENCES[domain]
    rank = {tok: i for i, tok in enumerate(seq)}
    if any(t not in rank for t in stem):
        raise PreconditionViolated(f"token outside {domain} sequence: {list(stem)}")
    if kind == "extend":
        last = rank[stem[-1]]
        if last + 1 >= len(seq):
            raise PreconditionViolated("sequence cannot be extended")
        return stem + (seq[last + 1],)
    if kind == "successor":
        last = rank[stem[-1]]
        if last + 1 >= len(seq):
            raise PreconditionViolated("final concept has no successor")
        return stem[:-1] + (seq[last + 1],)
    if kind == "predecessor":
        first = rank[stem[0]]
        if first == 0:
            raise PreconditionViolated("first concept has no predecessor")
        return (seq[first - 1],) + stem[1:]
    if kind == "sort":
        ordered = tuple(sorted(stem, key=lambda t: rank[t]))
        if ordered == stem:
            raise PreconditionViolated("already in sequence order")
        return ordered
    raise ValueError(f"transformation {kind!r} not defined for real-world sequences")


def derive_answer(
    target_stem: Tokens,
    transformation: str,
    generalizations: Sequence[str],
    domain: str = "letters",
) -> Tokens:
    """Re-derive the answer from the stem, transformation, and generalizations.

    The stem's representation is inverted to a plain letter run, the
    transformation re-applied structurally (its parameters detected from
    the stem, never read from stored generation state), and the
    representation re-applied.
    """
    if domain != "letters":
        return _real_world_answer(target_stem, transformation, domain)
    core = _invert_representation(target_stem, generalizations)
    interval = 2 if "larger_interval" in set(generalizations) else 1
    if transformation in ("extend", "successor", "predecessor"):
        _, detected = _detect_run(core)
        if detected != interval:
            raise DerivationConflict(f"stem interval {detected} != declared {interval}")
    core_answer = apply_transformation(core, transformation, interval)
    return _represent(core_answer, generalizations)


def verify_problem(problem: LetterStringProblem) -> bool:
    """Independent check: invert both stem and answer, re-derive, compare.

    Returns False on any mismatch or structural violation instead of
    raising; the generator uses this as an acceptance gate.
    """
    try:
        if problem.domain != "letters":
            expected = _real_world_answer(problem.target_stem, problem.transformation, problem.domain)
            return expected == problem.answer and not problem.generalizations
        core_stem = _invert_representation(problem.target_stem, problem.generalizations)
        core_answer = _invert_representation(problem.answer, problem.generalizations)
        interval = 2 if "larger_interval" in problem.generalizations else 1
        derived = apply_transformation(core_stem, problem.transformation, interval)
        if derived != core_answer:
            return False
        # the source pair must itself instantiate the transformation
        return apply_transformation(problem.source_left, problem.transformation) == problem.source_right
    except (PreconditionViolated, DerivationConflict, InfeasibleAlphabetRange, ValueError):
        return False


# ---------------------------------------------------------------------------
# prompt rendering and parsing
# ---------------------------------------------------------------------------

PROMPT_FORMATS = ("standard", "noprompt", "sentence")
PROMPT_HEADER = "Let's try to complete the pattern:"


def render_letterstring_prompt(problem: LetterStringProblem, format: str = "standard") -> str:
    left = " ".join(problem.source_left)
    right = " ".join(problem.source_right)
    stem = " ".join(problem.target_stem)
    if format == "standard":
        return f"{PROMPT_HEADER}\n\n[{left}] [{right}]\n[{stem}] ["
    if format == "noprompt":
        return f"[{left}] [{right}]\n[{stem}] ["
    if format == "sentence":
        return f"If {left} changes to {right}, then {stem} should change to "
    raise ValueError(f"unknown format {format!r}")


def parse_generated_letterstring(text: str, format: str = "standard") -> Tokens:
    """Truncate a completion at its terminator and split into tokens."""
    terminator = "." if format == "sentence" else "]"
    head = text.split(terminator, 1)[0]
    return tuple(t.lower() for t in head.split())


def letterstring_answers_match(expected: Tokens, given: Tokens) -> bool:
    return tuple(t.lower() for t in expected) == tuple(t.lower() for t in given)


# ---------------------------------------------------------------------------
# problem and dataset generation
# ---------------------------------------------------------------------------

MAX_ATTEMPTS = 200


class GenerationExhausted(RuntimeError):
    pass


def generate_problem(
    transformation: str,
    generalizations: Sequence[str],
    seed: int,
    domain: str = "letters",
    subtype: Optional[str] = None,
    instance: int = 0,
) -> LetterStringProblem:
    """Generate one verifier-validated problem, deterministic in its seed."""
    rng = random.Random(seed)
    gens = tuple(generalizations)
    if domain != "letters":
        if gens:
            raise ValueError("real-world problems carry no other generalizations")
        if transformation not in REAL_WORLD_TRANSFORMATIONS:
            raise ValueError(f"{transformation!r} not used with real-world sequences")

    for _ in range(MAX_ATTEMPTS):
        try:
            source_left, source_right = _instantiate(transformation, rng)
            if domain != "letters":
                stem, answer = _real_world_pair(transformation, domain, rng)
            else:
                interval = 2 if "larger_interval" in gens else 1
                letters = _BASE_LETTERS[transformation] * (2 if "longer_target" in gens else 1)
                tgt_left, tgt_right = _instantiate(transformation, rng, interval, letters)
                stem = _represent(tgt_left, gens)
                answer = _represent(tgt_right, gens)
                if "interleaved" in gens and INTERLEAVE_TOKEN in tgt_left + tgt_right:
                    continue  # the distractor letter must not occur in the pattern
        except (InfeasibleAlphabetRange, PreconditionViolated):
            continue
        problem = LetterStringProblem(
            id=ProblemId(Family.LETTER_STRING, subtype or transformation, instance, seed),
            source_left=source_left,
            source_right=source_right,
            target_stem=stem,
            answer=answer,
            transformation=transformation,
            generalizations=gens,
            domain=domain,
            metadata={"n_generalizations": len(gens) if domain == "letters" else "real_world"},
        )
        if verify_problem(problem):
            return problem
    raise GenerationExhausted(f"no valid {transformation}/{gens} instance for seed {seed}")


def _real_world_pair(kind: str, domain: str, rng: random.Random) -> tuple[Tokens, Tokens]:
    seq = REAL_WORLD_SEQUENCES[domain]
    if kind == "extend":
        stem = seq[:3]
    elif kind == "successor":
        stem = seq[:3]
    elif kind == "predecessor":
        stem = seq[1:]
    else:  # sort: one random swap of the full sequence
        i, j = sorted(rng.sample(range(len(seq)), 2))
        swapped = list(seq)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        stem = tuple(swapped)
    return stem, _real_world_answer(stem, kind, domain)


def _gen_combos(rng: random.Random, size: int) -> tuple[str, ...]:
    return tuple(sorted(rng.sample(GENERALIZATIONS, size), key=GENERALIZATIONS.index))


def build_letterstring_dataset(seed: int, eval_subset: bool = False) -> ProblemSet:
    """The full problem set: 600 problems at each generalization count
    (0-3) with the stated per-kind stratification, plus 400 real-world
    problems (100 per applicable transformation). The evaluation subset
    halves every stratum.
    """
    per_cell = 50 if eval_subset else 100
    half = per_cell * 6 // 2  # two-/three-generalization strata are unstratified
    problems: list[LetterStringProblem] = []
    shortfall: dict[str, int] = {}

    def emit(subtype: str, count: int, make):
        seen = set()
        produced = 0
        for instance in range(count):
            accepted = None
            # generous retry budget: tight instance spaces (real-world
            # problems have ~110 distinct instances) need coupon-collector
            # headroom near the end of a stratum
            for retry in range(400):
                instance_seed = stable_seed(seed, subtype, instance, retry)
                rng = random.Random(stable_seed(instance_seed, "choice"))
                try:
                    candidate = make(rng, instance_seed, instance)
                except GenerationExhausted:
                    continue
                key = (
                    candidate.source_left,
                    candidate.source_right,
                    candidate.target_stem,
                    candidate.answer,
                )
                if key in seen:
                    continue
                seen.add(key)
                accepted = candidate
                break
            if accepted is None:
                shortfall[subtype] = count - produced
                break
            problems.append(accepted)
            produced += 1

    for kind in TRANSFORMATIONS:
        subtype = f"gen0_{kind}"
        emit(subtype, per_cell, lambda rng, s, i, k=kind, st=subtype: generate_problem(k, (), s, subtype=st, instance=i))
    for gen in GENERALIZATIONS:
        subtype = f"gen1_{gen}"
        emit(
            subtype,
            per_cell,
            lambda rng, s, i, g=gen, st=subtype: generate_problem(
                rng.choice(TRANSFORMATIONS), (g,), s, subtype=st, instance=i
            ),
        )
    for n_gen, subtype in ((2, "gen2"), (3, "gen3")):
        emit(
            subtype,
            per_cell * 6,
            lambda rng, s, i, n=n_gen, st=subtype: generate_problem(
                rng.choice(TRANSFORMATIONS), _gen_combos(rng, n), s, subtype=st, instance=i
            ),
        )
    for kind in REAL_WORLD_TRANSFORMATIONS:
        subtype = f"real_{kind}"
        emit(
            subtype,
            per_cell,
            lambda rng, s, i, k=kind, st=subtype: generate_problem(
                k, (), s, domain=rng.choice(sorted(REAL_WORLD_SEQUENCES)), subtype=st, instance=i
            ),
        )

    metadata = {
        "seed": seed,
        "eval_subset": eval_subset,
        "per_cell": per_cell,
    }
    if shortfall:
        metadata["shortfall"] = shortfall
    return ProblemSet(family=Family.LETTER_STRING, problems=problems, metadata=metadata)
