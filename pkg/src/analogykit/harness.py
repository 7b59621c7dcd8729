"""Model clients, scripted mocks, scoring, and experiment drivers.

A model client exposes complete(prompt, max_tokens, temperature) returning
the completion text plus per-token log probabilities (with character
offsets) for both prompt and completion, and a count_tokens helper used by
the context-window bookkeeping. All experiment protocols run at
temperature 0. Multiple-choice scoring appends each choice and a closing
bracket to the prompt and ranks choices by the mean log probability of the
choice's own tokens, brackets excluded.

Mock clients tokenize on whitespace, treating brackets and colons as
single-character tokens, and are fully deterministic.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol, Sequence

from .core import (
    MatrixProblem,
    UnparseableAnswer,
    answers_equivalent,
    parse_generated_answer,
    render_matrix_prompt,
)
from .letterstring import (
    LetterStringProblem,
    letterstring_answers_match,
    parse_generated_letterstring,
    render_letterstring_prompt,
)
from .prompts_data import PROBLEM_SOLVING_PROMPTS
from .semantic import (
    StoryChoice,
    StoryItem,
    StoryOrder,
    VerbalItem,
    parse_story_choice,
    render_story_prompt,
    score_verbal_item,
    story_comparisons,
    verbal_line,
)

logger = logging.getLogger(__name__)

# max_tokens per protocol
MAX_TOKENS = {"digitmat": 10, "letterstring": 40, "verbal": 10, "story": 256}
DEFAULT_CONTEXT_WINDOW = 4096


@dataclass(frozen=True)
class RunConfig:
    """One evaluation run's knobs; max_tokens defaults to the family's value."""

    family: str
    mode: str = "both"  # generative | mc | both
    max_tokens: Optional[int] = None
    context_policy: str = "isolated"  # isolated | recursive
    context_window_tokens: int = DEFAULT_CONTEXT_WINDOW
    seed: int = 0
    format: str = "standard"  # letter-string prompt variant

    def __post_init__(self):
        if self.family not in MAX_TOKENS:
            raise ValueError(f"unknown family {self.family!r}")
        if self.max_tokens is None:
            object.__setattr__(self, "max_tokens", MAX_TOKENS[self.family])


class ModelError(RuntimeError):
    pass


@dataclass(frozen=True)
class TokenLogprob:
    text: str
    logprob: float
    offset: int  # character offset within prompt (or completion) text


@dataclass(frozen=True)
class Completion:
    text: str
    prompt_tokens: tuple[TokenLogprob, ...]
    completion_tokens: tuple[TokenLogprob, ...] = ()


class ModelClient(Protocol):
    name: str

    def complete(self, prompt: str, max_tokens: int, temperature: float = 0.0) -> Completion: ...

    def count_tokens(self, text: str) -> int: ...


_TOKEN_RE = re.compile(r"[\[\]:]|[^\s\[\]:]+")


def mock_tokenize(text: str) -> list[tuple[str, int]]:
    return [(m.group(0), m.start()) for m in _TOKEN_RE.finditer(text)]


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


class _MockBase:
    name = "mock"

    def count_tokens(self, text: str) -> int:
        return len(mock_tokenize(text))

    def _tokens(self, text: str, score: Callable[[str, int], float]) -> tuple[TokenLogprob, ...]:
        return tuple(TokenLogprob(t, score(t, off), off) for t, off in mock_tokenize(text))


class FixedTextModel(_MockBase):
    """Always answers with the same text."""

    def __init__(self, text: str, name: str = "mock:fixed"):
        self.text = text
        self.name = name

    def complete(self, prompt: str, max_tokens: int, temperature: float = 0.0) -> Completion:
        return Completion(
            text=self.text,
            prompt_tokens=self._tokens(prompt, lambda t, o: -1.0),
            completion_tokens=self._tokens(self.text, lambda t, o: -1.0),
        )


class TableDrivenModel(_MockBase):
    """Answers from an explicit prompt-to-completion table."""

    def __init__(self, table: dict[str, str], default: str = "", name: str = "mock:table"):
        self.table = dict(table)
        self.default = default
        self.name = name

    def complete(self, prompt: str, max_tokens: int, temperature: float = 0.0) -> Completion:
        text = self.table.get(prompt, self.default)
        return Completion(
            text=text,
            prompt_tokens=self._tokens(prompt, lambda t, o: -1.0),
            completion_tokens=self._tokens(text, lambda t, o: -1.0),
        )


class UniformRandomModel(_MockBase):
    """Deterministic noise: every prompt gets one pseudo-random score.

    Multiple-choice prompts therefore receive independent uniform scores,
    making the selection uniform over the choices; generative completions
    are a random digit.
    """

    def __init__(self, seed: int, name: Optional[str] = None):
        self.seed = seed
        self.name = name or f"mock:random:{seed}"

    def _unit(self, prompt: str) -> float:
        digest = hashlib.sha256(f"{self.seed}\x1f{prompt}".encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") / 2**64

    def complete(self, prompt: str, max_tokens: int, temperature: float = 0.0) -> Completion:
        u = self._unit(prompt)
        score = -1.0 - u  # in (-2, -1): one iid draw per prompt
        text = f"{int(u * 10)}]"
        return Completion(
            text=text,
            prompt_tokens=self._tokens(prompt, lambda t, o: score),
            completion_tokens=self._tokens(text, lambda t, o: score),
        )


class OracleModel(_MockBase):
    """Perfect scripted reference model backed by the generators' answers.

    Built from problem sets (and optionally story items); completes
    generative prompts with the recorded answer and scores
    multiple-choice/verbal prompts so the correct option wins.
    """

    def __init__(
        self,
        matrix_problems: Sequence[MatrixProblem] = (),
        letterstring_problems: Sequence[LetterStringProblem] = (),
        story_items: Sequence[StoryItem] = (),
        verbal_items: Sequence[VerbalItem] = (),
        name: str = "mock:oracle",
    ):
        self.name = name
        self._generative: dict[str, str] = {}
        self._generative_by_last: dict[str, list[tuple[str, str]]] = {}
        self._mc_by_line: dict[str, list[tuple[str, MatrixProblem]]] = {}
        self._verbal: dict[str, bool] = {}

        def add_generative(prompt: str, text: str) -> None:
            self._generative[prompt] = text
            self._generative_by_last.setdefault(prompt.rsplit("\n", 1)[-1], []).append((prompt, text))

        for p in matrix_problems:
            prompt = render_matrix_prompt(p.grid)
            answer_text = " ".join(str(d) for d in p.answer.digits)
            add_generative(prompt, f"{answer_text}]")
            # index by the problem's first row, the third-from-last line of
            # any multiple-choice prompt built on this problem
            self._mc_by_line.setdefault(prompt.split("\n", 1)[0], []).append((prompt, p))
        for p in letterstring_problems:
            answer_text = " ".join(p.answer)
            for fmt, terminator in (("standard", "]"), ("noprompt", "]"), ("sentence", ".")):
                add_generative(render_letterstring_prompt(p, fmt), f"{answer_text}{terminator}")
        for item in story_items:
            for order in StoryOrder:
                label = "Story A" if order is StoryOrder.CORRECT_FIRST else "Story B"
                self._generative[render_story_prompt(item, order)] = (
                    f"{label} is the better analogy to Story 1."
                )
        for item in verbal_items:
            for idx in range(len(item.choices)):
                self._verbal[verbal_line(item, idx)] = idx == item.correct_index

    def complete(self, prompt: str, max_tokens: int, temperature: float = 0.0) -> Completion:
        text = self._generative.get(prompt)
        if text is None:
            scored = self._score_spans(prompt)
            if scored is not None:
                return Completion(text="", prompt_tokens=scored)
            # generative prompt with recursive context: match the final line
            for known_prompt, known_text in self._generative_by_last.get(prompt.rsplit("\n", 1)[-1], ()):
                if prompt.endswith(known_prompt):
                    text = known_text
                    break
        if text is not None:
            return Completion(
                text=text,
                prompt_tokens=self._tokens(prompt, lambda t, o: -1.0),
                completion_tokens=self._tokens(text, lambda t, o: 0.0),
            )
        return Completion(text="", prompt_tokens=self._tokens(prompt, lambda t, o: -1.0))

    def _score_spans(self, prompt: str) -> Optional[tuple[TokenLogprob, ...]]:
        # verbal scoring: the final line is a rendered A:B::C:D candidate
        last_line = prompt.rsplit("\n", 1)[-1]
        if last_line in self._verbal:
            good = self._verbal[last_line]
            start = len(prompt) - len(last_line)
            return self._tokens(
                prompt, lambda t, o: (0.0 if good else -2.0) if o >= start else -1.0
            )
        # multiple-choice matrix scoring: [context +] problem + choice + "]"
        if prompt.endswith("]"):
            lines = prompt.split("\n")
            key = lines[-3] if len(lines) >= 3 else ""
            for problem_prompt, problem in self._mc_by_line.get(key, ()):
                pos = prompt.rfind(problem_prompt)
                if pos < 0:
                    continue
                tail = prompt[pos + len(problem_prompt) : -1]
                if "\n" in tail:
                    continue
                try:
                    cell = parse_generated_answer(tail + "]", problem.kind)
                    good = answers_equivalent(problem.kind, problem.answer, cell)
                except UnparseableAnswer:
                    good = not problem.answer.digits
                span = (pos + len(problem_prompt), len(prompt) - 1)
                return self._tokens(
                    prompt,
                    lambda t, o: (0.0 if good else -2.0) if span[0] <= o < span[1] else -1.0,
                )
        return None


class CachedModel:
    """Caches completions by (model, prompt, max_tokens, temperature).

    Reruns over the same problems are free and auditable; an optional JSONL
    file persists the cache across processes.
    """

    def __init__(self, inner: ModelClient, path: Optional[Path] = None):
        self.inner = inner
        self.name = inner.name
        self.path = Path(path) if path else None
        self._cache: dict[str, Completion] = {}
        if self.path and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                entry = json.loads(line)
                self._cache[entry["key"]] = _completion_from_json(entry["completion"])

    def _key(self, prompt: str, max_tokens: int, temperature: float) -> str:
        raw = f"{self.name}\x1f{prompt}\x1f{max_tokens}\x1f{temperature}"
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()

    def complete(self, prompt: str, max_tokens: int, temperature: float = 0.0) -> Completion:
        key = self._key(prompt, max_tokens, temperature)
        if key not in self._cache:
            completion = self.inner.complete(prompt, max_tokens, temperature)
            self._cache[key] = completion
            if self.path:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"key": key, "completion": _completion_to_json(completion)}) + "\n")
        return self._cache[key]

    def count_tokens(self, text: str) -> int:
        return self.inner.count_tokens(text)


def _completion_to_json(c: Completion) -> dict:
    return {
        "text": c.text,
        "prompt_tokens": [[t.text, t.logprob, t.offset] for t in c.prompt_tokens],
        "completion_tokens": [[t.text, t.logprob, t.offset] for t in c.completion_tokens],
    }


def _completion_from_json(d: dict) -> Completion:
    return Completion(
        text=d["text"],
        prompt_tokens=tuple(TokenLogprob(*t) for t in d["prompt_tokens"]),
        completion_tokens=tuple(TokenLogprob(*t) for t in d["completion_tokens"]),
    )


class EndpointClient:
    """HTTP client for a completions endpoint with echoed log probabilities.

    Expects an OpenAI-completions-style response shape (choices[0].text and
    choices[0].logprobs with tokens/token_logprobs/text_offset). Network
    failures retry with exponential backoff, then raise ModelError.
    """

    MAX_RETRIES = 5

    def __init__(self, url: str, model: str, api_key: Optional[str] = None, name: Optional[str] = None):
        self.url = url
        self.model = model
        self.api_key = api_key
        self.name = name or f"endpoint:{model}"

    def complete(self, prompt: str, max_tokens: int, temperature: float = 0.0) -> Completion:
        import requests

        payload = {
            "model": self.model,
            "prompt": prompt,
            "max_tokens": max_tokens,
            "temperature": temperature,
            "logprobs": 1,
            "echo": True,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        delay = 1.0
        for attempt in range(self.MAX_RETRIES):
            try:
                resp = requests.post(self.url, json=payload, headers=headers, timeout=120)
                resp.raise_for_status()
                return self._parse(resp.json(), prompt)
            except Exception as exc:  # noqa: BLE001 - any transport failure retries
                if attempt == self.MAX_RETRIES - 1:
                    raise ModelError(f"endpoint failed after {self.MAX_RETRIES} tries: {exc}") from exc
                logger.warning("endpoint error (%s); retrying in %.1fs", exc, delay)
                time.sleep(delay)
                delay *= 2
        raise ModelError("unreachable")

    @staticmethod
    def _parse(data: dict, prompt: str) -> Completion:
        choice = data["choices"][0]
        lp = choice.get("logprobs") or {}
        tokens = lp.get("tokens", [])
        token_logprobs = lp.get("token_logprobs", [])
        offsets = lp.get("text_offset", [])
        prompt_tokens, completion_tokens = [], []
        for tok, logprob, off in zip(tokens, token_logprobs, offsets):
            entry = TokenLogprob(tok, logprob if logprob is not None else 0.0, off)
            if off < len(prompt):
                prompt_tokens.append(entry)
            else:
                completion_tokens.append(entry)
        return Completion(
            text=choice.get("text", "")[len(prompt):] if choice.get("text", "").startswith(prompt) else choice.get("text", ""),
            prompt_tokens=tuple(prompt_tokens),
            completion_tokens=tuple(completion_tokens),
        )

    def count_tokens(self, text: str) -> int:
        return len(mock_tokenize(text))


def make_scripted_model(
    strategy: str,
    seed: int = 0,
    text: str = "",
    table: Optional[dict[str, str]] = None,
    matrix_problems: Sequence[MatrixProblem] = (),
    letterstring_problems: Sequence[LetterStringProblem] = (),
    story_items: Sequence[StoryItem] = (),
    verbal_items: Sequence[VerbalItem] = (),
) -> ModelClient:
    """Deterministic test doubles honoring the client contract."""
    if strategy == "oracle":
        return OracleModel(matrix_problems, letterstring_problems, story_items, verbal_items)
    if strategy == "uniform_random":
        return UniformRandomModel(seed)
    if strategy == "fixed_text":
        return FixedTextModel(text)
    if strategy == "table":
        return TableDrivenModel(table or {})
    raise ValueError(f"unknown mock strategy {strategy!r}")


# ---------------------------------------------------------------------------
# evaluation records
# ---------------------------------------------------------------------------


# JSON schema for one serialized evaluation record; human exports from the
# session service conform to the same shape
EVAL_RECORD_SCHEMA = {
    "type": "object",
    "properties": {
        "problem_id": {"type": "string"},
        "family": {"type": "string"},
        "mode": {"type": "string", "enum": ["generative", "multiple_choice", "story_choice"]},
        "agent": {"type": "string"},
        "raw_response": {"type": ["string", "integer", "null"]},
        "parsed_answer": {"type": ["array", "null"], "items": {"type": "string"}},
        "selected_choice": {"type": ["integer", "null"]},
        "choice_scores": {"type": ["array", "null"], "items": {"type": "number"}},
        "correct": {"type": "boolean"},
        "prompt_sha256": {"type": "string"},
        "elapsed_ms": {"type": "number"},
        "error": {"type": ["string", "null"]},
    },
    "required": [
        "problem_id",
        "family",
        "mode",
        "agent",
        "correct",
        "selected_choice",
        "parsed_answer",
        "error",
    ],
}


@dataclass
class EvalRecord:
    problem_id: str
    family: str
    mode: str  # generative | multiple_choice | story_choice | verbal_choice
    agent: str
    raw_response: str = ""
    parsed_answer: Optional[list[str]] = None
    selected_choice: Optional[int] = None
    choice_scores: Optional[list[float]] = None
    correct: bool = False
    prompt_sha256: str = ""
    elapsed_ms: float = 0.0
    error: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        base = {
            "problem_id": self.problem_id,
            "family": self.family,
            "mode": self.mode,
            "agent": self.agent,
            "raw_response": self.raw_response,
            "parsed_answer": self.parsed_answer,
            "selected_choice": self.selected_choice,
            "choice_scores": self.choice_scores,
            "correct": self.correct,
            "prompt_sha256": self.prompt_sha256,
            "elapsed_ms": self.elapsed_ms,
            "error": self.error,
        }
        base.update(self.extra)
        return base


def write_records(records: Iterable[EvalRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True) + "\n")


def read_records(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out


# ---------------------------------------------------------------------------
# scoring
# ---------------------------------------------------------------------------


def _matrix_extra(problem: MatrixProblem) -> dict:
    extra = {"subtype": problem.subtype}
    extra.update(problem.metadata)
    return extra


def score_generative(problem, response_text: str, agent: str = "model", format: str = "standard") -> EvalRecord:
    """Score a free completion: truncate at the family's terminator, parse,
    and compare under the family's equivalence rule."""
    if isinstance(problem, MatrixProblem):
        record = EvalRecord(
            problem_id=str(problem.id),
            family=problem.id.family.value,
            mode="generative",
            agent=agent,
            raw_response=response_text,
            extra=_matrix_extra(problem),
        )
        try:
            parsed = parse_generated_answer(response_text, problem.kind)
        except UnparseableAnswer as exc:
            record.error = f"unparseable: {exc}"
            return record
        record.parsed_answer = [str(d) for d in parsed.digits]
        record.correct = answers_equivalent(problem.kind, problem.answer, parsed)
        return record

    if isinstance(problem, LetterStringProblem):
        record = EvalRecord(
            problem_id=str(problem.id),
            family=problem.id.family.value,
            mode="generative",
            agent=agent,
            raw_response=response_text,
            extra={
                "subtype": problem.id.subtype,
                "transformation": problem.transformation,
                "generalizations": list(problem.generalizations),
                "domain": problem.domain,
                "format": format,
                **problem.metadata,
            },
        )
        parsed = parse_generated_letterstring(response_text, format)
        record.parsed_answer = list(parsed)
        if not parsed:
            record.error = "unparseable: empty completion"
            return record
        record.correct = letterstring_answers_match(problem.answer, parsed)
        return record

    raise TypeError(f"cannot score {type(problem).__name__}")


def choice_text(problem: MatrixProblem, index: int) -> str:
    return " ".join(problem.choices[index].to_strings())


def score_multiple_choice(
    model: ModelClient, problem: MatrixProblem, agent: Optional[str] = None, context: str = ""
) -> EvalRecord:
    """Rank the 8 choices by mean log probability of the choice tokens.

    Each choice is appended to the rendered problem followed by a closing
    bracket; bracket tokens are excluded from the average. Ties select the
    lowest index and are logged.
    """
    base_prompt = context + render_matrix_prompt(problem.grid)
    scores: list[float] = []
    t0 = time.perf_counter()
    for idx in range(len(problem.choices)):
        text = choice_text(problem, idx)
        prompt = f"{base_prompt}{text}]"
        completion = model.complete(prompt, max_tokens=0, temperature=0.0)
        span = (len(base_prompt), len(base_prompt) + len(text))
        token_scores = [
            t.logprob for t in completion.prompt_tokens if span[0] <= t.offset < span[1]
        ]
        if not token_scores:
            raise ModelError(f"no tokens scored for choice {idx} of {problem.id}")
        scores.append(sum(token_scores) / len(token_scores))
    best = max(scores)
    selected = scores.index(best)
    if scores.count(best) > 1:
        logger.info("multiple-choice tie on %s; selecting lowest index", problem.id)
    correct = answers_equivalent(problem.kind, problem.answer, problem.choices[selected])
    return EvalRecord(
        problem_id=str(problem.id),
        family=problem.id.family.value,
        mode="multiple_choice",
        agent=agent or model.name,
        selected_choice=selected,
        choice_scores=scores,
        correct=correct,
        prompt_sha256=prompt_hash(base_prompt),
        elapsed_ms=(time.perf_counter() - t0) * 1000,
        extra=_matrix_extra(problem),
    )


# ---------------------------------------------------------------------------
# experiment drivers
# ---------------------------------------------------------------------------


def run_digitmat_experiment(
    model: ModelClient,
    problems: Sequence[MatrixProblem],
    mode: str = "both",
    agent: Optional[str] = None,
    max_tokens: int = MAX_TOKENS["digitmat"],
) -> list[EvalRecord]:
    """Zero-shot evaluation: each problem in isolation, generative and/or
    multiple-choice passes. Per-problem errors are recorded, not raised."""
    if mode not in ("generative", "mc", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    agent = agent or model.name
    records: list[EvalRecord] = []
    for problem in problems:
        if mode in ("generative", "both"):
            prompt = render_matrix_prompt(problem.grid)
            t0 = time.perf_counter()
            try:
                completion = model.complete(prompt, max_tokens=max_tokens, temperature=0.0)
                record = score_generative(problem, completion.text, agent=agent)
            except ModelError as exc:
                record = EvalRecord(
                    problem_id=str(problem.id),
                    family=problem.id.family.value,
                    mode="generative",
                    agent=agent,
                    error=str(exc),
                    extra=_matrix_extra(problem),
                )
            record.prompt_sha256 = prompt_hash(prompt)
            record.elapsed_ms = (time.perf_counter() - t0) * 1000
            records.append(record)
        if mode in ("mc", "both"):
            try:
                records.append(score_multiple_choice(model, problem, agent=agent))
            except ModelError as exc:
                records.append(
                    EvalRecord(
                        problem_id=str(problem.id),
                        family=problem.id.family.value,
                        mode="multiple_choice",
                        agent=agent,
                        error=str(exc),
                        extra=_matrix_extra(problem),
                    )
                )
    return records


def run_letterstring_experiment(
    model: ModelClient,
    problems: Sequence[LetterStringProblem],
    format: str = "standard",
    agent: Optional[str] = None,
    max_tokens: int = MAX_TOKENS["letterstring"],
) -> list[EvalRecord]:
    agent = agent or model.name
    records = []
    for problem in problems:
        prompt = render_letterstring_prompt(problem, format)
        t0 = time.perf_counter()
        try:
            completion = model.complete(prompt, max_tokens=max_tokens, temperature=0.0)
            record = score_generative(problem, completion.text, agent=agent, format=format)
        except ModelError as exc:
            record = EvalRecord(
                problem_id=str(problem.id),
                family=problem.id.family.value,
                mode="generative",
                agent=agent,
                error=str(exc),
                extra={"subtype": problem.id.subtype, "format": format},
            )
        record.prompt_sha256 = prompt_hash(prompt)
        record.elapsed_ms = (time.perf_counter() - t0) * 1000
        records.append(record)
    return records


class ContextOverflow(AssertionError):
    """A prompt exceeding the context window was about to be submitted."""


def run_progressive_experiment(
    model: ModelClient,
    ordered_problems: Sequence[MatrixProblem],
    context_window_tokens: int = DEFAULT_CONTEXT_WINDOW,
    agent: Optional[str] = None,
    max_tokens: int = MAX_TOKENS["digitmat"],
    run_index: int = 0,
) -> list[EvalRecord]:
    """Easy-to-hard presentation with recursive context.

    After each problem, the problem plus its selected multiple-choice
    answer joins a growing context. Before each request, whole problems
    are deleted from the start of the context until every prompt for the
    upcoming problem fits the window; every outgoing prompt is checked
    against the window and ContextOverflow raised on violation.
    """
    agent = agent or model.name
    records: list[EvalRecord] = []
    context_blocks: list[str] = []

    def joined(parts: list[str]) -> str:
        return "\n\n".join(parts)

    def checked_complete(prompt: str, tokens: int) -> Completion:
        if model.count_tokens(prompt) > context_window_tokens:
            raise ContextOverflow(
                f"prompt of {model.count_tokens(prompt)} tokens exceeds window {context_window_tokens}"
            )
        return model.complete(prompt, max_tokens=tokens, temperature=0.0)

    for problem in ordered_problems:
        body = render_matrix_prompt(problem.grid)
        suffixes = [""] + [f"{choice_text(problem, i)}]" for i in range(len(problem.choices))]
        deleted = 0
        while context_blocks:
            base = joined(context_blocks + [body])
            if max(model.count_tokens(base + s) for s in suffixes) <= context_window_tokens:
                break
            context_blocks.pop(0)
            deleted += 1
        context = joined(context_blocks + [""]) if context_blocks else ""

        prompt = context + body
        completion = checked_complete(prompt, max_tokens)
        record = score_generative(problem, completion.text, agent=agent)
        record.prompt_sha256 = prompt_hash(prompt)
        record.extra.update({"run": run_index, "context_problems": len(context_blocks), "deleted": deleted})
        records.append(record)

        base = context + body
        scores = []
        for idx in range(len(problem.choices)):
            text = choice_text(problem, idx)
            completion = checked_complete(f"{base}{text}]", 0)
            span = (len(base), len(base) + len(text))
            token_scores = [t.logprob for t in completion.prompt_tokens if span[0] <= t.offset < span[1]]
            scores.append(sum(token_scores) / len(token_scores))
        best = max(scores)
        selected = scores.index(best)
        mc_record = EvalRecord(
            problem_id=str(problem.id),
            family=problem.id.family.value,
            mode="multiple_choice",
            agent=agent,
            selected_choice=selected,
            choice_scores=scores,
            correct=answers_equivalent(problem.kind, problem.answer, problem.choices[selected]),
            prompt_sha256=prompt_hash(base),
            extra={**_matrix_extra(problem), "run": run_index, "context_problems": len(context_blocks), "deleted": deleted},
        )
        records.append(mc_record)
        context_blocks.append(f"{body}{choice_text(problem, selected)}]")
    return records


def run_verbal_experiment(
    model: ModelClient,
    items: Sequence[VerbalItem],
    agent: Optional[str] = None,
) -> list[EvalRecord]:
    """Sequential choice-by-log-probability with recursive context."""
    agent = agent or model.name
    context = ""
    records = []
    for i, item in enumerate(items):
        t0 = time.perf_counter()
        try:
            selected, context, scores = score_verbal_item(model, context, item)
            record = EvalRecord(
                problem_id=f"{item.dataset}:{i}",
                family="verbal",
                mode="multiple_choice",
                agent=agent,
                selected_choice=selected,
                choice_scores=scores,
                correct=selected == item.correct_index,
                elapsed_ms=(time.perf_counter() - t0) * 1000,
                extra={
                    "dataset": item.dataset,
                    "relation": item.relation,
                    "distance": item.distance,
                },
            )
        except ModelError as exc:
            record = EvalRecord(
                problem_id=f"{item.dataset}:{i}",
                family="verbal",
                mode="multiple_choice",
                agent=agent,
                error=str(exc),
                extra={"dataset": item.dataset, "relation": item.relation},
            )
        records.append(record)
    return records


def run_story_experiment(
    model: ModelClient,
    items: Sequence[StoryItem],
    agent: Optional[str] = None,
    max_tokens: int = MAX_TOKENS["story"],
) -> list[EvalRecord]:
    """All items in both target orders, each in a fresh context."""
    agent = agent or model.name
    records = []
    for item, order in story_comparisons(items):
        prompt = render_story_prompt(item, order)
        t0 = time.perf_counter()
        completion = model.complete(prompt, max_tokens=max_tokens, temperature=0.0)
        choice = parse_story_choice(completion.text)
        correct_label = (
            StoryChoice.STORY_A if order is StoryOrder.CORRECT_FIRST else StoryChoice.STORY_B
        )
        record = EvalRecord(
            problem_id=f"story:{item.group_id}:{item.condition}:{order.value}",
            family="story",
            mode="story_choice",
            agent=agent,
            raw_response=completion.text,
            correct=choice is correct_label,
            prompt_sha256=prompt_hash(prompt),
            elapsed_ms=(time.perf_counter() - t0) * 1000,
            extra={
                "condition": item.condition,
                "order": order.value,
                "group_id": item.group_id,
                "story_choice": choice.value,
            },
        )
        if choice is StoryChoice.UNPARSEABLE:
            record.error = "unparseable story choice"
        records.append(record)
    return records


def export_problem_solving_prompts(outdir) -> list[Path]:
    """Write the qualitative problem-solving prompt templates as text files."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in PROBLEM_SOLVING_PROMPTS.items():
        path = outdir / f"{name}.txt"
        path.write_text(text + "\n", encoding="utf-8")
        written.append(path)
    return written
