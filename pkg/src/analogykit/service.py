"""HTTP session service for administering problems to human participants.

Sessions draw trials from pre-generated, solver-validated dataset files
(never generated on the fly). Digit-matrix trials enforce the
free-response-then-choice protocol: the answer choices are only delivered
after a free response is stored, and a choice submitted first is rejected
with 409. Responses append to a JSON Lines event log (with periodic
snapshots) from which all session state can be replayed, and sessions
export as EvalRecord-compatible rows for joint analysis with model runs.
"""

from __future__ import annotations

import csv
import io
import json
import random
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .core import (
    MatrixProblem,
    ProblemSet,
    UnparseableAnswer,
    answers_equivalent,
    parse_generated_answer,
    render_matrix_display,
)
from .digitmat import bundle
from .letterstring import (
    GENERALIZATIONS,
    REAL_WORLD_TRANSFORMATIONS,
    TRANSFORMATIONS,
    LetterStringProblem,
    letterstring_answers_match,
)
from .semantic import StoryItem, load_story_items

EXPERIMENTS = ("digitmat32", "digitmat42_ordered", "letterstring28", "story18")
SNAPSHOT_EVERY = 50

MATRIX_INSTRUCTIONS = (
    "Each puzzle shows a 3x3 grid of bracketed cells that follows one or "
    "more rules across its rows or columns. Work out the rules and fill in "
    "the missing bottom-right cell. First type your answer as digits "
    "separated by spaces, then pick the matching option from the choices "
    "that appear."
)
MATRIX_EXAMPLE = {
    "display": [["[3]", "[3]", "[3]"], ["[6]", "[6]", "[6]"], ["[8]", "[8]", "[ ? ]"]],
    "answer": "8",
    "note": "Every row repeats a single digit, so the missing cell is 8.",
}
LETTERSTRING_INSTRUCTIONS = (
    "Each puzzle shows how one letter string changes into another, then a "
    "new string. Type the string that completes the pattern, with tokens "
    "separated by spaces."
)
LETTERSTRING_EXAMPLE = {
    "display": ["[a a a] [b b b]", "[c c c] [ ? ]"],
    "answer": "d d d",
}
STORY_INSTRUCTIONS = (
    "Read Story 1, then Stories A and B. Choose the story that is the "
    "better analogy to Story 1, or indicate that both are equally analogous."
)


@dataclass
class Trial:
    kind: str  # digitmat | letterstring | story
    ref: str  # problem id / story group id
    stage: str  # free | choice | story_choice | done
    payload: dict = field(default_factory=dict)  # story A/B assignment etc.
    responses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ref": self.ref,
            "stage": self.stage,
            "payload": self.payload,
            "responses": self.responses,
        }

    @staticmethod
    def from_dict(d: dict) -> "Trial":
        return Trial(d["kind"], d["ref"], d["stage"], d.get("payload", {}), d.get("responses", []))


@dataclass
class Session:
    id: str
    experiment: str
    seed: int
    trials: list[Trial]
    cursor: int = 0
    created_at: float = 0.0
    completed_at: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "experiment": self.experiment,
            "seed": self.seed,
            "cursor": self.cursor,
            "created_at": self.created_at,
            "completed_at": self.completed_at,
            "trials": [t.to_dict() for t in self.trials],
        }

    @staticmethod
    def from_dict(d: dict) -> "Session":
        return Session(
            id=d["id"],
            experiment=d["experiment"],
            seed=d["seed"],
            trials=[Trial.from_dict(t) for t in d["trials"]],
            cursor=d["cursor"],
            created_at=d["created_at"],
            completed_at=d.get("completed_at"),
        )


class EventStore:
    """Append-only JSONL event log with periodic snapshots.

    Replaying the log (snapshot plus tail) reconstructs identical session
    state; every mutation is written before it is acknowledged.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.events_path = self.root / "events.jsonl"
        self.snapshot_path = self.root / "snapshot.json"
        self.sessions: dict[str, Session] = {}
        self._events_applied = 0
        self._lock = threading.RLock()
        self._load()

    def _load(self) -> None:
        start = 0
        if self.snapshot_path.exists():
            snap = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
            self.sessions = {s["id"]: Session.from_dict(s) for s in snap["sessions"]}
            start = snap["events_applied"]
        if self.events_path.exists():
            with open(self.events_path, encoding="utf-8") as fh:
                for i, line in enumerate(fh):
                    if not line.strip():
                        continue
                    if i >= start:
                        self._apply(json.loads(line))
                    self._events_applied = i + 1

    def _apply(self, event: dict) -> None:
        if event["type"] == "session_created":
            session = Session.from_dict(event["session"])
            self.sessions[session.id] = session
        elif event["type"] == "response":
            session = self.sessions[event["session_id"]]
            trial = session.trials[event["trial"]]
            trial.responses.append(event["response"])
            trial.stage = event["next_stage"]
            session.cursor = event["cursor"]
            if event.get("completed_at"):
                session.completed_at = event["completed_at"]

    def record(self, event: dict) -> None:
        with self._lock:
            with open(self.events_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
            self._apply(event)
            self._events_applied += 1
            if self._events_applied % SNAPSHOT_EVERY == 0:
                self.write_snapshot()

    def write_snapshot(self) -> None:
        payload = {
            "events_applied": self._events_applied,
            "sessions": [s.to_dict() for s in self.sessions.values()],
        }
        tmp = self.snapshot_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        tmp.replace(self.snapshot_path)


@dataclass
class DatasetRegistry:
    """Pre-generated problems the service administers."""

    digitmat: dict[str, list[MatrixProblem]] = field(default_factory=dict)  # by subtype
    digitmat_by_id: dict[str, MatrixProblem] = field(default_factory=dict)
    letterstring: dict[str, list[LetterStringProblem]] = field(default_factory=dict)
    letterstring_by_id: dict[str, LetterStringProblem] = field(default_factory=dict)
    stories: dict[str, dict[str, StoryItem]] = field(default_factory=dict)  # group -> condition

    @staticmethod
    def load(
        digitmat_path: Optional[Path] = None,
        letterstring_path: Optional[Path] = None,
        stories_path: Optional[Path] = None,
    ) -> "DatasetRegistry":
        reg = DatasetRegistry()
        if digitmat_path:
            ps = ProblemSet.from_json(Path(digitmat_path).read_text(encoding="utf-8"))
            for p in ps.problems:
                reg.digitmat.setdefault(p.id.subtype, []).append(p)
                reg.digitmat_by_id[str(p.id)] = p
        if letterstring_path:
            ps = ProblemSet.from_json(Path(letterstring_path).read_text(encoding="utf-8"))
            for p in ps.problems:
                reg.letterstring.setdefault(p.id.subtype, []).append(p)
                reg.letterstring_by_id[str(p.id)] = p
        if stories_path:
            for item in load_story_items(stories_path):
                reg.stories.setdefault(item.group_id, {})[item.condition] = item
        return reg


class SessionRequest(BaseModel):
    experiment: str
    seed: Optional[int] = None


class ResponseBody(BaseModel):
    freeResponse: Optional[str] = None
    choiceIndex: Optional[int] = None
    storyChoice: Optional[str] = None
    latencyMs: Optional[float] = None


def _pick(rng: random.Random, pool: list, subtype: str):
    if not pool:
        raise HTTPException(400, f"dataset has no problems for subtype {subtype!r}")
    return pool[rng.randrange(len(pool))]


def _build_trials(experiment: str, seed: int, reg: DatasetRegistry) -> list[Trial]:
    rng = random.Random(seed)
    trials: list[Trial] = []

    if experiment in ("digitmat32", "digitmat42_ordered"):
        subtypes = bundle("exp1" if experiment == "digitmat32" else "exp2")
        order = list(subtypes)
        if experiment == "digitmat32":
            rng.shuffle(order)  # subtypes in random order, one instance each
        for subtype in order:
            problem = _pick(rng, reg.digitmat.get(subtype, []), subtype)
            trials.append(Trial(kind="digitmat", ref=str(problem.id), stage="free"))
        return trials

    if experiment == "letterstring28":
        cells = (
            [f"gen0_{k}" for k in TRANSFORMATIONS]
            + [f"gen1_{g}" for g in GENERALIZATIONS]
            + ["gen2"] * 6
            + ["gen3"] * 6
            + [f"real_{k}" for k in REAL_WORLD_TRANSFORMATIONS]
        )
        picked: list[str] = []
        used: set[str] = set()
        for subtype in cells:
            pool = [p for p in reg.letterstring.get(subtype, []) if str(p.id) not in used]
            problem = _pick(rng, pool, subtype)
            used.add(str(problem.id))
            picked.append(str(problem.id))
        rng.shuffle(picked)
        return [Trial(kind="letterstring", ref=ref, stage="free") for ref in picked]

    if experiment == "story18":
        groups = sorted(reg.stories)
        if len(groups) < 18:
            raise HTTPException(400, f"story dataset has {len(groups)} groups; 18 required")
        chosen = groups[:18] if len(groups) == 18 else [groups[i] for i in sorted(rng.sample(range(len(groups)), 18))]
        conditions = ["near"] * 9 + ["far"] * 9
        rng.shuffle(conditions)
        for group, condition in zip(chosen, conditions):
            if condition not in reg.stories[group]:
                raise HTTPException(400, f"story group {group!r} missing {condition} pair")
            correct_first = rng.random() < 0.5
            trials.append(
                Trial(
                    kind="story",
                    ref=group,
                    stage="story_choice",
                    payload={"condition": condition, "correct_first": correct_first},
                )
            )
        rng.shuffle(trials)
        return trials

    raise HTTPException(400, f"unknown experiment {experiment!r}; known: {', '.join(EXPERIMENTS)}")


def create_app(
    registry: DatasetRegistry, store: EventStore, ui_dir: Optional[Path] = None
) -> FastAPI:
    app = FastAPI(title="analogykit session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=Path(ui_dir), html=True), name="ui")
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def session_lock(session_id: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(session_id, threading.Lock())

    def get_session(session_id: str) -> Session:
        session = store.sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return session

    def instructions_for(experiment: str) -> dict:
        if experiment.startswith("digitmat"):
            return {"instructions": MATRIX_INSTRUCTIONS, "example": MATRIX_EXAMPLE}
        if experiment.startswith("letterstring"):
            return {"instructions": LETTERSTRING_INSTRUCTIONS, "example": LETTERSTRING_EXAMPLE}
        return {"instructions": STORY_INSTRUCTIONS, "example": None}

    @app.get("/health")
    def health() -> dict:
        return {"ok": True, "sessions": len(store.sessions)}

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionRequest) -> dict:
        seed = body.seed if body.seed is not None else secrets.randbits(32)
        trials = _build_trials(body.experiment, seed, registry)
        session = Session(
            id=secrets.token_hex(8),
            experiment=body.experiment,
            seed=seed,
            trials=trials,
            created_at=time.time(),
        )
        store.record({"type": "session_created", "session": session.to_dict()})
        return {
            "id": session.id,
            "experiment": session.experiment,
            "seed": seed,
            "n_trials": len(trials),
            **instructions_for(session.experiment),
        }

    def trial_payload(session: Session) -> dict:
        if session.cursor >= len(session.trials):
            return {"done": True, "n_trials": len(session.trials)}
        trial = session.trials[session.cursor]
        base = {
            "done": False,
            "trial": session.cursor,
            "n_trials": len(session.trials),
            "kind": trial.kind,
            "stage": trial.stage,
        }
        if trial.kind == "digitmat":
            problem = registry.digitmat_by_id[trial.ref]
            base["display"] = render_matrix_display(problem.grid)
            if trial.stage == "choice":
                base["choices"] = [" ".join(c.to_strings()) for c in problem.choices]
        elif trial.kind == "letterstring":
            problem = registry.letterstring_by_id[trial.ref]
            base["display"] = [
                f"[{' '.join(problem.source_left)}] [{' '.join(problem.source_right)}]",
                f"[{' '.join(problem.target_stem)}] [ ? ]",
            ]
        else:
            group = registry.stories[trial.ref]
            item = group[trial.payload["condition"]]
            first_correct = trial.payload["correct_first"]
            base["story1"] = item.source
            base["storyA"] = item.correct_target if first_correct else item.incorrect_target
            base["storyB"] = item.incorrect_target if first_correct else item.correct_target
            base["options"] = ["A", "B", "Both"]
        return base

    @app.get("/sessions/{session_id}/next")
    def next_trial(session_id: str) -> dict:
        return trial_payload(get_session(session_id))

    def score_digitmat_free(problem: MatrixProblem, text: str) -> tuple[bool, list[str]]:
        try:
            cell = parse_generated_answer(text, problem.kind)
        except UnparseableAnswer as exc:
            raise HTTPException(422, f"malformed answer text: {exc}")
        return answers_equivalent(problem.kind, problem.answer, cell), [str(d) for d in cell.digits]

    @app.post("/sessions/{session_id}/response")
    def submit_response(session_id: str, body: ResponseBody) -> dict:
        with session_lock(session_id):
            session = get_session(session_id)
            if session.cursor >= len(session.trials):
                raise HTTPException(409, "session already complete")
            trial = session.trials[session.cursor]
            response: dict = {"latency_ms": body.latencyMs, "at": time.time()}

            if trial.kind == "digitmat":
                problem = registry.digitmat_by_id[trial.ref]
                if body.choiceIndex is not None and trial.stage == "free":
                    raise HTTPException(409, "free response required before choice")
                if trial.stage == "free":
                    if body.freeResponse is None:
                        raise HTTPException(422, "freeResponse required")
                    correct, parsed = score_digitmat_free(problem, body.freeResponse)
                    response.update(
                        {"mode": "generative", "raw": body.freeResponse, "parsed": parsed, "correct": correct}
                    )
                    next_stage, cursor = "choice", session.cursor
                elif trial.stage == "choice":
                    if body.choiceIndex is None:
                        raise HTTPException(422, "choiceIndex required")
                    if not 0 <= body.choiceIndex < len(problem.choices):
                        raise HTTPException(422, "choiceIndex out of range")
                    correct = answers_equivalent(
                        problem.kind, problem.answer, problem.choices[body.choiceIndex]
                    )
                    response.update(
                        {"mode": "multiple_choice", "choice": body.choiceIndex, "correct": correct}
                    )
                    next_stage, cursor = "done", session.cursor + 1
                else:
                    raise HTTPException(409, "trial already answered")

            elif trial.kind == "letterstring":
                if trial.stage != "free":
                    raise HTTPException(409, "trial already answered")
                if body.freeResponse is None:
                    raise HTTPException(422, "freeResponse required")
                tokens = tuple(t.lower() for t in body.freeResponse.split())
                if not tokens:
                    raise HTTPException(422, "empty answer")
                problem = registry.letterstring_by_id[trial.ref]
                correct = letterstring_answers_match(problem.answer, tokens)
                response.update(
                    {"mode": "generative", "raw": body.freeResponse, "parsed": list(tokens), "correct": correct}
                )
                next_stage, cursor = "done", session.cursor + 1

            else:  # story
                if trial.stage != "story_choice":
                    raise HTTPException(409, "trial already answered")
                if body.storyChoice is None:
                    raise HTTPException(422, "storyChoice required")
                choice = body.storyChoice.strip().lower()
                if choice not in ("a", "b", "both"):
                    raise HTTPException(422, "storyChoice must be A, B, or Both")
                correct_label = "a" if trial.payload["correct_first"] else "b"
                response.update(
                    {"mode": "story_choice", "choice": choice, "correct": choice == correct_label}
                )
                next_stage, cursor = "done", session.cursor + 1

            completed = cursor >= len(session.trials)
            store.record(
                {
                    "type": "response",
                    "session_id": session.id,
                    "trial": session.cursor,
                    "response": response,
                    "next_stage": next_stage,
                    "cursor": cursor,
                    "completed_at": time.time() if completed else None,
                }
            )
            return {
                "accepted": True,
                "correct": response["correct"],
                "trial_complete": next_stage == "done",
                "done": completed,
            }

    def export_rows(session: Session) -> list[dict]:
        rows = []
        agent = f"human:{session.id}"
        for trial in session.trials:
            for response in trial.responses:
                if trial.kind == "digitmat":
                    problem = registry.digitmat_by_id[trial.ref]
                    extra = {"subtype": problem.id.subtype, **problem.metadata}
                elif trial.kind == "letterstring":
                    problem = registry.letterstring_by_id[trial.ref]
                    extra = {
                        "subtype": problem.id.subtype,
                        "transformation": problem.transformation,
                        "generalizations": list(problem.generalizations),
                        "domain": problem.domain,
                    }
                else:
                    extra = {"condition": trial.payload["condition"],
                             "order": "correct_first" if trial.payload["correct_first"] else "incorrect_first"}
                rows.append(
                    {
                        "problem_id": trial.ref,
                        "family": trial.kind if trial.kind != "digitmat" else "digitmat",
                        "mode": response["mode"],
                        "agent": agent,
                        "raw_response": response.get("raw", response.get("choice", "")),
                        "parsed_answer": response.get("parsed"),
                        "selected_choice": response.get("choice") if response["mode"] == "multiple_choice" else None,
                        "choice_scores": None,
                        "correct": response["correct"],
                        "prompt_sha256": "",
                        "elapsed_ms": response.get("latency_ms") or 0.0,
                        "error": None,
                        **extra,
                    }
                )
        return rows

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str, format: str = Query("jsonl")) -> PlainTextResponse:
        session = get_session(session_id)
        rows = export_rows(session)
        if format == "jsonl":
            text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
            return PlainTextResponse(text, media_type="application/jsonl")
        if format == "csv":
            fields = [
                "problem_id", "family", "mode", "agent", "raw_response", "parsed_answer",
                "selected_choice", "correct", "elapsed_ms", "subtype", "condition",
            ]
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore")
            writer.writeheader()
            for r in rows:
                row = dict(r)
                if isinstance(row.get("parsed_answer"), list):
                    row["parsed_answer"] = " ".join(str(t) for t in row["parsed_answer"])
                writer.writerow(row)
            return PlainTextResponse(buf.getvalue(), media_type="text/csv")
        raise HTTPException(400, "format must be jsonl or csv")

    return app
