import json
from collections import Counter

import pytest
from fastapi.testclient import TestClient

from analogykit.digitmat import build_dataset
from analogykit.letterstring import build_letterstring_dataset
from analogykit.service import DatasetRegistry, EventStore, create_app

EXPECTED_RECORD_KEYS = {
    "problem_id",
    "family",
    "mode",
    "agent",
    "raw_response",
    "parsed_answer",
    "selected_choice",
    "choice_scores",
    "correct",
    "prompt_sha256",
    "elapsed_ms",
    "error",
}


@pytest.fixture(scope="module")
def registry(synthetic_story_items, tmp_path_factory):
    from analogykit.digitmat import CATALOG

    root = tmp_path_factory.mktemp("datasets")
    dm = build_dataset(list(CATALOG), 2, seed=5)
    (root / "dm.json").write_text(dm.to_json())
    ls = build_letterstring_dataset(seed=6, eval_subset=True)
    (root / "ls.json").write_text(ls.to_json())
    groups = {}
    for item in synthetic_story_items:
        g = groups.setdefault(item.group_id, {"id": item.group_id, "source": item.source})
        g[item.condition] = {"correct": item.correct_target, "incorrect": item.incorrect_target}
    (root / "stories.json").write_text(json.dumps({"groups": list(groups.values())}))
    return DatasetRegistry.load(
        digitmat_path=root / "dm.json",
        letterstring_path=root / "ls.json",
        stories_path=root / "stories.json",
    )


@pytest.fixture()
def client(registry, tmp_path):
    store = EventStore(tmp_path / "store")
    app = create_app(registry, store)
    with TestClient(app) as c:
        c.store = store
        yield c


def _create(client, experiment, seed=11):
    resp = client.post("/sessions", json={"experiment": experiment, "seed": seed})
    assert resp.status_code == 201, resp.text
    return resp.json()


def test_create_sessions_trial_counts(client):
    assert _create(client, "digitmat32")["n_trials"] == 32
    assert _create(client, "digitmat42_ordered")["n_trials"] == 42
    assert _create(client, "letterstring28")["n_trials"] == 28
    assert _create(client, "story18")["n_trials"] == 18


def test_unknown_experiment_rejected(client):
    resp = client.post("/sessions", json={"experiment": "nope"})
    assert resp.status_code == 400


def test_instructions_and_example_attached(client):
    session = _create(client, "digitmat32")
    assert "instructions" in session and session["example"]["display"][2][2] == "[ ? ]"
    ls = _create(client, "letterstring28")
    assert ls["example"]["display"] == ["[a a a] [b b b]", "[c c c] [ ? ]"]


def test_digitmat_flow_free_then_choice(client):
    session = _create(client, "digitmat32")
    sid = session["id"]
    first = client.get(f"/sessions/{sid}/next").json()
    assert first["stage"] == "free" and first["kind"] == "digitmat"
    assert "choices" not in first
    assert len(first["display"]) == 3 and first["display"][2][2] == "[ ? ]"
    # idempotent until a response is stored
    assert client.get(f"/sessions/{sid}/next").json() == first

    # choice before free response is rejected
    resp = client.post(f"/sessions/{sid}/response", json={"choiceIndex": 0})
    assert resp.status_code == 409

    resp = client.post(f"/sessions/{sid}/response", json={"freeResponse": "1 2 3", "latencyMs": 800})
    assert resp.status_code == 200
    ack = resp.json()
    assert ack["accepted"] and not ack["trial_complete"]

    staged = client.get(f"/sessions/{sid}/next").json()
    assert staged["stage"] == "choice" and len(staged["choices"]) == 8
    resp = client.post(f"/sessions/{sid}/response", json={"choiceIndex": 3, "latencyMs": 500})
    assert resp.status_code == 200
    assert resp.json()["trial_complete"]
    assert client.get(f"/sessions/{sid}/next").json()["trial"] == 1


def test_malformed_answers_rejected(client):
    sid = _create(client, "digitmat32")["id"]
    assert client.post(f"/sessions/{sid}/response", json={"freeResponse": "banana"}).status_code == 422
    assert client.post(f"/sessions/{sid}/response", json={}).status_code == 422
    client.post(f"/sessions/{sid}/response", json={"freeResponse": "1"})
    assert client.post(f"/sessions/{sid}/response", json={"choiceIndex": 99}).status_code == 422


def test_unknown_session_404(client):
    assert client.get("/sessions/bogus/next").status_code == 404
    assert client.get("/sessions/bogus/export").status_code == 404


def _complete_digitmat_session(client, registry, seed=77):
    sid = _create(client, "digitmat32", seed=seed)["id"]
    for _ in range(32):
        trial = client.get(f"/sessions/{sid}/next").json()
        problem = registry.digitmat_by_id[_trial_ref(client, sid)]
        answer_text = " ".join(str(d) for d in problem.answer.digits)
        client.post(f"/sessions/{sid}/response", json={"freeResponse": answer_text})
        staged = client.get(f"/sessions/{sid}/next").json()
        correct_index = problem.correct_choice_index()
        client.post(f"/sessions/{sid}/response", json={"choiceIndex": correct_index})
    assert client.get(f"/sessions/{sid}/next").json()["done"]
    return sid


def _trial_ref(client, sid):
    session = client.store.sessions[sid]
    return session.trials[session.cursor].ref


def test_full_session_and_export(client, registry):
    import jsonschema

    from analogykit.harness import EVAL_RECORD_SCHEMA

    sid = _complete_digitmat_session(client, registry)
    resp = client.get(f"/sessions/{sid}/export", params={"format": "jsonl"})
    rows = [json.loads(line) for line in resp.text.strip().split("\n")]
    assert len(rows) == 64
    modes = Counter(r["mode"] for r in rows)
    assert modes == Counter({"generative": 32, "multiple_choice": 32})
    assert all(EXPECTED_RECORD_KEYS <= set(r) for r in rows)
    for row in rows:
        jsonschema.validate(row, EVAL_RECORD_SCHEMA)
    assert all(r["correct"] for r in rows)
    assert all(r["agent"] == f"human:{sid}" for r in rows)

    csv_resp = client.get(f"/sessions/{sid}/export", params={"format": "csv"})
    lines = csv_resp.text.strip().split("\n")
    assert lines[0].startswith("problem_id,family,mode,agent")
    assert len(lines) == 65


def test_letterstring_session_composition(client):
    sid = _create(client, "letterstring28", seed=3)["id"]
    session = client.store.sessions[sid]
    strata = Counter(ref.split(":")[1].split("_")[0] for ref in [t.ref for t in session.trials])
    assert strata == Counter({"gen0": 6, "gen1": 6, "gen2": 6, "gen3": 6, "real": 4})
    trial = client.get(f"/sessions/{sid}/next").json()
    assert trial["kind"] == "letterstring"
    resp = client.post(f"/sessions/{sid}/response", json={"freeResponse": "a b c"})
    assert resp.status_code == 200


def test_story_trial_flow(client):
    sid = _create(client, "story18", seed=8)["id"]
    session = client.store.sessions[sid]
    conditions = Counter(t.payload["condition"] for t in session.trials)
    assert conditions == Counter({"near": 9, "far": 9})
    trial = client.get(f"/sessions/{sid}/next").json()
    assert trial["options"] == ["A", "B", "Both"]
    assert {"story1", "storyA", "storyB"} <= set(trial)
    resp = client.post(f"/sessions/{sid}/response", json={"storyChoice": "Both"})
    assert resp.status_code == 200
    assert resp.json()["correct"] is False


def test_story_counterbalance_across_sessions(client):
    """Across many seeds the correct target lands in the Story A slot about
    half the time."""
    a_count = total = 0
    for seed in range(40):
        sid = _create(client, "story18", seed=seed)["id"]
        for trial in client.store.sessions[sid].trials:
            a_count += trial.payload["correct_first"]
            total += 1
    from analogykit.stats import binomial_ci

    lo, hi = binomial_ci(a_count, total)
    assert lo <= 0.5 <= hi, (a_count, total)


def test_no_answer_leakage(client):
    for experiment, seed in (("digitmat32", 1), ("letterstring28", 2)):
        sid = _create(client, experiment, seed=seed)["id"]
        payload = client.get(f"/sessions/{sid}/next").json()
        blob = json.dumps(payload).lower()
        assert '"answer"' not in blob
        if experiment == "digitmat32":
            assert "choices" not in payload


def test_persistence_replay(registry, tmp_path, synthetic_story_items):
    store_dir = tmp_path / "store"
    store = EventStore(store_dir)
    app = create_app(registry, store)
    with TestClient(app) as client:
        client.store = store
        sid = _create(client, "digitmat32", seed=12)["id"]
        client.post(f"/sessions/{sid}/response", json={"freeResponse": "4 5 6"})
        state = {s_id: s.to_dict() for s_id, s in store.sessions.items()}

    replayed = EventStore(store_dir)
    assert {s_id: s.to_dict() for s_id, s in replayed.sessions.items()} == state

    # responses and cursor survive; the replayed app continues the session
    app2 = create_app(registry, replayed)
    with TestClient(app2) as client2:
        follow = client2.get(f"/sessions/{sid}/next").json()
        assert follow["stage"] == "choice"


def test_snapshot_written_and_used(registry, tmp_path):
    store_dir = tmp_path / "store"
    store = EventStore(store_dir)
    app = create_app(registry, store)
    with TestClient(app) as client:
        client.store = store
        for seed in range(30):
            _create(client, "story18", seed=seed)
        for sid in list(store.sessions):
            client.post(f"/sessions/{sid}/response", json={"storyChoice": "A"})
    assert (store_dir / "snapshot.json").exists()
    replayed = EventStore(store_dir)
    assert len(replayed.sessions) == 30
    assert all(s.cursor == 1 for s in replayed.sessions.values())
