import json

from analogykit.cli import main
from analogykit.harness import read_records


def run(argv):
    return main(argv)


def test_gen_solve_eval_stats_pipeline(tmp_path, capsys):
    problems = tmp_path / "p.json"
    records = tmp_path / "r.jsonl"
    table = tmp_path / "t.csv"

    assert run(["gen", "digitmat", "--subtypes", "exp1", "--n", "2", "--seed", "7", "--out", str(problems)]) == 0
    payload = json.loads(problems.read_text())
    assert len(payload["problems"]) == 64

    assert run(["solve", "--in", str(problems)]) == 0
    out = capsys.readouterr().out
    assert "0 ambiguous, 0 mismatched" in out

    assert run([
        "eval", "--family", "digitmat", "--mode", "both", "--model", "mock:oracle",
        "--in", str(problems), "--out", str(records),
    ]) == 0
    rows = read_records(records)
    assert len(rows) == 128 and all(r["correct"] for r in rows)

    assert run(["stats", "--records", str(records), "--group", "subtype", "--out", str(table)]) == 0
    lines = table.read_text().strip().split("\n")
    assert len(lines) == 33  # header + 32 subtypes
    assert all(line.split(",")[3] == "1.000000" for line in lines[1:])


def test_gen_determinism(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        assert run(["gen", "digitmat", "--subtypes", "one_constant_row,logic_xor_aligned",
                    "--n", "4", "--seed", "99", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_letterstring_eval_subset(tmp_path):
    out = tmp_path / "ls.json"
    assert run(["gen", "letterstring", "--spec", "eval", "--seed", "3", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["problems"]) == 1400


def test_letterstring_eval_sentence_format(tmp_path):
    problems = tmp_path / "ls.json"
    records = tmp_path / "r.jsonl"
    assert run(["gen", "letterstring", "--spec", "eval", "--seed", "4", "--out", str(problems)]) == 0
    assert run([
        "eval", "--family", "letterstring", "--model", "mock:oracle", "--format", "sentence",
        "--in", str(problems), "--out", str(records),
    ]) == 0
    rows = read_records(records)
    assert len(rows) == 1400 and all(r["correct"] for r in rows)


def test_progressive_cli(tmp_path):
    problems = tmp_path / "p.json"
    records = tmp_path / "r.jsonl"
    assert run(["gen", "digitmat", "--subtypes", "exp2", "--n", "2", "--seed", "6", "--out", str(problems)]) == 0
    assert run([
        "eval", "--family", "digitmat", "--model", "mock:oracle", "--in", str(problems),
        "--progressive", "--window", "512", "--runs", "2", "--out", str(records),
    ]) == 0
    rows = read_records(records)
    assert len(rows) == 2 * 42 * 2
    assert {r["run"] for r in rows} == {0, 1}


def test_story_eval_cli(tmp_path, synthetic_story_items):
    stories = tmp_path / "stories.json"
    groups = {}
    for item in synthetic_story_items:
        g = groups.setdefault(item.group_id, {"id": item.group_id, "source": item.source})
        g[item.condition] = {"correct": item.correct_target, "incorrect": item.incorrect_target}
    stories.write_text(json.dumps({"groups": list(groups.values())}))
    records = tmp_path / "r.jsonl"
    assert run([
        "eval", "--family", "story", "--model", "mock:fixed:Story A is the better analogy to Story 1.",
        "--stories", str(stories), "--out", str(records),
    ]) == 0
    rows = read_records(records)
    assert len(rows) == 72
    assert sum(r["correct"] for r in rows) == 36

    assert run(["validate-data", "--dataset", "stories", "--in", str(stories)]) == 0


def test_verbal_eval_cli(tmp_path):
    data = tmp_path / "vat.json"
    items = [
        {"A": f"a{i}", "B": f"b{i}", "C": f"c{i}", "choices": [f"g{i}", f"w{i}"], "correct": 0,
         "relation": ["categorical", "function", "antonym", "synonym"][i % 4]}
        for i in range(80)
    ]
    data.write_text(json.dumps({"dataset": "ucla_vat", "items": items}))
    records = tmp_path / "r.jsonl"
    assert run([
        "eval", "--family", "verbal", "--model", "mock:oracle", "--data", str(data),
        "--dataset", "ucla_vat", "--out", str(records),
    ]) == 0
    rows = read_records(records)
    assert len(rows) == 80 and all(r["correct"] for r in rows)
    assert run(["validate-data", "--dataset", "ucla_vat", "--in", str(data)]) == 0


def test_usage_errors_exit_one(tmp_path):
    assert run(["gen", "digitmat", "--subtypes", "not_a_subtype", "--n", "1",
                "--seed", "1", "--out", str(tmp_path / "x.json")]) == 1
    assert run(["eval", "--family", "digitmat", "--model", "mock:oracle",
                "--out", str(tmp_path / "r.jsonl")]) == 1
    assert run(["validate-data", "--dataset", "ucla_vat", "--in", str(tmp_path / "missing.json")]) == 1


def test_export_prompts_cli(tmp_path):
    out = tmp_path / "prompts"
    assert run(["export-prompts", "--out", str(out)]) == 0
    assert len(list(out.glob("*.txt"))) == 9
