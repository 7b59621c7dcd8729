"""Command-line entry point binding generation, solving, evaluation,
statistics, data validation, prompt export, and the session service.

Exit codes: 0 success, 1 usage/validation failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core import Family, ProblemSet, answers_equivalent
from .digitmat import build_dataset, resolve_subtypes
from .harness import (
    CachedModel,
    EndpointClient,
    EvalRecord,
    OracleModel,
    UniformRandomModel,
    FixedTextModel,
    make_scripted_model,
    read_records,
    run_digitmat_experiment,
    run_letterstring_experiment,
    run_progressive_experiment,
    run_story_experiment,
    run_verbal_experiment,
    write_records,
    export_problem_solving_prompts,
)
from .letterstring import build_letterstring_dataset
from .semantic import load_story_items, load_verbal_dataset
from .solver import NoConsistentRule, solve
from .stats import summarize

logger = logging.getLogger(__name__)


def _add_gen(sub: argparse._SubParsersAction) -> None:
    gen = sub.add_parser("gen", help="generate problem datasets")
    gen_sub = gen.add_subparsers(dest="family", required=True)

    dm = gen_sub.add_parser("digitmat", help="digit-matrix problems")
    dm.add_argument("--subtypes", default="exp1", help="bundle name (exp1, exp2) or comma list")
    dm.add_argument("--n", type=int, default=100, help="instances per subtype")
    dm.add_argument("--seed", type=int, required=True)
    dm.add_argument("--out", required=True)

    ls = gen_sub.add_parser("letterstring", help="letter-string problems")
    ls.add_argument("--spec", choices=["full", "eval"], default="full")
    ls.add_argument("--seed", type=int, required=True)
    ls.add_argument("--out", required=True)


def _build_model(spec: str, problems: ProblemSet | None, args) -> object:
    if spec.startswith("mock:"):
        kind = spec.split(":", 1)[1]
        if kind == "oracle":
            matrix = problems.problems if problems and problems.family is Family.DIGIT_MATRIX else ()
            letters = problems.problems if problems and problems.family is Family.LETTER_STRING else ()
            story = load_story_items(args.stories) if getattr(args, "stories", None) else ()
            verbal = (
                load_verbal_dataset(args.data, args.dataset)
                if getattr(args, "data", None) and getattr(args, "dataset", None)
                else ()
            )
            return OracleModel(matrix, letters, story_items=story, verbal_items=verbal)
        if kind.startswith("random"):
            seed = int(kind.split(":", 1)[1]) if ":" in kind else 0
            return UniformRandomModel(seed)
        if kind.startswith("fixed:"):
            return FixedTextModel(kind.split(":", 1)[1])
        return make_scripted_model(kind)
    if spec.startswith("endpoint:"):
        import os

        url = spec.split(":", 1)[1]
        client = EndpointClient(url, model=args.endpoint_model, api_key=os.environ.get("ANALOGYKIT_API_KEY"))
        cache = Path(args.cache) if args.cache else None
        return CachedModel(client, path=cache)
    raise SystemExit(f"unknown model spec {spec!r} (use mock:oracle, mock:random[:seed], "
                     f"mock:fixed:<text>, or endpoint:<url>)")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="analogykit")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_gen(sub)

    sl = sub.add_parser("solve", help="run the rule-induction oracle over a dataset")
    sl.add_argument("--in", dest="inp", required=True)
    sl.add_argument("--report", choices=["ambiguity", "full"], default="ambiguity")
    sl.add_argument("--out", default=None)

    ev = sub.add_parser("eval", help="evaluate a model on a dataset")
    ev.add_argument("--family", choices=["digitmat", "letterstring", "verbal", "story"], required=True)
    ev.add_argument("--mode", choices=["generative", "mc", "both"], default="both")
    ev.add_argument("--model", required=True, help="mock:oracle | mock:random[:seed] | mock:fixed:<text> | endpoint:<url>")
    ev.add_argument("--in", dest="inp", help="problem dataset (digitmat/letterstring)")
    ev.add_argument("--data", help="verbal dataset file")
    ev.add_argument("--dataset", help="verbal dataset name (ucla_vat, sternberg, sat, jones)")
    ev.add_argument("--stories", help="story materials file")
    ev.add_argument("--format", choices=["standard", "noprompt", "sentence"], default="standard")
    ev.add_argument("--progressive", action="store_true", help="easy-to-hard recursive-context protocol")
    ev.add_argument("--window", type=int, default=4096, help="context window in tokens")
    ev.add_argument("--runs", type=int, default=1, help="independent progressive runs")
    ev.add_argument("--endpoint-model", default="", help="model name passed to the endpoint")
    ev.add_argument("--cache", help="response cache file (endpoint models)")
    ev.add_argument("--out", required=True)

    st = sub.add_parser("stats", help="summarize evaluation records")
    st.add_argument("--records", required=True)
    st.add_argument("--group", default="subtype", help="record field to group by (subtype, rule_count, problem_type, condition, mode, agent, ...)")
    st.add_argument("--format", choices=["csv", "json"], default="csv")
    st.add_argument("--out", default=None)

    vd = sub.add_parser("validate-data", help="validate a user-supplied dataset file")
    vd.add_argument("--dataset", required=True, help="ucla_vat | sternberg | sat | jones | stories")
    vd.add_argument("--in", dest="inp", required=True)

    sv = sub.add_parser("serve", help="run the participant session service")
    sv.add_argument("--port", type=int, default=8000)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--digitmat", help="digit-matrix dataset file")
    sv.add_argument("--letterstring", help="letter-string dataset file")
    sv.add_argument("--stories", help="story materials file")
    sv.add_argument("--store", required=True, help="event-log directory")
    sv.add_argument("--ui", help="built web-UI directory to serve at /ui")

    xp = sub.add_parser("export-prompts", help="write the qualitative problem-solving prompt templates")
    xp.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")

    try:
        return _dispatch(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        logger.exception("runtime failure")
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


def _load_problem_set(path: str) -> ProblemSet:
    return ProblemSet.from_json(Path(path).read_text(encoding="utf-8"))


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "gen":
        if args.family == "digitmat":
            subtypes = resolve_subtypes(args.subtypes)
            ps = build_dataset(subtypes, args.n, args.seed)
        else:
            ps = build_letterstring_dataset(args.seed, eval_subset=args.spec == "eval")
        Path(args.out).write_text(ps.to_json(), encoding="utf-8")
        print(f"wrote {len(ps.problems)} problems to {args.out}")
        if ps.metadata.get("shortfall"):
            print(f"shortfall: {ps.metadata['shortfall']}")
        return 0

    if args.command == "solve":
        ps = _load_problem_set(args.inp)
        report = []
        ambiguous = 0
        mismatched = 0
        for p in ps.problems:
            try:
                result = solve(p.grid)
                ok = answers_equivalent(p.kind, p.answer, result.answer)
                entry = {
                    "id": str(p.id),
                    "unique": result.unique,
                    "answer": [str(d) for d in result.answer.digits],
                    "matches_dataset": ok,
                }
                if args.report == "full":
                    entry["interpretations"] = [list(i.rules) for _, i in result.answers]
                ambiguous += 0 if result.unique else 1
                mismatched += 0 if ok else 1
            except NoConsistentRule:
                entry = {"id": str(p.id), "unique": False, "answer": None, "matches_dataset": False}
                ambiguous += 1
                mismatched += 1
            report.append(entry)
        text = json.dumps({"problems": report, "ambiguous": ambiguous, "mismatched": mismatched}, indent=1)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        print(f"solved {len(report)} problems: {ambiguous} ambiguous, {mismatched} mismatched")
        return 0 if ambiguous == 0 and mismatched == 0 else 1

    if args.command == "eval":
        records: list[EvalRecord] = []
        if args.family in ("digitmat", "letterstring"):
            if not args.inp:
                raise ValueError("--in is required for digitmat/letterstring evaluation")
            ps = _load_problem_set(args.inp)
            model = _build_model(args.model, ps, args)
            if args.family == "digitmat":
                if args.progressive:
                    by_instance: dict[int, list] = {}
                    for p in ps.problems:
                        by_instance.setdefault(p.id.instance, []).append(p)
                    for run in range(args.runs):
                        ordered = by_instance.get(run)
                        if not ordered:
                            raise ValueError(f"dataset has no instance {run} for progressive run")
                        records.extend(
                            run_progressive_experiment(
                                model, ordered, context_window_tokens=args.window, run_index=run
                            )
                        )
                else:
                    records = run_digitmat_experiment(model, ps.problems, mode=args.mode)
            else:
                records = run_letterstring_experiment(model, ps.problems, format=args.format)
        elif args.family == "verbal":
            if not (args.data and args.dataset):
                raise ValueError("--data and --dataset are required for verbal evaluation")
            items = load_verbal_dataset(args.data, args.dataset)
            model = _build_model(args.model, None, args)
            records = run_verbal_experiment(model, items)
        else:
            if not args.stories:
                raise ValueError("--stories is required for story evaluation")
            items = load_story_items(args.stories)
            model = _build_model(args.model, None, args)
            records = run_story_experiment(model, items)
        write_records(records, args.out)
        n_correct = sum(r.correct for r in records)
        print(f"wrote {len(records)} records to {args.out} ({n_correct} correct)")
        return 0

    if args.command == "stats":
        records = read_records(args.records)
        table = summarize(records, args.group)
        text = table.to_csv() if args.format == "csv" else json.dumps(table.to_json_rows(), indent=1)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            print(f"wrote {len(table.rows)} groups to {args.out}")
        else:
            print(text, end="")
        return 0

    if args.command == "validate-data":
        if args.dataset == "stories":
            items = load_story_items(args.inp)
            groups = {i.group_id for i in items}
            print(f"ok: {len(items)} story items across {len(groups)} groups")
        else:
            items = load_verbal_dataset(args.inp, args.dataset)
            print(f"ok: {len(items)} items")
        return 0

    if args.command == "serve":
        import uvicorn

        from .service import DatasetRegistry, EventStore, create_app

        registry = DatasetRegistry.load(
            digitmat_path=args.digitmat,
            letterstring_path=args.letterstring,
            stories_path=args.stories,
        )
        ui_dir = Path(args.ui) if args.ui else None
        app = create_app(registry, EventStore(Path(args.store)), ui_dir=ui_dir)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return 0

    if args.command == "export-prompts":
        written = export_problem_solving_prompts(args.out)
        print(f"wrote {len(written)} prompt templates to {args.out}")
        return 0

    raise ValueError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
