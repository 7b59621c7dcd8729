from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from analogykit.letterstring import (
    GENERALIZATIONS,
    REAL_WORLD_SEQUENCES,
    REAL_WORLD_TRANSFORMATIONS,
    TRANSFORMATIONS,
    DerivationConflict,
    InfeasibleAlphabetRange,
    LetterStringProblem,
    PreconditionViolated,
    apply_transformation,
    build_letterstring_dataset,
    derive_answer,
    generate_problem,
    generate_target,
    letterstring_answers_match,
    parse_generated_letterstring,
    render_letterstring_prompt,
    verify_problem,
)


# ---------------------------------------------------------------------------
# transformations: the six reference rewrites
# ---------------------------------------------------------------------------


def test_apply_reference_examples():
    assert apply_transformation("a b c d".split(), "extend") == tuple("a b c d e".split())
    assert apply_transformation("a b c d".split(), "successor") == tuple("a b c e".split())
    assert apply_transformation("b c d e".split(), "predecessor") == tuple("a c d e".split())
    assert apply_transformation("a b b c d e".split(), "remove_redundant") == tuple("a b c d e".split())
    assert apply_transformation("a b c w e".split(), "fix_alphabetic") == tuple("a b c d e".split())
    assert apply_transformation("a d c b e".split(), "sort") == tuple("a b c d e".split())


def test_apply_precondition_failures():
    with pytest.raises(PreconditionViolated):
        apply_transformation("a c b".split(), "successor")  # not a run
    with pytest.raises(PreconditionViolated):
        apply_transformation("a b c d e".split(), "remove_redundant")  # nothing doubled
    with pytest.raises(PreconditionViolated):
        apply_transformation("a b c d e".split(), "sort")  # already sorted
    with pytest.raises(InfeasibleAlphabetRange):
        apply_transformation("w x y z".split(), "extend")


def test_apply_interval_two():
    assert apply_transformation("i k m o".split(), "successor", interval=2) == tuple("i k m q".split())
    assert apply_transformation("c e g i".split(), "predecessor", interval=2) == tuple("a e g i".split())


# ---------------------------------------------------------------------------
# generalizations
# ---------------------------------------------------------------------------


def test_generate_target_reference_examples():
    stem = tuple("i j k l".split())
    assert generate_target(stem, (), 0) == stem
    assert generate_target(stem, ("letter_to_number",), 0) == ("9", "10", "11", "12")
    assert generate_target(stem, ("grouping",), 0) == tuple("i i j j k k l l".split())
    assert generate_target(stem, ("longer_target",), 0) == tuple("i j k l m n o p".split())
    assert generate_target(stem, ("reversed_order",), 0) == tuple("l k j i".split())
    assert generate_target(stem, ("interleaved",), 0) == tuple("i x j x k x l x".split())
    assert generate_target(stem, ("larger_interval",), 0) == tuple("i k m o".split())


def test_generate_target_composition_order():
    stem = tuple("i j".split())
    # grouping before interleaving before reversal before letter-to-number
    assert generate_target(stem, ("grouping", "interleaved"), 0) == tuple("i x i x j x j x".split())
    assert generate_target(stem, ("reversed_order", "letter_to_number"), 0) == ("10", "9")


def test_generate_target_infeasible_range():
    with pytest.raises(InfeasibleAlphabetRange):
        generate_target(tuple("t u v w".split()), ("longer_target", "larger_interval"), 0)


def test_generate_target_distinct_kinds_required():
    with pytest.raises(ValueError):
        generate_target(tuple("a b c d".split()), ("grouping", "grouping"), 0)


# ---------------------------------------------------------------------------
# answer derivation
# ---------------------------------------------------------------------------


def test_derive_reference_examples():
    assert derive_answer(tuple("i j k l".split()), "successor", ()) == tuple("i j k m".split())
    assert derive_answer(tuple("i k m o".split()), "successor", ("larger_interval",)) == tuple("i k m q".split())
    assert derive_answer(("cold", "cool", "warm"), "successor", (), domain="temperature") == (
        "cold",
        "cool",
        "hot",
    )


def test_derive_reversed_predecessor_modifies_final_token():
    stem = tuple("l k j i".split())  # reversed [i j k l]
    answer = derive_answer(stem, "predecessor", ("reversed_order",))
    assert answer == tuple("l k j h".split())
    assert answer[:-1] == stem[:-1]


def test_derive_grouping_acts_on_groups():
    answer = derive_answer(tuple("i i j j k k l l".split()), "successor", ("grouping",))
    assert answer == tuple("i i j j k k m m".split())


def test_derive_rejects_interval_mismatch():
    with pytest.raises(DerivationConflict):
        derive_answer(tuple("i j k l".split()), "successor", ("larger_interval",))


def test_real_world_pairs():
    assert derive_answer(("cool", "warm", "hot"), "predecessor", (), domain="temperature") == (
        "cold",
        "warm",
        "hot",
    )
    assert derive_answer(("love", "like", "dislike"), "extend", (), domain="affection") == (
        "love",
        "like",
        "dislike",
        "hate",
    )
    assert derive_answer(("queen", "jack", "king", "ace"), "sort", (), domain="cards") == (
        "jack",
        "queen",
        "king",
        "ace",
    )


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def test_verifier_accepts_generated_and_rejects_corrupted():
    p = generate_problem("successor", ("grouping", "reversed_order"), 7)
    assert verify_problem(p)
    corrupted = LetterStringProblem(
        id=p.id,
        source_left=p.source_left,
        source_right=p.source_right,
        target_stem=p.target_stem,
        answer=p.answer[:-1] + (p.answer[0],),
        transformation=p.transformation,
        generalizations=p.generalizations,
        domain=p.domain,
    )
    assert not verify_problem(corrupted)


def test_verifier_zero_generalization_equals_direct_application():
    for seed in range(10):
        p = generate_problem("sort", (), seed)
        assert p.answer == apply_transformation(p.target_stem, "sort")


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(TRANSFORMATIONS),
    st.sets(st.sampled_from(GENERALIZATIONS), min_size=0, max_size=3),
    st.integers(0, 2**32),
)
def test_generated_problems_verify(kind, gens, seed):
    ordered = tuple(sorted(gens, key=GENERALIZATIONS.index))
    p = generate_problem(kind, ordered, seed)
    assert verify_problem(p)
    # the source pair always stays plain letters at interval 1
    assert apply_transformation(p.source_left, kind) == p.source_right
    assert all(t.isalpha() and len(t) == 1 for t in p.source_left)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_interleave_never_collides_with_pattern(seed):
    p = generate_problem("successor", ("interleaved",), seed)
    pattern_tokens = p.target_stem[0::2]
    assert "x" not in pattern_tokens
    assert all(t == "x" for t in p.target_stem[1::2])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_source_and_target_parameters_independent(seed):
    """Anomaly positions are sampled separately for source and target."""
    ps = [generate_problem("remove_redundant", (), seed + i) for i in range(12)]

    def dup_index(seq):
        return next(i for i in range(len(seq) - 1) if seq[i] == seq[i + 1])

    positions = {(dup_index(p.source_left), dup_index(p.target_stem)) for p in ps}
    assert len(positions) > 1 or len(ps) < 2


def test_letter_to_number_stays_positive():
    for seed in range(15):
        p = generate_problem("predecessor", ("letter_to_number",), seed)
        assert all(int(t) >= 1 for t in p.answer)


# ---------------------------------------------------------------------------
# prompts and parsing
# ---------------------------------------------------------------------------


def _reference_problem():
    from analogykit.core import Family, ProblemId

    return LetterStringProblem(
        id=ProblemId(Family.LETTER_STRING, "gen0_successor", 0, 0),
        source_left=tuple("a b c d".split()),
        source_right=tuple("a b c e".split()),
        target_stem=tuple("i j k l".split()),
        answer=tuple("i j k m".split()),
        transformation="successor",
        generalizations=(),
        domain="letters",
    )


def test_prompt_formats_match_reference_strings():
    p = _reference_problem()
    assert (
        render_letterstring_prompt(p, "standard")
        == "Let's try to complete the pattern:\n\n[a b c d] [a b c e]\n[i j k l] ["
    )
    assert render_letterstring_prompt(p, "noprompt") == "[a b c d] [a b c e]\n[i j k l] ["
    assert (
        render_letterstring_prompt(p, "sentence")
        == "If a b c d changes to a b c e, then i j k l should change to "
    )


def test_parse_and_match():
    assert parse_generated_letterstring("i j k m] [x", "standard") == ("i", "j", "k", "m")
    assert parse_generated_letterstring("i k m q. And so on", "sentence") == ("i", "k", "m", "q")
    assert letterstring_answers_match(("i", "j"), ("I", "J"))
    assert not letterstring_answers_match(("i", "j"), ("j", "i"))


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------


def test_full_dataset_counts(letterstring_full):
    problems = letterstring_full.problems
    assert len(problems) == 2800
    strata = Counter(p.id.subtype.split("_")[0] for p in problems)
    assert strata == Counter({"gen0": 600, "gen1": 600, "gen2": 600, "gen3": 600, "real": 400})
    by_kind = Counter(p.transformation for p in problems if p.id.subtype.startswith("gen0"))
    assert all(by_kind[k] == 100 for k in TRANSFORMATIONS)
    by_gen = Counter(p.id.subtype for p in problems if p.id.subtype.startswith("gen1"))
    assert all(by_gen[f"gen1_{g}"] == 100 for g in GENERALIZATIONS)
    real = Counter(p.transformation for p in problems if p.domain != "letters")
    assert all(real[k] == 100 for k in REAL_WORLD_TRANSFORMATIONS)
    assert all(len(p.generalizations) == 2 for p in problems if p.id.subtype == "gen2")
    assert all(len(p.generalizations) == 3 for p in problems if p.id.subtype == "gen3")


def test_eval_subset_counts_and_prefix():
    full = build_letterstring_dataset(seed=5)
    ev = build_letterstring_dataset(seed=5, eval_subset=True)
    assert len(ev.problems) == 1400
    full_ids = {str(p.id) for p in full.problems}
    assert all(str(p.id) in full_ids for p in ev.problems)


def test_real_world_stems_use_fixed_sequences(letterstring_full):
    for p in letterstring_full.problems:
        if p.domain == "letters":
            continue
        seq = set(REAL_WORLD_SEQUENCES[p.domain])
        assert set(p.target_stem) <= seq
        assert set(p.answer) <= seq
        assert not p.generalizations


def test_dataset_round_trip(letterstring_full):
    blob = letterstring_full.to_json()
    from analogykit.core import ProblemSet

    restored = ProblemSet.from_json(blob)
    assert len(restored.problems) == 2800
    assert restored.problems[0] == letterstring_full.problems[0]
    assert restored.to_json() == blob
