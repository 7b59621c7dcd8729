import json

import pytest
from hypothesis import given, settings, strategies as st

from analogykit.core import AnswerKind, answers_equivalent
from analogykit.digitmat import (
    CATALOG,
    InconsistentRules,
    LogicOp,
    LogicRule,
    Orientation,
    TransformKind,
    TransformRule,
    build_dataset,
    bundle,
    derive_answer,
    generate_problem,
    get_subtype,
    progression_instance_space,
)
from .conftest import WORKED_EXAMPLES, grid_from


# ---------------------------------------------------------------------------
# worked reference examples through derive_answer with explicit rules
# ---------------------------------------------------------------------------


def test_derive_constant_col():
    grid = grid_from(WORKED_EXAMPLES["constant_col"])
    rule = TransformRule(TransformKind.CONSTANT, Orientation.COL, 0)
    assert derive_answer(grid, [rule]).digits == (9,)


def test_derive_dist3_row():
    grid = grid_from(WORKED_EXAMPLES["dist3"])
    rule = TransformRule(TransformKind.DIST3, Orientation.ROW, 0, value_set=frozenset({6, 2, 4}))
    assert derive_answer(grid, [rule]).digits == (2,)


def test_derive_progression_row():
    grid = grid_from(WORKED_EXAMPLES["progression"])
    rule = TransformRule(TransformKind.PROGRESSION, Orientation.ROW, 0, delta=2)
    assert derive_answer(grid, [rule]).digits == (9,)


def test_derive_two_rule():
    grid = grid_from(WORKED_EXAMPLES["two_rule"])
    rules = [
        TransformRule(TransformKind.PROGRESSION, Orientation.COL, 0, delta=-1),
        TransformRule(TransformKind.DIST3, Orientation.ROW, 1, value_set=frozenset({1, 9, 3})),
    ]
    assert derive_answer(grid, rules).digits == (4, 9)


def test_derive_or_aligned():
    grid = grid_from(WORKED_EXAMPLES["or_aligned"])
    rule = LogicRule(LogicOp.OR, Orientation.COL, target_line=1, aligned=True)
    assert derive_answer(grid, rule).digit_set == {8}


def test_derive_xor():
    grid = grid_from(WORKED_EXAMPLES["xor"])
    rule = LogicRule(LogicOp.XOR, Orientation.COL, target_line=2, aligned=True)
    assert derive_answer(grid, rule).digit_set == {4, 3}


def test_derive_and():
    grid = grid_from(WORKED_EXAMPLES["and"])
    rule = LogicRule(LogicOp.AND, Orientation.COL, target_line=2, aligned=True)
    assert derive_answer(grid, rule).digit_set == {9}


def test_derive_or_permuted_printed_grid():
    # The printed answer key for this example reads "0", but no rule in the
    # grammar maps the printed grid to {0}: with the middle column as the
    # union, the third row forces 5 into the missing cell ({0} union X =
    # {0, 5}). Every consistent reading yields {5}.
    grid = grid_from(WORKED_EXAMPLES["or_permuted"])
    rule = LogicRule(LogicOp.OR, Orientation.COL, target_line=1, aligned=False)
    derived = derive_answer(grid, rule)
    assert derived.digit_set == {5}
    assert derived.digit_set != {0}


def test_derive_or_permuted_emended_grid():
    # Swapping the third row's left cell from [0 ~] to [5 ~] (a single
    # 0/5 confusion) makes the whole example consistent with its "0" key.
    grid = grid_from((["~ 1", "7 1 ~ ~", "7 ~"], ["1 0", "5 0 7 1", "7 5"], ["5 ~", "~ ~ 0 5", None]))
    rule = LogicRule(LogicOp.OR, Orientation.COL, target_line=1, aligned=False)
    assert derive_answer(grid, rule).digit_set == {0}


def test_derive_inconsistent_rules():
    grid = grid_from(WORKED_EXAMPLES["constant_col"])
    with pytest.raises(InconsistentRules):
        derive_answer(grid, [TransformRule(TransformKind.CONSTANT, Orientation.ROW, 0)])
    with pytest.raises(InconsistentRules):
        derive_answer(grid, [TransformRule(TransformKind.PROGRESSION, Orientation.ROW, 0, delta=1)])


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def test_catalog_counts():
    by_type = {}
    for s in CATALOG.values():
        by_type.setdefault(s.problem_type, []).append(s)
    assert len(by_type["one_rule"]) == 6
    assert len(by_type["two_rule"]) == 6
    assert len(by_type["three_rule"]) == 10
    assert len(by_type["four_rule"]) == 10
    assert len(by_type["five_rule"]) == 10
    assert len(by_type["logic"]) == 10


def test_catalog_logic_subtypes():
    logic = [s for s in CATALOG.values() if s.family == "logic"]
    aligned = [s for s in logic if s.aligned]
    permuted = [s for s in logic if not s.aligned]
    assert len(aligned) == len(permuted) == 5
    for group in (aligned, permuted):
        assert sorted(s.op.value for s in group) == ["and", "or", "or", "or", "xor"]
        assert sorted(s.target_line for s in group if s.op is LogicOp.OR) == [0, 1, 2]


def test_multi_rule_subtypes_are_kind_multisets():
    from collections import Counter
    two = [s for s in CATALOG.values() if s.problem_type == "two_rule"]
    assert len({tuple(sorted(Counter(s.kinds).items(), key=lambda kv: kv[0].value)) for s in two}) == 6
    three = [s for s in CATALOG.values() if s.problem_type == "three_rule"]
    assert len({tuple(sorted(Counter(s.kinds).items(), key=lambda kv: kv[0].value)) for s in three}) == 10


def test_bundles():
    assert len(bundle("exp1")) == 32
    assert len(bundle("exp2")) == 42
    # easy-to-hard: constants, then dist3, then progressions, then 2..5-rule
    exp2 = bundle("exp2")
    assert exp2[:6] == [
        "one_constant_row",
        "one_constant_col",
        "one_dist3_row",
        "one_dist3_col",
        "one_progression1",
        "one_progression2",
    ]
    counts = [get_subtype(name).rule_count for name in exp2]
    assert counts == sorted(counts)


# ---------------------------------------------------------------------------
# generation properties
# ---------------------------------------------------------------------------


def test_generation_deterministic():
    a = generate_problem("three_cdp", 999)
    b = generate_problem("three_cdp", 999)
    assert json.dumps(a.to_json_dict(), sort_keys=True) == json.dumps(b.to_json_dict(), sort_keys=True)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(CATALOG)), st.integers(0, 2**32))
def test_choice_integrity(subtype, seed):
    p = generate_problem(subtype, seed)
    assert len(p.choices) == 8
    matches = [c for c in p.choices if answers_equivalent(p.kind, p.answer, c)]
    assert len(matches) == 1
    for i, a in enumerate(p.choices):
        for b in p.choices[i + 1 :]:
            assert not answers_equivalent(p.kind, a, b)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([s for s in CATALOG if get_subtype(s).family == "transformation"]), st.integers(0, 2**32))
def test_transformation_shape_and_bounds(subtype, seed):
    p = generate_problem(subtype, seed)
    spec = get_subtype(subtype)
    width = len(spec.kinds)
    assert p.kind is AnswerKind.ORDERED_DIGITS
    for _, _, cell in p.grid.visible_cells():
        assert len(cell.slots) == width
        assert all(s is not None and 0 <= s <= 9 for s in cell.slots)
    assert len(p.answer.slots) == width


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_dist3_line_property(seed):
    p = generate_problem("one_dist3_row", seed)
    rows = [[p.grid.cells[r][c] for c in range(3)] for r in range(3)]
    full = [{cell.slots[0] for cell in row} for row in rows[:2]]
    assert full[0] == full[1] and len(full[0]) == 3
    last = {rows[2][0].slots[0], rows[2][1].slots[0], p.answer.digits[0]}
    assert last == full[0]


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from([s for s in CATALOG if get_subtype(s).family == "logic" and get_subtype(s).aligned]),
    st.integers(0, 2**32),
)
def test_aligned_slot_consistency(subtype, seed):
    """Each digit keeps one slot index within every line of an aligned problem."""
    p = generate_problem(subtype, seed)
    orientation = p.metadata["rules"][0].split("/")[1]
    for line in range(3):
        slot_of: dict[int, int] = {}
        for cross in range(3):
            r, c = (line, cross) if orientation == "row" else (cross, line)
            cell = p.grid.cells[r][c] if (r, c) != (2, 2) else p.answer
            for idx, s in enumerate(cell.slots):
                if s is None:
                    continue
                assert slot_of.setdefault(s, idx) == idx


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32))
def test_logic_answer_never_empty(seed):
    for subtype in ("logic_xor_permuted", "logic_and_aligned", "logic_or0_permuted"):
        p = generate_problem(subtype, seed)
        assert p.answer.digits
        assert p.kind is AnswerKind.DIGIT_SET


def test_logic_distractors_are_subsets_of_appearing_digits():
    p = generate_problem("logic_or1_aligned", 5150)
    appearing = {s for _, _, cell in p.grid.visible_cells() for s in cell.slots if s is not None}
    for choice in p.choices:
        assert choice.digit_set <= appearing
    # empty set may appear among the seven distractors, never as the answer
    assert p.answer.digits


def test_generate_distractors_public_op():
    from analogykit.digitmat import generate_distractors

    for subtype in ("two_cp", "logic_and_permuted"):
        p = generate_problem(subtype, 777)
        first = generate_distractors(p, seed=5)
        again = generate_distractors(p, seed=5)
        assert first == again
        assert len(first) == 7
        assert not any(answers_equivalent(p.kind, p.answer, d) for d in first)
        for i, a in enumerate(first):
            for b in first[i + 1 :]:
                assert not answers_equivalent(p.kind, a, b)


# ---------------------------------------------------------------------------
# dataset building
# ---------------------------------------------------------------------------


def test_build_dataset_single():
    ps = build_dataset(["one_constant_col"], 1, seed=1)
    assert len(ps.problems) == 1


def test_build_dataset_exp1_counts(exp1_full40):
    assert len(exp1_full40.problems) == 1280
    assert not exp1_full40.metadata.get("shortfall")


def test_constant_rowwise_100_distinct():
    ps = build_dataset(["one_constant_row"], 100, seed=12)
    grids = {json.dumps(p.to_json_dict()["grid"]) for p in ps.problems}
    assert len(grids) == 100


def test_progression_instance_space_exceeds_requested():
    assert progression_instance_space("one_progression1") >= 100
    assert progression_instance_space("one_progression2") >= 100


def test_problem_json_round_trip(exp1_small):
    from analogykit.core import MatrixProblem

    for p in exp1_small.problems[:60]:
        restored = MatrixProblem.from_json_dict(json.loads(json.dumps(p.to_json_dict())))
        assert restored.id == p.id
        assert restored.answer == p.answer
        assert restored.grid == p.grid
        assert restored.choices == p.choices
