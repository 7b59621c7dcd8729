from .catalog import CATALOG, Subtype, bundle, get_subtype, resolve_subtypes
from .distractors import (
    DistractorExhausted,
    generate_distractors,
    logic_distractors,
    transformation_distractors,
)
from .generate import (
    GenerationExhausted,
    build_dataset,
    generate_problem,
    progression_instance_space,
)
from .rules import (
    InconsistentRules,
    LogicOp,
    LogicRule,
    Orientation,
    TransformKind,
    TransformRule,
    derive_answer,
)

__all__ = [
    "CATALOG",
    "Subtype",
    "bundle",
    "get_subtype",
    "resolve_subtypes",
    "DistractorExhausted",
    "generate_distractors",
    "logic_distractors",
    "transformation_distractors",
    "GenerationExhausted",
    "build_dataset",
    "generate_problem",
    "progression_instance_space",
    "InconsistentRules",
    "LogicOp",
    "LogicRule",
    "Orientation",
    "TransformKind",
    "TransformRule",
    "derive_answer",
]
