import pytest

from analogykit.core import Cell, Grid
from analogykit.digitmat import build_dataset, bundle
from analogykit.letterstring import build_letterstring_dataset
from analogykit.semantic import StoryItem


def grid_from(rows):
    """Build a Grid from cell strings like "5 9 3"; None marks the gap."""
    out = []
    for row in rows:
        cells = []
        for spec in row:
            if spec is None:
                cells.append(None)
            else:
                cells.append(Cell(tuple(None if t == "~" else int(t) for t in spec.split())))
        out.append(cells)
    return Grid.from_rows(out)


# The worked reference examples: (name, rows, expected answer digits, order-sensitive)
WORKED_EXAMPLES = {
    "constant_col": (["5", "1", "9"], ["5", "1", "9"], ["5", "1", None]),
    "dist3": (["6", "2", "4"], ["2", "4", "6"], ["4", "6", None]),
    "progression": (["3", "5", "7"], ["1", "3", "5"], ["5", "7", None]),
    "two_rule": (["7 1", "8 9", "6 3"], ["6 9", "7 3", "5 1"], ["5 3", "6 1", None]),
    "or_aligned": (["~ 7", "~ 7 4 ~", "4 ~"], ["9 7", "9 7 4 8", "4 8"], ["9 ~", "9 ~ ~ 8", None]),
    "xor": (["6 4", "6 1", "4 1"], ["6 1", "3 6", "1 3"], ["4 1", "1 3", None]),
    "and": (["2 9 7", "1 9 7", "~ 9 7"], ["2 9 5", "1 9 5", "~ 9 5"], ["2 9 ~", "1 9 ~", None]),
    "or_permuted": (["~ 1", "7 1 ~ ~", "7 ~"], ["1 0", "5 0 7 1", "7 5"], ["0 ~", "~ ~ 0 5", None]),
}

FIG_GRID_ROWS = (["5 9 3", "8 9 2", "1 9 7"], ["8 4 7", "1 4 3", "5 4 2"], ["1 2 2", "5 2 7", None])
FIG_GRID_PROMPT = "[5 9 3] [8 9 2] [1 9 7]\n[8 4 7] [1 4 3] [5 4 2]\n[1 2 2] [5 2 7] ["

KARLA_SOURCE = (
    "Karla, an old hawk, lived at the top of a tall oak tree. One afternoon, she saw a hunter "
    "on the ground with a bow and some crude arrows that had no feathers. The hunter took aim "
    "and shot at the hawk but missed. Karla knew the hunter wanted her feathers so she glided "
    "down to the hunter and offered to give him a few. The hunter was so grateful that he "
    "pledged never to shoot at a hawk again. He went off and shot deer instead."
)
KARLA_NEAR_CORRECT = (
    "Once there was an eagle named Zerdia who nested on a rocky cliff. One day she saw a "
    "sportsman coming with a crossbow and some bolts that had no feathers. The sportsman "
    "attacked but the bolts missed. Zerdia realized that the sportsman wanted her tailfeathers "
    "so she flew down and donated a few of her tailfeathers to the sportsman. The sportsman was "
    "pleased. He promised never to attack eagles again."
)
KARLA_NEAR_INCORRECT = (
    "Once there was an eagle named Zerdia who donated a few of her tailfeathers to a sportsman "
    "so he would promise never to attack eagles. One day Zerdia was nesting high on a rocky "
    "cliff when she saw the sportsman coming with a crossbow. Zerdia flew down to meet the man, "
    "but he attacked and felled her with a single bolt. As she fluttered to the ground Zerdia "
    "realized that the bolt had her own tailfeathers on it."
)
KARLA_FAR_CORRECT = (
    "Once there was a small country called Zerdia that learned to make the world's smartest "
    "computer. One day Zerdia was attacked by its warlike neighbor, Gagrach. But the missiles "
    "were badly aimed and the attack failed. The Zerdian government realized that Gagrach "
    "wanted Zerdian computers so it offered to sell some of its computers to the country. The "
    "government of Gagrach was very pleased. It promised never to attack Zerdia again."
)
KARLA_FAR_INCORRECT = (
    "Once there was a small country called Zerdia that learned to make the world's smartest "
    "computer. Zerdia sold one of its supercomputers to its neighbor, Gagrach, so Gagrach would "
    "promise never to attack Zerdia. But one day Zerdia was overwhelmed by a surprise attack "
    "from Gagrach. As it capitulated the crippled government of Zerdia realized that the "
    "attacker's missiles had been guided by Zerdian supercomputers."
)


@pytest.fixture(scope="session")
def karla_items():
    return [
        StoryItem("karla", KARLA_SOURCE, KARLA_NEAR_CORRECT, KARLA_NEAR_INCORRECT, "near"),
        StoryItem("karla", KARLA_SOURCE, KARLA_FAR_CORRECT, KARLA_FAR_INCORRECT, "far"),
    ]


@pytest.fixture(scope="session")
def synthetic_story_items():
    """18 synthetic source stories, one near and one far pair each."""
    items = []
    for i in range(18):
        for condition in ("near", "far"):
            items.append(
                StoryItem(
                    group_id=f"group{i:02d}",
                    source=f"Source tale {i}: a keeper traded honey for peace with the bees.",
                    correct_target=f"Analogous tale {i} {condition}: a farmer traded grain for peace with the crows.",
                    incorrect_target=f"Twisted tale {i} {condition}: a farmer hoarded grain and the crows attacked.",
                    condition=condition,
                )
            )
    return items


@pytest.fixture(scope="session")
def exp1_small():
    return build_dataset(bundle("exp1"), 3, seed=31)


@pytest.fixture(scope="session")
def exp1_full40():
    return build_dataset(bundle("exp1"), 40, seed=404)


@pytest.fixture(scope="session")
def exp2_small():
    return build_dataset(bundle("exp2"), 2, seed=42)


@pytest.fixture(scope="session")
def letterstring_full():
    return build_letterstring_dataset(seed=88)
