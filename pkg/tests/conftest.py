import pytest

from latentqa.core import Document, Example, TaskKind, tokenize
from latentqa.sqlgen import build_table

# A six-mention document in the shape of the multi-mention RC setting: the
# answer text appears six times, only the fourth occurrence answers the
# question.
SCHUMANN_DOC = (
    "Robert Schumann wrote early piano cycles . Critics once described "
    "Robert Schumann as a restless reviewer . A later stage play even mocked "
    "Robert Schumann in passing . Clara Wieck married the composer Robert "
    "Schumann in 1840 . Years earlier , a young pianist named Robert Schumann "
    "had asked to stop studying law . Schumann admired her playing , and "
    "Clara Schumann also composed . A letter of introduction finally reached "
    "Robert Schumann from Hanover ."
)

SCHUMANN_QUESTION = "Which composer did the pianist Clara Wieck marry in 1840 ?"

# A discrete-reasoning passage whose numeric mentions are, in order:
# 10, 37, 9, 37, 36, 41, 40, 25, 8, 6.  The answer 4 is executed by
# 41-37 (twice), 40-36, and 10-6, among special-number combinations.
FIELD_GOAL_DOC = (
    "The visitors opened with a 10 yard strike . Naylor then kicked a 37 yard "
    "field goal . A quick 9 yard reply followed before Naylor added another "
    "37 yard field goal . Carver answered with a 36 yard field goal . A 41 "
    "yard pass retook the lead . Late on , Naylor nailed a 40 yard and a 25 "
    "yard field goal , keeping hopes alive at 8 6 ."
)

FIELD_GOAL_QUESTION = (
    "How many yards longer was Naylor 's longest field goal compared to "
    "Carver 's only field goal ?"
)


@pytest.fixture
def schumann_example():
    return Example(
        "schumann",
        tokenize(SCHUMANN_QUESTION),
        Document(tokenize(SCHUMANN_DOC)),
        ("Robert Schumann",),
        TaskKind.SPAN_EXTRACTION,
    )


@pytest.fixture
def field_goal_example():
    return Example(
        "field-goal",
        tokenize(FIELD_GOAL_QUESTION),
        Document(tokenize(FIELD_GOAL_DOC)),
        ("4",),
        TaskKind.ARITHMETIC,
    )


GUARD_TABLE_HEADER = ["player", "position", "years in toronto"]
GUARD_TABLE_ROWS = [
    ["Adam Brown", "forward", "1994-95"],
    ["John Long", "guard", "1996-97"],
    ["Mark Baker", "guard", "1998-99"],
    ["Todd Foster", "center", "1996-97"],
]

GUARD_QUESTION = "what player played guard in 1996-97"


@pytest.fixture
def guard_example():
    return Example(
        "guard",
        tokenize(GUARD_QUESTION),
        build_table(GUARD_TABLE_HEADER, GUARD_TABLE_ROWS),
        ("John Long",),
        TaskKind.SQL_GENERATION,
    )
