"""
test_moves.py

These tests check the parsing of typed (or scripted) game moves.

Example usage:
    pytest tests/treequery/test_moves.py
"""

import pytest

from treequery.andor import Decision
from treequery.helpers.moves import parse_bit, parse_decision, parse_variable
from utils.logging import get_logger

logger = get_logger("TestMoves")


@pytest.mark.parametrize("line, value", [("3", 3), ("x12", 12), ("q 4\n", 4), ("  X7  # query", 7)])
def test_variable_moves(line, value):
    result = parse_variable(line)
    assert result.found
    assert result.value == value


@pytest.mark.parametrize("line", ["", "xx", "q", "-1", "# only a comment"])
def test_bad_variable_moves(line):
    result = parse_variable(line)
    assert not result.found
    assert result.value is None


def test_bit_moves():
    assert parse_bit("b 1").value == 1
    assert parse_bit("0").value == 0
    assert not parse_bit("2").found


@pytest.mark.parametrize(
    "line, decision",
    [("0", Decision.ANSWER0), ("answer1", Decision.ANSWER1), ("d", Decision.DEFER), ("DEFER", Decision.DEFER)],
)
def test_decision_moves(line, decision):
    assert parse_decision(line).value is decision


def test_bad_decision_move():
    assert not parse_decision("maybe").found
