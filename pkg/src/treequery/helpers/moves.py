"""
moves.py

This module parses the lines a person types (or a moves file supplies) while
playing the Prover-Delayer game.

Key Concepts:
- Variable moves: "3", "x3" or "q 3" select x_3 to query.
- Bit moves: "0" / "1", optionally written "b 1".
- Delayer moves: "0", "1", "d" / "defer" (also "answer0", "answer1").
- MoveParseResult: the parsed value plus a flag saying whether a move was found.

Example usage:
    result = parse_variable("x3")
    print(result.value)  # Output: 3
    print(result.found)  # Output: True
"""

import re
from dataclasses import dataclass

from treequery.andor import Decision

_VARIABLE = re.compile(r"^\s*(?:q\s+)?x?(\d+)\s*$", re.IGNORECASE)
_BIT = re.compile(r"^\s*(?:b\s+)?([01])\s*$", re.IGNORECASE)
_DECISION = re.compile(r"^\s*(answer0|answer1|0|1|d|defer)\s*$", re.IGNORECASE)


@dataclass
class MoveParseResult:
    """
    A data class to represent the result of parsing one move line.

    Attributes:
        value (int | Decision | None): The parsed move.
        found (bool): A flag indicating whether the line held a move of the requested kind.
    """

    value: int | Decision | None
    found: bool


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_variable(line: str) -> MoveParseResult:
    match = _VARIABLE.match(_strip_comment(line))
    return MoveParseResult(value=int(match.group(1)) if match else None, found=bool(match))


def parse_bit(line: str) -> MoveParseResult:
    match = _BIT.match(_strip_comment(line))
    return MoveParseResult(value=int(match.group(1)) if match else None, found=bool(match))


def parse_decision(line: str) -> MoveParseResult:
    match = _DECISION.match(_strip_comment(line))
    if not match:
        return MoveParseResult(value=None, found=False)
    token = match.group(1).lower()
    if token in ("0", "answer0"):
        decision = Decision.ANSWER0
    elif token in ("1", "answer1"):
        decision = Decision.ANSWER1
    else:
        decision = Decision.DEFER
    return MoveParseResult(value=decision, found=True)
