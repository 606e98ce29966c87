"""
errors.py

Exception types raised by treequery. All of them derive from ValueError so
callers that only care about "bad input" can keep catching ValueError.

Verification failures are not exceptions: verifiers return report objects
with a `passed` flag and the worst offending residual.
"""


class TreeQueryError(ValueError):
    """Base class for every error raised by the library."""


class TreeFormatError(TreeQueryError):
    """A tree, weight, relation or randomized-tree document is malformed or violates a structural invariant."""


class InputLengthError(TreeQueryError):
    """An input bitstring does not have exactly n bits."""


class EnumerationLimitError(TreeQueryError):
    """An operation would have to enumerate more inputs or restrictions than allowed."""


class SizeLimitError(TreeQueryError):
    """A brute-force search was asked to run on a tree above its size cap."""


class WeightError(TreeQueryError):
    """A weight map is missing an edge, names a non-edge, or holds a non-positive weight."""


class AndOrError(TreeQueryError):
    """An AND-OR tree operation was applied outside its domain."""


class GameError(TreeQueryError):
    """A policy produced an illegal move or cannot play in the current setting."""
