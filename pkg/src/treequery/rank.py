"""
rank.py

This module computes the rank of decision trees and of Boolean functions.

Key Concepts:
- Tree rank: a leaf has rank 0; an internal node takes the larger child rank,
  plus one when both children have the same rank.
- G-coloring: every internal node colors at most one outgoing edge black, the
  rest red. Its cost is the largest number of red edges on a root-to-leaf
  path; the guessing complexity is the least cost over all G-colorings and
  coincides with the rank.
- Function rank and game value: two separate dynamic programs over
  restrictions of a truth table. The rank DP is justified by monotonicity of
  combine(a, b) = max(a, b) if a != b else a + 1 in both arguments: the best
  tree for a restriction can always use the best subtrees for the two
  sub-restrictions. The game DP lets the Delayer answer 0, answer 1 or defer
  (scoring a point and letting the Prover pick the bit).
- Truth tables are stored as Python integers. Bit k is f(x) for the input
  with index k = sum(x_i * 2**i), so the least significant bit is x = 0...0.

Example usage:
    tree = generate("complete", depth=3)
    assert tree_rank(tree) == 3
    assert coloring_cost(tree, optimal_coloring(tree)) == 3
    assert func_rank(TruthTable.from_hex(3, "FE")) == 1
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from enum import Enum

import numpy as np

from treequery.dtree import DTree, EdgeId, Internal, RandomizedDTree, bits_of, eval_all
from treequery.errors import EnumerationLimitError, SizeLimitError, TreeFormatError
from treequery.settings import MAX_DP_N, MAX_EXHAUSTIVE_INTERNAL
from utils.logging import get_logger

logger = get_logger(__name__)


class Color(str, Enum):
    BLACK = "black"
    RED = "red"


@dataclass(frozen=True)
class GColoring:
    """
    A coloring of every tree edge.

    Attributes:
        color (Mapping[EdgeId, Color]): Color of each edge.
    """

    color: Mapping[EdgeId, Color]

    def __post_init__(self):
        parents = {edge.parent for edge in self.color}
        for v in parents:
            blacks = sum(self.color.get(EdgeId(v, bit)) == Color.BLACK for bit in (0, 1))
            if blacks > 1:
                raise ValueError(f"node {v} has two black outgoing edges")

    def is_red(self, edge: EdgeId) -> bool:
        return self.color[edge] == Color.RED


# Per-node legal choices, as (red on the 0-edge, red on the 1-edge).
LEGAL_CHOICES = ((0, 1), (1, 0), (1, 1))


def subtree_ranks(t: DTree) -> dict[int, int]:
    """Rank of every node's subtree."""
    ranks = {}
    for v in reversed(t.preorder):
        node = t.nodes[v]
        if isinstance(node, Internal):
            r0, r1 = ranks[node.zero], ranks[node.one]
            ranks[v] = r0 + 1 if r0 == r1 else max(r0, r1)
        else:
            ranks[v] = 0
    return ranks


def tree_rank(t: DTree) -> int:
    return subtree_ranks(t)[t.root]


def rank_upper_bound(t: DTree) -> float:
    """log2(size + 1) - 1, an upper bound on the rank of any tree of this size."""
    return math.log2(t.size + 1) - 1


def rrank(r: RandomizedDTree) -> int:
    """Largest rank in the support of a randomized tree."""
    return max(tree_rank(tree) for _, tree in r.support)


def optimal_coloring(t: DTree) -> GColoring:
    """
    Colors black the edge toward the child of larger rank (the 0-edge on ties), every other edge red.
    The cost of this coloring equals the tree's rank.
    """
    ranks = subtree_ranks(t)
    color = {}
    for v in t.internal:
        node = t.nodes[v]
        black = 1 if ranks[node.one] > ranks[node.zero] else 0
        color[EdgeId(v, black)] = Color.BLACK
        color[EdgeId(v, 1 - black)] = Color.RED
    return GColoring(color=color)


def coloring_cost(t: DTree, c: GColoring) -> int:
    """Largest number of red edges on a root-to-leaf path."""
    missing = [edge for edge in t.edges if edge not in c.color]
    if missing:
        raise TreeFormatError(f"coloring does not cover edges {missing}")
    cost = {}
    for v in reversed(t.preorder):
        node = t.nodes[v]
        if isinstance(node, Internal):
            cost[v] = max(
                int(c.is_red(EdgeId(v, 0))) + cost[node.zero],
                int(c.is_red(EdgeId(v, 1))) + cost[node.one],
            )
        else:
            cost[v] = 0
    return cost[t.root]


def _check_exhaustive_size(t: DTree, limit: int) -> None:
    if len(t.internal) > limit:
        raise SizeLimitError(f"tree has {len(t.internal)} internal nodes; exhaustive search allows {limit}")


def exhaustive_guessing_complexity(t: DTree, limit: int = MAX_EXHAUSTIVE_INTERNAL) -> int:
    """
    Minimum cost over all legal G-colorings.

    Every node tries all three legal choices (black 0-edge, black 1-edge, both red). The choices
    in disjoint subtrees are independent and the cost is a maximum over paths, so the minimum
    over all 3^k colorings decomposes into a per-node minimum over the three choices.
    `enumerate_colorings` checks the decomposition by listing colorings one by one on small trees.
    """
    _check_exhaustive_size(t, limit)
    best = {}
    for v in reversed(t.preorder):
        node = t.nodes[v]
        if isinstance(node, Internal):
            best[v] = min(
                max(red0 + best[node.zero], red1 + best[node.one]) for red0, red1 in LEGAL_CHOICES
            )
        else:
            best[v] = 0
    return best[t.root]


def enumerate_colorings(t: DTree, limit: int = 8) -> Iterator[GColoring]:
    """Every legal G-coloring of t, one at a time (3^k of them for k internal nodes)."""
    _check_exhaustive_size(t, limit)
    for choices in itertools.product(LEGAL_CHOICES, repeat=len(t.internal)):
        color = {}
        for v, reds in zip(t.internal, choices):
            for bit, red in enumerate(reds):
                color[EdgeId(v, bit)] = Color.RED if red else Color.BLACK
        yield GColoring(color=color)


# ---------------------------------------------------------------------------
# Boolean functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruthTable:
    """
    A Boolean function on n bits.

    Attributes:
        n (int): Number of input bits.
        bits (int): Bit k holds f(x) for the input with index k.
    """

    n: int
    bits: int

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.bits < (1 << (1 << self.n)):
            raise ValueError(f"truth table does not fit 2^{self.n} entries")

    def value(self, x: int) -> int:
        return (self.bits >> x) & 1

    @classmethod
    def from_hex(cls, n: int, text: str) -> TruthTable:
        try:
            bits = int(text, 16)
        except ValueError as exc:
            raise ValueError(f"truth table {text!r} is not a hex string") from exc
        return cls(n=n, bits=bits)

    @classmethod
    def from_function(cls, n: int, fn) -> TruthTable:
        """From a callable on bit tuples (x_0 first)."""
        return cls(n=n, bits=sum(int(bool(fn(bits_of(x, n)))) << x for x in range(1 << n)))

    def to_hex(self) -> str:
        return format(self.bits, "X")


def tree_truth_table(t: DTree) -> TruthTable:
    """The function computed by a tree whose leaves carry '0'/'1' output labels."""
    outs = {}
    for leaf in t.leaves:
        out = t.nodes[leaf].out
        if out not in ("0", "1"):
            raise TreeFormatError(f"leaf {leaf} has output {out!r}, expected '0' or '1'")
        outs[leaf] = int(out)
    reached = eval_all(t)
    values = np.array([outs[int(leaf)] for leaf in reached], dtype=np.int64)
    bits = 0
    for x in np.flatnonzero(values):
        bits |= 1 << int(x)
    return TruthTable(n=t.n, bits=bits)


class _Cofactors:
    """Restrictions of a truth table integer to x_i = 0 / x_i = 1, keeping all n variables."""

    def __init__(self, n: int):
        self.n = n
        self.full = (1 << (1 << n)) - 1
        self.ones = []
        for i in range(n):
            stride = 1 << i
            block = ((1 << stride) - 1) << stride
            mask = 0
            for start in range(0, 1 << n, 2 * stride):
                mask |= block << start
            self.ones.append(mask)

    def split(self, f: int, i: int) -> tuple[int, int]:
        stride = 1 << i
        hi = f & self.ones[i]
        lo = f & ~self.ones[i] & self.full
        return lo | (lo << stride), hi | (hi >> stride)


def _check_dp_size(f: TruthTable, limit: int) -> None:
    if f.n > limit:
        raise EnumerationLimitError(f"n = {f.n} exceeds the restriction DP limit of {limit}")


def func_rank(f: TruthTable, limit: int = MAX_DP_N) -> int:
    """Minimum rank of a decision tree computing f."""
    _check_dp_size(f, limit)
    cof = _Cofactors(f.n)
    memo: dict[int, int] = {}

    def solve(g: int) -> int:
        if g == 0 or g == cof.full:
            return 0
        if g in memo:
            return memo[g]
        best = None
        for i in range(f.n):
            g0, g1 = cof.split(g, i)
            if g0 == g1:
                # querying a variable g ignores only adds a level
                continue
            a, b = solve(g0), solve(g1)
            value = max(a, b) if a != b else a + 1
            if best is None or value < best:
                best = value
        memo[g] = best
        return best

    result = solve(f.bits)
    logger.debug(f"func_rank over {len(memo)} restrictions: {result}")
    return result


def game_value(f: TruthTable, limit: int = MAX_DP_N) -> int:
    """Value of the Prover-Delayer game on f: the score the Delayer can guarantee."""
    _check_dp_size(f, limit)
    cof = _Cofactors(f.n)
    memo: dict[int, int] = {}

    def value(g: int) -> int:
        if g == 0 or g == cof.full:
            return 0
        if g in memo:
            return memo[g]
        best = None
        for i in range(f.n):
            g0, g1 = cof.split(g, i)
            if g0 == g1:
                continue
            v0, v1 = value(g0), value(g1)
            # Delayer: answer 0, answer 1, or defer and let the Prover choose
            outcome = max(v0, v1, 1 + min(v0, v1))
            if best is None or outcome < best:
                best = outcome
        memo[g] = best
        return best

    return value(f.bits)
