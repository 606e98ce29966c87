"""
generators.py

This module builds the named decision-tree families used in examples, tests
and the `gen` command.

Key Concepts:
- or-list(n): x_0 ? 1 : (x_1 ? 1 : ... ), the decision list for OR (Search).
- and-chain(n): x_0 ? (x_1 ? ... : 0) : 0, the chain for AND.
- parity(n): complete tree on x_0..x_{n-1} with parity output labels.
- complete(d): complete tree of depth d, level i querying x_i.
- spine(n): a root whose 0-side is a complete tree with n leaves and whose
  1-side is a chain of n queries; separates the rank-depth and size bounds.
- random(seed, budget): seed-deterministic random tree with at most `budget` nodes.

Example usage:
    tree = generate("and-chain", n=3)
    tree = generate("random", seed=7, budget=21)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from treequery.dtree import DTree, Internal, Leaf
from treequery.errors import TreeQueryError
from utils.logging import get_logger

logger = get_logger(__name__)

KINDS = ("or-list", "and-chain", "parity", "complete", "spine", "random")


@dataclass(frozen=True)
class Out:
    """Leaf placeholder in a nested shape; `value` becomes the leaf's output label."""

    value: str | None = None


def build_tree(n: int, shape) -> DTree:
    """
    Builds a DTree from a nested shape: `Out(...)` for a leaf, `(var, zero, one)` for an internal node.

    Node ids are assigned in preorder (0-child first); leaf labels are "L<id>".
    """
    nodes = {}
    pending = {}
    stack = [(shape, None, 0)]
    next_id = 0
    while stack:
        current, parent, bit = stack.pop()
        node_id = next_id
        next_id += 1
        if parent is not None:
            pending[parent][1 + bit] = node_id
        if isinstance(current, Out):
            nodes[node_id] = Leaf(label=f"L{node_id}", out=current.value)
            continue
        var, zero, one = current[0], current[1], current[2]
        pending[node_id] = [var, None, None]
        stack.append((one, node_id, 1))
        stack.append((zero, node_id, 0))
    for node_id, (var, zero, one) in pending.items():
        nodes[node_id] = Internal(var=var, zero=zero, one=one)
    return DTree(n=n, root=0, nodes=dict(sorted(nodes.items())))


def _require_positive(name: str, value: int) -> None:
    if value <= 0:
        raise TreeQueryError(f"{name} must be positive, got {value}")


def or_list(n: int) -> DTree:
    _require_positive("n", n)
    shape = Out("0")
    for i in reversed(range(n)):
        shape = (i, shape, Out("1"))
    return build_tree(n, shape)


def and_chain(n: int) -> DTree:
    _require_positive("n", n)
    shape = Out("1")
    for i in reversed(range(n)):
        shape = (i, Out("0"), shape)
    return build_tree(n, shape)


def _complete_shape(first_var: int, depth: int, outputs: bool, parity: int = 0):
    if depth == 0:
        return Out(str(parity) if outputs else None)
    return (
        first_var,
        _complete_shape(first_var + 1, depth - 1, outputs, parity),
        _complete_shape(first_var + 1, depth - 1, outputs, parity ^ 1),
    )


def parity(n: int) -> DTree:
    _require_positive("n", n)
    return build_tree(n, _complete_shape(0, n, outputs=True))


def complete(depth: int) -> DTree:
    """Complete tree of the given depth; depth 0 is the single leaf on one variable."""
    if depth < 0:
        raise TreeQueryError(f"depth must be non-negative, got {depth}")
    return build_tree(max(depth, 1), _complete_shape(0, depth, outputs=False))


def spine(n: int) -> DTree:
    """
    Root x_0; the 0-edge leads to a complete tree with n leaves on x_1..x_log2(n),
    the 1-edge to a chain of n queries on x_1..x_n. n must be a power of two.
    """
    _require_positive("n", n)
    if n & (n - 1):
        raise TreeQueryError(f"spine size must be a power of two, got {n}")
    chain = Out("1")
    for i in reversed(range(1, n + 1)):
        chain = (i, Out("0"), chain)
    return build_tree(n + 1, (0, _complete_shape(1, n.bit_length() - 1, outputs=False), chain))


def random_tree(seed: int, budget: int, n: int = 10) -> DTree:
    """
    Grows a random tree with at most `budget` nodes. Each step expands a uniformly chosen leaf
    that still has unqueried variables, using a uniformly chosen unused variable; leaves get
    uniform 0/1 output labels.
    """
    _require_positive("budget", budget)
    _require_positive("n", n)
    rng = np.random.default_rng(seed)
    root = [Out()]
    frontier = [(root, 0, frozenset())]
    for _ in range((budget - 1) // 2):
        expandable = [i for i, (_, _, used) in enumerate(frontier) if len(used) < n]
        if not expandable:
            break
        owner, index, used = frontier.pop(expandable[int(rng.integers(len(expandable)))])
        free = [v for v in range(n) if v not in used]
        var = free[int(rng.integers(len(free)))]
        node = [var, Out(), Out()]
        owner[index] = node
        frontier.append((node, 1, used | {var}))
        frontier.append((node, 2, used | {var}))
    for owner, index, _ in frontier:
        owner[index] = Out(str(int(rng.integers(2))))
    return build_tree(n, root[0])


def all_shapes(internal: int) -> list[DTree]:
    """Every tree shape with exactly `internal` internal nodes; a node at depth k queries x_k."""
    if internal < 0:
        raise TreeQueryError(f"internal node count must be non-negative, got {internal}")

    def shapes(k: int, depth: int):
        if k == 0:
            yield Out()
            return
        for left in range(k):
            for zero, one in itertools.product(shapes(left, depth + 1), list(shapes(k - 1 - left, depth + 1))):
                yield (depth, zero, one)

    return [build_tree(max(internal, 1), shape) for shape in shapes(internal, 0)]


def generate(kind: str, **params) -> DTree:
    """
    Creates a tree family member by name.

    Args:
        kind (str): One of 'or-list', 'and-chain', 'parity', 'complete', 'spine', 'random'.
        **params: n / depth / seed / budget as the family requires.

    Returns:
        DTree: The generated tree.
    """
    kind = kind.lower()
    if kind == "or-list":
        tree = or_list(params["n"])
    elif kind == "and-chain":
        tree = and_chain(params["n"])
    elif kind == "parity":
        tree = parity(params["n"])
    elif kind == "complete":
        tree = complete(params["depth"])
    elif kind == "spine":
        tree = spine(params["n"])
    elif kind == "random":
        tree = random_tree(params["seed"], params["budget"], params.get("n") or 10)
    else:
        raise ValueError(f"Unknown tree kind: {kind}")
    logger.debug(f"Generated {kind} tree with {tree.size} nodes")
    return tree
