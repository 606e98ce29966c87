"""
andor.py

This module provides AND-OR formula trees (any fan-in, each variable on at
most one leaf) together with the reductions and strategies used to play the
Prover-Delayer game on them.

Key Concepts:
- Reduced form: every gate has at least two children and no child carries its
  parent's gate label.
- update(i, b): substitutes x_i = b. A constant that is neutral for a gate
  (1 for AND, 0 for OR) just drops out of it; an absorbing one turns the whole
  gate into that constant, which keeps rising. On reduced trees this is the
  classic case split: only leaf -> constant tree, neutral -> remove the leaf,
  absorbing -> remove the parent's subtree.
- contract: promotes the child of unary gates, then merges children with the
  parent's label into the parent, at the child's position.
- Progress measures: cost functions c and d, the set M of marked OR gates,
  and P = 1 + sum_{v in M} max(c(v) - 1, 0), S = 1 + sum_{v in M} max(d(v) - 1, 0).
- Node ids are child-index paths from the root, e.g. (0, 1).

Example usage:
    tree = complete_tree(2)                # OR(AND(x0,x1),AND(x2,x3))
    after = contract(update(tree, 0, 1))
    print(render(after), measures(after).p)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Union

from treequery.errors import AndOrError
from treequery.rank import TruthTable
from treequery.settings import MAX_DP_N
from utils.logging import get_logger

logger = get_logger(__name__)


class Gate(str, Enum):
    AND = "AND"
    OR = "OR"

    @property
    def absorbing(self) -> int:
        return 0 if self is Gate.AND else 1

    @property
    def neutral(self) -> int:
        return 1 - self.absorbing


class Decision(str, Enum):
    ANSWER0 = "answer0"
    ANSWER1 = "answer1"
    DEFER = "defer"

    @property
    def bit(self) -> int | None:
        return {Decision.ANSWER0: 0, Decision.ANSWER1: 1}.get(self)


@dataclass(frozen=True)
class AndOrLeaf:
    var: int


@dataclass(frozen=True)
class AndOrGate:
    label: Gate
    children: tuple[AndOrNode, ...]


AndOrNode = Union[AndOrLeaf, AndOrGate]
NodeId = tuple[int, ...]


@dataclass(frozen=True)
class AndOrTree:
    """
    An AND-OR tree, or the empty tree carrying the constant it computes.

    Attributes:
        root (AndOrNode | None): Root node; None for the empty tree.
        constant (int | None): Value of the empty tree; None otherwise.
    """

    root: AndOrNode | None
    constant: int | None = None

    def __post_init__(self):
        if (self.root is None) == (self.constant is None):
            raise AndOrError("an AND-OR tree has either a root or a constant, not both")
        if self.constant is not None and self.constant not in (0, 1):
            raise AndOrError(f"constant must be 0 or 1, got {self.constant}")
        if self.root is not None:
            seen = set()
            for _, node in _walk(self.root):
                if isinstance(node, AndOrLeaf):
                    if node.var in seen:
                        raise AndOrError(f"variable x_{node.var} labels two leaves")
                    seen.add(node.var)
                elif not node.children:
                    raise AndOrError("gate without children")

    @property
    def is_empty(self) -> bool:
        return self.root is None

    def node(self, node_id: NodeId) -> AndOrNode:
        node = self.root
        for index in node_id:
            node = node.children[index]
        return node


def _walk(root: AndOrNode):
    """Preorder (node_id, node) pairs, children left to right."""
    stack: list[tuple[NodeId, AndOrNode]] = [((), root)]
    while stack:
        node_id, node = stack.pop()
        yield node_id, node
        if isinstance(node, AndOrGate):
            for index in reversed(range(len(node.children))):
                stack.append(((*node_id, index), node.children[index]))


def leaf_ids(t: AndOrTree) -> dict[int, NodeId]:
    """Variable -> id of its leaf, in left-to-right order."""
    if t.is_empty:
        return {}
    return {node.var: node_id for node_id, node in _walk(t.root) if isinstance(node, AndOrLeaf)}


def variables(t: AndOrTree) -> list[int]:
    return list(leaf_ids(t))


def is_reduced(t: AndOrTree) -> bool:
    if t.is_empty:
        return True
    for _, node in _walk(t.root):
        if isinstance(node, AndOrGate):
            if len(node.children) < 2:
                return False
            if any(isinstance(child, AndOrGate) and child.label == node.label for child in node.children):
                return False
    return True


def complete_tree(depth: int) -> AndOrTree:
    """Complete binary AND-OR tree with 2^depth leaves x_0.. left to right; the top gate is OR."""
    if depth < 0:
        raise AndOrError(f"depth must be non-negative, got {depth}")
    counter = iter(range(1 << depth))

    def grow(level: int, label: Gate) -> AndOrNode:
        if level == depth:
            return AndOrLeaf(next(counter))
        other = Gate.AND if label is Gate.OR else Gate.OR
        return AndOrGate(label, (grow(level + 1, other), grow(level + 1, other)))

    return AndOrTree(root=grow(0, Gate.OR))


# ---------------------------------------------------------------------------
# update / contract
# ---------------------------------------------------------------------------


def _substitute(node: AndOrNode, i: int, b: int) -> AndOrNode | int:
    if isinstance(node, AndOrLeaf):
        return b if node.var == i else node
    kept = []
    for child in node.children:
        result = _substitute(child, i, b)
        if isinstance(result, int):
            if result == node.label.absorbing:
                return result
            continue
        kept.append(result)
    if not kept:
        return node.label.neutral
    return AndOrGate(node.label, tuple(kept))


def update(t: AndOrTree, i: int, b: int) -> AndOrTree:
    """
    Restricts x_i to b. Unchanged if no leaf is labeled i.

    Raises:
        AndOrError: On the empty tree or a non-bit value.
    """
    if t.is_empty:
        raise AndOrError("update on an empty AND-OR tree")
    if b not in (0, 1):
        raise AndOrError(f"bit must be 0 or 1, got {b}")
    if i not in leaf_ids(t):
        return t
    result = _substitute(t.root, i, b)
    if isinstance(result, int):
        return AndOrTree(root=None, constant=result)
    return AndOrTree(root=result)


def _contract(node: AndOrNode) -> AndOrNode:
    if isinstance(node, AndOrLeaf):
        return node
    merged = []
    for child in node.children:
        child = _contract(child)
        if isinstance(child, AndOrGate) and child.label == node.label:
            merged.extend(child.children)
        else:
            merged.append(child)
    if len(merged) == 1:
        return merged[0]
    return AndOrGate(node.label, tuple(merged))


def contract(t: AndOrTree) -> AndOrTree:
    """Reduced form of t; computes the same function and is idempotent."""
    if t.is_empty:
        return t
    return AndOrTree(root=_contract(t.root))


# ---------------------------------------------------------------------------
# Evaluation and text form
# ---------------------------------------------------------------------------


def _eval(node: AndOrNode, bits) -> int:
    if isinstance(node, AndOrLeaf):
        return int(bits[node.var])
    values = (_eval(child, bits) for child in node.children)
    return int(all(values)) if node.label is Gate.AND else int(any(values))


def eval_tree(t: AndOrTree, bits) -> int:
    return t.constant if t.is_empty else _eval(t.root, bits)


def truth_table(t: AndOrTree, n: int | None = None) -> TruthTable:
    """Function of the tree on n bits (default: one more than the largest variable)."""
    if n is None:
        n = max(variables(t), default=0) + 1
    if n > MAX_DP_N:
        raise AndOrError(f"truth table of {n} variables exceeds the limit of {MAX_DP_N}")
    return TruthTable.from_function(n, lambda bits: eval_tree(t, bits))


def render(t: AndOrTree) -> str:
    if t.is_empty:
        return str(t.constant)

    def text(node: AndOrNode) -> str:
        if isinstance(node, AndOrLeaf):
            return f"x{node.var}"
        return f"{node.label.value}(" + ",".join(text(child) for child in node.children) + ")"

    return text(t.root)


_TOKEN = re.compile(r"\s*(AND|OR|x\d+|[01]|[(),])")


def parse_andor(text: str) -> AndOrTree:
    """Parses the `render` form, e.g. 'OR(AND(x0,x1),x2)' or a bare '0' / '1'."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match:
            raise AndOrError(f"unexpected character at {pos} in {text!r}")
        tokens.append(match.group(1))
        pos = match.end()
    if tokens in (["0"], ["1"]):
        return AndOrTree(root=None, constant=int(tokens[0]))

    def parse(index: int) -> tuple[AndOrNode, int]:
        if index >= len(tokens):
            raise AndOrError(f"unexpected end of {text!r}")
        token = tokens[index]
        if token.startswith("x"):
            return AndOrLeaf(int(token[1:])), index + 1
        if token not in ("AND", "OR") or tokens[index + 1 : index + 2] != ["("]:
            raise AndOrError(f"unexpected token {token!r} in {text!r}")
        children = []
        index += 2
        while True:
            child, index = parse(index)
            children.append(child)
            if index < len(tokens) and tokens[index] == ",":
                index += 1
                continue
            if index < len(tokens) and tokens[index] == ")":
                return AndOrGate(Gate(token), tuple(children)), index + 1
            raise AndOrError(f"expected ',' or ')' in {text!r}")

    root, end = parse(0)
    if end != len(tokens):
        raise AndOrError(f"trailing tokens in {text!r}")
    return AndOrTree(root=root)


# ---------------------------------------------------------------------------
# Progress measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Measures:
    """
    Cost functions and progress measures of a tree.

    Attributes:
        c (dict[NodeId, int]): Delayer-side cost of every node.
        d (dict[NodeId, int]): Prover-side cost of every node.
        marked (frozenset[NodeId]): OR gates with >= 2 children whose proper parent is undefined or AND.
        p (int): Delayer progress measure; 0 on the empty tree.
        s (int): Prover progress measure; 0 on the empty tree.
    """

    c: dict[NodeId, int]
    d: dict[NodeId, int]
    marked: frozenset[NodeId]
    p: int
    s: int


def measures(t: AndOrTree) -> Measures:
    if t.is_empty:
        return Measures(c={}, d={}, marked=frozenset(), p=0, s=0)

    c: dict[NodeId, int] = {}
    d: dict[NodeId, int] = {}
    marked = set()
    # proper parent: nearest ancestor with at least two children, passed down as its label
    stack: list[tuple[NodeId, AndOrNode, Gate | None]] = [((), t.root, None)]
    order = []
    while stack:
        node_id, node, proper_parent = stack.pop()
        order.append((node_id, node))
        if isinstance(node, AndOrGate):
            if node.label is Gate.OR and len(node.children) >= 2 and proper_parent in (None, Gate.AND):
                marked.add(node_id)
            below = node.label if len(node.children) >= 2 else proper_parent
            for index, child in enumerate(node.children):
                stack.append(((*node_id, index), child, below))

    for node_id, node in reversed(order):
        if isinstance(node, AndOrLeaf):
            c[node_id], d[node_id] = 0, 1
            continue
        child_ids = [(*node_id, index) for index in range(len(node.children))]
        if len(child_ids) == 1:
            c[node_id], d[node_id] = c[child_ids[0]], d[child_ids[0]]
        elif node.label is Gate.AND:
            c[node_id], d[node_id] = 1, 1
        else:
            c[node_id] = sum(c[child] for child in child_ids)
            d[node_id] = sum(d[child] for child in child_ids)

    p = 1 + sum(max(c[v] - 1, 0) for v in marked)
    s = 1 + sum(max(d[v] - 1, 0) for v in marked)
    return Measures(c=c, d=d, marked=frozenset(marked), p=p, s=s)


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


def prover_move(t: AndOrTree) -> int:
    """Variable of the leftmost leaf."""
    if t.is_empty:
        raise AndOrError("no move on an empty AND-OR tree")
    return next(iter(leaf_ids(t)))


def delayer_move(t: AndOrTree, i: int) -> Decision:
    """
    Delayer response to a query of x_i on a reduced tree.

    Answers 0 under an OR parent. Under an AND parent v it answers 1 when v has more than two
    children, is the root, has a sibling subtree m with an AND child, or when every other child
    of v's parent is a leaf; otherwise, and when the queried leaf is alone, it defers.
    A variable with no leaf is answered with 0.

    Raises:
        AndOrError: On the empty tree.
    """
    if t.is_empty:
        raise AndOrError("no move on an empty AND-OR tree")
    ids = leaf_ids(t)
    if i not in ids:
        return Decision.ANSWER0
    leaf_id = ids[i]
    if not leaf_id:
        return Decision.DEFER
    v_id = leaf_id[:-1]
    v = t.node(v_id)
    if v.label is Gate.OR:
        return Decision.ANSWER0
    if len(v.children) > 2 or not v_id:
        return Decision.ANSWER1
    m = v.children[1 - leaf_id[-1]]
    if isinstance(m, AndOrGate) and any(isinstance(x, AndOrGate) and x.label is Gate.AND for x in m.children):
        return Decision.ANSWER1
    u = t.node(v_id[:-1])
    if all(isinstance(x, AndOrLeaf) for index, x in enumerate(u.children) if index != v_id[-1]):
        return Decision.ANSWER1
    return Decision.DEFER
