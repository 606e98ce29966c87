"""
formula.py

This module converts decision trees with 0/1 leaves into Boolean formulas
with binary AND/OR gates, literals and constants.

Key Concepts:
- Conversion: an internal node on x_i with subtrees L and R becomes
  (!x_i & F_L) | (x_i & F_R); a leaf with output b becomes the constant b.
  Each internal node adds five formula nodes, so the formula has at most
  five times as many nodes as the tree.
- Simplify: optional constant propagation; it only ever removes nodes.

Example usage:
    tree = generate("parity", n=3)
    f = to_formula(tree)
    assert formula_size(f) <= 5 * tree.size
    print(render(f))
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

from treequery.dtree import DTree, Internal, as_bits
from treequery.errors import TreeFormatError


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Literal:
    var: int
    negated: bool = False


@dataclass(frozen=True)
class BinaryGate:
    op: str  # "AND" or "OR"
    left: Formula
    right: Formula


Formula = Union[Const, Literal, BinaryGate]


def to_formula(t: DTree) -> Formula:
    """
    Raises:
        TreeFormatError: If a leaf has no '0'/'1' output label.
    """
    built: dict[int, Formula] = {}
    for v in reversed(t.preorder):
        node = t.nodes[v]
        if isinstance(node, Internal):
            built[v] = BinaryGate(
                "OR",
                BinaryGate("AND", Literal(node.var, negated=True), built.pop(node.zero)),
                BinaryGate("AND", Literal(node.var), built.pop(node.one)),
            )
        elif node.out in ("0", "1"):
            built[v] = Const(int(node.out))
        else:
            raise TreeFormatError(f"leaf {v} has output {node.out!r}, expected '0' or '1'")
    return built[t.root]


def _postorder(f: Formula) -> list[Formula]:
    order, stack = [], [f]
    while stack:
        node = stack.pop()
        order.append(node)
        if isinstance(node, BinaryGate):
            stack.extend((node.left, node.right))
    return order[::-1]


def formula_size(f: Formula) -> int:
    return len(_postorder(f))


def formula_eval(f: Formula, x: str | Sequence[int], n: int | None = None) -> int:
    bits = as_bits(x, n if n is not None else len(x))
    values: dict[int, int] = {}
    for node in _postorder(f):
        if isinstance(node, Const):
            value = node.value
        elif isinstance(node, Literal):
            value = bits[node.var] ^ int(node.negated)
        else:
            left, right = values[id(node.left)], values[id(node.right)]
            value = left & right if node.op == "AND" else left | right
        values[id(node)] = value
    return values[id(f)]


def simplify(f: Formula) -> Formula:
    """Constant propagation: AND/OR with a constant child collapse. Never increases size."""
    done: dict[int, Formula] = {}
    for node in _postorder(f):
        if not isinstance(node, BinaryGate):
            done[id(node)] = node
            continue
        left, right = done[id(node.left)], done[id(node.right)]
        absorbing = 0 if node.op == "AND" else 1
        if any(isinstance(child, Const) and child.value == absorbing for child in (left, right)):
            done[id(node)] = Const(absorbing)
        elif isinstance(left, Const):
            done[id(node)] = right
        elif isinstance(right, Const):
            done[id(node)] = left
        else:
            done[id(node)] = BinaryGate(node.op, left, right)
    return done[id(f)]


def render(f: Formula) -> str:
    if isinstance(f, Const):
        return str(f.value)
    if isinstance(f, Literal):
        return f"!x{f.var}" if f.negated else f"x{f.var}"
    symbol = "&" if f.op == "AND" else "|"
    return f"({render(f.left)} {symbol} {render(f.right)})"
