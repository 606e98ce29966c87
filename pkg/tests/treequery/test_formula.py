"""
test_formula.py

These tests convert 0/1-labelled decision trees into formulas and compare
sizes and truth tables.

Example usage:
    pytest tests/treequery/test_formula.py
"""

import pytest

from treequery.dtree import DTree, Leaf, format_bits, output
from treequery.errors import TreeFormatError
from treequery.formula import BinaryGate, Const, Literal, formula_eval, formula_size, render, simplify, to_formula
from treequery.helpers.generators import generate
from utils.logging import get_logger

logger = get_logger("TestFormula")


def _agrees(tree, f) -> bool:
    return all(
        formula_eval(f, format_bits(x, tree.n)) == int(output(tree, format_bits(x, tree.n))) for x in range(1 << tree.n)
    )


def test_single_query_formula():
    tree = generate("or-list", n=1)
    f = to_formula(tree)
    assert render(f) == "((!x0 & 0) | (x0 & 1))"
    assert formula_size(f) == 7
    assert render(simplify(f)) == "x0"


def test_leaf_becomes_constant():
    tree = DTree(n=1, root=0, nodes={0: Leaf("a", out="1")})
    assert to_formula(tree) == Const(1)
    assert formula_size(to_formula(tree)) == 1


def test_unlabelled_leaves_rejected():
    with pytest.raises(TreeFormatError):
        to_formula(generate("complete", depth=2))


@pytest.mark.parametrize("kind, params", [("parity", {"n": 4}), ("and-chain", {"n": 5}), ("or-list", {"n": 5})])
def test_families_agree_and_respect_size_bound(kind, params):
    tree = generate(kind, **params)
    f = to_formula(tree)
    assert formula_size(f) <= 5 * tree.size
    assert _agrees(tree, f)
    g = simplify(f)
    assert formula_size(g) <= formula_size(f)
    assert _agrees(tree, g)


def test_formula_eval_by_hand():
    f = BinaryGate("OR", Literal(0, negated=True), BinaryGate("AND", Literal(1), Const(1)))
    assert formula_eval(f, "10") == 0
    assert formula_eval(f, [1, 1]) == 1
    assert formula_eval(f, "00") == 1


def test_random_corpus():
    for seed in range(200):
        tree = generate("random", seed=seed, budget=1 + 2 * (seed % 20), n=1 + seed % 10)
        f = to_formula(tree)
        assert formula_size(f) <= 5 * tree.size, seed
        assert _agrees(tree, f), seed
