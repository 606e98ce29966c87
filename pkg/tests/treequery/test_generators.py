"""
test_generators.py

These tests check the named tree families produced by the generator helper,
which the rest of the suite and the `gen` command rely on.

Example usage:
    pytest tests/treequery/test_generators.py
"""

import pytest

from treequery.dtree import output, serialize
from treequery.errors import TreeQueryError
from treequery.helpers.generators import all_shapes, generate
from utils.logging import get_logger

logger = get_logger("TestGenerators")


def test_or_list_computes_or():
    tree = generate("or-list", n=3)
    assert output(tree, "000") == "0"
    assert output(tree, "001") == "1"
    assert tree.size == 7


def test_and_chain_computes_and():
    tree = generate("and-chain", n=3)
    assert output(tree, "111") == "1"
    assert output(tree, "110") == "0"
    assert tree.depth == 3


def test_parity_outputs():
    tree = generate("parity", n=3)
    assert output(tree, "101") == "0"
    assert output(tree, "100") == "1"
    assert tree.size == 15


def test_complete_and_spine_shapes():
    assert generate("complete", depth=4).size == 31
    assert generate("complete", depth=0).is_trivial
    spine = generate("spine", n=8)
    # root + complete tree with 8 leaves + chain of 8 queries with 9 leaves
    assert spine.size == 1 + 15 + 17
    assert spine.n == 9
    with pytest.raises(TreeQueryError):
        generate("spine", n=6)


def test_random_tree_is_seed_deterministic():
    a = generate("random", seed=11, budget=41)
    b = generate("random", seed=11, budget=41)
    assert serialize(a) == serialize(b)
    assert a.size <= 41
    assert all(a.nodes[leaf].out in ("0", "1") for leaf in a.leaves)


@pytest.mark.parametrize("k, count", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 14)])
def test_all_shapes_counts_are_catalan(k, count):
    shapes = all_shapes(k)
    assert len(shapes) == count
    assert len({serialize(tree) for tree in shapes}) == count


@pytest.mark.parametrize("kind, params", [("or-list", {"n": 0}), ("parity", {"n": -1}), ("complete", {"depth": -2})])
def test_non_positive_sizes_rejected(kind, params):
    with pytest.raises(TreeQueryError):
        generate(kind, **params)


def test_unknown_kind():
    with pytest.raises(ValueError):
        generate("bushy", n=3)
