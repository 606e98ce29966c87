"""
test_rank.py

These tests cover tree rank, G-colorings and their costs, randomized rank,
and the two restriction DPs on truth tables (function rank and game value).

Key Concepts:
- Rank identities: the optimal coloring and the exhaustive search over all
  colorings both reproduce the tree rank.
- Function rank equals the Prover-Delayer game value on every function.

Example usage:
    pytest tests/treequery/test_rank.py
    pytest -m slow tests/treequery/test_rank.py
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treequery.dtree import EdgeId, RandomizedDTree
from treequery.errors import EnumerationLimitError, SizeLimitError, TreeFormatError
from treequery.helpers.generators import all_shapes, generate
from treequery.rank import (
    Color,
    GColoring,
    TruthTable,
    coloring_cost,
    enumerate_colorings,
    exhaustive_guessing_complexity,
    func_rank,
    game_value,
    optimal_coloring,
    rank_upper_bound,
    rrank,
    subtree_ranks,
    tree_rank,
    tree_truth_table,
)
from utils.logging import get_logger

logger = get_logger("TestRank")


@pytest.mark.parametrize(
    "kind, params, expected",
    [
        ("complete", {"depth": 3}, 3),
        ("parity", {"n": 3}, 3),
        ("and-chain", {"n": 5}, 1),
        ("or-list", {"n": 5}, 1),
        ("complete", {"depth": 0}, 0),
    ],
)
def test_tree_rank_of_families(kind, params, expected):
    tree = generate(kind, **params)
    assert tree_rank(tree) == expected
    assert coloring_cost(tree, optimal_coloring(tree)) == expected


def test_spine_rank_is_log_of_its_complete_side():
    tree = generate("spine", n=16)
    ranks = subtree_ranks(tree)
    assert ranks[tree.nodes[tree.root].zero] == 4
    assert tree_rank(tree) == 4


def test_coloring_rejects_two_black_edges():
    with pytest.raises(ValueError):
        GColoring(color={EdgeId(0, 0): Color.BLACK, EdgeId(0, 1): Color.BLACK})


def test_coloring_cost_needs_every_edge():
    tree = generate("and-chain", n=2)
    with pytest.raises(TreeFormatError):
        coloring_cost(tree, GColoring(color={EdgeId(0, 0): Color.RED}))


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_exhaustive_search_matches_enumeration(k):
    for tree in all_shapes(k):
        listed = min(coloring_cost(tree, c) for c in enumerate_colorings(tree))
        assert exhaustive_guessing_complexity(tree) == listed == tree_rank(tree)


def test_enumerate_colorings_counts():
    tree = generate("parity", n=2)
    assert sum(1 for _ in enumerate_colorings(tree)) == 27


def test_exhaustive_size_cap():
    tree = generate("complete", depth=5)
    with pytest.raises(SizeLimitError):
        exhaustive_guessing_complexity(tree)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), budget=st.integers(min_value=1, max_value=63))
def test_rank_identities_on_random_trees(seed, budget):
    tree = generate("random", seed=seed, budget=budget)
    rank = tree_rank(tree)
    assert coloring_cost(tree, optimal_coloring(tree)) == rank
    assert rank <= rank_upper_bound(tree) + 1e-12
    if len(tree.internal) <= 12:
        assert exhaustive_guessing_complexity(tree) == rank


def test_randomized_rank_is_support_maximum():
    r = RandomizedDTree(support=((0.5, generate("and-chain", n=3)), (0.5, generate("parity", n=3))))
    assert rrank(r) == 3


def test_truth_table_hex_convention():
    # bit k is f at input index k, so FE is OR on 3 bits
    table = TruthTable.from_hex(3, "FE")
    assert table.value(0) == 0
    assert all(table.value(x) == 1 for x in range(1, 8))
    assert table.to_hex() == "FE"
    assert TruthTable.from_function(3, any) == table
    with pytest.raises(ValueError):
        TruthTable.from_hex(2, "1FF")


def test_tree_truth_table():
    assert tree_truth_table(generate("or-list", n=3)) == TruthTable.from_hex(3, "FE")
    assert tree_truth_table(generate("and-chain", n=3)) == TruthTable.from_hex(3, "80")
    assert tree_truth_table(generate("parity", n=2)) == TruthTable.from_hex(2, "6")


@pytest.mark.parametrize(
    "n, table, expected",
    [
        (3, "FE", 1),
        (3, "80", 1),
        (3, "96", 3),
        (2, "6", 2),
        (3, "00", 0),
        (3, "FF", 0),
        (1, "2", 1),
    ],
)
def test_func_rank_examples(n, table, expected):
    f = TruthTable.from_hex(n, table)
    assert func_rank(f) == expected
    assert game_value(f) == expected


def test_func_rank_ignores_irrelevant_variables():
    # x_0 alone, on 4 variables
    f = TruthTable.from_function(4, lambda bits: bits[0])
    assert func_rank(f) == 1


def test_func_rank_is_at_most_tree_rank():
    tree = generate("random", seed=5, budget=31, n=5)
    assert func_rank(tree_truth_table(tree)) <= tree_rank(tree)


def test_dp_size_cap():
    with pytest.raises(EnumerationLimitError):
        func_rank(TruthTable(n=13, bits=1))


def test_rank_equals_game_value_on_all_three_bit_functions():
    for bits in range(256):
        f = TruthTable(n=3, bits=bits)
        assert func_rank(f) == game_value(f), f.to_hex()


@pytest.mark.slow
def test_rank_equals_game_value_on_random_four_bit_functions():
    rng = np.random.default_rng(2024)
    for bits in rng.integers(0, 1 << 16, size=1000):
        f = TruthTable(n=4, bits=int(bits))
        assert func_rank(f) == game_value(f), f.to_hex()


@pytest.mark.slow
def test_rank_identities_on_corpus():
    checked = 0
    for seed in range(1000):
        tree = generate("random", seed=seed, budget=1 + 2 * (seed % 32))
        rank = tree_rank(tree)
        assert coloring_cost(tree, optimal_coloring(tree)) == rank
        assert rank <= math.log2(tree.size + 1) - 1 + 1e-12
        if seed < 500 and len(tree.internal) <= 12:
            assert exhaustive_guessing_complexity(tree) == rank
            checked += 1
    logger.info(f"Exhaustive guessing complexity checked on {checked} trees")
