"""
test_dualadv.py

These tests build dual adversary solutions from weighted trees and check the
pair constraint over all ordered input pairs, the objective, and rebalancing.

Example usage:
    pytest tests/treequery/test_dualadv.py
"""

import math

import numpy as np
import pytest

from treequery import dualadv
from treequery.errors import EnumerationLimitError, WeightError
from treequery.helpers.generators import generate
from treequery.weights import appendix_b_weights, canonical_weights, evaluate, opt_value, unit_weights
from utils.logging import get_logger

logger = get_logger("TestDualAdversary")


def test_and_chain_canonical_solution():
    tree = generate("and-chain", n=3)
    sol = dualadv.build(tree, canonical_weights(tree))
    report = dualadv.check_feasibility(sol, tree)
    assert report.passed
    assert report.pairs_checked == 64
    assert dualadv.objective(sol) == pytest.approx(opt_value(tree), rel=1e-9)


def test_vectors_sit_on_the_querying_vertex():
    tree = generate("parity", n=2)
    w = unit_weights(tree)
    sol = dualadv.build(tree, w)
    axis, value = sol.u(0, 0)
    assert axis == tree.root
    assert value == pytest.approx(1.0)
    # every variable is queried on every path of a parity tree
    assert np.all(sol.vertex >= 0)


def test_unqueried_variable_gives_zero_vectors():
    tree = generate("and-chain", n=3)
    sol = dualadv.build(tree, unit_weights(tree))
    # on x = 000 the chain stops after x_0
    assert sol.u(0, 1) is None
    assert sol.w(0, 2) is None


@pytest.mark.parametrize("make", [unit_weights, canonical_weights, appendix_b_weights])
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_feasibility_on_random_trees(make, seed):
    tree = generate("random", seed=seed, budget=31, n=7)
    w = make(tree)
    sol = dualadv.build(tree, w)
    report = dualadv.check_feasibility(sol, tree)
    assert report.passed, report.worst_pair
    value = evaluate(tree, w)
    assert dualadv.objective(sol) == pytest.approx(max(value.alpha, value.beta), rel=1e-9)


def test_balance_brings_objective_to_geometric_mean():
    tree = generate("random", seed=21, budget=25, n=6)
    w = appendix_b_weights(tree)
    value = evaluate(tree, w)
    sol = dualadv.build(tree, dualadv.balance(w, value.alpha, value.beta))
    assert dualadv.objective(sol) == pytest.approx(math.sqrt(value.alpha * value.beta), rel=1e-9)
    assert dualadv.check_feasibility(sol, tree).passed


def test_corrupted_solution_reports_first_worst_pair():
    tree = generate("parity", n=2)
    sol = dualadv.build(tree, unit_weights(tree))
    u_value = sol.u_value.copy()
    u_value[0, 0] = 2.0
    broken = dualadv.DualAdvSolution(n=sol.n, leaf_of=sol.leaf_of, vertex=sol.vertex, u_value=u_value, w_value=sol.w_value)
    report = dualadv.check_feasibility(broken, tree)
    assert not report.passed
    assert report.max_residual == pytest.approx(1.0)
    assert report.worst_pair == ("00", "10")


def test_worst_pair_ties_broken_on_printed_strings():
    tree = generate("parity", n=2)
    sol = dualadv.build(tree, unit_weights(tree))
    u_value = sol.u_value.copy()
    # x = "10" (index 1) and x = "01" (index 2) both break the constraint by 1
    u_value[1, 0] = 2.0
    u_value[2, 0] = 2.0
    broken = dualadv.DualAdvSolution(n=sol.n, leaf_of=sol.leaf_of, vertex=sol.vertex, u_value=u_value, w_value=sol.w_value)
    report = dualadv.check_feasibility(broken, tree)
    assert report.max_residual == pytest.approx(1.0)
    assert report.worst_pair == ("01", "10")
    assert dualadv.check_feasibility(broken, tree, jobs=2).worst_pair == ("01", "10")


def test_parallel_check_matches_serial():
    tree = generate("random", seed=2, budget=41, n=10)
    sol = dualadv.build(tree, canonical_weights(tree))
    serial = dualadv.check_feasibility(sol, tree)
    parallel = dualadv.check_feasibility(sol, tree, jobs=3)
    assert serial.max_residual == parallel.max_residual
    assert serial.worst_pair == parallel.worst_pair


def test_limits_and_weights_checked():
    tree = generate("random", seed=1, budget=31, n=13)
    with pytest.raises(EnumerationLimitError):
        dualadv.check_feasibility(dualadv.build(tree, unit_weights(tree)), tree)
    small = generate("and-chain", n=2)
    with pytest.raises(WeightError):
        dualadv.build(small, {})


@pytest.mark.slow
def test_dual_adversary_corpus():
    for seed in range(100):
        tree = generate("random", seed=seed, budget=1 + 2 * (1 + seed % 15), n=1 + seed % 10)
        for make in (unit_weights, canonical_weights, appendix_b_weights):
            w = make(tree)
            sol = dualadv.build(tree, w)
            assert dualadv.check_feasibility(sol, tree).passed, seed
        value = evaluate(tree, canonical_weights(tree))
        assert dualadv.objective(dualadv.build(tree, canonical_weights(tree))) == pytest.approx(opt_value(tree), rel=1e-9)
        assert value.alpha == pytest.approx(value.beta, rel=1e-9)
