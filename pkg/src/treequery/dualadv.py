"""
dualadv.py

This module builds a feasible solution of the dual adversary program from a
weighted decision tree and checks it.

Key Concepts:
- Vectors: for input x and variable j, if some vertex v on the path P_x
  queries j, u_xj is 1/sqrt(W) of the edge P_x takes at v, placed on axis v,
  and w_xj is sqrt(W) of the edge P_x does not take at v, on the same axis.
  Otherwise both are zero.
- Feasibility: for every pair x, y the sum over j with x_j != y_j of
  <u_xj, w_yj> is 1 when x and y reach different leaves and 0 otherwise.
  Only the vertex where P_x and P_y split contributes, giving
  (1/sqrt(W_taken)) * sqrt(W_taken) = 1.
- Objective: max over x of max(sum_j |u_xj|^2, sum_j |w_xj|^2), which equals
  max(alpha, beta) of the weight program; rescaling the weights by
  sqrt(beta/alpha) brings it down to sqrt(alpha * beta).

Example usage:
    tree = generate("and-chain", n=3)
    sol = build(tree, canonical_weights(tree))
    assert check_feasibility(sol, tree).passed
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from treequery.dtree import DTree, EdgeId, check_enumerable, eval_all, format_bits, path_to
from treequery.settings import DEFAULT_PAIRWISE_N, MAX_ENUM_N, RESIDUAL_ATOL
from treequery.weights import WeightMap, check_weights, rescale
from utils.logging import get_logger

logger = get_logger(__name__)

ROW_BLOCK = 256


@dataclass(frozen=True)
class DualAdvSolution:
    """
    Per-input, per-variable vectors, each zero or a single weighted coordinate.

    Attributes:
        n (int): Number of variables.
        leaf_of (np.ndarray): Leaf reached by each input index, shape (2^n,).
        vertex (np.ndarray): Axis (internal node id) of u_xj and w_xj, -1 where both are zero; shape (2^n, n).
        u_value (np.ndarray): Coefficient of u_xj on its axis, shape (2^n, n).
        w_value (np.ndarray): Coefficient of w_xj on its axis, shape (2^n, n).
    """

    n: int
    leaf_of: np.ndarray
    vertex: np.ndarray
    u_value: np.ndarray
    w_value: np.ndarray

    def u(self, x: int, j: int) -> tuple[int, float] | None:
        """(axis, coefficient) of u_xj, or None when it is zero."""
        v = int(self.vertex[x, j])
        return None if v < 0 else (v, float(self.u_value[x, j]))

    def w(self, x: int, j: int) -> tuple[int, float] | None:
        v = int(self.vertex[x, j])
        return None if v < 0 else (v, float(self.w_value[x, j]))


@dataclass
class FeasibilityReport:
    """
    Result of checking every ordered pair of inputs.

    Attributes:
        passed (bool): All residuals within tolerance.
        pairs_checked (int): 4^n.
        max_residual (float): Largest |sum - (1 - delta)|.
        worst_pair (tuple[str, str]): Lexicographically first pair (x_0-first strings) attaining it.
    """

    passed: bool
    pairs_checked: int
    max_residual: float
    worst_pair: tuple[str, str]


def build(t: DTree, wmap: WeightMap, limit: int = MAX_ENUM_N) -> DualAdvSolution:
    """
    Materializes u_xj and w_xj for every input.

    Raises:
        EnumerationLimitError: If n exceeds `limit`.
        WeightError: On missing or non-positive weights.
    """
    check_enumerable(t.n, limit)
    check_weights(t, wmap)
    # vectors depend on x only through its path, so tabulate per leaf and broadcast
    leaf_row = {leaf: i for i, leaf in enumerate(t.leaves)}
    vertex_table = np.full((len(leaf_row), t.n), -1, dtype=np.int64)
    u_table = np.zeros((len(leaf_row), t.n))
    w_table = np.zeros((len(leaf_row), t.n))
    for leaf, i in leaf_row.items():
        for edge in path_to(t, leaf).edges:
            j = t.nodes[edge.parent].var
            vertex_table[i, j] = edge.parent
            u_table[i, j] = 1.0 / math.sqrt(wmap[edge])
            w_table[i, j] = math.sqrt(wmap[EdgeId(edge.parent, 1 - edge.bit)])

    leaf_of = eval_all(t, limit)
    rows = np.array([leaf_row[int(leaf)] for leaf in leaf_of], dtype=np.int64)
    return DualAdvSolution(
        n=t.n,
        leaf_of=leaf_of,
        vertex=vertex_table[rows],
        u_value=u_table[rows],
        w_value=w_table[rows],
    )


def check_feasibility(sol: DualAdvSolution, t: DTree, jobs: int = 1, limit: int = DEFAULT_PAIRWISE_N) -> FeasibilityReport:
    """
    Checks the pair constraint for all ordered pairs (x, y), blocked by rows of x.

    Blocks may run on `jobs` threads; the worst pair is reduced in lexicographic order either way.
    """
    check_enumerable(t.n, limit)
    size = 1 << sol.n
    inputs = np.arange(size, dtype=np.int64)
    bits = (inputs[:, None] >> np.arange(sol.n)[None, :]) & 1
    # x_0 is written first, so string order is the order of the bit-reversed index
    string_rank = bits @ (1 << np.arange(sol.n - 1, -1, -1, dtype=np.int64))

    def check_rows(start: int) -> tuple[float, int, int]:
        xs = inputs[start : start + ROW_BLOCK]
        total = np.zeros((xs.size, size))
        for j in range(sol.n):
            vx = sol.vertex[xs, j]
            same_axis = (vx[:, None] == sol.vertex[None, :, j]) & (vx[:, None] >= 0)
            differ = bits[xs, j][:, None] != bits[None, :, j]
            total += np.where(same_axis & differ, sol.u_value[xs, j][:, None] * sol.w_value[None, :, j], 0.0)
        target = (sol.leaf_of[xs][:, None] != sol.leaf_of[None, :]).astype(float)
        residual = np.abs(total - target)
        rows, cols = np.nonzero(residual == residual.max())
        first = np.lexsort((string_rank[cols], string_rank[xs[rows]]))[0]
        row, col = int(rows[first]), int(cols[first])
        return float(residual[row, col]), int(xs[row]), col

    starts = range(0, size, ROW_BLOCK)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(check_rows, starts))
    else:
        blocks = [check_rows(start) for start in starts]

    max_residual, worst = -1.0, (0, 0)
    for value, x, y in blocks:
        key = (string_rank[x], string_rank[y])
        if value > max_residual or (value == max_residual and key < (string_rank[worst[0]], string_rank[worst[1]])):
            max_residual, worst = value, (x, y)
    report = FeasibilityReport(
        passed=max_residual <= RESIDUAL_ATOL,
        pairs_checked=size * size,
        max_residual=max_residual,
        worst_pair=(format_bits(worst[0], sol.n), format_bits(worst[1], sol.n)),
    )
    logger.info(f"Dual adversary feasibility: {report.pairs_checked} pairs, max residual {report.max_residual:.3g}")
    return report


def objective(sol: DualAdvSolution) -> float:
    """max over x of max(sum_j |u_xj|^2, sum_j |w_xj|^2)."""
    u_norms = np.sum(sol.u_value**2, axis=1)
    w_norms = np.sum(sol.w_value**2, axis=1)
    return float(np.max(np.maximum(u_norms, w_norms)))


def balance(wmap: WeightMap, alpha: float, beta: float) -> dict[EdgeId, float]:
    """Rescaled weights under which both inner maxima equal sqrt(alpha * beta)."""
    return rescale(wmap, alpha, beta)
