"""
spanprog.py

This module turns a weighted decision tree into a span program with
orthogonal inputs and checks, input by input, that it computes the leaf
function of the tree.

Key Concepts:
- Space: one coordinate per tree vertex.
- Input vectors: edge (v, q) of weight W contributes sqrt(W) * (|v> - |child>)
  and is available on input x exactly when x_{var(v)} = q.
- Targets: leaf u has target |root> - |u>.
- Witnesses: on input x the positive witness puts 1/sqrt(W_e) on every edge
  of the path P_x (the sum telescopes to the target of the reached leaf); the
  negative witness is the sum of |v> over the vertices of P_x.
- Witness sizes: the largest squared positive witness norm equals the
  largest sum of 1/W_e along a path, and the largest ||A^T w_bar||^2 equals
  the largest deviating weight sum.

Example usage:
    tree = generate("parity", n=3)
    inst = build(tree, unit_weights(tree))
    assert verify(inst, tree, "101").passed
    assert witness_sizes(inst, tree).wsize == pytest.approx(3)
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from treequery.dtree import DTree, EdgeId, as_bits, eval_all, format_bits, index_of, input_path, path_to
from treequery.errors import TreeQueryError
from treequery.settings import CLOSED_FORM_RTOL, MAX_ENUM_N, RESIDUAL_ATOL
from treequery.weights import WeightMap, check_weights, path_sums
from utils.logging import get_logger

logger = get_logger(__name__)

CONDITIONS = (
    "positive_unavailable_zero",
    "positive_reaches_target",
    "negative_orthogonal_available",
    "negative_targets_one",
)

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class SpanProgramInstance:
    """
    A span program built from a weighted tree. Vectors are stored sparsely as {row: value}.

    Attributes:
        dim (int): Number of tree vertices.
        row (Mapping[int, int]): Coordinate of each vertex.
        edges (tuple[EdgeId, ...]): Column order.
        weights (Mapping[EdgeId, float]): Edge weights used for the columns.
        columns (Mapping[EdgeId, dict[int, float]]): Input vector of each edge.
        availability (Mapping[EdgeId, tuple[int, int]]): (variable, bit) making each edge available.
        targets (Mapping[int, dict[int, float]]): Target vector of each leaf.
    """

    dim: int
    row: Mapping[int, int]
    edges: tuple[EdgeId, ...]
    weights: Mapping[EdgeId, float]
    columns: Mapping[EdgeId, dict[int, float]]
    availability: Mapping[EdgeId, tuple[int, int]]
    targets: Mapping[int, dict[int, float]]

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense dim x #edges matrix with the input vectors as columns."""
        a = np.zeros((self.dim, len(self.edges)))
        for j, edge in enumerate(self.edges):
            for i, value in self.columns[edge].items():
                a[i, j] = value
        return a

    @cached_property
    def target_matrix(self) -> np.ndarray:
        """Dense dim x #leaves matrix of targets, leaves in `leaf_order`."""
        t = np.zeros((self.dim, len(self.targets)))
        for j, leaf in enumerate(self.leaf_order):
            for i, value in self.targets[leaf].items():
                t[i, j] = value
        return t

    @cached_property
    def leaf_order(self) -> tuple[int, ...]:
        return tuple(self.targets)

    @cached_property
    def edge_var(self) -> np.ndarray:
        return np.array([self.availability[edge][0] for edge in self.edges], dtype=np.int64)

    @cached_property
    def edge_bit(self) -> np.ndarray:
        return np.array([self.availability[edge][1] for edge in self.edges], dtype=np.int64)


@dataclass(frozen=True)
class WitnessPair:
    """Positive witness over edges and negative witness over vertices, both sparse."""

    positive: Mapping[EdgeId, float]
    negative: Mapping[int, float]


@dataclass
class SpanCheckReport:
    """
    Residuals of the four span-program conditions on one input.

    Attributes:
        x (str): The input, x_0 first.
        residuals (dict[str, float]): Max absolute residual per condition.
        passed (bool): True if every residual is at most the tolerance.
    """

    x: str
    residuals: dict[str, float]
    passed: bool

    @property
    def failing(self) -> list[str]:
        return [name for name in CONDITIONS if not self.residuals[name] <= RESIDUAL_ATOL]


@dataclass
class SpanVerification:
    """Aggregated verification over many inputs; `worst` holds (condition, x, residual)."""

    passed: bool
    inputs_checked: int
    max_residual: dict[str, float]
    worst: tuple[str, str, float]
    failures: int = 0


@dataclass
class WitnessSizes:
    """
    Witness sizes from both definitions.

    Attributes:
        plus (float): Max over inputs of ||w_x||^2.
        minus (float): Max over inputs of ||A^T w_bar_x||^2.
        wsize (float): sqrt(plus * minus).
        plus_paths (float): Max over paths of sum 1/W_e.
        minus_paths (float): Max over paths of the deviating weight sum.
        consistent (bool): Both definitions agree within tolerance.
    """

    plus: float
    minus: float
    wsize: float
    plus_paths: float
    minus_paths: float
    consistent: bool = field(default=True)


def build(t: DTree, w: WeightMap) -> SpanProgramInstance:
    """
    Builds the span program of a weighted tree.

    Raises:
        WeightError: On missing or non-positive weights.
    """
    check_weights(t, w)
    row = {v: i for i, v in enumerate(t.preorder)}
    columns, availability = {}, {}
    for edge in t.edges:
        scale = math.sqrt(w[edge])
        columns[edge] = {row[edge.parent]: scale, row[t.child(edge)]: -scale}
        availability[edge] = (t.nodes[edge.parent].var, edge.bit)
    targets = {}
    for leaf in t.leaves:
        # the single-leaf tree has the zero target
        targets[leaf] = {} if leaf == t.root else {row[t.root]: 1.0, row[leaf]: -1.0}
    inst = SpanProgramInstance(
        dim=len(row),
        row=row,
        edges=t.edges,
        weights=dict(w),
        columns=columns,
        availability=availability,
        targets=targets,
    )
    logger.debug(f"Span program: dim {inst.dim}, {len(inst.edges)} input vectors, {len(targets)} targets")
    return inst


def witnesses(inst: SpanProgramInstance, t: DTree, x: str | Sequence[int]) -> WitnessPair:
    """Positive and negative witness for input x."""
    path = input_path(t, x)
    positive = {edge: 1.0 / math.sqrt(inst.weights[edge]) for edge in path.edges}
    negative = {v: 1.0 for v in (*path.internal_nodes, path.leaf)}
    return WitnessPair(positive=positive, negative=negative)


def _dense_pair(inst: SpanProgramInstance, pair: WitnessPair) -> tuple[np.ndarray, np.ndarray]:
    column = {edge: j for j, edge in enumerate(inst.edges)}
    positive = np.zeros(len(inst.edges))
    for edge, value in pair.positive.items():
        positive[column[edge]] = value
    negative = np.zeros(inst.dim)
    for v, value in pair.negative.items():
        negative[inst.row[v]] = value
    return positive, negative


def _max_abs(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if values.size else 0.0


def verify(inst: SpanProgramInstance, t: DTree, x: str | Sequence[int], witness: WitnessPair | None = None) -> SpanCheckReport:
    """
    Checks the four span-program conditions on one input.

    Args:
        inst (SpanProgramInstance): The span program.
        t (DTree): The tree it was built from.
        x (str | Sequence[int]): The input.
        witness (WitnessPair | None): Witnesses to check; the constructed ones by default.

    Returns:
        SpanCheckReport: Residual per condition.
    """
    bits = np.array(as_bits(x, t.n), dtype=np.int64)
    if inst.dim != t.size or len(inst.edges) != len(t.edges):
        raise TreeQueryError(f"span program dimension {inst.dim} does not match tree size {t.size}")
    pair = witness if witness is not None else witnesses(inst, t, x)
    positive, negative = _dense_pair(inst, pair)
    available = bits[inst.edge_var] == inst.edge_bit if len(inst.edges) else np.zeros(0, dtype=bool)

    reached = t.root if t.is_trivial else input_path(t, x).leaf
    target = inst.target_matrix[:, inst.leaf_order.index(reached)]
    others = np.array([leaf != reached for leaf in inst.leaf_order], dtype=bool)
    residuals = {
        "positive_unavailable_zero": _max_abs(positive[~available]),
        "positive_reaches_target": _max_abs(inst.matrix @ positive - target),
        "negative_orthogonal_available": _max_abs((inst.matrix.T @ negative)[available]),
        "negative_targets_one": _max_abs((inst.target_matrix.T @ negative)[others] - 1.0),
    }
    passed = all(value <= RESIDUAL_ATOL for value in residuals.values())
    return SpanCheckReport(x=format_bits(index_of(bits), t.n), residuals=residuals, passed=passed)


class _LeafWitnessTables:
    """Dense witnesses per leaf; witnesses depend on the input only through its path."""

    def __init__(self, inst: SpanProgramInstance, t: DTree):
        self.leaf_index = {leaf: i for i, leaf in enumerate(inst.leaf_order)}
        count = len(inst.leaf_order)
        self.positive = np.zeros((count, len(inst.edges)))
        self.column_dots = np.zeros((count, len(inst.edges)))
        self.target_residual = np.zeros(count)
        self.targets_one_residual = np.zeros(count)
        for leaf, i in self.leaf_index.items():
            path_bits = [0] * t.n
            for edge in path_to(t, leaf).edges:
                path_bits[t.nodes[edge.parent].var] = edge.bit
            positive, negative = _dense_pair(inst, witnesses(inst, t, path_bits))
            self.positive[i] = positive
            self.column_dots[i] = inst.matrix.T @ negative
            self.target_residual[i] = _max_abs(inst.matrix @ positive - inst.target_matrix[:, i])
            others = np.arange(count) != i
            self.targets_one_residual[i] = _max_abs((inst.target_matrix.T @ negative)[others] - 1.0)


def verify_all(inst: SpanProgramInstance, t: DTree, jobs: int = 1, limit: int = MAX_ENUM_N) -> SpanVerification:
    """
    Checks all four conditions on every input, in blocks that may run on `jobs` threads.
    The worst offender is reduced in input order, so the result does not depend on `jobs`.
    """
    reached = eval_all(t, limit)
    tables = _LeafWitnessTables(inst, t)
    leaf_rows = np.array([tables.leaf_index[int(leaf)] for leaf in reached], dtype=np.int64)

    def check_block(start: int) -> dict[str, tuple[float, int, int]]:
        xs = np.arange(start, min(start + BLOCK_SIZE, reached.size), dtype=np.int64)
        rows = leaf_rows[xs]
        available = ((xs[:, None] >> inst.edge_var[None, :]) & 1) == inst.edge_bit[None, :]
        per_input = {
            "positive_unavailable_zero": np.max(np.abs(np.where(available, 0.0, tables.positive[rows])), axis=1, initial=0.0),
            "positive_reaches_target": tables.target_residual[rows],
            "negative_orthogonal_available": np.max(np.abs(np.where(available, tables.column_dots[rows], 0.0)), axis=1, initial=0.0),
            "negative_targets_one": tables.targets_one_residual[rows],
        }
        out = {}
        for name, values in per_input.items():
            worst = int(np.argmax(values))
            out[name] = (float(values[worst]), int(xs[worst]), int(np.count_nonzero(values > RESIDUAL_ATOL)))
        return out

    starts = range(0, reached.size, BLOCK_SIZE)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(check_block, starts))
    else:
        blocks = [check_block(start) for start in starts]

    max_residual = {name: 0.0 for name in CONDITIONS}
    worst_x = {name: 0 for name in CONDITIONS}
    failures = 0
    for block in blocks:
        for name in CONDITIONS:
            value, x, failing = block[name]
            failures += failing
            if value > max_residual[name]:
                max_residual[name], worst_x[name] = value, x
    worst_name = max(CONDITIONS, key=lambda name: max_residual[name])
    result = SpanVerification(
        passed=all(value <= RESIDUAL_ATOL for value in max_residual.values()),
        inputs_checked=int(reached.size),
        max_residual=max_residual,
        worst=(worst_name, format_bits(worst_x[worst_name], t.n), max_residual[worst_name]),
        failures=failures,
    )
    logger.info(f"Span program verified on {result.inputs_checked} inputs: passed={result.passed}")
    return result


def witness_sizes(inst: SpanProgramInstance, t: DTree, limit: int = MAX_ENUM_N) -> WitnessSizes:
    """
    Witness sizes from the norm definitions (enumerating all 2^n inputs) and from path sums.

    Raises:
        EnumerationLimitError: If n exceeds the enumeration cap.
    """
    reached = {int(leaf) for leaf in np.unique(eval_all(t, limit))}
    tables = _LeafWitnessTables(inst, t)
    rows = [tables.leaf_index[leaf] for leaf in reached]
    plus = float(np.max(np.sum(tables.positive[rows] ** 2, axis=1), initial=0.0))
    minus = float(np.max(np.sum(tables.column_dots[rows] ** 2, axis=1), initial=0.0))

    sums = path_sums(t, inst.weights)
    minus_paths = max(deviating for deviating, _ in sums.values())
    plus_paths = max(inverse for _, inverse in sums.values())
    consistent = math.isclose(plus, plus_paths, rel_tol=CLOSED_FORM_RTOL, abs_tol=CLOSED_FORM_RTOL) and math.isclose(
        minus, minus_paths, rel_tol=CLOSED_FORM_RTOL, abs_tol=CLOSED_FORM_RTOL
    )
    if not consistent:
        logger.warning(f"Witness sizes disagree: norms ({plus}, {minus}) vs paths ({plus_paths}, {minus_paths})")
    return WitnessSizes(
        plus=plus,
        minus=minus,
        wsize=math.sqrt(plus * minus),
        plus_paths=plus_paths,
        minus_paths=minus_paths,
        consistent=consistent,
    )
