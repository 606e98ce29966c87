"""
weights.py

This module handles edge weightings of decision trees and the weight
optimization program: minimize sqrt(alpha * beta) over positive edge weights
W, where alpha bounds the total weight of the deviating edges of every
root-to-leaf path and beta bounds the sum of 1/W over the edges of every path.

Key Concepts:
- OPT recurrence: a leaf has OPT 0; an internal node with children values L
  and R has OPT = (L + R + sqrt((L - R)^2 + 4)) / 2.
- Canonical weights: at every internal node the edge into the L-side gets
  (L - R + sqrt((L - R)^2 + 4)) / 2 and the sibling its reciprocal. Applied
  recursively, every subtree stays balanced (alpha = beta = OPT), so no
  rescaling is needed on the way up.
- Size-ratio weights: the edge into child u of v gets 1/log2(size(v)/size(u));
  the inverse weights telescope to log2(size) along every path.
- Oracle: a numeric search over weights that knows nothing about the
  recurrence, used to cross-check it.

Example usage:
    tree = generate("and-chain", n=3)
    w = canonical_weights(tree)
    value = evaluate(tree, w)
    assert abs(value.objective - opt_value(tree)) < 1e-9
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from treequery.dtree import DTree, EdgeId, Internal, paths
from treequery.errors import SizeLimitError, TreeFormatError, WeightError
from treequery.helpers.linesearch import golden_section_minimize
from treequery.rank import tree_rank
from treequery.settings import MAX_ORACLE_INTERNAL, ORACLE_BOX, ORACLE_DEFAULT_RTOL, ORACLE_RESTARTS, ORACLE_START_BOX
from utils.logging import get_logger

logger = get_logger(__name__)

WeightMap = Mapping[EdgeId, float]


@dataclass(frozen=True)
class ProgramValue:
    """
    Value of the weight program for one weighting.

    Attributes:
        alpha (float): Max over paths of the deviating-edge weight sum.
        beta (float): Max over paths of the sum of inverse weights on the path.
        objective (float): sqrt(alpha * beta).
    """

    alpha: float
    beta: float
    objective: float


@dataclass(frozen=True)
class Bounds:
    rank_depth: float
    size: float


def check_weights(t: DTree, w: WeightMap) -> None:
    """
    Raises:
        WeightError: If an edge is missing, a key is not an edge of t, or a weight is not a positive finite number.
    """
    edges = set(t.edges)
    missing = [edge for edge in t.edges if edge not in w]
    if missing:
        raise WeightError(f"missing weight for edges {missing[:5]}")
    extra = [edge for edge in w if edge not in edges]
    if extra:
        raise WeightError(f"weights given for non-edges {extra[:5]}")
    for edge, value in w.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise WeightError(f"weight of edge ({edge.parent}, {edge.bit}) must be positive, got {value!r}")


def unit_weights(t: DTree) -> dict[EdgeId, float]:
    return {edge: 1.0 for edge in t.edges}


def path_sums(t: DTree, w: WeightMap) -> dict[int, tuple[float, float]]:
    """Per leaf: (sum of deviating-edge weights, sum of inverse path weights) along its path."""
    check_weights(t, w)
    sums = {t.root: (0.0, 0.0)}
    for v in t.preorder:
        node = t.nodes[v]
        if not isinstance(node, Internal):
            continue
        deviating, inverse = sums[v]
        for bit in (0, 1):
            sums[node.child(bit)] = (deviating + w[EdgeId(v, 1 - bit)], inverse + 1.0 / w[EdgeId(v, bit)])
    return {leaf: sums[leaf] for leaf in t.leaves}


def evaluate(t: DTree, w: WeightMap) -> ProgramValue:
    """
    Evaluates a weighting over all syntactic root-to-leaf paths.

    Raises:
        WeightError: On missing or non-positive weights.
    """
    sums = path_sums(t, w)
    alpha = max(deviating for deviating, _ in sums.values())
    beta = max(inverse for _, inverse in sums.values())
    return ProgramValue(alpha=alpha, beta=beta, objective=math.sqrt(alpha * beta))


def _combine(left: float, right: float) -> float:
    return (left + right + math.sqrt((left - right) ** 2 + 4.0)) / 2.0


def subtree_opt(t: DTree) -> dict[int, float]:
    opt = {}
    for v in reversed(t.preorder):
        node = t.nodes[v]
        opt[v] = _combine(opt[node.zero], opt[node.one]) if isinstance(node, Internal) else 0.0
    return opt


def opt_value(t: DTree) -> float:
    value = subtree_opt(t)[t.root]
    logger.debug(f"OPT = {value:.12g} (size {t.size})")
    return value


def canonical_weights(t: DTree) -> dict[EdgeId, float]:
    """Canonical optimal weighting; empty for the single-leaf tree."""
    opt = subtree_opt(t)
    w = {}
    for v in t.internal:
        node = t.nodes[v]
        gap = opt[node.zero] - opt[node.one]
        # the larger of the two is formed without cancellation, the smaller as its reciprocal
        heavy = (abs(gap) + math.sqrt(gap * gap + 4.0)) / 2.0
        heavy_bit = 0 if gap >= 0 else 1
        w[EdgeId(v, heavy_bit)] = heavy
        w[EdgeId(v, 1 - heavy_bit)] = 1.0 / heavy
    return w


def appendix_b_weights(t: DTree) -> dict[EdgeId, float]:
    """Size-ratio weighting: edge (v, u) gets 1 / log2(size(v) / size(u))."""
    sizes = t.subtree_sizes
    w = {}
    for v in t.internal:
        node = t.nodes[v]
        for bit in (0, 1):
            w[EdgeId(v, bit)] = 1.0 / math.log2(sizes[v] / sizes[node.child(bit)])
    return w


def rescale(w: WeightMap, alpha: float, beta: float) -> dict[EdgeId, float]:
    """Multiplies every weight by sqrt(beta/alpha); alpha and beta then both become sqrt(alpha*beta)."""
    if alpha <= 0 or beta <= 0:
        raise WeightError(f"rescaling needs positive alpha and beta, got {alpha}, {beta}")
    factor = math.sqrt(beta / alpha)
    return {edge: factor * value for edge, value in w.items()}


def balanced(t: DTree, w: WeightMap) -> dict[EdgeId, float]:
    value = evaluate(t, w)
    return rescale(w, value.alpha, value.beta)


def bounds(t: DTree) -> Bounds:
    """Closed-form upper bounds on OPT: 2*sqrt(rank*depth) and sqrt(2*size)."""
    return Bounds(rank_depth=2.0 * math.sqrt(tree_rank(t) * t.depth), size=math.sqrt(2.0 * t.size))


# ---------------------------------------------------------------------------
# Weight documents
# ---------------------------------------------------------------------------


def serialize_weights(w: WeightMap) -> str:
    """Weight document with 17 significant digits per weight, edges sorted by (parent, bit)."""
    rows = [
        f'    {{"parent": {edge.parent}, "bit": {edge.bit}, "w": {format(float(w[edge]), ".17g")}}}'
        for edge in sorted(w)
    ]
    return '{\n  "weights": [\n' + ",\n".join(rows) + ("\n" if rows else "") + "  ]\n}"


def parse_weights(text: str) -> dict[EdgeId, float]:
    """
    Parses a weight document. Coverage and positivity are checked against a tree by `check_weights`.

    Raises:
        TreeFormatError: If the document is not a weights list of {parent, bit, w} entries.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"malformed weight document: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("weights"), list):
        raise TreeFormatError("malformed weight document: expected {'weights': [...]}")
    w = {}
    for entry in doc["weights"]:
        if (
            not isinstance(entry, dict)
            or not isinstance(entry.get("parent"), int)
            or entry.get("bit") not in (0, 1)
            or not isinstance(entry.get("w"), (int, float))
        ):
            raise TreeFormatError(f"malformed weight entry: {entry!r}")
        edge = EdgeId(entry["parent"], entry["bit"])
        if edge in w:
            raise TreeFormatError(f"duplicate weight for edge ({edge.parent}, {edge.bit})")
        w[edge] = float(entry["w"])
    return w


# ---------------------------------------------------------------------------
# Numeric oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleResult:
    """
    Best weighting found by the numeric search.

    Attributes:
        objective (float): True (unsmoothed) objective of `weights`.
        weights (dict[EdgeId, float]): Best weighting over all restarts.
        box_hits (list[EdgeId]): Edges whose best weight sits on the search box boundary.
        restart_objectives (list[float]): True objective reached by each restart.
    """

    objective: float
    weights: dict[EdgeId, float]
    box_hits: list[EdgeId] = field(default_factory=list)
    restart_objectives: list[float] = field(default_factory=list)


def _smoothing_schedule(num_paths: int, rel_tol: float) -> list[float]:
    # p-norms overestimate a max over P paths by at most P^(1/k)
    final = max(4.0, math.log(max(num_paths, 2)) / math.log1p(rel_tol / 2))
    schedule = [4.0]
    while schedule[-1] * 4 < final:
        schedule.append(schedule[-1] * 4)
    schedule.append(final)
    return schedule


def brute_force_opt(
    t: DTree,
    seed: int = 0,
    rel_tol: float = ORACLE_DEFAULT_RTOL,
    restarts: int = ORACLE_RESTARTS,
    max_sweeps: int = 30,
    limit: int = MAX_ORACLE_INTERNAL,
) -> OracleResult:
    """
    Minimizes the weight program numerically, independently of the OPT recurrence.

    Cyclic coordinate descent over log-weights in [log 1e-4, log 1e4], one golden-section line
    search per edge, from `restarts` seed-deterministic log-uniform starting points. The maxima
    over paths are replaced by p-norms whose exponent grows stage by stage until the smoothing
    error is below rel_tol/2; the reported objective is always the exact one. All restarts run
    as one vectorized batch; the best restart wins, ties going to the lowest restart index.

    Args:
        t (DTree): Tree with at most `limit` internal nodes.
        seed (int): Seed for the starting points.
        rel_tol (float): Target relative accuracy, at least 1e-4.

    Returns:
        OracleResult: Best objective and weights.

    Raises:
        SizeLimitError: If the tree is too large.
        ValueError: If rel_tol is below 1e-4.
    """
    if rel_tol < 1e-4:
        raise ValueError(f"rel_tol must be at least 1e-4, got {rel_tol}")
    if len(t.internal) > limit:
        raise SizeLimitError(f"oracle allows {limit} internal nodes, tree has {len(t.internal)}")
    if t.is_trivial:
        return OracleResult(objective=0.0, weights={})

    edges = list(t.edges)
    column = {edge: i for i, edge in enumerate(edges)}
    all_paths = paths(t)
    deviating = np.zeros((len(all_paths), len(edges)))
    on_path = np.zeros((len(all_paths), len(edges)))
    for p, path in enumerate(all_paths):
        for edge in path.edges:
            on_path[p, column[edge]] = 1.0
            deviating[p, column[EdgeId(edge.parent, 1 - edge.bit)]] = 1.0

    lo, hi = math.log(ORACLE_BOX[0]), math.log(ORACLE_BOX[1])
    rng = np.random.default_rng(seed)
    z = rng.uniform(math.log(ORACLE_START_BOX[0]), math.log(ORACLE_START_BOX[1]), size=(restarts, len(edges)))

    def smoothed(alpha_p: np.ndarray, beta_p: np.ndarray, k: float) -> np.ndarray:
        return (np.logaddexp.reduce(k * np.log(alpha_p), axis=1) + np.logaddexp.reduce(k * np.log(beta_p), axis=1)) / k

    def total(z_now: np.ndarray, k: float) -> np.ndarray:
        return smoothed(np.exp(z_now) @ deviating.T, np.exp(-z_now) @ on_path.T, k)

    for k in _smoothing_schedule(len(all_paths), rel_tol):
        current = total(z, k)
        for sweep in range(max_sweeps):
            for e in range(len(edges)):
                rest = z.copy()
                rest_w = np.exp(rest)
                rest_w[:, e] = 0.0
                rest_inv = np.exp(-rest)
                rest_inv[:, e] = 0.0
                alpha_rest = rest_w @ deviating.T
                beta_rest = rest_inv @ on_path.T
                dev_col, path_col = deviating[:, e], on_path[:, e]

                def along(s, alpha_rest=alpha_rest, beta_rest=beta_rest, dev_col=dev_col, path_col=path_col):
                    return smoothed(
                        alpha_rest + np.exp(s)[:, None] * dev_col,
                        beta_rest + np.exp(-s)[:, None] * path_col,
                        k,
                    )

                s_new = golden_section_minimize(along, np.full(restarts, lo), np.full(restarts, hi))
                keep = along(s_new) <= along(z[:, e])
                z[:, e] = np.where(keep, s_new, z[:, e])
            updated = total(z, k)
            improvement = float(np.max(current - updated))
            current = updated
            if improvement < rel_tol * 1e-4:
                break
        logger.debug(f"Oracle stage k={k:.4g}: {sweep + 1} sweeps, best smoothed log-objective {current.min():.6g}")

    weights = np.exp(z)
    alpha = np.max(weights @ deviating.T, axis=1)
    beta = np.max((1.0 / weights) @ on_path.T, axis=1)
    objectives = np.sqrt(alpha * beta)
    best = int(np.argmin(objectives))

    margin = 1e-6
    box_hits = [edges[e] for e in range(len(edges)) if z[best, e] <= lo + margin or z[best, e] >= hi - margin]
    if box_hits:
        logger.warning(f"Oracle weights on the search box boundary for edges {box_hits}")
    logger.info(f"Oracle objective {objectives[best]:.9g} (restart {best} of {restarts}, seed {seed})")
    return OracleResult(
        objective=float(objectives[best]),
        weights={edge: float(weights[best, e]) for e, edge in enumerate(edges)},
        box_hits=box_hits,
        restart_objectives=[float(value) for value in objectives],
    )
