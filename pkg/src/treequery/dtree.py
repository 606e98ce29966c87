"""
dtree.py

This module provides the decision-tree data model used by every other part of
treequery: immutable trees, their JSON documents, validation, evaluation on
inputs, and the path combinatorics (paths and deviating edges) that the weight
program, span program and adversary constructions are built from.

Key Concepts:
- DTree: A rooted binary tree. Internal nodes query one input bit, leaves are
  identified by their node id and may carry an output label ("out").
- EdgeId: An edge named by its parent node and the answer bit that selects it.
- Path / deviating edges: The root-to-leaf edges taken on an input, and the
  sibling edges leaving that path (one per internal node on it).
- Input convention: bitstrings are written x_0 first; the integer index of x
  is sum(x_i * 2**i).

Example usage:
    tree = parse_tree(open("tree.json").read())
    leaf = eval_leaf(tree, "101")
    for path in paths(tree):
        print(path.leaf, sorted(deviating_edges(tree, path)))
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np

from treequery.errors import EnumerationLimitError, InputLengthError, TreeFormatError
from treequery.settings import MAX_ENUM_N, PROBABILITY_ATOL, RANDOMIZED_ERROR
from utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Internal:
    """An internal node querying input bit `var`."""

    var: int
    zero: int
    one: int

    def child(self, bit: int) -> int:
        return self.one if bit else self.zero


@dataclass(frozen=True)
class Leaf:
    """A leaf. `label` is the document's leaf name, `out` an optional output label."""

    label: str
    out: str | None = None


Node = Union[Internal, Leaf]


class EdgeId(NamedTuple):
    parent: int
    bit: int


@dataclass(frozen=True)
class Path:
    """A root-to-leaf path: the edges taken, in order from the root."""

    leaf: int
    edges: tuple[EdgeId, ...]

    @property
    def internal_nodes(self) -> tuple[int, ...]:
        return tuple(edge.parent for edge in self.edges)


@dataclass(frozen=True)
class DTree:
    """
    An immutable, validated decision tree.

    Attributes:
        n (int): Number of input variables.
        root (int): Node id of the root.
        nodes (Mapping[int, Node]): Every node keyed by its id.
    """

    n: int
    root: int
    nodes: Mapping[int, Node]

    def __post_init__(self):
        _validate(self)

    # Derived structure is computed once per tree; instances never change.

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        """Node ids in preorder, 0-child before 1-child. Reversed, it is a valid bottom-up order."""
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            node = self.nodes[v]
            if isinstance(node, Internal):
                stack.append(node.one)
                stack.append(node.zero)
        return tuple(order)

    @cached_property
    def parent(self) -> Mapping[int, EdgeId]:
        """Maps every non-root node to the edge entering it."""
        parents = {}
        for v in self.preorder:
            node = self.nodes[v]
            if isinstance(node, Internal):
                parents[node.zero] = EdgeId(v, 0)
                parents[node.one] = EdgeId(v, 1)
        return parents

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in self.preorder if isinstance(self.nodes[v], Leaf))

    @cached_property
    def internal(self) -> tuple[int, ...]:
        return tuple(v for v in self.preorder if isinstance(self.nodes[v], Internal))

    @cached_property
    def edges(self) -> tuple[EdgeId, ...]:
        return tuple(EdgeId(v, bit) for v in self.internal for bit in (0, 1))

    @property
    def size(self) -> int:
        return len(self.nodes)

    @cached_property
    def node_depth(self) -> Mapping[int, int]:
        depth = {self.root: 0}
        for v in self.preorder:
            node = self.nodes[v]
            if isinstance(node, Internal):
                depth[node.zero] = depth[node.one] = depth[v] + 1
        return depth

    @cached_property
    def depth(self) -> int:
        return max(self.node_depth.values())

    @cached_property
    def subtree_sizes(self) -> Mapping[int, int]:
        sizes = {}
        for v in reversed(self.preorder):
            node = self.nodes[v]
            sizes[v] = 1 if isinstance(node, Leaf) else 1 + sizes[node.zero] + sizes[node.one]
        return sizes

    @property
    def is_trivial(self) -> bool:
        return isinstance(self.nodes[self.root], Leaf)

    def child(self, edge: EdgeId) -> int:
        return self.nodes[edge.parent].child(edge.bit)

    def subtree(self, v: int) -> DTree:
        """The subtree rooted at v as a tree of its own (same n, same node ids)."""
        keep = {}
        stack = [v]
        while stack:
            u = stack.pop()
            node = self.nodes[u]
            keep[u] = node
            if isinstance(node, Internal):
                stack.extend((node.zero, node.one))
        return DTree(n=self.n, root=v, nodes=keep)


def _validate(t: DTree) -> None:
    if not isinstance(t.n, int) or t.n <= 0:
        raise TreeFormatError(f"n must be a positive integer, got {t.n!r}")
    if t.root not in t.nodes:
        raise TreeFormatError(f"root {t.root} is not a node")

    labels = set()
    for node_id, node in t.nodes.items():
        if isinstance(node, Internal):
            if not 0 <= node.var < t.n:
                raise TreeFormatError(f"node {node_id} queries variable {node.var} outside [0, {t.n})")
            for child in (node.zero, node.one):
                if child not in t.nodes:
                    raise TreeFormatError(f"node {node_id} has dangling child reference {child}")
        elif node.label in labels:
            raise TreeFormatError(f"duplicate leaf label {node.label!r}")
        else:
            labels.add(node.label)

    # Iterative DFS with enter/exit events keeps the on-path variable set exact
    # without recursion (generated spines are thousands of levels deep).
    seen = set()
    on_path: set[int] = set()
    stack: list[tuple[int, bool]] = [(t.root, True)]
    while stack:
        v, entering = stack.pop()
        node = t.nodes[v]
        if not entering:
            on_path.discard(node.var)
            continue
        if v in seen:
            raise TreeFormatError(f"node {v} is reached twice (shared child or cycle)")
        seen.add(v)
        if isinstance(node, Internal):
            if node.var in on_path:
                raise TreeFormatError(f"repeated variable x_{node.var} on the path to node {v}")
            on_path.add(node.var)
            stack.append((v, False))
            stack.append((node.one, True))
            stack.append((node.zero, True))

    unreachable = set(t.nodes) - seen
    if unreachable:
        raise TreeFormatError(f"nodes not reachable from the root: {sorted(unreachable)}")


def bits_of(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> i) & 1 for i in range(n))


def index_of(bits: Sequence[int]) -> int:
    return sum(bit << i for i, bit in enumerate(bits))


def format_bits(index: int, n: int) -> str:
    return "".join(str(bit) for bit in bits_of(index, n))


def as_bits(x: str | Sequence[int], n: int) -> tuple[int, ...]:
    """Normalizes an input given as a '0'/'1' string or a bit sequence; checks its length."""
    if isinstance(x, str):
        if any(ch not in "01" for ch in x):
            raise InputLengthError(f"input {x!r} is not a bitstring")
        bits = tuple(int(ch) for ch in x)
    else:
        bits = tuple(int(bit) for bit in x)
        if any(bit not in (0, 1) for bit in bits):
            raise InputLengthError(f"input {x!r} is not a bitstring")
    if len(bits) != n:
        raise InputLengthError(f"input has {len(bits)} bits, tree expects {n}")
    return bits


def check_enumerable(n: int, limit: int = MAX_ENUM_N) -> None:
    if n > limit:
        raise EnumerationLimitError(f"refusing to enumerate 2^{n} inputs (limit n = {limit})")


# ---------------------------------------------------------------------------
# Evaluation and paths
# ---------------------------------------------------------------------------


def eval_leaf(t: DTree, x: str | Sequence[int]) -> int:
    """
    Follows the tree on input x.

    Args:
        t (DTree): The tree.
        x (str | Sequence[int]): The input, x_0 first.

    Returns:
        int: Node id of the leaf reached.

    Raises:
        InputLengthError: If x does not have t.n bits.
    """
    bits = as_bits(x, t.n)
    v = t.root
    node = t.nodes[v]
    while isinstance(node, Internal):
        v = node.child(bits[node.var])
        node = t.nodes[v]
    return v


def output(t: DTree, x: str | Sequence[int]) -> str | None:
    return t.nodes[eval_leaf(t, x)].out


def eval_all(t: DTree, limit: int = MAX_ENUM_N) -> np.ndarray:
    """Leaf id reached by every input, indexed by the integer index of x."""
    check_enumerable(t.n, limit)
    # node ids are arbitrary; the tables are indexed by position in preorder
    ids = np.array(t.preorder, dtype=np.int64)
    index = {v: i for i, v in enumerate(t.preorder)}
    size = len(ids)
    var = np.full(size, -1, dtype=np.int64)
    zero = np.arange(size, dtype=np.int64)
    one = np.arange(size, dtype=np.int64)
    for v in t.internal:
        node = t.nodes[v]
        i = index[v]
        var[i], zero[i], one[i] = node.var, index[node.zero], index[node.one]

    inputs = np.arange(1 << t.n, dtype=np.int64)
    current = np.full(inputs.shape, index[t.root], dtype=np.int64)
    for _ in range(t.depth):
        queried = var[current]
        bit = (inputs >> np.maximum(queried, 0)) & 1
        step = np.where(bit == 1, one[current], zero[current])
        current = np.where(queried >= 0, step, current)
    return ids[current]


def path_to(t: DTree, leaf: int) -> Path:
    edges = []
    v = leaf
    while v != t.root:
        edge = t.parent[v]
        edges.append(edge)
        v = edge.parent
    return Path(leaf=leaf, edges=tuple(reversed(edges)))


def input_path(t: DTree, x: str | Sequence[int]) -> Path:
    """P_x, the path followed on input x."""
    return path_to(t, eval_leaf(t, x))


def paths(t: DTree) -> list[Path]:
    """All root-to-leaf paths, leaves in preorder."""
    return [path_to(t, leaf) for leaf in t.leaves]


def deviating_edges(t: DTree, p: Path) -> frozenset[EdgeId]:
    """Edges with exactly one endpoint on p: the sibling of every edge p takes."""
    return frozenset(EdgeId(edge.parent, 1 - edge.bit) for edge in p.edges)


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def to_document(t: DTree) -> dict:
    """Canonical document form: nodes ordered by id ascending."""
    nodes = []
    for node_id in sorted(t.nodes):
        node = t.nodes[node_id]
        if isinstance(node, Internal):
            nodes.append({"id": node_id, "var": node.var, "zero": node.zero, "one": node.one})
        else:
            entry = {"id": node_id, "leaf": node.label}
            if node.out is not None:
                entry["out"] = node.out
            nodes.append(entry)
    return {"n": t.n, "root": t.root, "nodes": nodes}


def serialize(t: DTree) -> str:
    return json.dumps(to_document(t), indent=2)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def from_document(doc) -> DTree:
    """Builds a DTree from an already-decoded tree document."""
    if not isinstance(doc, dict) or not {"n", "root", "nodes"} <= doc.keys():
        raise TreeFormatError("malformed document: expected an object with 'n', 'root' and 'nodes'")
    n, root, raw_nodes = doc["n"], doc["root"], doc["nodes"]
    if not _is_int(n) or not _is_int(root) or not isinstance(raw_nodes, list):
        raise TreeFormatError("malformed document: 'n' and 'root' must be integers, 'nodes' a list")

    nodes: dict[int, Node] = {}
    for entry in raw_nodes:
        if not isinstance(entry, dict) or not _is_int(entry.get("id")) or entry["id"] < 0:
            raise TreeFormatError(f"malformed node entry: {entry!r}")
        node_id = entry["id"]
        if node_id in nodes:
            raise TreeFormatError(f"duplicate node id {node_id}")
        if "leaf" in entry:
            if "var" in entry or not isinstance(entry["leaf"], str):
                raise TreeFormatError(f"malformed leaf entry: {entry!r}")
            out = entry.get("out")
            if out is not None and not isinstance(out, str):
                raise TreeFormatError(f"leaf {node_id} has a non-string 'out' label")
            nodes[node_id] = Leaf(label=entry["leaf"], out=out)
        elif "var" in entry:
            for key in ("zero", "one"):
                if key not in entry:
                    raise TreeFormatError(f"internal node {node_id} is missing its '{key}' child")
            if not all(_is_int(entry[key]) for key in ("var", "zero", "one")):
                raise TreeFormatError(f"malformed internal entry: {entry!r}")
            nodes[node_id] = Internal(var=entry["var"], zero=entry["zero"], one=entry["one"])
        else:
            raise TreeFormatError(f"node {node_id} is neither a leaf nor an internal node")
    return DTree(n=n, root=root, nodes=nodes)


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"malformed document: {exc}") from exc


def parse_tree(text: str) -> DTree:
    """
    Parses and validates a tree document.

    Raises:
        TreeFormatError: On malformed JSON or any structural violation.
    """
    tree = from_document(_load_json(text))
    logger.debug(f"Parsed tree: n={tree.n}, size={tree.size}, depth={tree.depth}")
    return tree


# ---------------------------------------------------------------------------
# Randomized trees and relations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomizedDTree:
    """A finite distribution over deterministic trees on the same n."""

    support: tuple[tuple[float, DTree], ...]

    def __post_init__(self):
        if not self.support:
            raise TreeFormatError("randomized tree has an empty support")
        ns = {tree.n for _, tree in self.support}
        if len(ns) != 1:
            raise TreeFormatError(f"support trees disagree on n: {sorted(ns)}")
        for p, _ in self.support:
            if not 0.0 < p <= 1.0:
                raise TreeFormatError(f"support probability {p} outside (0, 1]")
        total = sum(p for p, _ in self.support)
        if abs(total - 1.0) > PROBABILITY_ATOL:
            raise TreeFormatError(f"support probabilities sum to {total!r}, not 1")

    @property
    def n(self) -> int:
        return self.support[0][1].n


def parse_randomized(text: str) -> RandomizedDTree:
    doc = _load_json(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("support"), list):
        raise TreeFormatError("malformed document: expected an object with a 'support' list")
    support = []
    for entry in doc["support"]:
        if not isinstance(entry, dict) or not isinstance(entry.get("p"), (int, float)):
            raise TreeFormatError(f"malformed support entry: {entry!r}")
        support.append((float(entry["p"]), from_document(entry.get("tree"))))
    return RandomizedDTree(support=tuple(support))


def rdtsize(r: RandomizedDTree) -> int:
    """Largest tree size in the support."""
    return max(tree.size for _, tree in r.support)


@dataclass(frozen=True)
class RelationTable:
    """
    Allowed outputs per input. Inputs absent from `allowed` lie outside the domain.

    Attributes:
        n (int): Number of input bits.
        allowed (Mapping[int, frozenset[str]]): Input index to its non-empty set of allowed labels.
    """

    n: int
    allowed: Mapping[int, frozenset[str]]

    def __post_init__(self):
        for x, labels in self.allowed.items():
            if not 0 <= x < (1 << self.n):
                raise TreeFormatError(f"relation entry {x} outside the input range")
            if not labels:
                raise TreeFormatError(f"input {format_bits(x, self.n)} has no allowed output")

    @classmethod
    def from_function(cls, n: int, fn, domain: Iterable[int] | None = None) -> RelationTable:
        """Total (or domain-restricted) function given as a callable on bit tuples."""
        xs = range(1 << n) if domain is None else domain
        return cls(n=n, allowed={x: frozenset({str(fn(bits_of(x, n)))}) for x in xs})

    @classmethod
    def from_truth_table(cls, table) -> RelationTable:
        return cls(n=table.n, allowed={x: frozenset({str(table.value(x))}) for x in range(1 << table.n)})


def parse_relation(text: str) -> RelationTable:
    doc = _load_json(text)
    if not isinstance(doc, dict) or not _is_int(doc.get("n")) or not isinstance(doc.get("allowed"), dict):
        raise TreeFormatError("malformed relation: expected {'n': int, 'allowed': {bits: [labels]}}")
    n = doc["n"]
    allowed = {}
    for key, labels in doc["allowed"].items():
        try:
            x = index_of(as_bits(key, n))
        except InputLengthError as exc:
            raise TreeFormatError(f"malformed relation key {key!r}: {exc}") from exc
        if not isinstance(labels, list) or not all(isinstance(label, str) for label in labels):
            raise TreeFormatError(f"allowed outputs for {key} must be a list of strings")
        allowed[x] = frozenset(labels)
    return RelationTable(n=n, allowed=allowed)


@dataclass
class RelationReport:
    """
    Result of checking a (randomized) tree against a relation.

    Attributes:
        passed (bool): True if every domain input is answered within the allowed error.
        inputs_checked (int): Number of domain inputs enumerated.
        max_error (float): Largest error probability over the domain (0 or 1 for deterministic trees).
        failures (list[str]): Failing inputs as bitstrings, x_0 first.
        warnings (list[str]): Non-fatal findings such as leaves no domain input reaches.
    """

    passed: bool
    inputs_checked: int
    max_error: float
    failures: list[str]
    warnings: list[str]


def _wrong_outputs(t: DTree, rel: RelationTable, domain: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    missing = [leaf for leaf in t.leaves if t.nodes[leaf].out is None]
    if missing:
        raise TreeFormatError(f"leaves without an output label: {missing}")
    reached = eval_all(t)[domain]
    wrong = np.array(
        [t.nodes[int(leaf)].out not in rel.allowed[int(x)] for x, leaf in zip(domain, reached)], dtype=bool
    )
    return wrong, reached


def verify_relation(model: DTree | RandomizedDTree, rel: RelationTable) -> RelationReport:
    """
    Checks that a tree computes the relation, or that a randomized tree does so with error at most 1/3.

    Raises:
        TreeFormatError: If n disagrees or a leaf has no output label.
        EnumerationLimitError: If n exceeds the enumeration cap.
    """
    if model.n != rel.n:
        raise TreeFormatError(f"tree has n={model.n}, relation has n={rel.n}")
    check_enumerable(rel.n)
    domain = np.array(sorted(rel.allowed), dtype=np.int64)
    support = model.support if isinstance(model, RandomizedDTree) else ((1.0, model),)

    error = np.zeros(domain.shape, dtype=float)
    warnings = []
    for p, tree in support:
        wrong, reached = _wrong_outputs(tree, rel, domain)
        error += p * wrong
        unreached = sorted(set(tree.leaves) - {int(leaf) for leaf in reached})
        if unreached:
            warnings.append(f"leaves reached by no domain input: {unreached}")
            logger.warning(f"Relation check: leaves {unreached} are unreachable on the domain")

    threshold = 0.0 if isinstance(model, DTree) else RANDOMIZED_ERROR + PROBABILITY_ATOL
    failing = domain[error > threshold]
    report = RelationReport(
        passed=failing.size == 0,
        inputs_checked=int(domain.size),
        max_error=float(error.max()) if error.size else 0.0,
        failures=[format_bits(int(x), rel.n) for x in failing],
        warnings=warnings,
    )
    logger.info(f"Relation check: {report.inputs_checked} inputs, max error {report.max_error:.4g}, passed={report.passed}")
    return report
