"""
render.py

This module exports decision trees as Graphviz graphs: internal nodes show
the queried variable, leaves their label and output, and edges their answer
bit, optionally with a G-coloring and edge weights.

Example usage:
    dot = to_digraph(tree, coloring=optimal_coloring(tree))
    print(dot.source)
"""

from graphviz import Digraph  # type: ignore

from treequery.dtree import DTree, Internal
from treequery.rank import Color, GColoring
from treequery.weights import WeightMap


def to_digraph(t: DTree, coloring: GColoring | None = None, weights: WeightMap | None = None) -> Digraph:
    """
    Builds a Digraph of the tree; nothing is rendered, `.source` holds the DOT text.

    Args:
        t (DTree): The tree.
        coloring (GColoring | None): Colors black/red edges when given.
        weights (WeightMap | None): Adds "w=..." to edge labels when given.

    Returns:
        Digraph: The graph.
    """
    dot = Digraph(format="png")
    dot.attr(rankdir="TB")
    for v in t.preorder:
        node = t.nodes[v]
        if isinstance(node, Internal):
            dot.node(str(v), f"x{node.var}", shape="circle")
        else:
            label = node.label if node.out is None else f"{node.label}\nout={node.out}"
            dot.node(str(v), label, shape="box")
    for edge in t.edges:
        label = str(edge.bit)
        if weights is not None:
            label += f" w={weights[edge]:.6g}"
        attrs = {"label": label}
        if coloring is not None:
            attrs["color"] = "red" if coloring.color[edge] == Color.RED else "black"
        dot.edge(str(edge.parent), str(t.child(edge)), **attrs)
    return dot
