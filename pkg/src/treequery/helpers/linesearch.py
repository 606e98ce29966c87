"""
linesearch.py

Golden-section minimization of unimodal functions, vectorized so that many
independent one-dimensional problems (one per oracle restart) advance in
lockstep with a single function call per iteration.
"""

import math

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2  # 1/phi
INV_PHI_SQ = (3 - math.sqrt(5)) / 2  # 1/phi^2


def golden_section_minimize(fun, lower: np.ndarray, upper: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """
    Minimizes fun on [lower, upper] element-wise.

    Args:
        fun: Maps an array of points (one per problem) to an array of values.
        lower (np.ndarray): Left bracket per problem.
        upper (np.ndarray): Right bracket per problem; all brackets share one width.
        tol (float): Final bracket width.

    Returns:
        np.ndarray: Approximate minimizer per problem.
    """
    a = np.asarray(lower, dtype=float).copy()
    b = np.asarray(upper, dtype=float).copy()
    dist = float(np.max(b - a))
    if dist <= tol:
        return (a + b) / 2

    iterations = int(math.ceil(math.log(tol / dist) / math.log(INV_PHI)))
    c = a + INV_PHI_SQ * (b - a)
    d = a + INV_PHI * (b - a)
    yc, yd = fun(c), fun(d)
    for _ in range(iterations - 1):
        go_left = yc < yd
        dist *= INV_PHI
        a = np.where(go_left, a, c)
        b = np.where(go_left, d, b)
        # the surviving interior point is reused; only one new probe per problem
        probe = np.where(go_left, a + INV_PHI_SQ * dist, a + INV_PHI * dist)
        y_probe = fun(probe)
        c, d = np.where(go_left, probe, d), np.where(go_left, c, probe)
        yc, yd = np.where(go_left, y_probe, yd), np.where(go_left, yc, y_probe)
    return np.where(yc < yd, (a + d) / 2, (c + b) / 2)
