"""
Composite quadrature weights used by every integral in the lab.
"""
import numpy as np


def simpson_weights(n_cells: int, h: float) -> np.ndarray:
    """
    Composite Simpson weights on ``n_cells + 1`` equally spaced nodes.

    With an odd number of cells the last cell falls back to the trapezoid
    rule; a single cell is pure trapezoid.

    Args:
        n_cells (int): Number of cells (>= 1).
        h (float): Node spacing.

    Returns:
        np.ndarray: Weights of length ``n_cells + 1``.
    """
    if n_cells < 1:
        raise ValueError("simpson_weights needs at least one cell")
    w = np.zeros(n_cells + 1)
    if n_cells == 1:
        w[:] = 0.5 * h
        return w
    even = n_cells if n_cells % 2 == 0 else n_cells - 1
    w[0:even + 1:2] = 2.0
    w[1:even:2] = 4.0
    w[0] = 1.0
    w[even] = 1.0
    w[:even + 1] *= h / 3.0
    if even < n_cells:
        w[even] += 0.5 * h
        w[n_cells] += 0.5 * h
    return w


def simpson_nodes(a: float, b: float, n_cells: int):
    """Nodes and Simpson weights on [a, b]."""
    nodes = np.linspace(a, b, n_cells + 1)
    h = (b - a) / n_cells
    return nodes, simpson_weights(n_cells, h)


def midpoint_nodes(a: float, b: float, n_cells: int):
    """Cell midpoints and the (uniform) cell width on [a, b]."""
    h = (b - a) / n_cells
    return a + h * (np.arange(n_cells) + 0.5), h


def cross_section_rule(lengths, n_cells: int):
    """
    Tensor Simpson rule on the box (0, L_1) x ... x (0, L_n).

    Returns:
        tuple: (list of 1D node arrays, tensor weight array with one axis per
        cross-section direction).
    """
    axes = []
    weights = None
    for L in lengths:
        nodes, w = simpson_nodes(0.0, float(L), n_cells)
        axes.append(nodes)
        weights = w if weights is None else np.multiply.outer(weights, w)
    return axes, weights
