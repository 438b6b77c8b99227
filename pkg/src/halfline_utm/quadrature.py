"""Gauss-Legendre panel helpers shared by the contour and transform code."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

DEFAULT_ORDER = 16


@lru_cache(maxsize=32)
def _gl_rule(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_nodes(a: float, b: float, order: int = DEFAULT_ORDER):
    """Gauss-Legendre nodes/weights on [a, b]."""
    x, w = _gl_rule(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def composite_nodes(edges, order: int = DEFAULT_ORDER):
    """Nodes/weights of the composite rule over consecutive ``edges``."""
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = panel_nodes(a, b, order)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def graded_edges(a: float, b: float, h0: float, ratio: float = 1.35, h_max: float = np.inf):
    """Panel edges from ``a`` to ``b`` starting at size ``h0``, growing by
    ``ratio`` per panel up to ``h_max``.  Always lands exactly on ``b``."""
    if b <= a:
        raise ValueError("graded_edges needs b > a")
    edges = [a]
    h = h0
    while edges[-1] + h < b:
        edges.append(edges[-1] + h)
        h = min(h * ratio, h_max)
    edges.append(b)
    if len(edges) >= 3 and edges[-1] - edges[-2] < 0.25 * (edges[-2] - edges[-3]):
        # avoid a sliver final panel
        edges.pop(-2)
    return np.asarray(edges)


def uniform_edges(a: float, b: float, n: int):
    return np.linspace(a, b, n + 1)
