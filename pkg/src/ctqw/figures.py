"""Data behind the three reference plots.

1. limit density on Z for P(theta) = 2 cos(theta) + 2 cos(2 theta);
2. limit distance densities on trees, support rescaled to [0, 1];
3. return amplitude psi_0(t) on Z and on a tree.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import BoundaryPoint
from .lattice_walk import WalkSymbol, caustics, density_curve, exact_amplitude
from .tree_walk import TreeWalkParams, exact_amplitude_quadrature, limit_density_tree

FIGURE1_SYMBOL = WalkSymbol.from_pairs([(1, 1.0), (2, 1.0)])


def figure1(alphas: Sequence[float], caustic_halfwidth: float = 1e-3):
    curve = density_curve(FIGURE1_SYMBOL, alphas, caustic_halfwidth)
    rows = [[float(a), float(v), f] for a, v, f in zip(curve.alphas, curve.values, curve.flags)]
    meta = {"symbol": "a1=1;a2=1", "caustics": caustics(FIGURE1_SYMBOL)}
    return ["alpha", "density", "flag"], rows, meta


def figure2(valencies: Sequence[int], xs: Sequence[float]):
    """Density of distance/(r t) for each valency; mass sums to one on [0, 1]."""
    rows = []
    for m in valencies:
        params = TreeWalkParams(m)
        r = params.r
        for x in xs:
            alpha = r * float(x)
            if x <= 0:
                rows.append([m, float(x), alpha, 0.0, "ok"])
                continue
            try:
                rows.append([m, float(x), alpha, r * limit_density_tree(params, alpha), "ok"])
            except BoundaryPoint:
                rows.append([m, float(x), alpha, math.nan, "boundary"])
    return ["valency", "x", "alpha", "density", "flag"], rows, {}


def figure3(times: Sequence[float], valency: int = 4):
    line = WalkSymbol.nearest_neighbor()
    tree = TreeWalkParams(valency)
    rows = []
    for t in times:
        t = float(t)
        z = exact_amplitude(line, 0, t).value.real
        w = 1.0 if t == 0 else exact_amplitude_quadrature(tree, 0, t).value.real
        rows.append([t, z, w])
    return ["t", "psi0_line", "psi0_tree"], rows, {"tree_valency": valency}


def local_maxima(ts: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interior local maxima of |values| on a sampled curve."""
    a = np.abs(np.asarray(values, dtype=float))
    idx = np.flatnonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:])) + 1
    return np.asarray(ts)[idx], a[idx]
