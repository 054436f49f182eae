"""Nearest-neighbour walk on Z^d.

The adjacency operator splits into commuting one-axis pieces, so the
amplitude from the origin factorises into a product of line amplitudes.
``brute_force_amplitude`` evolves delta_0 directly on a finite window and
serves as an independent check of that factorisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import WindowTooSmall
from .lattice_walk import WalkSymbol, exact_amplitude

MAX_DIM = 4
_NN = WalkSymbol.nearest_neighbor()


def _as_site(site: Sequence[int]) -> tuple[int, ...]:
    coords = tuple(int(c) for c in np.atleast_1d(site))
    if not 1 <= len(coords) <= MAX_DIM:
        raise ValueError(f"lattice dimension must be between 1 and {MAX_DIM}")
    return coords


@dataclass(frozen=True)
class TruncatedEvolutionSpec:
    window_radius: int
    series_order: int = 30

    def __post_init__(self):
        if self.window_radius < 1 or self.series_order < 1:
            raise ValueError("window_radius and series_order must be positive")

    @classmethod
    def for_site(cls, site: Sequence[int], t: float, margin: int = 25) -> "TruncatedEvolutionSpec":
        reach = max(abs(c) for c in _as_site(site))
        return cls(reach + math.ceil(2 * t) + margin)


def factorized_amplitude(site: Sequence[int], t: float) -> complex:
    """Product of one-dimensional amplitudes, one per coordinate."""
    out = 1.0 + 0j
    for c in _as_site(site):
        out *= exact_amplitude(_NN, c, t).value
    return complex(out)


def _apply_adjacency(psi: np.ndarray) -> np.ndarray:
    out = np.zeros_like(psi)
    for axis in range(psi.ndim):
        lo = [slice(None)] * psi.ndim
        hi = [slice(None)] * psi.ndim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        # zero (Dirichlet) boundary: neighbours outside the window are dropped
        out[tuple(lo)] += psi[tuple(hi)]
        out[tuple(hi)] += psi[tuple(lo)]
    return out


def evolve_window(dim: int, t: float, spec: TruncatedEvolutionSpec) -> np.ndarray:
    """exp(itX) delta_0 on the (2K+1)^dim window, origin at index K.

    Time is split into steps with 2*dim*dt <= 1 and each step applies a
    Taylor polynomial of degree ``series_order``.
    """
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"lattice dimension must be between 1 and {MAX_DIM}")
    if t < 0:
        raise ValueError("t must be non-negative")
    K = spec.window_radius
    psi = np.zeros((2 * K + 1,) * dim, dtype=complex)
    psi[(K,) * dim] = 1.0
    steps = max(1, math.ceil(2 * dim * t))
    dt = t / steps
    for _ in range(steps):
        term = psi
        acc = psi.copy()
        for k in range(1, spec.series_order + 1):
            term = _apply_adjacency(term) * (1j * dt / k)
            acc += term
        psi = acc
    return psi


def truncation_bound(dim: int, t: float, spec: TruncatedEvolutionSpec) -> float:
    """Bound on the Taylor truncation error of ``evolve_window``."""
    steps = max(1, math.ceil(2 * dim * t))
    x = 2 * dim * t / steps
    n = spec.series_order + 1
    return steps * x**n / math.factorial(n) * math.e**x


def brute_force_amplitude(site: Sequence[int], t: float,
                          spec: Optional[TruncatedEvolutionSpec] = None) -> complex:
    coords = _as_site(site)
    spec = spec or TruncatedEvolutionSpec.for_site(coords, t)
    K = spec.window_radius
    if max(abs(c) for c in coords) > K - math.ceil(2 * t) - 5:
        raise WindowTooSmall(
            f"site {coords} too close to the boundary of a radius-{K} window at t={t:g}"
        )
    psi = evolve_window(len(coords), t, spec)
    return complex(psi[tuple(c + K for c in coords)])


def nd_return_probability(d: int, t: float) -> float:
    """|psi_0(t)|^(2d), the return probability on Z^d."""
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"lattice dimension must be between 1 and {MAX_DIM}")
    if t < 0:
        raise ValueError("t must be non-negative")
    return abs(exact_amplitude(_NN, 0, t).value) ** (2 * d)
