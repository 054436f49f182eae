"""Shared numerical kernels.

Quadrature for periodic integrands and for integrands supported on a branch
cut, a bracketing root finder for periodic functions, the Bessel function
J_n used as an independent oracle, Catalan numbers, and the windowed time
average used by the rescaled-probability computations.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson
from scipy.special import roots_legendre

from .errors import DegenerateStationaryPoint, NonConvergence

PERIODIC_TRAPEZOID = "periodic_trapezoid"
GAUSS_LEGENDRE = "gauss_legendre"

DEFAULT_MAX_NODES = 2**20
ROOT_RESIDUAL_TOL = 1e-12
DEGENERACY_TOL = 1e-8


def max_nodes() -> int:
    """Node-count ceiling for quadrature refinement (``CTQW_MAX_NODES`` overrides)."""
    raw = os.environ.get("CTQW_MAX_NODES")
    if raw is None:
        return DEFAULT_MAX_NODES
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"CTQW_MAX_NODES must be an integer, got {raw!r}") from None
    if value < 16:
        raise ValueError("CTQW_MAX_NODES must be at least 16")
    return value


@dataclass(frozen=True)
class QuadratureSpec:
    node_count: int = 64
    scheme: str = PERIODIC_TRAPEZOID
    target_abs_tol: float = 1e-13

    def __post_init__(self):
        if self.scheme not in (PERIODIC_TRAPEZOID, GAUSS_LEGENDRE):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        if self.scheme == PERIODIC_TRAPEZOID and (self.node_count < 16 or self.node_count % 2):
            raise ValueError("periodic trapezoid needs an even node_count >= 16")
        if not self.target_abs_tol > 0:
            raise ValueError("target_abs_tol must be positive")

    def with_nodes(self, node_count: int) -> "QuadratureSpec":
        n = max(self.node_count, int(node_count))
        if self.scheme == PERIODIC_TRAPEZOID and n % 2:
            n += 1
        return QuadratureSpec(n, self.scheme, self.target_abs_tol)


@dataclass(frozen=True)
class QuadratureInfo:
    value: complex
    error: float
    nodes: int


def next_pow2(n: float) -> int:
    return 1 << max(4, math.ceil(math.log2(max(n, 1.0))))


@lru_cache(maxsize=64)
def legendre_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _refine(rule: Callable[[int], complex], spec: QuadratureSpec, what: str):
    ceiling = max_nodes()
    n = spec.node_count
    prev = rule(n)
    while True:
        if 2 * n > ceiling:
            raise NonConvergence(
                f"{what}: tolerance {spec.target_abs_tol:g} not met within {ceiling} nodes"
            )
        n *= 2
        cur = rule(n)
        diff = abs(cur - prev)
        if diff < spec.target_abs_tol:
            return QuadratureInfo(complex(cur), float(diff), n)
        prev = cur


def integrate_periodic(f, spec: Optional[QuadratureSpec] = None, full_output: bool = False):
    """Mean value (1/2pi) * integral of ``f`` over one period [0, 2pi].

    ``f`` must accept a numpy array of angles. The node count is doubled
    until two successive estimates differ by less than
    ``spec.target_abs_tol``; with ``full_output`` the final difference and
    node count are returned alongside the value.
    """
    spec = spec or QuadratureSpec()

    if spec.scheme == PERIODIC_TRAPEZOID:
        def rule(n):
            theta = 2.0 * np.pi * np.arange(n) / n
            return np.mean(np.asarray(f(theta), dtype=complex))
    else:
        def rule(n):
            x, w = legendre_nodes(n)
            theta = np.pi * (x + 1.0)
            return 0.5 * np.dot(w, np.asarray(f(theta), dtype=complex))

    info = _refine(rule, spec, "periodic quadrature")
    return info if full_output else info.value


def integrate_cut(h, r: float, t: float, spec: Optional[QuadratureSpec] = None,
                  full_output: bool = False):
    """Integral of h(x) * exp(i t x) over the cut (-r, r).

    The substitution x = r sin(s) turns square-root endpoint behaviour of
    ``h`` into an analytic integrand in s, which Gauss-Legendre then handles
    with exponential convergence.
    """
    if r <= 0:
        raise ValueError("cut half-width r must be positive")
    spec = spec or QuadratureSpec(64, GAUSS_LEGENDRE)
    if spec.scheme != GAUSS_LEGENDRE:
        raise ValueError("cut integrals use the gauss_legendre scheme")

    def rule(n):
        x, w = legendre_nodes(n)
        s = 0.5 * np.pi * x
        u = r * np.sin(s)
        vals = np.asarray(h(u), dtype=complex) * np.exp(1j * t * u) * (r * np.cos(s))
        return 0.5 * np.pi * np.dot(w, vals)

    info = _refine(rule, spec, "cut quadrature")
    return info if full_output else info.value


@dataclass(frozen=True)
class RootSet:
    """Simple roots of a periodic function, sorted in [0, 2pi).

    ``second_derivatives`` holds the slope g'(theta_k) at each root; for the
    stationary-phase equation g = P' + alpha that slope is P''(theta_k).
    """

    roots: tuple[float, ...]
    second_derivatives: tuple[float, ...]
    residual_bound: float

    def __len__(self):
        return len(self.roots)


def _numeric_derivative(g):
    h = 1e-6

    def dg(theta):
        theta = np.asarray(theta, dtype=float)
        return (np.asarray(g(theta + h)) - np.asarray(g(theta - h))) / (2 * h)

    return dg


def _scalar(fn, x: float) -> float:
    return float(np.asarray(fn(np.array([x])))[0])


def _bisect_newton(g, dg, a: float, b: float, ga: float) -> float:
    # bisection to a short bracket, then safeguarded Newton
    lo, hi, glo = a, b, ga
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        gm = _scalar(g, mid)
        if gm == 0.0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(100):
        gx = _scalar(g, x)
        if gx == 0.0:
            return x
        if (gx < 0) == (glo < 0):
            lo, glo = x, gx
        else:
            hi = x
        d = _scalar(dg, x)
        step = gx / d if d != 0 else np.inf
        nxt = x - step
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= 4e-16 * max(1.0, abs(x)):
            return nxt
        x = nxt
    return x


def _extremum(dg, a: float, b: float) -> float:
    da = _scalar(dg, a)
    lo, hi = a, b
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        dm = _scalar(dg, mid)
        if (dm < 0) == (da < 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_roots_periodic(g, grid_size: int, dg=None) -> RootSet:
    """All simple roots of a smooth 2pi-periodic function ``g``.

    Roots are bracketed by sign changes on a uniform grid of ``grid_size``
    cells. Cells where g keeps its sign but g' changes sign are probed at
    the interior extremum, so close root pairs near a fold are not lost.
    Each bracket is refined by bisection followed by safeguarded Newton.

    Raises DegenerateStationaryPoint when a root has |g'| < 1e-8.
    """
    if grid_size < 4:
        raise ValueError("grid_size must be at least 4")
    dg = dg or _numeric_derivative(g)
    n = int(grid_size)
    step = 2.0 * np.pi / n
    theta = step * np.arange(n + 1)
    gv = np.asarray(g(theta), dtype=float)
    dv = np.asarray(dg(theta), dtype=float)
    # g(2pi) and g(0) can round to opposite signs; a root on the seam would be lost
    gv[n], dv[n] = gv[0], dv[0]

    brackets: list[tuple[float, float, float]] = []
    found: list[float] = []
    for j in range(n):
        a, b = theta[j], theta[j + 1]
        ga, gb = gv[j], gv[j + 1]
        if ga == 0.0:
            found.append(a)
            continue
        if gb == 0.0:
            continue
        if (ga < 0) != (gb < 0):
            brackets.append((a, b, ga))
        elif (dv[j] < 0) != (dv[j + 1] < 0):
            c = _extremum(dg, a, b)
            gc = _scalar(g, c)
            if gc == 0.0:
                found.append(c)
            elif (gc < 0) != (ga < 0):
                brackets.append((a, c, ga))
                brackets.append((c, b, gc))

    for a, b, ga in brackets:
        found.append(_bisect_newton(g, dg, a, b, ga))

    roots = sorted(x % (2.0 * np.pi) for x in found)
    unique: list[float] = []
    for x in roots:
        if unique and abs(x - unique[-1]) < 1e-12:
            continue
        unique.append(x)
    if len(unique) > 1 and unique[0] + 2.0 * np.pi - unique[-1] < 1e-12:
        unique.pop()

    if not unique:
        return RootSet((), (), 0.0)

    arr = np.array(unique)
    resid = np.abs(np.asarray(g(arr), dtype=float))
    slopes = np.asarray(dg(arr), dtype=float)
    bad = np.flatnonzero(np.abs(slopes) < DEGENERACY_TOL)
    if bad.size:
        raise DegenerateStationaryPoint(
            f"degenerate root at theta={arr[bad[0]]:.12g} (|g'|={abs(slopes[bad[0]]):.3g})"
        )
    if resid.max() > ROOT_RESIDUAL_TOL:
        raise NonConvergence(f"root residual {resid.max():.3g} exceeds {ROOT_RESIDUAL_TOL:g}")
    return RootSet(tuple(arr.tolist()), tuple(slopes.tolist()), float(resid.max()))


def _bessel_series(order: int, x: float) -> float:
    half = 0.5 * x
    term = math.exp(order * math.log(half) - math.lgamma(order + 1))
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + order))
        total += term
        if abs(term) <= 1e-17 * abs(total) or term == 0.0:
            return total


def _bessel_miller(order: int, x: float) -> float:
    top = max(order, int(x)) + 30 + int(math.sqrt(40.0 * max(order, x)))
    top += top % 2
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    wanted = 0.0
    for k in range(top, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            wanted *= 1e-250
            norm *= 1e-250
        if k - 1 == order:
            wanted = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return wanted / norm


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind J_order(x), absolute accuracy ~1e-14.

    Uses the ascending series where its terms decrease monotonically and
    Miller's downward recurrence normalised by J_0 + 2 sum J_2k = 1
    everywhere else.
    """
    if order < 0 or order > 200 or int(order) != order:
        raise ValueError("order must be an integer in [0, 200]")
    if x < 0:
        raise ValueError("x must be non-negative")
    order = int(order)
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x <= 2.0 or 0.25 * x * x <= order + 1:
        return _bessel_series(order, x)
    return _bessel_miller(order, x)


def catalan(k: int) -> int:
    if k < 0:
        raise ValueError("k must be non-negative")
    return math.comb(2 * k, k) // (k + 1)


def ray_time_average(prob: Callable[[int, float], float], alpha: float, T: float,
                     max_step: float) -> float:
    """(1/sqrt T) * integral over [T, T + sqrt T] of prob(floor(alpha t), t) dt.

    The window is split wherever floor(alpha t) jumps, and each piece is
    integrated with composite Simpson at spacing at most ``max_step``.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    if max_step <= 0:
        raise ValueError("max_step must be positive")
    width = math.sqrt(T)
    t0, t1 = T, T + width
    cuts = [t0, t1]
    if alpha != 0.0:
        lo, hi = sorted((alpha * t0, alpha * t1))
        cuts += [k / alpha for k in range(math.floor(lo) + 1, math.ceil(hi))]
    cuts = sorted(c for c in set(cuts) if t0 <= c <= t1)

    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 1e-14 * t1:
            continue
        site = math.floor(alpha * 0.5 * (a + b))
        n = max(2, math.ceil((b - a) / max_step))
        n += n % 2
        ts = np.linspace(a, b, n + 1)
        vals = np.array([prob(site, float(tt)) for tt in ts])
        total += simpson(vals, x=ts)
    return total / width
