"""Continuous-time quantum walk on the integer line.

The generator is a finite-range Hermitian Toeplitz operator with
coefficients a_l (a_{-l} = conj(a_l)) and real symbol
P(theta) = sum_l a_l exp(i l theta). The amplitude at site l after time t is

    psi_l(t) = (1/2pi) * integral_0^{2pi} exp(i t P(theta) + i l theta) dtheta,

which equals <delta_l, exp(itX) delta_0> for (X f)_i = sum_j a_{j-i} f_j.
For symmetric real coefficients this is the same as the convention
X_{ij} = a_{i-j}; for complex coefficients the two differ by l -> -l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    CoincidentFrequencies,
    DegenerateStationaryPoint,
    InvalidRegime,
    NoStationaryPoints,
    SymmetryViolation,
)
from .numerics import (
    DEGENERACY_TOL,
    QuadratureSpec,
    find_roots_periodic,
    integrate_periodic,
    legendre_nodes,
    next_pow2,
    ray_time_average,
)

QUADRATURE = "quadrature"
SERIES = "series"
ASYMPTOTIC = "asymptotic"

# prefactor c of the c/t error estimate attached to asymptotic amplitudes
ASYMPTOTIC_ERROR_CONSTANT = 1.0
COINCIDENCE_TOL = 1e-9


@dataclass(frozen=True)
class WalkSymbol:
    coefficients: Mapping[int, complex]
    radius: int = field(init=False)

    def __post_init__(self):
        coeffs = {int(k): complex(v) for k, v in self.coefficients.items() if v != 0}
        if not coeffs:
            raise ValueError("walk symbol needs at least one non-zero coefficient")
        scale = max(1.0, sum(abs(v) for v in coeffs.values()))
        for k, v in coeffs.items():
            if abs(coeffs.get(-k, 0.0) - v.conjugate()) > 1e-12 * scale:
                raise SymmetryViolation(f"a_{-k} must equal conj(a_{k})")
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))
        object.__setattr__(self, "radius", max(abs(k) for k in coeffs))

    @classmethod
    def nearest_neighbor(cls) -> "WalkSymbol":
        return cls({1: 1.0, -1: 1.0})

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, complex]]) -> "WalkSymbol":
        """Build a symbol from (l, a_l) pairs, filling in a_{-l} = conj(a_l)."""
        coeffs: dict[int, complex] = {}
        for k, v in pairs:
            v = complex(v)
            if k == 0 and abs(v.imag) > 0:
                raise SymmetryViolation("a_0 must be real")
            for key, val in ((k, v), (-k, v.conjugate())):
                if key in coeffs and abs(coeffs[key] - val) > 1e-12:
                    raise SymmetryViolation(f"conflicting values for a_{key}")
                coeffs[key] = val
        return cls(coeffs)

    @property
    def total_weight(self) -> float:
        return sum(abs(v) for v in self.coefficients.values())

    def derivative(self, theta, order: int = 0):
        """d^order P / dtheta^order as a complex array (imaginary part ~ 0)."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for k, v in self.coefficients.items():
            out += v * (1j * k) ** order * np.exp(1j * k * theta)
        return out

    def real_derivative(self, theta, order: int = 0):
        vals = self.derivative(theta, order)
        resid = np.max(np.abs(vals.imag), initial=0.0)
        if resid > 1e-12 * max(1.0, self.total_weight) * (1 + self.radius) ** order:
            raise SymmetryViolation(f"symbol has imaginary residue {resid:.3g}")
        return vals.real


def eval_symbol(sym: WalkSymbol, theta: float) -> float:
    return float(sym.real_derivative(np.array([theta]))[0])


@dataclass(frozen=True)
class StationaryPhaseTerm:
    theta: float
    omega: float
    weight: float
    phase_sign: int
    curvature: float


@dataclass(frozen=True)
class AmplitudeValue:
    site: int
    time: float
    value: complex
    method: str
    error_estimate: float


@dataclass(frozen=True)
class DensityCurve:
    alphas: np.ndarray
    values: np.ndarray
    flags: tuple[str, ...]


def _default_spec(sym: WalkSymbol, l: int, t: float, spec: Optional[QuadratureSpec]):
    spec = spec or QuadratureSpec()
    band = abs(l) + sym.radius * (math.ceil(t * sym.total_weight) + 20) + 16
    return spec.with_nodes(next_pow2(band))


def exact_amplitude(sym: WalkSymbol, l: int, t: float,
                    spec: Optional[QuadratureSpec] = None) -> AmplitudeValue:
    if t < 0:
        raise ValueError("t must be non-negative")
    l = int(l)
    spec = _default_spec(sym, l, t, spec)

    def integrand(theta):
        return np.exp(1j * (t * sym.real_derivative(theta) + l * theta))

    info = integrate_periodic(integrand, spec, full_output=True)
    return AmplitudeValue(l, float(t), info.value, QUADRATURE, info.error)


def series_amplitude(sym: WalkSymbol, l: int, t: float, order: int = 60) -> complex:
    """Truncated Taylor series sum_k <delta_l, X^k delta_0> (it)^k / k!.

    Powers of X are applied to delta_0 on a window wide enough that no
    boundary is reached, so the truncation in k is the only approximation.
    """
    L = sym.radius
    width = L * order + abs(l) + 1
    vec = np.zeros(2 * width + 1, dtype=complex)
    vec[width] = 1.0
    total = vec[width + l] * 1.0
    coef = 1.0 + 0j
    for k in range(1, order + 1):
        nxt = np.zeros_like(vec)
        # (X f)_i = sum_j a_{j-i} f_j
        for d, a in sym.coefficients.items():
            if d >= 0:
                nxt[: len(vec) - d] += a * vec[d:]
            else:
                nxt[-d:] += a * vec[: len(vec) + d]
        vec = nxt
        coef *= 1j * t / k
        total += coef * vec[width + l]
    return complex(total)


def stationary_points(sym: WalkSymbol, alpha: float,
                      grid_size: Optional[int] = None) -> list[StationaryPhaseTerm]:
    """Solutions of P'(theta) = -alpha in [0, 2pi) with their phase data."""
    grid_size = grid_size or max(64, 16 * sym.radius)
    roots = find_roots_periodic(
        lambda th: sym.real_derivative(th, 1) + alpha,
        grid_size,
        dg=lambda th: sym.real_derivative(th, 2),
    )
    terms = []
    for theta, curv in zip(roots.roots, roots.second_derivatives):
        omega = eval_symbol(sym, theta) + alpha * theta
        terms.append(StationaryPhaseTerm(
            theta=theta,
            omega=omega,
            weight=1.0 / math.sqrt(abs(curv)),
            phase_sign=1 if curv > 0 else -1,
            curvature=curv,
        ))
    return terms


def asymptotic_amplitude(sym: WalkSymbol, l: int, t: float) -> AmplitudeValue:
    """Stationary-phase approximation of psi_l(t) with alpha = l/t.

    Each stationary point contributes |P''|^{-1/2} exp(i t omega_k +/- i pi/4)
    / sqrt(2 pi t), the sign of pi/4 following the sign of P''.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    alpha = l / t
    terms = stationary_points(sym, alpha)
    if not terms:
        raise NoStationaryPoints(f"P'(theta) = {-alpha:g} has no real solutions")
    total = sum(
        term.weight * np.exp(1j * (t * term.omega + term.phase_sign * np.pi / 4))
        for term in terms
    )
    value = complex(total / math.sqrt(2.0 * np.pi * t))
    return AmplitudeValue(int(l), float(t), value, ASYMPTOTIC, ASYMPTOTIC_ERROR_CONSTANT / t)


def decay_bound_check(sym: WalkSymbol, alpha: float, t_list: Sequence[float]) -> list[float]:
    """|psi_l(t)| at l = round(alpha t) where no stationary point exists."""
    if stationary_points(sym, alpha):
        raise InvalidRegime(f"alpha={alpha:g} has stationary points; use asymptotic_amplitude")
    return [abs(exact_amplitude(sym, round(alpha * t), t).value) for t in t_list]


def loglog_slope(ts: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(ts)."""
    x = np.log(np.asarray(ts, dtype=float))
    y = np.log(np.maximum(np.asarray(values, dtype=float), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def _check_distinct(values: Sequence[float], what: str):
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) < COINCIDENCE_TOL:
                raise CoincidentFrequencies(
                    f"{what} {i} and {j} coincide ({values[i]:.12g})", (i, j)
                )


def limit_density(sym: WalkSymbol, alpha: float) -> float:
    """Limit of the averaged rescaled probability at velocity alpha.

    (1/2pi) * sum_k 1/|P''(theta_k)|, or 0 when P' = -alpha has no solution.
    """
    terms = stationary_points(sym, alpha)
    _check_distinct([term.omega for term in terms], "frequencies omega")
    return sum(1.0 / abs(term.curvature) for term in terms) / (2.0 * np.pi)


def caustics(sym: WalkSymbol) -> list[float]:
    """Velocities alpha = -P'(theta) at the inflection points P''(theta) = 0."""
    roots = find_roots_periodic(
        lambda th: sym.real_derivative(th, 2),
        max(64, 16 * sym.radius),
        dg=lambda th: sym.real_derivative(th, 3),
    )
    vals = sorted(-float(sym.real_derivative(np.array([th]), 1)[0]) for th in roots.roots)
    out: list[float] = []
    for v in vals:
        if not out or abs(v - out[-1]) > 1e-12:
            out.append(v)
    return out


def density_curve(sym: WalkSymbol, alphas: Sequence[float],
                  caustic_halfwidth: float = 1e-3) -> DensityCurve:
    """Limit density sampled on ``alphas`` with caustic points inserted.

    Caustic velocities inside the sampled range are added to the abscissae. Points within
    ``caustic_halfwidth`` of a caustic get flag ``caustic`` and value nan;
    points where stationary frequencies coincide get flag ``coincident``.
    """
    cs = caustics(sym)
    pts = set(float(a) for a in alphas)
    lo, hi = min(pts), max(pts)
    grid = sorted(pts | {c for c in cs if lo <= c <= hi})
    values = []
    flags = []
    for a in grid:
        if any(abs(a - c) <= caustic_halfwidth for c in cs):
            values.append(np.nan)
            flags.append("caustic")
            continue
        try:
            values.append(limit_density(sym, a))
            flags.append("ok")
        except CoincidentFrequencies:
            values.append(np.nan)
            flags.append("coincident")
        except DegenerateStationaryPoint:
            values.append(np.nan)
            flags.append("caustic")
    return DensityCurve(np.array(grid), np.array(values), tuple(flags))


def density_mass(sym: WalkSymbol, nodes: int = 256) -> float:
    """Integral of the limit density over its support.

    Between consecutive caustics the density has inverse-square-root
    singularities at the ends; alpha = mid - half*cos(phi) removes them, and
    the caustic points themselves are never evaluated.
    """

    cs = caustics(sym)
    x, w = legendre_nodes(nodes)
    phi = 0.5 * np.pi * (x + 1.0)
    total = 0.0
    for a, b in zip(cs[:-1], cs[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        for p, wt in zip(phi, w):
            dens = sum(1.0 / abs(term.curvature)
                       for term in stationary_points(sym, mid - half * math.cos(p)))
            total += wt * 0.5 * np.pi * dens * half * math.sin(p)
    return total / (2.0 * np.pi)


def beat_frequency(sym: WalkSymbol, alpha: float) -> float:
    """Fastest oscillation of |psi|^2 along the ray l = alpha t."""
    terms = stationary_points(sym, alpha)
    fast = 0.0
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            a, b = terms[i], terms[j]
            p_a = a.omega - alpha * a.theta
            p_b = b.omega - alpha * b.theta
            fast = max(fast, abs(a.omega - b.omega), abs(p_a - p_b))
    return fast


def _max_step(freq: float) -> float:
    return 0.25 if freq <= 0 else min(0.25, np.pi / (4.0 * freq))


def averaged_rescaled_probability(sym: WalkSymbol, alpha: float, T: float,
                                  spec: Optional[QuadratureSpec] = None) -> float:
    """(1/sqrt T) * integral over [T, T + sqrt T] of t |psi_floor(alpha t)(t)|^2 dt."""
    if T < 1:
        raise ValueError("T must be at least 1")

    def prob(site, t):
        return t * abs(exact_amplitude(sym, site, t, spec).value) ** 2

    return ray_time_average(prob, alpha, T, _max_step(beat_frequency(sym, alpha)))


def return_probability_average(sym: WalkSymbol, t: float) -> float:
    """Leading term (1/2 pi t) * sum_k 1/|P''(theta_k)| over the zeros of P'."""
    if t <= 0:
        raise ValueError("t must be positive")
    terms = stationary_points(sym, 0.0)
    if not terms:
        raise NoStationaryPoints("P' has no real zeros")
    _check_distinct([eval_symbol(sym, term.theta) for term in terms], "values P(theta_k)")
    return sum(1.0 / abs(term.curvature) for term in terms) / (2.0 * np.pi * t)


def remainder_envelope(sym: WalkSymbol, alpha: float, t: float,
                       samples: int = 400) -> float:
    """max of s * |exact - asymptotic| over s in one beat period starting at t.

    The remainder of the stationary-phase sum is itself a superposition of
    oscillations, so a single sample can land near a cancellation; the
    maximum over a beat period tracks its envelope instead.
    """
    freq = min((f for f in _beat_set(sym, alpha) if f > 0), default=1.0)
    width = 2.0 * np.pi / freq
    worst = 0.0
    for s in np.linspace(t, t + width, samples):
        site = math.floor(alpha * s)
        err = abs(exact_amplitude(sym, site, s).value - asymptotic_amplitude(sym, site, s).value)
        worst = max(worst, s * err)
    return worst


def _beat_set(sym: WalkSymbol, alpha: float) -> list[float]:
    terms = stationary_points(sym, alpha)
    return [abs(a.omega - b.omega) for i, a in enumerate(terms) for b in terms[i + 1:]]
