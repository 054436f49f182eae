"""Nearest-neighbour quantum walk on the m-valent homogeneous tree.

Amplitudes from the root depend only on the distance l of the target
vertex. They are available three ways:

* exactly, from integer path counts c_k(l) and the series
  sum_k c_k(l) (it)^k / k!;
* by quadrature on the spectral cut [-r, r], r = 2 sqrt(m-1), using the
  boundary values of F(u) = A(1/u)/u and G(u) = B(1/u)/u;
* asymptotically, for l = alpha t with 0 < alpha < r, and for the return
  amplitude l = 0.

Large-l amplitudes carry a factor (m-1)^{-l/2}; the "rescaled" amplitude
(m-1)^{l/2} psi_l is O(t^{-1/2}) in the ballistic region and is what the
quadrature computes internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BoundaryPoint,
    CancellationLoss,
    InvalidRegime,
    OutOfRegime,
)
from .lattice_walk import ASYMPTOTIC, QUADRATURE, SERIES, AmplitudeValue
from .numerics import (
    GAUSS_LEGENDRE,
    QuadratureSpec,
    catalan,
    integrate_cut,
    next_pow2,
    ray_time_average,
)

ASYMPTOTIC_ERROR_CONSTANT = 1.0
ALPHA_MARGIN = 0.05
SERIES_TAIL_TOL = 1e-20
MAX_SERIES_TIME = 12.0


@dataclass(frozen=True)
class TreeWalkParams:
    valency: int

    def __post_init__(self):
        if int(self.valency) != self.valency or self.valency < 3:
            raise ValueError("valency must be an integer >= 3")

    @property
    def m(self) -> int:
        return int(self.valency)

    @property
    def r(self) -> float:
        return 2.0 * math.sqrt(self.m - 1)

    def shell_size(self, l: int) -> int:
        """Number of vertices at distance l from the root."""
        return 1 if l == 0 else self.m * (self.m - 1) ** (l - 1)


# --- exact path counts --------------------------------------------------------


@dataclass(frozen=True)
class PathCountTable:
    """Loop counts at the root, indexed by length 0..max_order.

    A[k] counts closed walks of length k that never use one fixed root edge,
    B[k] counts all closed walks of length k. Odd entries are zero.
    """

    A: tuple[int, ...]
    B: tuple[int, ...]
    max_order: int


def _poly_mul(p: Sequence[int], q: Sequence[int], order: int) -> list[int]:
    out = [0] * (order + 1)
    for i, a in enumerate(p[: order + 1]):
        if a:
            for j, b in enumerate(q[: order + 1 - i]):
                if b:
                    out[i + j] += a * b
    return out


@lru_cache(maxsize=32)
def _path_counts(m: int, max_order: int) -> PathCountTable:
    A = [0] * (max_order + 1)
    for k in range(0, max_order // 2 + 1):
        A[2 * k] = (m - 1) ** k * catalan(k)
    # B(z) = (1 - m sum_{k>=1} C_{k-1} (m-1)^k z^{2k}) / (1 - m^2 z^2)
    numer = [0] * (max_order + 1)
    numer[0] = 1
    for k in range(1, max_order // 2 + 1):
        numer[2 * k] = -m * catalan(k - 1) * (m - 1) ** k
    B = [0] * (max_order + 1)
    acc = 0
    for k in range(0, max_order + 1, 2):
        acc = acc * m * m + numer[k]
        B[k] = acc
    return PathCountTable(tuple(A), tuple(B), max_order)


def path_counts(params: TreeWalkParams, max_order: int) -> PathCountTable:
    if not 0 <= max_order <= 200:
        raise ValueError("max_order must be in [0, 200]")
    return _path_counts(params.m, int(max_order))


@lru_cache(maxsize=256)
def _site_series(m: int, l: int, order: int) -> tuple[int, ...]:
    """Coefficients of A(z)^l B(z) up to z^order."""
    table = _path_counts(m, max(order, 0))
    out = list(table.B)
    for _ in range(l):
        out = _poly_mul(out, table.A, order)
    return tuple(out)


def walk_counts_to_site(params: TreeWalkParams, l: int, k: int) -> int:
    """Number of walks of length k from the root to a fixed vertex at distance l."""
    if l < 0:
        raise ValueError("l must be non-negative")
    if k < l or (k - l) % 2:
        return 0
    return _site_series(params.m, int(l), int(k - l))[k - l]


# --- branch functions -----------------------------------------------------------


def _sqrt_cut(u, r):
    # branch of sqrt(u^2 - r^2) analytic off [-r, r] and ~ u at infinity
    u = np.asarray(u, dtype=complex)
    return np.sqrt(u - r) * np.sqrt(u + r)


def branch_F(params: TreeWalkParams, u):
    """F(u) = (u - sqrt(u^2 - r^2)) / (2(m-1)) off the cut."""
    return (np.asarray(u, dtype=complex) - _sqrt_cut(u, params.r)) / (2 * (params.m - 1))


def branch_G(params: TreeWalkParams, u):
    """G(u) = (-(m-2) u + m sqrt(u^2 - r^2)) / (2 (u^2 - m^2)) off the cut.

    The numerator vanishes at u = +/-m on this branch; those points are
    filled by the limit so G is analytic there.
    """
    m, r = params.m, params.r
    u = np.asarray(u, dtype=complex)
    num = -(m - 2) * u + m * _sqrt_cut(u, r)
    den = 2 * (u * u - m * m)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    near = np.abs(den) < 1e-10
    if np.any(near):
        # removable singularity at u = +/-m: G(u) -> (m-1)/(m(m-2)) * sign(u)
        out = np.where(near, np.sign(u.real) * (m - 1) / (m * (m - 2)), out)
    return out


def boundary_values(params: TreeWalkParams, x):
    """(F_upper, F_lower, G_upper, G_lower) on the open cut -r < x < r."""
    m, r = params.m, params.r
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.maximum(r * r - x * x, 0.0))
    f_up = (x - 1j * s) / (2 * (m - 1))
    f_lo = (x + 1j * s) / (2 * (m - 1))
    den = 2 * (x * x - m * m)
    g_up = (-(m - 2) * x + 1j * m * s) / den
    g_lo = (-(m - 2) * x - 1j * m * s) / den
    return f_up, f_lo, g_up, g_lo


# --- exact amplitudes ------------------------------------------------------------


def _series_order(m: int, t: float) -> int:
    # stop once the bound m^k t^k / k! on |term| is below the tail tolerance
    k = max(1, math.ceil(2 * m * t))
    while k < 2000:
        if t == 0 or k * math.log(m * t) - math.lgamma(k + 1) < math.log(SERIES_TAIL_TOL):
            return k
        k += 1
    raise ValueError("series order exceeds 2000 terms")


def exact_amplitude_series(params: TreeWalkParams, l: int, t: float,
                           exact: bool = True) -> AmplitudeValue:
    """psi_l(t) = sum_k c_k(l) (it)^k / k! with exact integer counts.

    With ``exact`` the truncated sum is accumulated in rational arithmetic,
    so the only error is the neglected tail. With ``exact=False`` it is
    summed in floating point and CancellationLoss is raised when the
    largest partial sum exceeds the result by more than 1e12.
    """
    if not 0 <= l <= 40:
        raise ValueError("l must be in [0, 40]")
    if not 0 <= t <= MAX_SERIES_TIME:
        raise ValueError(f"t must be in [0, {MAX_SERIES_TIME:g}]")
    m = params.m
    kmax = max(_series_order(m, t), l)
    kmax += (kmax - l) % 2
    coeffs = _site_series(m, l, kmax - l)
    tail = 2.0 * math.exp((kmax + 1) * math.log(m * t) - math.lgamma(kmax + 2)) if t else 0.0

    if exact:
        tf = Fraction(t)
        p, q = tf.numerator, tf.denominator
        # c_k(l) is nonzero only for k = l + 2j; psi_l = i^l * sum_j (-1)^j c t^k / k!
        num = 0
        for j in range(0, (kmax - l) // 2 + 1):
            k = l + 2 * j
            c = coeffs[2 * j]
            if c:
                term = c * p**k * q ** (kmax - k) * (math.factorial(kmax) // math.factorial(k))
                num += -term if j % 2 else term
        real = float(Fraction(num, q**kmax * math.factorial(kmax)))
        value = complex(real * (1j**l))
        return AmplitudeValue(int(l), float(t), value, SERIES, tail)

    total = 0.0 + 0j
    peak = 0.0
    term = 1.0 + 0j
    for k in range(0, kmax + 1):
        if k:
            term *= 1j * t / k
        if k >= l and (k - l) % 2 == 0:
            total += coeffs[k - l] * term
            peak = max(peak, abs(total))
    if abs(total) * 1e12 < peak:
        raise CancellationLoss(
            f"series at t={t:g} loses more than 12 digits (peak {peak:.3g}, result {abs(total):.3g})"
        )
    return AmplitudeValue(int(l), float(t), complex(total), SERIES, tail)


def _cut_spec(params: TreeWalkParams, l: int, t: float, spec: Optional[QuadratureSpec]):
    spec = spec or QuadratureSpec(64, GAUSS_LEGENDRE)
    return spec.with_nodes(next_pow2(params.r * t + l + 32))


def rescaled_amplitude(params: TreeWalkParams, l: int, t: float,
                       spec: Optional[QuadratureSpec] = None) -> AmplitudeValue:
    """(m-1)^{l/2} psi_l(t) by quadrature on the spectral cut.

    Collapsing the contour onto [-r, r] gives
    (1/2 pi i) * integral (F_lo^l G_lo - F_up^l G_up) exp(itx) dx, and since the
    two boundary values are complex conjugates this is
    (1/pi) * integral Im(F_lo^l G_lo) exp(itx) dx.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if l < 0:
        raise ValueError("l must be non-negative")
    scale = math.sqrt(params.m - 1)

    def h(x):
        _, f_lo, _, g_lo = boundary_values(params, x)
        return np.imag((scale * f_lo) ** l * g_lo)

    info = integrate_cut(h, params.r, t, _cut_spec(params, l, t, spec), full_output=True)
    return AmplitudeValue(int(l), float(t), info.value / np.pi, QUADRATURE, info.error / np.pi)


def exact_amplitude_quadrature(params: TreeWalkParams, l: int, t: float,
                               spec: Optional[QuadratureSpec] = None) -> AmplitudeValue:
    res = rescaled_amplitude(params, l, t, spec)
    factor = (params.m - 1) ** (-0.5 * l)
    return AmplitudeValue(res.site, res.time, res.value * factor, QUADRATURE,
                          res.error_estimate * factor)


def spectral_measure_amplitude(params: TreeWalkParams, t: float,
                               spec: Optional[QuadratureSpec] = None) -> complex:
    """Return amplitude as the Fourier transform of the Kesten density.

    psi_0(t) = integral exp(itu) m sqrt(r^2-u^2) / (2 pi (m^2-u^2)) du.
    """
    m, r = params.m, params.r

    def density(u):
        return m * np.sqrt(np.maximum(r * r - u * u, 0.0)) / (2 * np.pi * (m * m - u * u))

    return complex(integrate_cut(density, r, t, _cut_spec(params, 0, t, spec)))


# --- asymptotics -------------------------------------------------------------------


@dataclass(frozen=True)
class TreeAsymptoticTerm:
    """Two-term stationary-phase data at velocity alpha.

    The rescaled amplitude is ~ envelope / sqrt(2 pi t) * sum_k
    exp(i t omega_k + i phi_k), with omega_2 = alpha pi - omega_1 and
    phi_2 = -phi_1.
    """

    alpha: float
    omega_1: float
    omega_2: float
    phi_1: float
    phi_2: float
    envelope: float


def asymptotic_terms(params: TreeWalkParams, alpha: float) -> TreeAsymptoticTerm:
    m, r = params.m, params.r
    if not 0 < alpha < r:
        raise OutOfRegime(f"alpha={alpha:g} outside (0, r={r:.6g})")
    q = math.sqrt(r * r - alpha * alpha)
    omega_1 = alpha * math.atan(alpha / q) + q
    omega_2 = alpha * math.pi - omega_1
    # phase of the lower boundary value G(x_1) times -i, minus pi/4 for f'' < 0
    phi_1 = math.atan(m * alpha / ((m - 2) * q)) - 0.75 * math.pi
    phi_2 = -phi_1
    envelope = q**-0.5 * math.sqrt((m - 1) * alpha * alpha / (alpha * alpha + (m - 2) ** 2))
    return TreeAsymptoticTerm(alpha, omega_1, omega_2, phi_1, phi_2, envelope)


def _rescaled_asymptotic(params: TreeWalkParams, l: int, t: float) -> complex:
    term = asymptotic_terms(params, l / t)
    waves = np.exp(1j * (t * term.omega_1 + term.phi_1)) + np.exp(1j * (t * term.omega_2 + term.phi_2))
    return complex(term.envelope * waves / math.sqrt(2 * math.pi * t))


def asymptotic_amplitude_tree(params: TreeWalkParams, l: int, t: float,
                              margin: float = ALPHA_MARGIN,
                              rescaled: bool = False) -> AmplitudeValue:
    """Leading-order psi_l(t) for l = alpha t in the ballistic region.

    alpha must lie in (margin*r, (1-margin)*r). With ``rescaled`` the
    (m-1)^{l/2} factor is left out.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    r = params.r
    alpha = l / t
    if not margin * r < alpha < (1 - margin) * r:
        raise OutOfRegime(
            f"alpha={alpha:g} outside ({margin * r:.6g}, {(1 - margin) * r:.6g})"
        )
    value = _rescaled_asymptotic(params, l, t)
    err = ASYMPTOTIC_ERROR_CONSTANT / t
    if not rescaled:
        factor = (params.m - 1) ** (-0.5 * l)
        value *= factor
        err *= factor
    return AmplitudeValue(int(l), float(t), value, ASYMPTOTIC, err)


def decay_check_tree(params: TreeWalkParams, alpha: float, t_list: Sequence[float]) -> list[float]:
    """(m-1)^{l/2} |psi_l(t)| at l = round(alpha t) for alpha beyond the front."""
    if alpha <= params.r:
        raise InvalidRegime(f"alpha={alpha:g} is inside the ballistic region (r={params.r:.6g})")
    return [abs(rescaled_amplitude(params, round(alpha * t), t).value) for t in t_list]


def limit_density_tree(params: TreeWalkParams, alpha: float) -> float:
    """Limit of the averaged distance density at velocity alpha."""
    m, r = params.m, params.r
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if abs(alpha - r) <= 1e-9:
        raise BoundaryPoint(f"alpha={alpha:g} is the edge of the support")
    if alpha > r:
        return 0.0
    return (m * alpha * alpha / (alpha * alpha + (m - 2) ** 2)) / (math.pi * math.sqrt(r * r - alpha * alpha))


def distance_probability(params: TreeWalkParams, l: int, t: float,
                         spec: Optional[QuadratureSpec] = None) -> float:
    """Probability of being at distance l: shell size times |psi_l(t)|^2."""
    amp = abs(rescaled_amplitude(params, l, t, spec).value) ** 2
    if l == 0:
        return amp
    return params.m / (params.m - 1) * amp


def averaged_rescaled_probability_tree(params: TreeWalkParams, alpha: float, T: float,
                                       spec: Optional[QuadratureSpec] = None) -> float:
    """(1/sqrt T) * integral over [T, T + sqrt T] of t * P(distance = floor(alpha t)) dt."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    r = params.r
    if alpha < r:
        term = asymptotic_terms(params, alpha)
        freq = max(abs(term.omega_1 - term.omega_2), 2 * math.sqrt(r * r - alpha * alpha))
        step = min(0.25, math.pi / (4 * freq))
    else:
        step = 0.25

    def prob(site, t):
        return t * distance_probability(params, site, t, spec)

    return ray_time_average(prob, alpha, T, step)


def return_amplitude_asymptotic(params: TreeWalkParams, t: float) -> float:
    """Leading term C t^{-3/2} sin(r t - pi/4), C = m (m-1)^{1/4} / (sqrt(pi) (m-2)^2).

    The sign is the one reproduced by the exact return amplitude.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    m, r = params.m, params.r
    c = m * (m - 1) ** 0.25 / (math.sqrt(math.pi) * (m - 2) ** 2)
    return c * t**-1.5 * math.sin(r * t - math.pi / 4)


def return_probability_tree(params: TreeWalkParams, t: float) -> float:
    """Leading term m^2 sqrt(m-1) / (pi (m-2)^4) t^{-3} sin^2(r t - pi/4)."""
    if t < 1:
        raise ValueError("t must be at least 1")
    m, r = params.m, params.r
    return m * m * math.sqrt(m - 1) / (math.pi * (m - 2) ** 4) * t**-3 * math.sin(r * t - math.pi / 4) ** 2


def remainder_envelope_tree(params: TreeWalkParams, alpha: float, t: float,
                            samples: int = 400) -> float:
    """max of s * |rescaled exact - asymptotic| over one beat period from t."""
    term = asymptotic_terms(params, alpha)
    width = 2 * math.pi / abs(term.omega_1 - term.omega_2)
    worst = 0.0
    for s in np.linspace(t, t + width, samples):
        site = math.floor(alpha * s)
        exact = rescaled_amplitude(params, site, s).value
        approx = _rescaled_asymptotic(params, site, s)
        worst = max(worst, s * abs(exact - approx))
    return worst
