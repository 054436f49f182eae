import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from ctqw.errors import (
    CoincidentFrequencies,
    InvalidRegime,
    NoStationaryPoints,
    SymmetryViolation,
)
from ctqw.lattice_walk import (
    WalkSymbol,
    asymptotic_amplitude,
    caustics,
    decay_bound_check,
    density_curve,
    density_mass,
    exact_amplitude,
    limit_density,
    loglog_slope,
    return_probability_average,
    series_amplitude,
    stationary_points,
)

NN = WalkSymbol.nearest_neighbor()
FIG1 = WalkSymbol.from_pairs([(1, 1.0), (2, 1.0)])

coeff = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def symbols(draw, max_radius=3):
    L = draw(st.integers(1, max_radius))
    pairs = [(k, draw(coeff)) for k in range(1, L + 1)]
    pairs.append((0, draw(st.floats(-1, 1))))
    pairs[L - 1] = (L, pairs[L - 1][1] + 0.2)
    return WalkSymbol.from_pairs(pairs)


def test_symbol_validation():
    with pytest.raises(SymmetryViolation):
        WalkSymbol({1: 1.0, -1: 2.0})
    with pytest.raises(SymmetryViolation):
        WalkSymbol.from_pairs([(0, 1j)])
    with pytest.raises(ValueError):
        WalkSymbol({})
    s = WalkSymbol.from_pairs([(2, 1 + 1j)])
    assert s.coefficients[-2] == 1 - 1j
    assert s.radius == 2


def test_zero_time_is_delta():
    assert exact_amplitude(NN, 0, 0.0).value == pytest.approx(1.0, abs=1e-15)
    assert abs(exact_amplitude(NN, 3, 0.0).value) < 1e-15


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0, 10.0, 25.0])
def test_nearest_neighbor_bessel(t):
    for l in range(-10, 51):
        expected = 1j ** abs(l) * special.jv(abs(l), 2 * t)
        assert abs(exact_amplitude(NN, l, t).value - expected) < 1e-12


@given(sym=symbols(), l=st.integers(-6, 6), t=st.floats(0.0, 3.0))
@settings(max_examples=60, deadline=None)
def test_matches_taylor_series(sym, l, t):
    assert abs(exact_amplitude(sym, l, t).value - series_amplitude(sym, l, t)) < 1e-10


@given(sym=symbols(), t=st.floats(0.0, 15.0))
@settings(max_examples=30, deadline=None)
def test_normalization(sym, t):
    reach = sym.radius * (math.ceil(t * sym.total_weight) + 25)
    total = sum(abs(exact_amplitude(sym, l, t).value) ** 2 for l in range(-reach, reach + 1))
    assert abs(total - 1.0) < 1e-10


@given(l=st.integers(0, 30), t=st.floats(0.1, 20.0))
@settings(max_examples=40, deadline=None)
def test_real_symmetric_parity(l, t):
    # even real symbol: psi_{-l} = psi_l
    a = exact_amplitude(FIG1, l, t).value
    b = exact_amplitude(FIG1, -l, t).value
    assert abs(a - b) < 1e-12


def test_stationary_points_nearest_neighbor():
    terms = stationary_points(NN, 1.0)
    assert len(terms) == 2
    for term in terms:
        assert abs(-2 * math.sin(term.theta) + 1.0) < 1e-12
        assert abs(abs(term.curvature) - math.sqrt(3.0)) < 1e-10
    assert stationary_points(NN, 2.5) == []


def test_asymptotic_close_at_large_t():
    t = 400.0
    l = 200
    ex = exact_amplitude(NN, l, t).value
    asym = asymptotic_amplitude(NN, l, t).value
    assert abs(ex - asym) < 2.0 / t


def test_asymptotic_needs_stationary_points():
    with pytest.raises(NoStationaryPoints):
        asymptotic_amplitude(NN, 100, 40.0)


def test_decay_check_regime():
    with pytest.raises(InvalidRegime):
        decay_bound_check(NN, 1.0, [4.0])
    vals = decay_bound_check(NN, 2.5, [4.0, 8.0, 16.0])
    assert vals[0] > vals[1] > vals[2]


def test_loglog_slope_exact_power():
    ts = [1.0, 2.0, 4.0, 8.0]
    assert loglog_slope(ts, [t**-2.5 for t in ts]) == pytest.approx(-2.5)


def test_arcsine_density():
    for alpha in (0.0, 0.5, 1.2, 1.9):
        assert limit_density(NN, alpha) == pytest.approx(1 / (math.pi * math.sqrt(4 - alpha**2)), rel=1e-10)
    assert limit_density(NN, 2.5) == 0.0


def test_caustics():
    assert caustics(NN) == pytest.approx([-2.0, 2.0], abs=1e-12)
    cs = caustics(FIG1)
    # -P'(theta) = 2 sin(theta) + 4 sin(2 theta); its critical values by brute force
    th = np.linspace(0, 2 * np.pi, 2_000_001)
    v = 2 * np.sin(th) + 4 * np.sin(2 * th)
    inner = (np.diff(np.sign(np.diff(v))) != 0).nonzero()[0] + 1
    ref = sorted(set(np.round(v[inner], 6)))
    assert len(cs) == len(ref)
    assert np.allclose(cs, ref, atol=1e-6)


def test_density_curve_flags():
    curve = density_curve(NN, [-1.0, 0.5, 1.0, 3.0])
    # caustics at +/-2 inserted only when inside the sampled range
    assert list(curve.alphas) == pytest.approx([-1.0, 0.5, 1.0, 2.0, 3.0])
    assert curve.flags[3] == "caustic" and math.isnan(curve.values[3])
    assert curve.flags[-1] == "ok" and curve.values[-1] == 0.0


@pytest.mark.parametrize("sym", [NN, FIG1, WalkSymbol.from_pairs([(1, 1.0), (3, 0.5j)])])
def test_density_mass(sym):
    assert abs(density_mass(sym) - 1.0) < 1e-6


def test_return_probability_average():
    # nearest neighbour: J_0(2t)^2 averages to 1/(2 pi t)
    assert return_probability_average(NN, 10.0) == pytest.approx(1 / (2 * math.pi * 10.0))
    with pytest.raises(CoincidentFrequencies):
        # P = 2 cos(2 theta) takes the value 2 at both theta = 0 and theta = pi
        return_probability_average(WalkSymbol.from_pairs([(2, 1.0)]), 1.0)


def test_coincident_frequencies_in_density():
    # at alpha = 0 the stationary points theta = 0 and pi share omega = 2
    with pytest.raises(CoincidentFrequencies):
        limit_density(WalkSymbol.from_pairs([(2, 1.0)]), 0.0)
