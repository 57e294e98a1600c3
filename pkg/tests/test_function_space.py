import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from epca.evolution import Nonlinearity, affine, rational_state, sine_state
from epca.function_space import (
    DefectProfile,
    SampledPath,
    compose_nonlinearity,
    floor_compose,
    lipschitz_estimate,
    stepanov_defect_profile,
    stepanov_norm,
    sup_defect_profile,
)


def sap_u(t):
    return np.sin(np.pi * t) + 1.0 / (1.0 + t)


# --- SampledPath -------------------------------------------------------------

def test_grid_must_be_reciprocal_integer():
    with pytest.raises(ValueError):
        SampledPath(0.3, np.zeros(11))
    with pytest.raises(ValueError):
        SampledPath(1.0, np.zeros(3))
    p = SampledPath(0.25, np.zeros(9))
    assert p.m == 4 and p.horizon == 2 and p.dim == 1


def test_path_is_immutable(sample):
    p = sample(lambda t: t, horizon=2)
    with pytest.raises(ValueError):
        p.values[0, 0] = 1.0


def test_path_must_end_on_integer():
    with pytest.raises(ValueError, match="integer"):
        SampledPath(0.25, np.zeros(6))


# --- stepanov_norm -----------------------------------------------------------

def test_stepanov_norm_constant(sample):
    c = np.array([2.0, 0.0])
    p = sample(lambda t: np.tile(c, (t.size, 1)))
    assert stepanov_norm(p, 2) == pytest.approx(2.0, abs=1e-12)


def test_stepanov_norm_exponential(sample):
    p = sample(lambda t: np.exp(-t))
    oracle = quad(lambda s: math.exp(-s), 0, 1)[0]
    assert oracle == pytest.approx(1 - math.exp(-1), abs=1e-14)
    assert stepanov_norm(p, 1) == pytest.approx(oracle, abs=1e-9)


def test_stepanov_norm_sine(sample):
    p = sample(lambda t: np.sin(2 * np.pi * t))
    oracle = math.sqrt(quad(lambda s: math.sin(2 * math.pi * s) ** 2, 0.3, 1.3)[0])
    assert oracle == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert stepanov_norm(p, 2) == pytest.approx(oracle, abs=1e-8)


def test_stepanov_norm_horizon_too_short():
    with pytest.raises(ValueError, match="horizon too short"):
        stepanov_norm(SampledPath(0.5, np.ones(1)), 1)


def test_stepanov_norm_rejects_small_p(sample):
    with pytest.raises(ValueError, match="p must be >= 1"):
        stepanov_norm(sample(np.cos), 0.5)


def test_stepanov_norm_of_step_path_is_exact():
    # staircase 1, 2, 3 on unit intervals: window starting at 1.5 integrates to 2.5
    u = SampledPath.from_function(lambda t: t, 1 / 4, 3)
    s = floor_compose(u)
    oracle = max(((1 - f) * n + f * (n + 1)) for n in (0, 1) for f in np.arange(4) / 4)
    assert stepanov_norm(s, 1) == pytest.approx(max(oracle, 2.0), abs=1e-14)


def test_richardson_ratio_at_least_fourth_order():
    exact = math.sqrt(0.5)
    errs = [abs(stepanov_norm(SampledPath.from_function(
        lambda t: np.sin(2 * np.pi * t), h, 20), 2) - exact) for h in (1 / 8, 1 / 16, 1 / 32)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    # local quintic interpolation: order 6, so ratios near 64
    assert all(r >= 16 for r in ratios), ratios
    h = 1 / 16
    assert errs[1] <= 10 * h ** 4


# --- defect profiles --------------------------------------------------------

def test_sup_defect_of_periodic_path_vanishes(sample):
    p = sample(lambda t: np.sin(2 * np.pi * t / 2), horizon=20)
    prof = sup_defect_profile(p, 2)
    assert np.max(prof.values) < 1e-12


def test_sup_defect_closed_form(sample):
    p = sample(lambda t: 1 / (1 + t), horizon=20)
    prof = sup_defect_profile(p, 1)
    T = prof.T
    np.testing.assert_allclose(prof.values, 1 / ((1 + T) * (2 + T)), rtol=1e-12)
    assert prof.T[-1] == 19


def test_sup_defect_of_ramp_never_decays(sample):
    prof = sup_defect_profile(sample(lambda t: t, horizon=10), 1)
    np.testing.assert_allclose(prof.values, 1.0, rtol=1e-12)
    assert not prof.decays(0.5)


def test_omega_must_be_grid_multiple(sample):
    p = sample(np.cos, horizon=10)
    with pytest.raises(ValueError, match="omega must be a grid multiple"):
        sup_defect_profile(p, 0.3)
    with pytest.raises(ValueError, match="omega must be a grid multiple"):
        stepanov_defect_profile(p, 0.3, 1)


def test_non_integer_omega_on_continuous_path(sample):
    p = sample(lambda t: np.sin(2 * np.pi * t / 1.5), horizon=12)
    prof = stepanov_defect_profile(p, 1.5, 2)
    assert np.max(prof.values) < 1e-8


def test_stepanov_defect_periodic_and_ramp(sample):
    p = sample(lambda t: np.cos(np.pi * t), horizon=12)
    assert np.max(stepanov_defect_profile(p, 2, 2).values) < 1e-12
    r = stepanov_defect_profile(sample(lambda t: t, horizon=10), 1, 1)
    np.testing.assert_allclose(r.values, 1.0, rtol=1e-12)


def _floor_defect_oracle(T_values, omega, horizon):
    """Unit-window integrals of |u([s+w]) - u([s])| from the step formula."""
    n = np.arange(horizon + 1)
    un = np.sin(np.pi * n) + 1 / (1 + n)
    delta = np.abs(un[omega:] - un[:-omega])          # defect on [k, k+1)
    out = []
    for T in T_values:
        best = 0.0
        for t in np.arange(T, horizon - omega - 1 + 1e-12, 1 / 16):
            k = int(math.floor(t + 1e-12))
            f = t - k
            best = max(best, (1 - f) * delta[k] + f * delta[k + 1] if f else delta[k])
        out.append(best)
    return np.array(out)


def test_floor_composed_stepanov_defect():
    u = SampledPath.from_function(sap_u, 1 / 16, 200)
    prof = stepanov_defect_profile(floor_compose(u), 2, 1)
    assert prof.value_at(100) < 1e-2
    Ts = [0, 10.5, 50, 100, 150]
    expected = _floor_defect_oracle(Ts, 2, 200)
    got = [prof.value_at(T) for T in Ts]
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-15)


def test_defect_profile_validation():
    with pytest.raises(ValueError):
        DefectProfile(1, None, [0, 0], [1, 1])
    with pytest.raises(ValueError):
        DefectProfile(1, None, [0, 1], [1, -1])
    prof = DefectProfile(1, 1, [0, 1, 2, 3], [3, 2, 2, 1e-3])
    assert prof.decays(1e-2) and not prof.decays(1e-3)
    assert not DefectProfile(1, 1, [0, 1, 2, 3, 4], [3, 1, 1, 2, 1e-3]).decays(1e-2)


# --- floor composition -------------------------------------------------------

def test_floor_of_sine_is_zero(sample):
    s = floor_compose(sample(lambda t: np.sin(2 * np.pi * t)))
    assert np.max(np.abs(s.values)) < 1e-12


def test_floor_of_ramp_is_staircase(sample):
    s = floor_compose(sample(lambda t: t, horizon=5))
    np.testing.assert_array_equal(s.values[:, 0], np.floor(s.times))
    assert list(s.discontinuities()) == [1, 2, 3, 4, 5]
    np.testing.assert_array_equal(s.jumps()[1:], 1.0)


def test_floor_query(sample):
    s = floor_compose(sample(lambda t: np.exp(-t), horizon=5))
    assert s.value_at(2.5)[0] == math.exp(-2)
    assert s.left_limits[3, 0] == math.exp(-2)


def test_continuity_threshold():
    v = np.zeros(5)
    v[2] = 1e-12
    p = SampledPath(0.5, v, left_limits=[0.0, 0.0, 0.0])
    assert p.continuity_flags.all()
    q = SampledPath(0.5, v, left_limits=[0.0, 1e-6, 0.0])
    assert list(q.discontinuities()) == [1]


# --- composition with a nonlinearity ---------------------------------------

def test_compose_zero(sample):
    zero = Nonlinearity(lambda t, x: np.zeros_like(x), 1, 0.0, 1.0)
    out = compose_nonlinearity(zero, sample(np.cos), floored=True)
    assert not out.values.any()


def test_compose_identity_floored(sample):
    ident = affine(1.0)
    u = sample(lambda t: np.exp(-t), horizon=6)
    out = compose_nonlinearity(ident, u, floored=True)
    np.testing.assert_array_equal(out.values[:, 0], np.exp(-np.floor(u.times)))
    np.testing.assert_array_equal(out.left_limits[1:, 0], np.exp(-np.arange(6.0)))


def test_compose_dimension_mismatch(sample):
    with pytest.raises(ValueError, match="dimension"):
        compose_nonlinearity(affine(1.0, dim=2), sample(np.cos), floored=False)


@pytest.mark.parametrize("p", [1, 2])
def test_compose_modulated_against_finer_grid(p):
    f = Nonlinearity(lambda t, x: np.sin(np.pi * t)[:, None] * x, 1, 1.0, 2.0)
    h = 1 / 16
    coarse = compose_nonlinearity(f, SampledPath.from_function(sap_u, h, 120), True)
    fine = compose_nonlinearity(f, SampledPath.from_function(sap_u, h / 10, 120), True)
    pc = stepanov_defect_profile(coarse, 2, p)
    pf = stepanov_defect_profile(fine, 2, p)
    # window starts are sampled every h, so the tail maxima agree to O(h^2)
    for T in (0, 20, 60, 100, 117):
        assert pc.value_at(T) == pytest.approx(pf.value_at(T), rel=h ** 2, abs=1e-9)
    assert pc.decays(1e-2) and pf.decays(1e-2)


# --- Lipschitz estimates ------------------------------------------------------

@pytest.mark.parametrize("beta", [0.5, 1.0, 2.9])
def test_lipschitz_sine(beta):
    f = sine_state(beta)
    assert lipschitz_estimate(f, (-10, 10), 2000) <= beta * (1 + 1e-9)


def test_lipschitz_linear_exact():
    assert lipschitz_estimate(affine(2.0), (-10, 10), 500) == pytest.approx(2.0, abs=1e-12)


def test_lipschitz_rational():
    # derivative (1 - x^2)/(1 + x^2)^2 peaks at 1 for x = 0
    xs = np.linspace(-10, 10, 200_001)
    assert np.max(np.abs((1 - xs ** 2) / (1 + xs ** 2) ** 2)) == pytest.approx(1.0)
    est = lipschitz_estimate(rational_state(1.0), (-10, 10), 4000)
    assert 0.9 <= est <= 1.0 + 1e-9


def test_lipschitz_needs_two_samples():
    with pytest.raises(ValueError):
        lipschitz_estimate(affine(1.0), n_samples=1)


# --- properties --------------------------------------------------------------

sap_params = st.tuples(
    st.floats(0.1, 3.0), st.floats(0, 2 * math.pi), st.floats(-2, 2), st.floats(0.2, 2.0))


def _sap_path(params, omega=2, h=1 / 16, horizon=40):
    amp, phase, c, rate = params
    return SampledPath.from_function(
        lambda t: amp * np.sin(2 * np.pi * t / omega + phase) + c * np.exp(-rate * t),
        h, horizon)


@settings(max_examples=25, deadline=None)
@given(sap_params)
def test_norm_monotone_in_p(params):
    p = _sap_path(params)
    assert stepanov_norm(p, 1) <= stepanov_norm(p, 2) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(sap_params)
def test_stepanov_defect_below_sup_defect(params):
    p = _sap_path(params)
    sup = sup_defect_profile(p, 2)
    sp = stepanov_defect_profile(p, 2, 2)
    n = sp.values.size
    assert np.all(sp.values <= sup.values[:n] * (1 + 1e-6) + 1e-12)
    assert np.all(np.diff(sup.values) <= 0)


@settings(max_examples=20, deadline=None)
@given(sap_params)
def test_floor_composition_preserves_decay(params):
    u = _sap_path(params, horizon=60)
    s = floor_compose(u)
    assert sup_defect_profile(u, 2).decays(1e-3)
    nodes = u.node_values[:, 0]
    assert abs(nodes[-1] - nodes[-3]) < 1e-3
    for p in (1, 2):
        assert stepanov_defect_profile(s, 2, p).decays(1e-3)


@settings(max_examples=20, deadline=None)
@given(sap_params)
def test_floor_composition_has_jumps(params):
    amp, phase, c, rate = params
    s = floor_compose(_sap_path(params))
    if np.ptp(s.node_values) > 1e-6:
        assert s.discontinuities().size >= 1
        assert s.jumps().max() > 0


def test_sup_surrogate_ignores_single_sample_tail():
    # sin(pi t) shifted by 1 has defect 2|sin(pi t)|, zero at the last node only
    path = SampledPath.from_function(lambda t: np.sin(np.pi * t), 1 / 16, 12)
    prof = sup_defect_profile(path, 1.0)
    assert prof.values[-1] < 1e-12
    assert prof.final == pytest.approx(2.0)
    assert not prof.decays(1e-2)


def test_stepanov_surrogate_covers_a_full_shift():
    # cos(pi [t] / 2) has period 4; shifted by 2 its defect vanishes on every
    # other unit window, including the last one
    step = floor_compose(SampledPath.from_function(lambda t: np.cos(np.pi * t / 2), 1 / 16, 24))
    prof = stepanov_defect_profile(step, 2.0, 1)
    assert prof.values[-1] < 1e-12
    assert not prof.decays(1e-2)
