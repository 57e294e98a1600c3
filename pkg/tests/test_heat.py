import math

import numpy as np
import pytest

from epca.evolution import HEAT_POTENTIAL, check_periodicity_and_decay, sample_arguments
from epca.function_space import lipschitz_estimate
from epca.heat import (
    HeatInstance,
    build_heat_process,
    eigenfunctions,
    pointwise_sine,
    project_initial,
    reconstruct,
    run_heat_demo,
    snapshot,
    spatial_grid,
)
from epca.solver import SolverConfig, march

X = spatial_grid()


def Q(t):
    return HEAT_POTENTIAL.antiderivative(t)


# --- spatial projection ----------------------------------------------------

def test_project_first_eigenfunction():
    c = project_initial(eigenfunctions(1, X)[0])
    np.testing.assert_allclose(c, np.eye(16)[0], atol=1e-13)


def test_project_parabola():
    c = project_initial(X * (math.pi - X))
    n = np.arange(1, 17)
    expected = np.where(n % 2 == 1, math.sqrt(2 / math.pi) * 4 / n ** 3, 0.0)
    np.testing.assert_allclose(c, expected, atol=1e-8)


def test_project_zero():
    assert not project_initial(np.zeros(257)).any()


def test_project_requires_dirichlet_data():
    with pytest.raises(ValueError, match="Dirichlet data required"):
        project_initial(np.ones(257))


def test_reconstruction_tail_bound():
    u0 = X * (math.pi - X)
    c = project_initial(u0, 16)
    # L2 tail of the omitted coefficients bounds the L2 reconstruction error
    n = np.arange(17, 4001, 2)
    tail = math.sqrt(np.sum((math.sqrt(2 / math.pi) * 4 / n ** 3) ** 2))
    err = math.sqrt(np.trapezoid((reconstruct(c, X) - u0) ** 2, X))
    assert err <= tail * 1.01


def test_reconstruction_midpoint_against_dense_sum():
    rng = np.random.default_rng(3)
    c = rng.normal(size=16)
    dense = spatial_grid(4097)
    mid = reconstruct(c, dense)[2048]
    direct = sum(c[k] * math.sqrt(2 / math.pi) * math.sin((k + 1) * math.pi / 2)
                 for k in range(16))
    assert abs(mid - direct) <= 1e-10
    assert abs(reconstruct(c, X)[128] - direct) <= 1e-10


# --- process -----------------------------------------------------------------

def test_heat_process_full_period_factor():
    proc = build_heat_process(16)
    assert proc.factors(2.0, 0.0)[0] == pytest.approx(math.exp(-8), rel=1e-14)
    assert (proc.K, proc.a, proc.omega) == (1.0, 3.0, 2.0)


def test_heat_process_decay_and_periodicity():
    proc = build_heat_process(16)
    t, s, _, x = sample_arguments(2000, 16, seed=5)
    per, excess = check_periodicity_and_decay(proc, np.column_stack([t, s]), x)
    assert per <= 1e-12 and excess <= 1e-12
    assert np.all(proc.factors(t, s) <= np.exp(-3 * (t - s))[:, None] * (1 + 1e-14))


def test_heat_process_rejects_zero_modes():
    with pytest.raises(ValueError):
        build_heat_process(0)


# --- forcing -----------------------------------------------------------------

def test_pointwise_aliasing_guard():
    with pytest.raises(ValueError, match="alias"):
        pointwise_sine(1.0, 40, n_x=257)


def test_pointwise_lipschitz_estimate_below_beta():
    f = pointwise_sine(1.5, 8)
    est = lipschitz_estimate(f, (-2.0, 2.0), n_samples=400, t_range=(0.0, 4.0), seed=1)
    assert est <= 1.5 * (1 + 1e-9)


def test_theta_is_beta_over_three():
    for beta in (0.0, 1.0, 2.9):
        assert HeatInstance(beta=beta).theta == beta / 3


# --- demo --------------------------------------------------------------------

def test_demo_pure_decay_closed_form():
    cfg = SolverConfig(h=1 / 64, horizon=20)
    res = run_heat_demo(HeatInstance(beta=0.0, drive=None), cfg)
    t = res.picard.path.times
    u1 = np.exp(-t + Q(t) - Q(0.0))
    np.testing.assert_allclose(res.picard.path.values[:, 0], u1, rtol=1e-12)
    assert not res.picard.path.values[:, 1:].any()
    assert res.verdict
    # the sup defect decays like e^{-4T}
    prof = res.sup_profile
    ratio = prof.value_at(14.0) / prof.value_at(10.0)
    assert ratio == pytest.approx(math.exp(-16), rel=0.2)


def test_energy_decay_without_forcing():
    cfg = SolverConfig(h=1 / 32, horizon=12)
    c0 = np.random.default_rng(0).normal(size=16)
    inst = HeatInstance(beta=0.0, drive=None, c0=c0)
    sol = march(inst.process(), inst.nonlinearity(), inst.c0, cfg)
    norms = np.linalg.norm(sol.path.values, axis=1)
    t = sol.path.times
    assert np.all(norms <= np.exp(-3 * t + 2 / math.pi) * norms[0] * (1 + 1e-12))
    # integer-aligned full periods
    nodes = sol.path.node_values
    n0 = np.linalg.norm(nodes, axis=1)
    assert np.all(n0[2:] <= np.exp(-6) * n0[:-2] * (1 + 1e-12))


def test_demo_beta_one_passes():
    res = run_heat_demo(HeatInstance(beta=1.0), SolverConfig(h=1 / 64, horizon=40))
    assert res.picard.iterations <= 30
    assert res.verdict
    assert res.agreement <= 1e-8
    assert "theta = 0.333333333333" in res.report
    assert "verdict = pass" in res.report


def test_demo_near_critical_beta():
    cfg = SolverConfig(h=1 / 32, horizon=20, picard_max_iter=1000)
    res = run_heat_demo(HeatInstance(beta=2.9), cfg)
    bound = math.ceil(math.log(cfg.picard_tol) / math.log(2.9 / 3))
    assert res.picard.iterations <= bound
    assert f"iteration_bound_log_tol_over_log_theta = {bound}" in res.report
    assert res.agreement <= 1e-8


def test_truncation_exactness():
    cfg = SolverConfig(h=1 / 32, horizon=12)
    small = run_heat_demo(HeatInstance(beta=1.0, modes=16), cfg).picard.path.values
    large = run_heat_demo(HeatInstance(beta=1.0, modes=32), cfg).picard.path.values
    np.testing.assert_allclose(large[:, :16], small, rtol=0, atol=1e-15)
    assert not large[:, 16:].any()


def test_pointwise_demo_agrees():
    res = run_heat_demo(HeatInstance(beta=1.0, forcing="pointwise"),
                        SolverConfig(h=1 / 32, horizon=16))
    assert res.agreement <= 1e-8


def test_snapshot_shape_and_boundary():
    res = run_heat_demo(HeatInstance(beta=1.0), SolverConfig(h=1 / 16, horizon=8))
    x, u = snapshot(res.picard.path, 3.0)
    assert x.shape == u.shape == (257,)
    assert abs(u[0]) < 1e-14 and abs(u[-1]) < 1e-12


def test_instance_validation():
    with pytest.raises(ValueError):
        HeatInstance(modes=4, c0=np.ones(3))
    with pytest.raises(ValueError):
        HeatInstance(forcing="cubic")
