import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from logheat import analysis
from logheat.model import Params, Regime, Sign
from logheat.solver import Field, Grid1D, SolverConfig, StopReason, Trajectory, initial_data, sample, solve


def gaussian(grid, a0, b0, log_scale=0.0):
    f = sample(initial_data("gaussian", a0=a0, b0=b0), grid)
    return Field(grid, f.values, log_scale)


def energy_oracle(a0, b0, lam, sigma=1):
    u = lambda x: b0 * math.exp(-0.5 * a0 * x * x)  # noqa: E731
    ux = lambda x: -a0 * x * u(x)  # noqa: E731
    grad = integrate.quad(lambda x: ux(x) ** 2, -np.inf, np.inf)[0]
    pot = integrate.quad(lambda x: u(x) ** 2 * (1 - math.log(u(x) ** 2)) if u(x) > 0 else 0.0, -12, 12)[0]
    return 0.5 * grad + sigma * 0.5 * lam * pot


@pytest.mark.parametrize("a0,b0", [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)])
def test_norms_of_gaussian(a0, b0):
    g = Grid1D.symmetric(12.0, 0.01)
    f = gaussian(g, a0, b0)
    assert analysis.norm_l1(f) == pytest.approx(b0 * math.sqrt(2 * math.pi / a0), rel=1e-8)
    assert analysis.norm_l2(f) == pytest.approx(b0 * (math.pi / a0) ** 0.25, rel=1e-8)
    assert analysis.norm_linf(f) == pytest.approx(b0)


def test_log_norms_survive_huge_scale():
    g = Grid1D.symmetric(12.0, 0.01)
    f = gaussian(g, 1.0, 1.0, log_scale=5000.0)
    assert analysis.log_norm_l1(f) == pytest.approx(5000.0 + 0.5 * math.log(2 * math.pi), rel=1e-12)
    assert analysis.norm_l1(f) == math.inf


@pytest.mark.parametrize("a0,b0,lam", [(1.0, 1.0, 1.0), (2.0, 0.5, 0.7), (0.5, 3.0, 1.3)])
@pytest.mark.parametrize("sign", list(Sign))
def test_energy_matches_quadrature(a0, b0, lam, sign):
    g = Grid1D.symmetric(12.0, 0.005)
    e = analysis.energy(gaussian(g, a0, b0), lam, sign)
    assert e == pytest.approx(energy_oracle(a0, b0, lam, sign.sigma), rel=1e-4)


def test_energy_parts_consistent_with_energy():
    g = Grid1D.symmetric(12.0, 0.01)
    f = gaussian(g, 1.0, 2.0)
    m, s = analysis.energy_parts(f, 1.0)
    assert m * math.exp(s) == pytest.approx(analysis.energy(f, 1.0), rel=1e-12)
    assert analysis.energy_parts(Field(g, np.zeros(g.n_points)), 1.0) == (0.0, 0.0)


def synthetic(times, log_linf, energy_parts=None, lam=1.0, stop=StopReason.HORIZON):
    tr = Trajectory(lam, Sign.FOCUSING)
    tr.times = list(times)
    tr.log_linf = list(log_linf)
    tr.log_l1 = list(log_linf)
    tr.log_l2 = list(log_linf)
    tr.energy_parts = energy_parts or [(0.0, 0.0)] * len(times)
    tr.energy = [m * math.exp(min(s, 700.0)) for m, s in tr.energy_parts]
    tr.stop_reason = stop
    return tr


def test_energy_dissipation_check_flags_increase():
    t = [0.0, 0.1, 0.2, 0.3]
    ok = synthetic(t, [0] * 4, [(3.0, 0.0), (2.0, 0.0), (1.0, 0.0), (1.0, 0.0)])
    bad = synthetic(t, [0] * 4, [(3.0, 0.0), (2.0, 0.0), (2.1, 0.0), (1.0, 0.0)])
    assert analysis.energy_dissipation_check(ok).passed
    rep = analysis.energy_dissipation_check(bad)
    assert not rep.passed and rep.first_violation_time == 0.2


def test_energy_dissipation_check_handles_overflowing_energies():
    t = [0.0, 0.1, 0.2]
    parts = [(-1.0, 1000.0), (-1.0, 2000.0), (-1.0, 3000.0)]
    assert analysis.energy_dissipation_check(synthetic(t, [0] * 3, parts)).passed
    rising = [(1.0, 1000.0), (1.0, 2000.0), (1.0, 3000.0)]
    assert not analysis.energy_dissipation_check(synthetic(t, [0] * 3, rising)).passed


def test_psi_hat():
    assert analysis.psi_hat(0.0, 1.0, 1.0) == 0.0
    assert analysis.psi_hat(1.0, 0.0, 1.0) == -math.inf
    assert analysis.psi_hat(1.0, math.e, 1.0) == pytest.approx(math.exp(-2.0))
    with pytest.raises(ValueError):
        analysis.psi_hat(1.0, -1.0, 1.0)


@given(st.floats(-2, 2), st.floats(0.2, 2))
def test_rate_fit_recovers_constant_rate(psi, lam):
    t = np.arange(0, 3.01, 0.1)
    tr = synthetic(t, psi * np.exp(2 * lam * t), lam=lam)
    fit = analysis.rate_fit(tr)
    assert fit.stabilized
    assert fit.psi_limit_estimate == pytest.approx(psi, abs=1e-12)


def test_classify_synthetic_rules():
    t = np.arange(0, 3.01, 0.1)
    cap = synthetic(t, 0.4 * np.exp(2 * t), stop=StopReason.AMPLITUDE_CAP)
    assert analysis.classify_trajectory(cap).regime is Regime.GROWTH
    low = synthetic(t, -30 * np.ones_like(t))
    assert analysis.classify_trajectory(low).regime is Regime.DECAY
    neg = synthetic(t, -0.1 * np.exp(2 * t))
    assert analysis.classify_trajectory(neg).regime is Regime.DECAY
    drifting = synthetic(t, np.linspace(0, 1, t.size))
    assert analysis.classify_trajectory(drifting).regime is Regime.UNDECIDED
    t_long = np.arange(0, 4.51, 0.1)
    steady = synthetic(t_long, 0.5 * np.ones_like(t_long))
    assert analysis.classify_trajectory(steady).regime is Regime.STEADY
    assert analysis.classify_trajectory(steady, allow_steady=False).regime is Regime.UNDECIDED


def test_classify_real_growth_and_decay():
    g = Grid1D.symmetric(10.0, 0.05)
    for eps, regime in ((0.5, Regime.GROWTH), (-0.5, Regime.DECAY)):
        u0 = sample(initial_data("scaled_steady", eps=eps, lam=1.0), g)
        tr = solve(u0, SolverConfig(Params(1.0)), 4.0)
        assert analysis.classify_trajectory(tr).regime is regime


def test_front_position_interpolates():
    g = Grid1D(-2.0, 2.0, 5)
    f = Field(g, np.array([0.0, 1.0, 1.0, 0.5, 0.0]))
    assert analysis.front_position(f, 0.75) == pytest.approx(0.5)
    assert analysis.front_position(f, 2.0) is None
    with pytest.raises(ValueError):
        analysis.front_position(f, 0.0)


@given(st.floats(0.5, 4), st.floats(1e-6, 10))
def test_convergence_order_exact_power_law(p, c):
    errs = [(dx, c * dx**p) for dx in (0.04, 0.02, 0.01)]
    assert analysis.convergence_order(errs) == pytest.approx(p, rel=1e-9)


def test_convergence_order_warns_on_zero_error():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        order = analysis.convergence_order([(0.04, 1.6e-3), (0.02, 4e-4), (0.01, 0.0)])
    assert order == pytest.approx(2.0)
    assert w


@settings(max_examples=30)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_linear_slope_exact(a, b):
    ts = np.linspace(1, 3, 21)
    slope, resid = analysis.linear_slope(ts, a * ts + b)
    assert slope == pytest.approx(a, abs=1e-9)
    assert resid < 1e-9
