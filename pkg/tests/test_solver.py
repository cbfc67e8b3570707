import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from logheat import model
from logheat.model import GaussianParams, Params, Sign
from logheat.solver import (
    Field,
    Grid1D,
    LogField,
    Scheme,
    SolverConfig,
    StopReason,
    bump_profile,
    heavy_tail_alpha,
    heavy_tail_l1,
    initial_data,
    laplacian,
    sample,
    solve,
    solve_log_domain,
    stable_dt,
    step,
)


def gaussian_field(grid, a0=1.0, b0=1.0):
    return sample(initial_data("gaussian", a0=a0, b0=b0), grid)


# --- grid and fields ----------------------------------------------------------


def test_grid_from_spacing():
    g = Grid1D.symmetric(10.0, 0.01)
    assert g.n_points == 2001 and g.dx == pytest.approx(0.01)
    assert g.x[0] == -10.0 and g.x[-1] == pytest.approx(10.0)


@pytest.mark.parametrize("args", [(1.0, 0.0, 10), (0.0, 1.0, 2), (0.0, 1.0, 3.5)])
def test_grid_rejects_bad_input(args):
    with pytest.raises(ValueError):
        Grid1D(*args)


def test_grid_spacing_must_divide():
    with pytest.raises(ValueError):
        Grid1D.from_spacing(0.0, 1.0, 0.3)


def test_field_rejects_negative_values():
    g = Grid1D(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        Field(g, np.array([0.0, 1.0, -1.0, 0.5, 0.0]))


def test_field_log_scale_view():
    g = Grid1D(0.0, 1.0, 5)
    f = Field(g, np.array([0.0, 1.0, 2.0, 1.0, 0.0]), log_scale=1000.0)
    assert f.log_max == pytest.approx(1000.0 + math.log(2.0))
    assert np.isinf(f.u[2])
    assert f.log_values[0] == -math.inf


def test_sample_applies_dirichlet():
    f = gaussian_field(Grid1D.symmetric(2.0, 0.5))
    assert f.values[0] == 0.0 and f.values[-1] == 0.0


# --- operators ------------------------------------------------------------------


def test_laplacian_exact_on_quadratics():
    g = Grid1D(-1.0, 1.0, 21)
    f = Field(g, 2.0 - g.x**2)
    lap = laplacian(f)
    np.testing.assert_allclose(lap[1:-1], -2.0, atol=1e-10)


def test_stable_dt_respects_both_limits():
    g = Grid1D.symmetric(5.0, 0.1)
    cfg = SolverConfig(Params(1.0), safety=0.5)
    f = gaussian_field(g, b0=math.exp(10.0))
    dt = stable_dt(f, cfg)
    assert dt <= 0.5 * 0.1**2 / 2 + 1e-15
    assert dt <= 0.5 / (2.0 * (1 + 10.0)) + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 5), min_size=8, max_size=40))
def test_step_preserves_nonnegativity(vals):
    g = Grid1D(0.0, 1.0, len(vals))
    f = Field(g, np.array(vals))
    cfg = SolverConfig(Params(2.0))
    out = step(f, stable_dt(f, cfg), cfg)
    assert np.all(out.values >= 0)
    assert out.values[0] == 0.0 and out.values[-1] == 0.0


def test_zero_is_absorbing():
    g = Grid1D.symmetric(2.0, 0.1)
    traj = solve(Field(g, np.zeros(g.n_points)), SolverConfig(Params(1.0), record_every=0.25), 1.0)
    assert traj.stop_reason is StopReason.HORIZON
    assert traj.times == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert all(v == -math.inf for v in traj.log_linf)


# --- solve ---------------------------------------------------------------------


def test_records_land_on_exact_times():
    g = Grid1D.symmetric(6.0, 0.1)
    traj = solve(gaussian_field(g), SolverConfig(Params(1.0), record_every=0.1), 0.35)
    np.testing.assert_allclose(traj.times, [0.0, 0.1, 0.2, 0.3, 0.35], atol=1e-14)
    for name in ("log_l1", "log_l2", "log_linf", "energy", "psi_hat"):
        assert len(getattr(traj, name)) == len(traj.times)


def test_steady_state_stays_put():
    g = Grid1D.symmetric(10.0, 0.02)
    u0 = sample(initial_data("scaled_steady", lam=1.0), g)
    traj = solve(u0, SolverConfig(Params(1.0), record_every=0.25), 1.0)
    assert max(abs(ls - 0.5) for ls in traj.log_linf) < 1e-3


def test_amplitude_cap_stops_growth():
    g = Grid1D.symmetric(8.0, 0.05)
    u0 = sample(initial_data("scaled_steady", eps=0.5, lam=1.0), g)
    traj = solve(u0, SolverConfig(Params(1.0), amplitude_cap=1e10), 10.0)
    assert traj.stop_reason is StopReason.AMPLITUDE_CAP
    assert traj.log_linf[-1] > math.log(1e10)
    assert traj.snapshots, "final profile kept at the cap"


def test_uncapped_run_goes_past_float_range():
    g = Grid1D.symmetric(8.0, 0.05)
    u0 = sample(initial_data("scaled_steady", eps=0.5, lam=1.0), g)
    traj = solve(u0, SolverConfig(Params(1.0), amplitude_cap=math.inf), 4.0)
    assert traj.stop_reason is StopReason.HORIZON
    assert traj.log_linf[-1] > 1000 and traj.rescales > 0
    assert traj.linf[-1] == math.inf


def test_floor_stop():
    g = Grid1D.symmetric(8.0, 0.05)
    u0 = sample(initial_data("scaled_steady", eps=-0.5, lam=1.0), g)
    traj = solve(u0, SolverConfig(Params(1.0), log_floor_stop=-10.0), 10.0)
    assert traj.stop_reason is StopReason.BELOW_FLOOR
    assert traj.t_final < 10.0 and traj.log_linf[-1] < -10.0


def test_snapshot_times_pick_nearest_records():
    g = Grid1D.symmetric(6.0, 0.1)
    traj = solve(gaussian_field(g), SolverConfig(Params(1.0), record_every=0.1), 0.5, snapshot_times=(0.0, 0.21))
    assert [t for t, _ in traj.snapshots] == pytest.approx([0.0, 0.2])


def test_scaling_symmetry():
    """Solution from c u0 equals n_c(t) times the solution from u0."""
    g = Grid1D.symmetric(8.0, 0.05)
    lam, c, t_end = 1.0, 3.0, 0.5
    cfg = SolverConfig(Params(lam), record_every=t_end)
    base = solve(gaussian_field(g), cfg, t_end, keep_snapshots=True)
    scaled = solve(gaussian_field(g, b0=c), cfg, t_end, keep_snapshots=True)
    shift = model.ode_log(math.log(c), lam, t_end)
    a = base.snapshots[-1][1].log_values[1:-1] + shift
    b = scaled.snapshots[-1][1].log_values[1:-1]
    inner = np.abs(g.x[1:-1]) < 4
    np.testing.assert_allclose(b[inner], a[inner], atol=1e-3)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_schemes_track_gaussian(scheme):
    g = Grid1D.symmetric(8.0, 0.05)
    gp = GaussianParams(2.0, 1.0)
    traj = solve(gaussian_field(g, 2.0, 1.0), SolverConfig(Params(1.0), scheme=scheme, record_every=0.5), 0.5,
                 keep_snapshots=True)
    exact = model.gaussian_solution(0.5, g.x, gp, 1.0).value
    assert np.max(np.abs(traj.snapshots[-1][1].u - exact)) < 5e-3


def test_log_domain_agrees_with_direct_solver():
    g = Grid1D.symmetric(6.0, 0.05)
    cfg = SolverConfig(Params(1.0), record_every=0.25)
    w0 = LogField(g, math.log(1.5) - 0.5 * g.x**2)
    a = solve_log_domain(w0, cfg, 0.5)
    b = solve(gaussian_field(g, 1.0, 1.5), cfg, 0.5)
    np.testing.assert_allclose(a.log_linf, b.log_linf, atol=2e-3)


@pytest.mark.parametrize("sign", list(Sign))
def test_defocusing_bounded_by_one(sign):
    g = Grid1D.symmetric(10.0, 0.05)
    u0 = sample(initial_data("compact_bump", M=1.0, half_width=2.0, ramp=1.0), g)
    traj = solve(u0, SolverConfig(Params(1.0, sign), log_floor_stop=-math.inf), 1.0)
    if sign is Sign.DEFOCUSING:
        assert max(traj.log_linf) <= 1e-12
    else:
        assert traj.log_linf[-1] < 0  # unit bump decays under the focusing sign


# --- initial data ------------------------------------------------------------


def test_bump_profile_shape():
    x = np.linspace(-4, 4, 801)
    b = bump_profile(x, 3.0, 1.0)
    assert np.all(b[np.abs(x) >= 3.0] == 0.0)
    assert np.all(b[np.abs(x) <= 2.0] == 1.0)
    assert np.all(b[(np.abs(x) > 2.0) & (np.abs(x) < 3.0)] > 0)
    # C^2 across the ramp ends: second differences stay bounded
    d2 = np.diff(b, 2) / (x[1] - x[0]) ** 2
    assert np.max(np.abs(d2)) < 7


def test_heavy_tail_alpha_and_norm():
    alpha = heavy_tail_alpha(1.0)
    assert alpha == pytest.approx(0.8928279, abs=1e-6)
    ref, _ = integrate.quad(lambda x: 1.01 * math.exp(-alpha * (math.sqrt(1 + x * x) - 1)), -np.inf, np.inf)
    assert heavy_tail_l1(1.01, alpha) == pytest.approx(ref, rel=1e-9)
    tau = model.crossover_time(1.01, heavy_tail_l1(1.01, alpha))
    assert tau == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize(
    "kind,params",
    [("gaussian", {"a0": -1, "b0": 1}), ("compact_bump", {"ramp": 5.0}), ("plateau", {"L": 1, "eps": 2}),
     ("nope", {})],
)
def test_initial_data_validation(kind, params):
    with pytest.raises(ValueError):
        initial_data(kind, **params)
