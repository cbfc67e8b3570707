"""Scripted reproductions: Gaussian validation, dichotomy sweep, threshold
bisection, bounded-domain rates and defocusing spreading.

Every experiment returns an ExperimentReport whose ``flags`` are hard
pass/fail outcomes; ``advisories`` carry observations that are reported but
never fail a run.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analysis, bounds, model
from .model import GaussianParams, Params, Regime, Sign
from .solver import Field, Grid1D, SolverConfig, Trajectory, initial_data, sample, solve


@dataclass
class ExperimentReport:
    name: str
    inputs: dict
    outcomes: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    advisories: dict = field(default_factory=dict)
    runs: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    @property
    def criteria(self) -> dict:
        """Acceptance criterion number behind each flag."""
        return {k: _criterion(self.name, k) for k in self.flags}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "outcomes": self.outcomes,
            "flags": self.flags,
            "advisories": self.advisories,
            "criteria": self.criteria,
            "passed": self.passed,
        }


_CRITERIA = {
    "gaussian_validation": "1",
    "dichotomy_sweep": "2",
    "threshold_bisection": "6",
    "smalldata_validation": "7",
    "bounded_domain_rates": "8",
    "kpp_spreading": "9",
}


def _criterion(name: str, flag: str) -> str:
    if flag.endswith("envelope_and_energy"):
        return "3,4"
    if flag.endswith("energy_dissipation"):
        return "4"
    if flag in ("plateau_subsolution", "local_blowup"):
        return "5"
    return _CRITERIA.get(name, "")


@dataclass
class ThresholdResult:
    M_decay: float
    M_growth: float
    bracket: tuple
    iterations: int
    probes: list
    K0: float
    ambiguous: list = field(default_factory=list)

    @property
    def relative_width(self) -> float:
        lo, hi = self.bracket
        return (hi - lo) / lo

    def to_dict(self) -> dict:
        return {
            "M_decay": self.M_decay,
            "M_growth": self.M_growth,
            "bracket": list(self.bracket),
            "relative_width": self.relative_width,
            "iterations": self.iterations,
            "K0": self.K0,
            "probes": self.probes,
            "ambiguous": self.ambiguous,
        }


def standard_checks(traj: Trajectory, u0: Field, lam: float) -> dict:
    """ODE super-solution envelope and energy dissipation, for any run."""
    n0 = max(math.exp(u0.log_max) if u0.log_max < 709 else math.inf, 1.0)
    out = {"energy_dissipation": analysis.energy_dissipation_check(traj).to_dict()}
    if traj.sign is Sign.FOCUSING:
        out["ode_envelope"] = bounds.ode_envelope_check(traj, n0, lam).to_dict()
    else:
        # the defocusing flow keeps 0 <= u <= max(1, ||u0||)
        out["ode_envelope"] = bounds.ode_envelope_check(traj, n0, 1.0, tol=1e-12).to_dict()
    return out


def _checks_pass(checks: dict) -> bool:
    return all(c["passed"] for c in checks.values())


# ---------------------------------------------------------------------------


def gaussian_validation(
    g: GaussianParams,
    lam: float,
    half_width: float = 10.0,
    dx_list=(0.04, 0.02, 0.01),
    t_end: float = 1.0,
    scheme: str = "rk2",
    record_every: float = 0.1,
    tol: float = 1e-3,
    order_band: tuple = (1.7, 2.3),
) -> ExperimentReport:
    """Solver vs the closed-form Gaussian solution under grid refinement.

    Error is the max over recorded times of ||u_h - u||_inf / ||u||_inf;
    the finest grid carries the accuracy flag.
    """
    rep = ExperimentReport(
        "gaussian_validation",
        {"a0": g.a0, "b0": g.b0, "lambda": lam, "half_width": half_width, "dx_list": list(dx_list),
         "t_end": t_end, "scheme": scheme, "record_every": record_every},
    )
    errors = []
    checks_ok = True
    for dx in dx_list:
        grid = Grid1D.symmetric(half_width, dx)
        u0 = sample(initial_data("gaussian", a0=g.a0, b0=g.b0), grid)
        cfg = SolverConfig(Params(lam), scheme=scheme, record_every=record_every)
        traj = solve(u0, cfg, t_end, keep_snapshots=True)
        worst = 0.0
        for t, f in traj.snapshots:
            exact = model.gaussian_solution(t, grid.x, g, lam).log
            # compare after factoring out the exact peak so large amplitudes stay finite
            peak = float(np.max(exact))
            num = np.exp(f.log_values - peak)
            ex = np.exp(exact - peak)
            worst = max(worst, float(np.max(np.abs(num - ex))))
        errors.append((dx, worst))
        checks = standard_checks(traj, u0, lam)
        checks_ok &= _checks_pass(checks)
        rep.outcomes[f"dx={dx:g}"] = {"max_rel_linf_error": worst, "stop_reason": traj.stop_reason.value,
                                      "steps": traj.steps, "checks": checks}
        rep.runs[f"dx_{dx:g}"] = traj
    order = analysis.convergence_order(errors)
    rep.outcomes["order"] = order
    rep.flags["accuracy_finest"] = errors[-1][1] <= tol
    rep.flags["order_in_band"] = order_band[0] <= order <= order_band[1]
    rep.flags["envelope_and_energy"] = checks_ok
    return rep


# ---------------------------------------------------------------------------


def _sweep_case(args):
    eps, lam, half_width, dx, t_end, record_every = args
    grid = Grid1D.symmetric(half_width, dx)
    u0 = sample(initial_data("scaled_steady", eps=eps, lam=lam), grid)
    cfg = SolverConfig(Params(lam), record_every=record_every)
    traj = solve(u0, cfg, t_end)
    return eps, u0, traj


def dichotomy_sweep(
    eps_list,
    lam: float = 1.0,
    half_width: float | None = None,
    dx: float = 0.02,
    t_end: float = 4.0,
    record_every: float = 0.05,
    psi_tol: float = 5e-3,
    include_steady: bool = False,
    small_eps: float = 0.05,
    jobs: int = 1,
) -> ExperimentReport:
    """Runs from (1 - eps) phi and (1 + eps) phi for each eps.

    Expected: Decay with psi-hat -> ln(1 - eps), Growth with psi-hat ->
    ln(1 + eps). An Undecided answer counts as acceptable only for
    eps < ``small_eps``, where the horizon is too short to separate.
    """
    from .solver import default_half_width

    half_width = default_half_width(lam) if half_width is None else half_width
    signed = []
    for eps in eps_list:
        if not 0 < eps < 1:
            raise ValueError("eps values must lie in (0, 1)")
        signed += [-eps, eps]
    if include_steady:
        signed.append(0.0)
    rep = ExperimentReport(
        "dichotomy_sweep",
        {"eps_list": list(eps_list), "lambda": lam, "half_width": half_width, "dx": dx, "t_end": t_end,
         "record_every": record_every, "psi_tol": psi_tol, "include_steady": include_steady},
    )
    cases = [(e, lam, half_width, dx, t_end, record_every) for e in signed]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_case, cases))
    else:
        results = [_sweep_case(c) for c in cases]
    for eps, u0, traj in results:
        expected = Regime.STEADY if eps == 0 else (Regime.GROWTH if eps > 0 else Regime.DECAY)
        cls = analysis.classify_trajectory(traj, lam)
        target = math.log1p(eps)
        label = f"eps={eps:+g}"
        checks = standard_checks(traj, u0, lam)
        psi_err = abs(cls.psi_infinity - target)
        undecided_ok = cls.regime is Regime.UNDECIDED and abs(eps) < small_eps
        rep.outcomes[label] = {
            "regime": cls.regime.value,
            "expected": expected.value,
            "psi_hat_limit": cls.psi_infinity,
            "psi_predicted": target,
            "psi_error": psi_err,
            "evidence": cls.evidence,
            "checks": checks,
        }
        rep.flags[f"{label}:regime"] = cls.regime is expected or undecided_ok
        if cls.regime is expected:
            rep.flags[f"{label}:psi_limit"] = psi_err <= psi_tol
        elif undecided_ok:
            rep.advisories[f"{label}:undecided"] = "no decision within the horizon (threshold slowdown)"
        rep.flags[f"{label}:envelope_and_energy"] = _checks_pass(checks)
        rep.runs[label] = traj
    return rep


# ---------------------------------------------------------------------------


def _probe(M, u_profile, grid, lam, t_end, record_every, keep=False):
    u0 = sample(lambda x: M * u_profile(x), grid)
    cfg = SolverConfig(Params(lam), record_every=record_every)
    traj = solve(u0, cfg, t_end, keep_snapshots=keep)
    cls = analysis.classify_trajectory(traj, lam, allow_steady=False)
    return u0, traj, cls


def threshold_bisection(
    half_width: float = 3.0,
    ramp: float = 1.0,
    plateau_L: float = 2.0,
    plateau_eps: float = 1.0,
    lam: float = 1.0,
    dx: float = 0.05,
    t_end: float = 5.0,
    record_every: float = 0.05,
    max_probes: int = 12,
    rel_width: float = 0.05,
    blowup_t_max: float = 2.0,
) -> tuple[ThresholdResult, ExperimentReport]:
    """Bracket the decay/growth transition for the family M * bump.

    The starting bracket comes from comparison arguments: M_decay = 1/||u0||_inf (ODE
    comparison) and M_growth = max (K0+1) Theta / u0 over supp Theta, which
    makes M u0 dominate the plateau sub-solution. Bisection then halves the
    bracket until its relative width is at most ``rel_width`` or the probe
    budget is spent. An Undecided probe is rerun once with doubled horizon.
    """
    from .solver import default_half_width

    if not plateau_L < half_width:
        raise ValueError("plateau support must sit inside the bump support")
    X = default_half_width(lam, half_width)
    grid = Grid1D.symmetric(X, dx)
    profile = initial_data("compact_bump", M=1.0, half_width=half_width, ramp=ramp)

    fine = Grid1D.symmetric(plateau_L, plateau_eps / 200.0)
    K0 = bounds.find_K0(plateau_L, plateau_eps, lam, fine)
    spec = bounds.PlateauSpec(plateau_L, plateau_eps, K0)
    theta = bounds.plateau_theta(bounds.PlateauSpec(plateau_L, plateau_eps, 1.0))

    M_decay = 1.0 / float(np.max(profile(grid.x)))
    xs = fine.x
    th = theta(xs)
    prof = profile(xs)
    inside = th > 0
    M_growth = float(np.max((K0 + 1.0) * th[inside] / prof[inside]))

    inputs = {"half_width": half_width, "ramp": ramp, "plateau_L": plateau_L, "plateau_eps": plateau_eps,
              "lambda": lam, "dx": dx, "domain_half_width": X, "t_end": t_end, "record_every": record_every,
              "max_probes": max_probes, "rel_width": rel_width}
    rep = ExperimentReport("threshold_bisection", inputs)
    probes = []
    ambiguous = []
    checks_ok = True

    def run(M, keep=False):
        nonlocal checks_ok
        horizon = t_end
        u0, traj, cls = _probe(M, profile, grid, lam, horizon, record_every, keep)
        probes.append({"M": M, "t_end": horizon, "regime": cls.regime.value, "psi_hat": cls.psi_infinity})
        if cls.regime is Regime.UNDECIDED and len(probes) < max_probes:
            horizon = 2 * t_end
            u0, traj, cls = _probe(M, profile, grid, lam, horizon, record_every, keep)
            probes.append({"M": M, "t_end": horizon, "regime": cls.regime.value, "psi_hat": cls.psi_infinity})
        checks = standard_checks(traj, u0, lam)
        checks_ok &= _checks_pass(checks)
        probes[-1]["checks_passed"] = _checks_pass(checks)
        rep.runs[f"probe_{len(probes):02d}_M_{M:.6g}"] = traj
        return traj, cls.regime

    lo, hi = M_decay, M_growth
    _, r_lo = run(lo)
    traj_hi, r_hi = run(hi, keep=True)
    rep.flags["decay_at_M_decay"] = r_lo is Regime.DECAY
    # outside the probe budget: a point deep inside the certified decay range
    _, _, half = _probe(0.5 * M_decay, profile, grid, lam, t_end, record_every)
    rep.outcomes["half_M_decay_regime"] = half.regime.value
    rep.flags["decay_at_half_M_decay"] = half.regime is Regime.DECAY
    rep.flags["growth_at_M_growth"] = r_hi is Regime.GROWTH

    # certified growth: u >= Theta_K n(t) on R, hence >= the local blow-up level on the plateau
    lower = bounds.plateau_subsolution_log(spec, lam)
    sandwich = bounds.sandwich_check(traj_hi, lower_log=lower, t_max=blowup_t_max, name="plateau_subsolution")
    inner = plateau_L - plateau_eps
    blowup = bounds.sandwich_check(
        traj_hi,
        lower_log=lambda t, x: np.where(np.abs(x) <= inner + 1e-12, bounds.local_blowup_log(spec, lam, t), -np.inf),
        t_max=blowup_t_max,
        name="local_blowup",
    )
    rep.outcomes["plateau_subsolution"] = sandwich.to_dict()
    rep.outcomes["local_blowup"] = blowup.to_dict()
    rep.flags["plateau_subsolution"] = sandwich.passed
    rep.flags["local_blowup"] = blowup.passed

    iterations = 0
    if rep.flags["decay_at_M_decay"] and rep.flags["growth_at_M_growth"]:
        while (hi - lo) / lo > rel_width and len(probes) < max_probes:
            mid = 0.5 * (lo + hi)
            _, r = run(mid)
            iterations += 1
            if r is Regime.DECAY:
                lo = mid
            elif r is Regime.GROWTH:
                hi = mid
            else:
                ambiguous.append(mid)
                break

    result = ThresholdResult(M_decay, M_growth, (lo, hi), iterations, probes, K0, ambiguous)
    rep.outcomes["threshold"] = result.to_dict()
    rep.flags["bracket_width"] = result.relative_width <= rel_width
    rep.flags["probe_budget"] = len(probes) <= max_probes
    rep.flags["envelope_and_energy"] = checks_ok
    return result, rep


# ---------------------------------------------------------------------------


def bounded_domain_rates(
    alpha: float = 0.0,
    beta: float = 8.0,
    half_width: float = 3.0,
    ramp: float = 1.0,
    decay_M: float = 0.1,
    growth_M: float | None = None,
    plateau_L: float = 2.0,
    plateau_eps: float = 1.0,
    dx: float = 0.02,
    t_end: float = 3.0,
    fit_window: tuple = (1.0, 3.0),
    slope_band: tuple = (1.9, 2.1),
    record_every: float = 0.05,
) -> ExperimentReport:
    """Double-exponential L2 rates with Dirichlet data on exactly (alpha, beta).

    lambda is 1 here. The decay datum is ``decay_M`` times a bump of height 1;
    the growth datum defaults to the plateau-certified M_growth. The slope of
    ln|ln ||u||_2| against t is fitted on ``fit_window`` and should be 2.
    """
    lam = 1.0
    center = 0.5 * (alpha + beta)
    if half_width >= 0.5 * (beta - alpha):
        raise ValueError("bump support must lie inside (alpha, beta)")
    grid = Grid1D.from_spacing(alpha, beta, dx)
    profile = initial_data("compact_bump", M=1.0, half_width=half_width, ramp=ramp, center=center)
    if growth_M is None:
        fine = Grid1D.symmetric(plateau_L, plateau_eps / 200.0)
        K0 = bounds.find_K0(plateau_L, plateau_eps, lam, fine)
        growth_M = K0 + 1.0
    rep = ExperimentReport(
        "bounded_domain_rates",
        {"alpha": alpha, "beta": beta, "half_width": half_width, "ramp": ramp, "decay_M": decay_M,
         "growth_M": growth_M, "dx": dx, "t_end": t_end, "fit_window": list(fit_window),
         "slope_band": list(slope_band), "record_every": record_every, "lambda": lam},
    )
    log_omega = math.log(beta - alpha)
    for label, M, sgn in (("decay", decay_M, -1.0), ("growth", growth_M, 1.0)):
        u0 = sample(lambda x, M=M: M * profile(x), grid)
        cfg = SolverConfig(Params(lam), record_every=record_every, amplitude_cap=math.inf,
                           log_floor_stop=-math.inf)
        traj = solve(u0, cfg, t_end)
        t = np.asarray(traj.times)
        l2 = np.asarray(traj.log_l2)
        sel = (t >= fit_window[0] - 1e-9) & (t <= fit_window[1] + 1e-9)
        good = sel & (sgn * l2 > 0)
        slope, resid = (math.nan, math.nan)
        if np.count_nonzero(good) >= 2:
            slope, resid = analysis.linear_slope(t[good], np.log(sgn * l2[good]))
        eta_proxy = float(sgn * l2[-1] * math.exp(-2.0 * t[-1]))
        ordering = [
            ll2 <= 0.5 * log_omega + linf + 1e-12
            for ll2, linf in zip(traj.log_l2, traj.log_linf)
            if linf > -math.inf
        ]
        checks = standard_checks(traj, u0, lam)
        rep.outcomes[label] = {"M": M, "slope": slope, "fit_rms_residual": resid, "eta_estimate": eta_proxy,
                               "log_l2_final": float(l2[-1]), "checks": checks}
        rep.flags[f"{label}:slope"] = bool(slope_band[0] <= slope <= slope_band[1])
        rep.flags[f"{label}:direction"] = bool(np.all(sgn * l2[sel] > 0))
        rep.flags[f"{label}:norm_ordering"] = all(ordering)
        rep.flags[f"{label}:envelope_and_energy"] = _checks_pass(checks)
        rep.runs[label] = traj
    return rep


# ---------------------------------------------------------------------------


def kpp_spreading(
    M: float = 1.0,
    half_width: float = 2.0,
    ramp: float = 1.0,
    lam: float = 1.0,
    domain_half_width: float = 60.0,
    dx: float = 0.05,
    t_end: float = 3.5,
    level: float = 0.5,
    record_every: float = 0.1,
    center_target: float = 0.99,
) -> ExperimentReport:
    """Defocusing run from a compact bump with 0 <= u0 <= 1.

    Hard flags: a priori bounds, u(t, 0) -> 1, front(t)/t increasing over
    the second half of the horizon, front kept away from the truncation.
    The monotone-front observation is advisory.
    """
    if not 0 < M <= 1:
        raise ValueError("kpp spreading needs 0 < M <= 1")
    grid = Grid1D.symmetric(domain_half_width, dx)
    u0 = sample(initial_data("compact_bump", M=M, half_width=half_width, ramp=ramp), grid)
    cfg = SolverConfig(Params(lam, Sign.DEFOCUSING), record_every=record_every, front_level=level,
                       log_floor_stop=-math.inf)
    traj = solve(u0, cfg, t_end, snapshot_times=(t_end,))
    rep = ExperimentReport(
        "kpp_spreading",
        {"M": M, "half_width": half_width, "ramp": ramp, "lambda": lam, "domain_half_width": domain_half_width,
         "dx": dx, "t_end": t_end, "level": level, "record_every": record_every},
    )
    upper = max(1.0, M)
    bounded = all(ls <= math.log(upper) + 1e-12 for ls in traj.log_linf)
    final = traj.snapshots[-1][1]
    i0 = int(np.argmin(np.abs(grid.x)))
    u_center = float(final.u[i0])
    t = np.asarray(traj.times)
    fronts = [(ti, f) for ti, f in zip(t, traj.front) if f is not None and ti > 0]
    half = [(ti, f) for ti, f in fronts if ti >= 0.5 * t_end - 1e-9]
    ratios = [f / ti for ti, f in half]
    ratio_increasing = len(ratios) >= 2 and all(b > a for a, b in zip(ratios, ratios[1:]))
    front_vals = [f for _, f in fronts]
    monotone = all(b >= a - 1e-12 for a, b in zip(front_vals, front_vals[1:]))
    max_front = max(front_vals) if front_vals else math.nan
    checks = standard_checks(traj, u0, lam)
    rep.outcomes = {
        "u_center_final": u_center,
        "front_series": [[float(ti), f] for ti, f in zip(t, traj.front)],
        "front_over_t_second_half": ratios,
        "max_front": max_front,
        "min_value": 0.0,
        "checks": checks,
    }
    rep.flags["a_priori_bounds"] = bounded
    rep.flags["center_converges_to_1"] = u_center >= center_target
    rep.flags["front_over_t_increasing"] = ratio_increasing
    rep.flags["front_clear_of_boundary"] = bool(max_front < 0.9 * domain_half_width)
    rep.flags["energy_dissipation"] = checks["energy_dissipation"]["passed"]
    rep.advisories["front_monotone"] = monotone
    rep.runs["defocusing"] = traj
    return rep


# ---------------------------------------------------------------------------


def smalldata_validation(
    m_infinity: float = 1.01,
    lam: float = 1.0,
    tau: float = 1.0,
    domain_half_width: float = 40.0,
    dx: float = 0.05,
    t_end: float = 3.0,
    record_every: float = 0.05,
    rtol: float = 1e-6,
) -> ExperimentReport:
    """Heavy-tail datum m e^{-alpha(sqrt(1+x^2)-1)} tuned to the crossover time tau.

    Norms entering the criterion are the exact whole-line ones; the
    Dirichlet truncation only lowers the solution.
    """
    from .solver import heavy_tail_alpha, heavy_tail_l1

    alpha = heavy_tail_alpha(tau)
    m_one = heavy_tail_l1(m_infinity, alpha)
    report = model.small_data_criterion(m_infinity, m_one, lam)
    upper = model.sup_window_upper(lam)
    grid = Grid1D.symmetric(domain_half_width, dx)
    u0 = sample(initial_data("heavy_tail", m_infinity=m_infinity, alpha=alpha), grid)
    cfg = SolverConfig(Params(lam), record_every=record_every, log_floor_stop=-math.inf)
    traj = solve(u0, cfg, t_end)
    rep = ExperimentReport(
        "smalldata_validation",
        {"m_infinity": m_infinity, "lambda": lam, "tau": tau, "domain_half_width": domain_half_width, "dx": dx,
         "t_end": t_end, "record_every": record_every, "rtol": rtol},
    )
    rep.outcomes["alpha"] = alpha
    rep.outcomes["criterion"] = report.to_dict()
    rep.outcomes["sup_window"] = [1.0, upper]
    rep.flags["sup_in_window"] = 1.0 < m_infinity < upper
    rep.flags["criterion_holds"] = report.criterion_holds
    check = bounds.smalldata_supersolution_check(traj, report, lam, rtol=rtol)
    checks = standard_checks(traj, u0, lam)
    rep.outcomes["supersolution"] = check.to_dict()
    rep.outcomes["checks"] = checks
    rep.flags["supersolution"] = check.passed
    rep.flags["envelope_and_energy"] = _checks_pass(checks)
    rep.runs["heavy_tail"] = traj
    return rep
