"""Functionals, rate extraction and regime detection on discrete profiles."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import Regime, RegimeReport, Sign
from .solver import Field, StopReason, Trajectory


def _trapz(y: np.ndarray, dx: float) -> float:
    return float(dx * (np.sum(y) - 0.5 * (y[0] + y[-1])))


def _normalized(u: Field) -> tuple[np.ndarray, float]:
    """(values / max, log of the true max)."""
    m = float(np.max(u.values))
    if m == 0.0:
        return u.values, -math.inf
    return u.values / m, math.log(m) + u.log_scale


def log_norm_l1(u: Field) -> float:
    w, log_m = _normalized(u)
    if log_m == -math.inf:
        return -math.inf
    return log_m + math.log(_trapz(w, u.grid.dx))


def log_norm_l2(u: Field) -> float:
    w, log_m = _normalized(u)
    if log_m == -math.inf:
        return -math.inf
    return log_m + 0.5 * math.log(_trapz(w * w, u.grid.dx))


def log_norm_linf(u: Field) -> float:
    return u.log_max


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def norm_l1(u: Field) -> float:
    """Trapezoid-rule L1 norm."""
    return _exp(log_norm_l1(u))


def norm_l2(u: Field) -> float:
    return _exp(log_norm_l2(u))


def norm_linf(u: Field) -> float:
    return _exp(log_norm_linf(u))


def energy_parts(u: Field, lam: float, sign: Sign = Sign.FOCUSING) -> tuple[float, float]:
    """Energy as (mantissa, log_scale) with E = mantissa * exp(log_scale).

    Stays exact when E itself is outside the float range.
    """
    w, log_m = _normalized(u)
    if log_m == -math.inf:
        return 0.0, 0.0
    dx = u.grid.dx
    wx = np.gradient(w, dx, edge_order=2)
    lnw = np.log(np.where(w > 0, w, 1.0))
    # u^2 (1 - ln u^2) = m^2 w^2 (1 - 2 ln m - 2 ln w)
    potential = w * w * (1.0 - 2.0 * log_m - 2.0 * lnw)
    mantissa = 0.5 * _trapz(wx * wx, dx) + Sign(sign).sigma * 0.5 * lam * _trapz(potential, dx)
    return mantissa, 2.0 * log_m


def energy(u: Field, lam: float, sign: Sign = Sign.FOCUSING) -> float:
    """Discrete energy 1/2 int u_x^2 + lam/2 int u^2 (1 - ln u^2).

    The gradient uses centered differences inside and second-order one-sided
    differences at the endpoints; both integrals use the trapezoid rule. The
    potential density is extended by 0 at u = 0. For the defocusing sign the
    potential term flips, which keeps the functional a Lyapunov function.
    Returns +-inf once the value leaves the float range.
    """
    mantissa, scale = energy_parts(u, lam, sign)
    if mantissa == 0.0:
        return 0.0
    if scale > 709.0:
        return math.copysign(math.inf, mantissa)
    return mantissa * math.exp(scale)


def _scaled(mantissa: float, scale: float, ref: float) -> float:
    try:
        return mantissa * math.exp(scale - ref)
    except OverflowError:
        return math.copysign(math.inf, mantissa)


def energy_dissipation_check(traj: Trajectory, rtol: float = 1e-6):
    """E(t_{k+1}) <= E(t_k) + rtol (1 + |E(t_k)|) along the recorded times.

    Evaluated on the (mantissa, log_scale) pairs, so overflowing energies are
    compared exactly. The margin is reported relative to 1 + |E(t_k)|.
    """
    from .bounds import _Tracker

    tr = _Tracker("energy_dissipation")
    parts = traj.energy_parts
    for k in range(len(parts) - 1):
        (m0, s0), (m1, s1) = parts[k], parts[k + 1]
        ref = max(s0, s1, 0.0)
        e0 = _scaled(m0, s0, ref)
        e1 = _scaled(m1, s1, ref)
        one = math.exp(-ref)
        allowance = one + abs(e0)
        # allowance underflows when the scale jumps; any positive normalizer keeps the sign
        norm = max(allowance, abs(e1)) or 1.0
        margin = (e0 + rtol * allowance - e1) / norm
        tr.update(traj.times[k + 1], [margin], None)
    return tr.report()


def psi_hat_log(t: float, log_sup: float, lam: float) -> float:
    """e^{-2 lam t} ln ||u||_inf from the log of the sup norm."""
    if log_sup == -math.inf:
        return -math.inf
    return math.exp(-2.0 * lam * t) * log_sup


def psi_hat(t: float, sup_norm: float, lam: float) -> float:
    """Empirical rate e^{-2 lam t} ln ||u||_inf; -inf once the profile vanished."""
    if sup_norm < 0:
        raise ValueError("sup_norm must be nonnegative")
    if sup_norm == 0:
        return -math.inf
    return psi_hat_log(t, math.log(sup_norm), lam)


@dataclass
class RateFit:
    psi_hat_series: list
    psi_limit_estimate: float
    stabilized: bool
    lambda_used: float
    band: float
    window: int

    def to_dict(self) -> dict:
        return {
            "psi_hat_series": [[t, p] for t, p in self.psi_hat_series],
            "psi_limit_estimate": self.psi_limit_estimate,
            "stabilized": self.stabilized,
            "lambda_used": self.lambda_used,
            "band": self.band,
            "window": self.window,
        }


def rate_fit(traj: Trajectory, band: float = 1e-3, window: int = 10, use_l1: bool = False) -> RateFit:
    """psi-hat series with a stabilization test on its last ``window`` samples.

    ``use_l1`` swaps the sup norm for the L1 norm (cross-check variant).
    """
    logs = traj.log_l1 if use_l1 else traj.log_linf
    series = [
        (t, psi_hat_log(t, ls, traj.lam)) for t, ls in zip(traj.times, logs) if t > 0 and math.isfinite(ls)
    ]
    tail = [p for _, p in series[-window:]]
    stabilized = len(tail) >= window and (max(tail) - min(tail)) <= band
    estimate = series[-1][1] if series else math.nan
    return RateFit(series, estimate, stabilized, traj.lam, band, window)


DECAY_LOG_SUP = -20.0


def classify_trajectory(
    traj: Trajectory,
    lam: float | None = None,
    band: float = 1e-3,
    window: int = 10,
    steady_log_band: float = 0.05,
    allow_steady: bool = True,
) -> RegimeReport:
    """Decide Decay / Steady / Growth / Undecided from recorded functionals.

    Growth: amplitude cap hit, or psi-hat stabilized above ``band``.
    Decay: sup norm below e^{-20}, or psi-hat stabilized below ``-band``.
    Steady: psi-hat stabilized and tracking e^{-2 lam t}/2, with ln sup within
    ``steady_log_band`` of 1/2. Only offered when ``allow_steady``; near the
    threshold, non-Gaussian data report Undecided instead.
    """
    lam = traj.lam if lam is None else lam
    fit = rate_fit(traj, band, window)
    last_log_sup = traj.log_linf[-1]
    evidence = {
        "stop_reason": traj.stop_reason.value,
        "t_final": traj.t_final,
        "log_sup_final": last_log_sup,
        "psi_hat_final": fit.psi_limit_estimate,
        "stabilized": fit.stabilized,
        "band": band,
        "window": window,
    }

    def report(regime):
        return RegimeReport(regime, psi_infinity=fit.psi_limit_estimate, tol=band, evidence=evidence)

    if traj.stop_reason is StopReason.AMPLITUDE_CAP:
        evidence["rule"] = "amplitude cap"
        return report(Regime.GROWTH)
    if traj.stop_reason is StopReason.BELOW_FLOOR or last_log_sup < DECAY_LOG_SUP:
        evidence["rule"] = "sup norm below e^-20"
        return report(Regime.DECAY)
    if fit.stabilized:
        if fit.psi_limit_estimate > band:
            evidence["rule"] = "psi-hat stabilized positive"
            return report(Regime.GROWTH)
        if fit.psi_limit_estimate < -band:
            evidence["rule"] = "psi-hat stabilized negative"
            return report(Regime.DECAY)
        if allow_steady:
            recent = list(zip(traj.times, traj.log_linf))[-window:]
            tracking = all(
                abs(psi_hat_log(t, ls, lam) - 0.5 * math.exp(-2.0 * lam * t)) <= band for t, ls in recent
            )
            near_phi = all(abs(ls - 0.5) <= steady_log_band for _, ls in recent)
            if tracking and near_phi:
                evidence["rule"] = "sup norm pinned at e^(1/2)"
                return report(Regime.STEADY)
    evidence["rule"] = "no decision"
    return report(Regime.UNDECIDED)


def front_position(u: Field, level: float) -> float | None:
    """Rightmost point where u crosses ``level`` (linear interpolation)."""
    if not level > 0:
        raise ValueError("level must be positive")
    log_level = math.log(level)
    lv = u.log_values
    above = np.nonzero(lv >= log_level)[0]
    if above.size == 0:
        return None
    i = int(above[-1])
    x = u.grid.x
    if i == u.grid.n_points - 1:
        return float(x[i])
    ui, uj = u.u[i], u.u[i + 1]
    if ui == uj:
        return float(x[i])
    frac = (ui - level) / (ui - uj)
    return float(x[i] + frac * u.grid.dx)


def convergence_order(errors) -> float:
    """Least-squares slope of log(error) against log(dx)."""
    pts = [(dx, e) for dx, e in errors]
    kept = [(dx, e) for dx, e in pts if e > 0]
    if len(kept) < len(pts):
        warnings.warn(f"dropped {len(pts) - len(kept)} zero-error entries from the order fit")
    if len(kept) < 2:
        raise ValueError("need at least two positive errors")
    lx = np.log([dx for dx, _ in kept])
    le = np.log([e for _, e in kept])
    slope, _ = np.polyfit(lx, le, 1)
    return float(slope)


def linear_slope(ts, ys) -> tuple[float, float]:
    """Least-squares slope and RMS residual of ys against ts."""
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    coef = np.polyfit(ts, ys, 1)
    resid = ys - np.polyval(coef, ts)
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))
