"""Closed-form objects for the heat equation with logarithmic reaction.

    u_t = u_xx + lam * u * ln(u^2)        (focusing)
    u_t = u_xx - 2 * lam * u * ln(u)      (defocusing)

Everything amplitude-like is carried in log form. The linear value is a
derived view which saturates (to inf or 0) with an explicit flag, since
double-exponential dynamics leave the float range after a few time units.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
from scipy import integrate

_LOG_MAX = math.log(np.finfo(float).max)
_LOG_TINY = math.log(np.finfo(float).smallest_subnormal)


class Sign(str, enum.Enum):
    FOCUSING = "focusing"
    DEFOCUSING = "defocusing"

    @property
    def sigma(self) -> int:
        return 1 if self is Sign.FOCUSING else -1


@dataclass(frozen=True)
class Params:
    lam: float
    sign: Sign = Sign.FOCUSING

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive and finite, got {self.lam!r}")
        object.__setattr__(self, "sign", Sign(self.sign))


@dataclass(frozen=True)
class GaussianParams:
    """Datum b0 * exp(-a0 x^2 / 2)."""

    a0: float
    b0: float

    def __post_init__(self):
        if not (self.a0 > 0 and self.b0 > 0):
            raise ValueError(f"a0 and b0 must be positive, got a0={self.a0!r}, b0={self.b0!r}")


class LogValue(NamedTuple):
    """A quantity together with its logarithm.

    ``saturated`` is True when the linear view over- or underflowed; the log
    stays exact in that case.
    """

    value: Any
    log: Any
    saturated: bool


def _from_log(log) -> LogValue:
    log_arr = np.asarray(log, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        value = np.exp(log_arr)
    finite = np.isfinite(log_arr)
    saturated = bool(np.any(finite & ((log_arr > _LOG_MAX) | (log_arr < _LOG_TINY))))
    if np.ndim(log) == 0:
        return LogValue(float(value), float(log_arr), saturated)
    return LogValue(value, log_arr, saturated)


@dataclass(frozen=True)
class GaussianEvaluation:
    t: float
    a: float
    psi: float
    log_amplitude: float

    @property
    def amplitude(self) -> LogValue:
        return _from_log(self.log_amplitude)


class Regime(str, enum.Enum):
    DECAY = "Decay"
    STEADY = "Steady"
    GROWTH = "Growth"
    UNDECIDED = "Undecided"


@dataclass
class RegimeReport:
    regime: Regime
    psi_infinity: float | None = None
    tol: float | None = None
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "psi_infinity": self.psi_infinity,
            "tol": self.tol,
            "evidence": self.evidence,
        }


@dataclass(frozen=True)
class SmallDataReport:
    m_infinity: float
    m_one: float
    tau: float
    psi_star: float
    criterion_holds: bool

    def to_dict(self) -> dict:
        return {
            "m_infinity": self.m_infinity,
            "m_one": self.m_one,
            "tau": self.tau,
            "psi_star": self.psi_star,
            "criterion_holds": self.criterion_holds,
        }


# ---------------------------------------------------------------------------
# pointwise nonlinearity and the underlying ODE


def nonlinearity(u, p: Params):
    """Reaction term, extended by continuity with f(0) = 0."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("nonlinearity is only defined for u >= 0")
    safe = np.where(arr > 0, arr, 1.0)
    out = 2.0 * p.sign.sigma * p.lam * arr * np.log(safe)
    return float(out) if np.ndim(u) == 0 else out


def ode_log(log_n0: float, lam: float, t: float, sign: Sign = Sign.FOCUSING) -> float:
    """ln n(t) for n' = +-2 lam n ln n, given ln n(0)."""
    if log_n0 == 0.0:
        return 0.0
    rate = 2.0 * Sign(sign).sigma * lam * t
    if rate > _LOG_MAX:
        return math.copysign(math.inf, log_n0)
    return log_n0 * math.exp(rate)


def ode_solution(n0: float, lam: float, t: float, sign: Sign = Sign.FOCUSING) -> LogValue:
    """Exact solution exp(ln(n0) e^{2 lam t}) of the reaction ODE."""
    if not n0 > 0:
        raise ValueError(f"n0 must be positive, got {n0!r}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    return _from_log(ode_log(math.log(n0), lam, t, sign))


def steady_state(x, lam: float):
    """The Gaussian equilibrium e^{1/2} e^{-lam x^2 / 2}."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return np.exp(0.5 - 0.5 * lam * np.square(x))


# ---------------------------------------------------------------------------
# Gaussian family


def _log_ratio(x: float, y: float) -> float:
    """(ln x - ln y) / (x - y), cancellation-free near x == y."""
    z = (x - y) / y
    if abs(z) < 1e-8:
        # log1p(z)/z series; error O(z^3)
        return (1.0 - z / 2.0 + z * z / 3.0) / y
    return math.log1p(z) / (z * y)


def switch_width(lam: float) -> float:
    """Half-width of the band |a0 - lam| < eps where the a0 == lam branch is used."""
    return 1e-8 * lam


def gaussian_a(t: float, a0: float, lam: float) -> float:
    """Inverse variance a(t) solving the logistic law a' = 2a(lam - a)."""
    if not (a0 > 0 and lam > 0):
        raise ValueError("a0 and lambda must be positive")
    q = math.exp(-2.0 * lam * t)
    return lam * a0 / (a0 + (lam - a0) * q)


def gaussian_psi(t: float, g: GaussianParams, lam: float) -> float:
    """Log-amplitude rate psi(t), with ln b(t) = psi(t) e^{2 lam t}."""
    q = math.exp(-2.0 * lam * t)
    if abs(g.a0 - lam) < switch_width(lam):
        return math.log(g.b0) - 0.5 * (1.0 - q)
    d = g.a0 + (lam - g.a0) * q
    # (ln lam - ln d)/(lam - a0) == (1 - q) * (ln lam - ln d)/(lam - d)
    return math.log(g.b0) - 0.5 * g.a0 * (1.0 - q) * _log_ratio(lam, d)


def psi_infinity(g: GaussianParams, lam: float) -> float:
    """Limit of gaussian_psi; its sign decides decay vs growth."""
    if abs(g.a0 - lam) < switch_width(lam):
        return math.log(g.b0) - 0.5
    return math.log(g.b0) - 0.5 * g.a0 * _log_ratio(lam, g.a0)


def psi_asymptotic(t: float, g: GaussianParams, lam: float) -> float:
    """Two-term large-time expansion psi_inf + e^{-2 lam t} / 2."""
    return psi_infinity(g, lam) + 0.5 * math.exp(-2.0 * lam * t)


def gaussian_state(t: float, g: GaussianParams, lam: float) -> GaussianEvaluation:
    psi = gaussian_psi(t, g, lam)
    if 2.0 * lam * t > _LOG_MAX:
        log_amp = math.copysign(math.inf, psi) if psi != 0 else 0.0
    else:
        log_amp = psi * math.exp(2.0 * lam * t)
    return GaussianEvaluation(t=t, a=gaussian_a(t, g.a0, lam), psi=psi, log_amplitude=log_amp)


def gaussian_solution(t: float, x, g: GaussianParams, lam: float) -> LogValue:
    """b(t) exp(-a(t) x^2 / 2) with its exact logarithm."""
    st = gaussian_state(t, g, lam)
    log_u = st.log_amplitude - 0.5 * st.a * np.square(np.asarray(x, dtype=float))
    if np.ndim(x) == 0:
        log_u = float(log_u)
    return _from_log(log_u)


def b_steady(a0: float, lam: float) -> float:
    """Amplitude b0* putting the Gaussian datum with width a0 on psi_inf == 0."""
    return math.exp(0.5 * a0 * _log_ratio(lam, a0)) if abs(a0 - lam) >= switch_width(lam) else math.exp(0.5)


def classify_gaussian(g: GaussianParams, lam: float, tol: float = 1e-9) -> RegimeReport:
    if not tol > 0:
        raise ValueError("tol must be positive")
    psi_inf = psi_infinity(g, lam)
    if psi_inf < -tol:
        regime = Regime.DECAY
    elif psi_inf > tol:
        regime = Regime.GROWTH
    else:
        regime = Regime.STEADY
    return RegimeReport(
        regime,
        psi_infinity=psi_inf,
        tol=tol,
        evidence={"source": "closed form", "a0": g.a0, "b0": g.b0, "lambda": lam},
    )


class AsymptoticNorms(NamedTuple):
    sup_log: float
    l1_log: float


def asymptotic_norms(t: float, g: GaussianParams, lam: float) -> AsymptoticNorms:
    """Logs of the large-time equivalents of the sup and L1 norms."""
    psi_inf = psi_infinity(g, lam)
    sup_log = 0.5 + (psi_inf * math.exp(2.0 * lam * t) if psi_inf != 0 else 0.0)
    return AsymptoticNorms(sup_log, sup_log + 0.5 * math.log(2.0 * math.pi / lam))


def asymptotic_local_min_log(t: float, g: GaussianParams, lam: float, radius: float) -> float:
    """Log of the predicted equivalent of min_{|x|<=R} u in the growth regime."""
    return asymptotic_norms(t, g, lam).sup_log - 0.5 * lam * radius**2


# ---------------------------------------------------------------------------
# small data


def heat_kernel_bound(t: float, m_infinity: float, m_one: float) -> float:
    """min(m_inf, m_1 / sqrt(4 pi t)): sup-norm bound for the free heat flow."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return m_infinity
    return min(m_infinity, m_one / math.sqrt(4.0 * math.pi * t))


def crossover_time(m_infinity: float, m_one: float) -> float:
    return float(m_one / (math.sqrt(4.0 * math.pi) * m_infinity)) ** 2


QUAD_ABS_TOL = 1e-12


def log_weight_integral(lam: float, lo: float, hi: float = math.inf) -> float:
    """Integral of lam e^{-2 lam s} ln s over [lo, hi].

    Adaptive Gauss-Kronrod on a finite window; beyond the cutoff S the
    remainder is below e^{-2 lam S} (ln S + 1/(2 lam)) / 2 and that bound is
    driven under QUAD_ABS_TOL before integrating.
    """
    if not lo > 0:
        raise ValueError("lower limit must be positive")
    if hi <= lo:
        return 0.0
    upper = hi
    if math.isinf(hi):
        upper = max(lo, 1.0) + 1.0
        while 0.5 * math.exp(-2.0 * lam * upper) * (math.log(upper) + 1.0 / (2.0 * lam)) > QUAD_ABS_TOL:
            upper *= 1.5
    val, _ = integrate.quad(
        lambda s: lam * math.exp(-2.0 * lam * s) * math.log(s),
        lo,
        upper,
        epsabs=QUAD_ABS_TOL,
        epsrel=1e-13,
        limit=200,
        points=[1.0] if lo < 1.0 < upper else None,
    )
    return val


def small_data_criterion(m_infinity: float, m_one: float, lam: float) -> SmallDataReport:
    if not (m_infinity > 0 and m_one > 0):
        raise ValueError("both norms must be positive")
    tau = crossover_time(m_infinity, m_one)
    psi_star = (
        math.log(m_infinity)
        - log_weight_integral(lam, tau)
        + math.exp(-2.0 * lam * tau) * 0.5 * math.log(tau)
    )
    return SmallDataReport(m_infinity, m_one, tau, psi_star, psi_star < 0)


def smalldata_psi_curve(t: float, report: SmallDataReport, lam: float) -> float:
    """Rate psi(t) of the supersolution g(t) = exp(psi(t) e^{2 lam t}).

    Before the crossover time the heat bound is flat (m_inf) and psi(t) is
    ln(m_inf)(1 - e^{-2 lam t}); after it the dispersive branch takes over.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    log_minf = math.log(report.m_infinity)
    tau = report.tau
    if t <= tau:
        return log_minf * (1.0 - math.exp(-2.0 * lam * t))
    e_tau = math.exp(-2.0 * lam * tau)
    return (
        log_minf * (1.0 - e_tau)
        + math.log(report.m_one / math.sqrt(4.0 * math.pi)) * (e_tau - math.exp(-2.0 * lam * t))
        - log_weight_integral(lam, tau, t)
    )


def smalldata_log_bound(t: float, report: SmallDataReport, lam: float) -> float:
    """ln of min(m_inf, m_1/sqrt(4 pi t)) * exp(psi(t) e^{2 lam t})."""
    return math.log(heat_kernel_bound(t, report.m_infinity, report.m_one)) + smalldata_psi_curve(
        t, report, lam
    ) * math.exp(2.0 * lam * t)


def sup_window_upper(lam: float) -> float:
    """Upper end of the window 1 < m_inf < exp(int_1^inf lam e^{-2 lam s} ln s ds)."""
    return math.exp(log_weight_integral(lam, 1.0))
