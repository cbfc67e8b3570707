"""Sub- and super-solutions, and pointwise checks of trajectories against them.

All comparisons are made on logarithms, so bounds of size e^{1000} or
e^{-1000} are handled as easily as O(1) ones.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import model
from .model import GaussianParams, SmallDataReport
from .solver import Field, Grid1D, Trajectory


@dataclass(frozen=True)
class PlateauSpec:
    L: float
    eps: float
    K: float = 1.0

    def __post_init__(self):
        if not 0 < self.eps < self.L:
            raise ValueError(f"need 0 < eps < L, got eps={self.eps}, L={self.L}")
        if not self.K > 0:
            raise ValueError("K must be positive")

    @property
    def gamma(self) -> float:
        """Third derivative of the unit plateau at -L (from the right)."""
        return 60.0 / self.eps**3


# s(xi) = 10 xi^3 - 15 xi^4 + 6 xi^5 and derivatives
def _s(xi):
    return xi**3 * (10.0 + xi * (-15.0 + 6.0 * xi))


def _s1(xi):
    return 30.0 * xi**2 * (1.0 - xi) ** 2


def _s2(xi):
    return 60.0 * xi * (1.0 - xi) * (1.0 - 2.0 * xi)


def _s3(xi):
    return 60.0 - 360.0 * xi + 360.0 * xi**2


class Plateau:
    """K * Theta with Theta = 1 on [-L+eps, L-eps] and quintic ramps.

    Derivatives are exact piecewise polynomials.
    """

    def __init__(self, spec: PlateauSpec, center: float = 0.0):
        self.spec = spec
        self.center = center

    def _parts(self, x):
        L, eps = self.spec.L, self.spec.eps
        y = np.asarray(x, dtype=float) - self.center
        r = np.abs(y)
        xi = np.clip((L - r) / eps, 0.0, 1.0)
        ramp = (r > L - eps) & (r < L)
        side = np.where(y < 0, 1.0, -1.0)  # d xi / dx * eps
        return xi, ramp, side, r

    def __call__(self, x):
        xi, _, _, _ = self._parts(x)
        return self.spec.K * _s(xi)

    def derivative(self, x, order: int):
        if order == 0:
            return self(x)
        xi, ramp, side, _ = self._parts(x)
        eps = self.spec.eps
        table = {1: _s1, 2: _s2, 3: _s3}
        if order not in table:
            raise ValueError("order must be 0..3")
        d = table[order](xi) * side**order / eps**order
        return self.spec.K * np.where(ramp, d, 0.0)


def plateau_theta(spec: PlateauSpec, center: float = 0.0) -> Plateau:
    return Plateau(spec, center)


def subsolution_residual(spec: PlateauSpec, lam: float, grid: Grid1D) -> np.ndarray:
    """Theta_K'' + 2 lam Theta_K ln Theta_K on the grid (0 ln 0 = 0)."""
    th = plateau_theta(spec)
    x = grid.x
    val = th(x)
    lnv = np.log(np.where(val > 0, val, 1.0))
    return th.derivative(x, 2) + 2.0 * lam * val * lnv


def _points_per_ramp(grid: Grid1D, eps: float) -> float:
    return eps / grid.dx


def find_K0(L: float, eps: float, lam: float, grid: Grid1D, rtol: float = 1e-6, k_max: float = 1e6) -> float:
    """Smallest K (to ``rtol``) making the plateau residual nonnegative on the grid."""
    if _points_per_ramp(grid, eps) < 50:
        raise ValueError("grid must resolve each ramp with at least 50 points")
    if grid.x_min > -L or grid.x_max < L:
        raise ValueError("grid must cover [-L, L]")

    def ok(K):
        return bool(np.all(subsolution_residual(PlateauSpec(L, eps, K), lam, grid) >= 0))

    if not ok(k_max):
        raise ValueError(f"no admissible K below {k_max:g}; eps={eps} is too small for lambda={lam}")
    lo, hi = 1.0, k_max
    if ok(lo):
        return lo
    while (hi - lo) > rtol * hi:
        mid = math.sqrt(lo * hi) if hi / lo > 4 else 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def plateau_subsolution_log(spec: PlateauSpec, lam: float, center: float = 0.0) -> Callable:
    """ln w(t, x) for w = Theta_K(x) n(t), n the ODE solution from (K+1)/K."""
    th = plateau_theta(spec, center)
    log_n0 = math.log((spec.K + 1.0) / spec.K)

    def lower(t, x):
        val = th(x)
        with np.errstate(divide="ignore"):
            return np.log(val) + model.ode_log(log_n0, lam, t)

    return lower


def local_blowup_log(spec: PlateauSpec, lam: float, t: float) -> float:
    """ln of K exp(ln((K+1)/K) e^{2 lam t}), the guaranteed plateau level."""
    return math.log(spec.K) + model.ode_log(math.log((spec.K + 1.0) / spec.K), lam, t)


# ---------------------------------------------------------------------------
# reports


@dataclass
class CheckReport:
    bound_name: str
    passed: bool
    worst_margin: float
    worst_time: float | None = None
    worst_x: float | None = None
    checked_times: int = 0
    first_violation_time: float | None = None

    def to_dict(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "worst_time": self.worst_time,
            "worst_x": self.worst_x,
            "checked_times": self.checked_times,
            "first_violation_time": self.first_violation_time,
        }


class _Tracker:
    """Running minimum of log-margins; negative means violated."""

    def __init__(self, name: str):
        self.name = name
        self.worst = math.inf
        self.t = None
        self.x = None
        self.n = 0
        self.first_bad = None

    def update(self, t: float, margins: np.ndarray, xs):
        self.n += 1
        margins = np.asarray(margins, dtype=float)
        if margins.size == 0:
            return
        i = int(np.argmin(margins))
        m = float(margins[i])
        if m < 0 and self.first_bad is None:
            self.first_bad = t
        if m < self.worst:
            self.worst, self.t = m, t
            self.x = None if xs is None else float(np.atleast_1d(xs)[i])

    def report(self) -> CheckReport:
        return CheckReport(
            self.name, self.first_bad is None, self.worst, self.t, self.x, self.n, self.first_bad
        )


def ode_envelope_check(traj: Trajectory, n0_upper: float, lam: float, tol: float = 1e-6) -> CheckReport:
    """sup_x u(t) <= n(t) (1 + tol), n the ODE solution from n0_upper.

    With n0_upper >= max(||u0||, 1) this is the global upper envelope; with
    n0_upper = 1 - eps < 1 it is the double-exponential decay envelope.
    """
    tr = _Tracker(f"ode_envelope(n0={n0_upper:.17g})")
    log_n0 = math.log(n0_upper)
    slack = math.log1p(tol)
    for t, ls in zip(traj.times, traj.log_linf):
        if ls == -math.inf:
            tr.update(t, [math.inf], None)
            continue
        tr.update(t, [model.ode_log(log_n0, lam, t) + slack - ls], None)
    return tr.report()


class Side(str, enum.Enum):
    UPPER_DECAY = "UpperDecay"
    LOWER_GROWTH = "LowerGrowth"


class PreconditionError(ValueError):
    pass


def gaussian_envelope_check(
    traj: Trajectory,
    u0: Field,
    g: GaussianParams,
    lam: float,
    side: Side,
    radius: float = 0.0,
    t_min: float = 1.0,
) -> CheckReport:
    """Large-time Gaussian comparison envelopes.

    UpperDecay (psi_inf < 0, u0 <= datum): sup u <= 2 e^{1/2} e^{psi_inf e^{2 lam t}}.
    LowerGrowth (psi_inf > 0, u0 >= datum): min_{|x|<=R} u >= 1/2 e^{1/2}
    e^{psi_inf e^{2 lam t}} e^{-lam R^2/2}. Checked for recorded t >= t_min;
    the lower check needs snapshots.
    """
    side = Side(side)
    x = u0.grid.x
    datum = g.b0 * np.exp(-0.5 * g.a0 * x * x)
    datum[0] = datum[-1] = 0.0
    u = u0.u
    if side is Side.UPPER_DECAY:
        bad = np.nonzero(u > datum * (1 + 1e-12))[0]
    else:
        inner = np.abs(x) < x[-1]
        bad = np.nonzero(inner & (u < datum * (1 - 1e-12)))[0]
    if bad.size:
        raise PreconditionError(
            f"initial datum is not on the {side.value} side of the Gaussian at x = {x[bad[:10]].tolist()}"
        )
    psi_inf = model.psi_infinity(g, lam)
    growth_rate = lambda t: psi_inf * math.exp(2.0 * lam * t)  # noqa: E731
    tr = _Tracker(f"gaussian_envelope({side.value})")
    if side is Side.UPPER_DECAY:
        for t, ls in zip(traj.times, traj.log_linf):
            if t < t_min:
                continue
            bound = math.log(2.0) + 0.5 + growth_rate(t)
            tr.update(t, [bound - ls if ls > -math.inf else math.inf], None)
    else:
        for t, f in traj.snapshots:
            if t < t_min:
                continue
            mask = np.abs(f.grid.x) <= radius + 1e-12
            if not np.any(mask):
                mask = np.abs(f.grid.x) == np.min(np.abs(f.grid.x))
            lv = f.log_values[mask]
            i = int(np.argmin(lv))
            bound = -math.log(2.0) + 0.5 + growth_rate(t) - 0.5 * lam * radius**2
            tr.update(t, [lv[i] - bound], f.grid.x[mask][i : i + 1])
    return tr.report()


def sandwich_check(
    traj: Trajectory,
    lower_log: Callable | None = None,
    upper_log: Callable | None = None,
    rtol: float = 1e-6,
    name: str = "sandwich",
    t_max: float = math.inf,
) -> CheckReport:
    """Pointwise lower <= u <= upper on every snapshot, compared in logs.

    Bounds are callables (t, x) -> log-bound arrays; -inf (lower) and +inf
    (upper) entries impose nothing. Relative slack ``rtol`` is granted on
    both sides.
    """
    tr = _Tracker(name)
    slack = math.log1p(rtol)
    for t, f in traj.snapshots:
        if t > t_max:
            continue
        x = f.grid.x
        lu = f.log_values
        margins = np.full(x.shape, math.inf)
        with np.errstate(invalid="ignore"):
            if lower_log is not None:
                lo = np.broadcast_to(np.asarray(lower_log(t, x), dtype=float), x.shape)
                active = lo > -math.inf
                m = np.where(active, lu - lo + slack, math.inf)
                margins = np.minimum(margins, m)
            if upper_log is not None:
                hi = np.broadcast_to(np.asarray(upper_log(t, x), dtype=float), x.shape)
                active = (hi < math.inf) & (lu > -math.inf)
                m = np.where(active, hi + slack - lu, math.inf)
                margins = np.minimum(margins, m)
        tr.update(t, margins, x)
    return tr.report()


def smalldata_supersolution_check(
    traj: Trajectory, report: SmallDataReport, lam: float, rtol: float = 1e-6, t_max: float = math.inf
) -> CheckReport:
    """u(t, x) <= min(m_inf, m_1/sqrt(4 pi t)) exp(psi(t) e^{2 lam t}) at recorded times.

    The bound does not depend on x, so the sup norm decides.
    """
    if not report.criterion_holds:
        raise PreconditionError(f"small-data criterion fails: psi_star={report.psi_star:.6g} >= 0")
    tr = _Tracker("smalldata_supersolution")
    slack = math.log1p(rtol)
    for t, ls in zip(traj.times, traj.log_linf):
        if t > t_max:
            continue
        bound = model.smalldata_log_bound(t, report, lam)
        tr.update(t, [bound + slack - ls if ls > -math.inf else math.inf], None)
    return tr.report()
