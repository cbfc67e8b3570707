"""Explicit finite-difference method of lines on a truncated line.

State is stored as ``u = exp(log_scale) * values``. The equation is invariant
under ``u -> n(t) u`` whenever ``n`` solves the reaction ODE, so the scalar
``log_scale`` evolves exactly as ``S' = +-2 lam S`` while ``values`` obeys the
same PDE. Rescaling ``values`` by powers of two and absorbing the factor into
``log_scale`` keeps the array inside the float range for any horizon.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import Params, Sign

# values are renormalized to max in [0.5, 1) once they leave [2^-100, 2^100]
_RESCALE_EXP = 100
_LOG_MIN_W = -1e6


class IntegrationError(RuntimeError):
    def __init__(self, t: float, message: str = "non-finite values"):
        super().__init__(f"integration failed at t={t:.17g}: {message}")
        self.t = t


class Scheme(str, enum.Enum):
    EULER = "euler"
    RK2 = "rk2"


class StopReason(str, enum.Enum):
    HORIZON = "HorizonReached"
    AMPLITUDE_CAP = "AmplitudeCap"
    BELOW_FLOOR = "AllBelowFloorTolerance"


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError("n_points must be an integer >= 3")

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, dx: float) -> "Grid1D":
        n = round((x_max - x_min) / dx)
        if abs(n * dx - (x_max - x_min)) > 1e-9 * (x_max - x_min):
            raise ValueError(f"dx={dx} does not divide [{x_min}, {x_max}]")
        return cls(x_min, x_max, n + 1)

    @classmethod
    def symmetric(cls, half_width: float, dx: float) -> "Grid1D":
        return cls.from_spacing(-half_width, half_width, dx)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


def default_half_width(lam: float, support: float = 0.0) -> float:
    """Truncation X = max(8/sqrt(lam), L' + 8/sqrt(lam))."""
    return max(8.0 / math.sqrt(lam), support + 8.0 / math.sqrt(lam))


@dataclass(frozen=True)
class Field:
    grid: Grid1D
    values: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_points,):
            raise ValueError("values must have one entry per grid point")
        if np.any(vals < 0) or np.any(np.isnan(vals)):
            raise ValueError("field values must be nonnegative")
        object.__setattr__(self, "values", vals)

    @property
    def u(self) -> np.ndarray:
        """Linear values; may overflow to inf or underflow to 0."""
        if self.log_scale == 0.0:
            return self.values
        with np.errstate(over="ignore", under="ignore"):
            if abs(self.log_scale) < 700:
                return self.values * math.exp(self.log_scale)
            return np.exp(self.log_values)

    @property
    def log_values(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.values) + self.log_scale

    @property
    def log_max(self) -> float:
        m = float(np.max(self.values))
        return math.log(m) + self.log_scale if m > 0 else -math.inf

    def is_zero(self) -> bool:
        return not np.any(self.values > 0)


@dataclass(frozen=True)
class LogField:
    grid: Grid1D
    w_values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w_values, dtype=float)
        if w.shape != (self.grid.n_points,) or not np.all(np.isfinite(w)):
            raise ValueError("w_values must be finite, one per grid point")
        object.__setattr__(self, "w_values", w)

    def to_field(self) -> Field:
        shift = float(np.max(self.w_values))
        with np.errstate(under="ignore"):
            return Field(self.grid, np.exp(self.w_values - shift), shift)


@dataclass(frozen=True)
class SolverConfig:
    params: Params
    boundary: str = "dirichlet_zero"
    scheme: Scheme = Scheme.RK2
    safety: float = 0.5
    amplitude_cap: float = 1e100
    floor: float = 0.0
    record_every: float = 0.05
    log_floor_stop: float = -1e4
    front_level: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.boundary != "dirichlet_zero":
            raise ValueError("only 'dirichlet_zero' boundaries are supported")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")
        if not self.amplitude_cap > 1:
            raise ValueError("amplitude_cap must exceed 1")
        if self.floor < 0:
            raise ValueError("floor must be nonnegative")
        if not self.record_every > 0:
            raise ValueError("record_every must be positive")

    @property
    def log_cap(self) -> float:
        return math.log(self.amplitude_cap)


@dataclass
class Trajectory:
    """Recorded functionals, aligned with ``times``.

    Norms are stored as logarithms; linear views are derived and saturate.
    """

    lam: float
    sign: Sign
    times: list = field(default_factory=list)
    log_l1: list = field(default_factory=list)
    log_l2: list = field(default_factory=list)
    log_linf: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    energy_parts: list = field(default_factory=list)
    psi_hat: list = field(default_factory=list)
    front: list | None = None
    snapshots: list = field(default_factory=list)
    stop_reason: StopReason = StopReason.HORIZON
    clamp_count: int = 0
    steps: int = 0
    rescales: int = 0

    def _exp(self, key: str) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(np.asarray(getattr(self, key), dtype=float))

    @property
    def l1(self) -> np.ndarray:
        return self._exp("log_l1")

    @property
    def l2(self) -> np.ndarray:
        return self._exp("log_l2")

    @property
    def linf(self) -> np.ndarray:
        return self._exp("log_linf")

    @property
    def t_final(self) -> float:
        return self.times[-1]

    def snapshot_at(self, t: float) -> Field:
        for ts, f in self.snapshots:
            if ts == t:
                return f
        raise KeyError(t)


# ---------------------------------------------------------------------------
# discrete operators on raw arrays


def _laplacian(v: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(v)
    out[1:-1] = v[:-2] - 2.0 * v[1:-1] + v[2:]
    out[0] = v[1] - 2.0 * v[0]
    out[-1] = v[-2] - 2.0 * v[-1]
    out /= dx * dx
    return out


def _reaction(v: np.ndarray, coef: float) -> np.ndarray:
    # coef = +-2 lam; log(1) == 0 gives the continuous extension at 0
    return coef * v * np.log(np.where(v > 0, v, 1.0))


def _rhs(v: np.ndarray, dx: float, coef: float) -> np.ndarray:
    return _laplacian(v, dx) + _reaction(v, coef)


def _clamp(v: np.ndarray, floor: float) -> int:
    bad = v < floor if floor > 0 else v < 0
    n = int(np.count_nonzero(bad))
    if n:
        v[bad] = 0.0
    v[0] = 0.0
    v[-1] = 0.0
    return n


# ---------------------------------------------------------------------------
# public operations


def sample(f: Callable, grid: Grid1D, dirichlet: bool = True) -> Field:
    vals = np.asarray(f(grid.x), dtype=float)
    if vals.ndim == 0:
        vals = np.full(grid.n_points, float(vals))
    else:
        vals = vals.copy()
    if np.any(vals < 0) or np.any(np.isnan(vals)):
        raise ValueError("sampled datum takes negative or NaN values")
    if dirichlet:
        vals[0] = vals[-1] = 0.0
    return Field(grid, vals)


def laplacian(u: Field) -> np.ndarray:
    """Second difference with zero ghost values beyond the endpoints."""
    return _laplacian(u.u.astype(float), u.grid.dx)


def rhs(u: Field, p: Params) -> np.ndarray:
    return _rhs(u.u.astype(float), u.grid.dx, 2.0 * p.sign.sigma * p.lam)


def stable_dt(u: Field, cfg: SolverConfig) -> float:
    """safety * min(dx^2/2, 1/(2 lam (1 + |ln max(u_max, 1)|)))."""
    dx = u.grid.dx
    diffusive = 0.5 * dx * dx
    log_umax = max(u.log_max, 0.0)
    reactive = 1.0 / (2.0 * cfg.params.lam * (1.0 + log_umax))
    return cfg.safety * min(diffusive, reactive)


def _advance(v: np.ndarray, dt: float, dx: float, coef: float, scheme: Scheme, floor: float):
    clamped = 0
    if scheme is Scheme.EULER:
        new = v + dt * _rhs(v, dx, coef)
    else:
        mid = v + (0.5 * dt) * _rhs(v, dx, coef)
        clamped += _clamp(mid, floor)
        new = v + dt * _rhs(mid, dx, coef)
    clamped += _clamp(new, floor)
    return new, clamped


def _check_finite(v: np.ndarray, t: float):
    if not np.all(np.isfinite(v)):
        raise IntegrationError(t)


def step(u: Field, dt: float, cfg: SolverConfig, t: float = 0.0) -> Field:
    """One explicit step of size dt (Euler or midpoint RK2)."""
    p = cfg.params
    coef = 2.0 * p.sign.sigma * p.lam
    floor = cfg.floor * math.exp(-u.log_scale) if cfg.floor > 0 else 0.0
    new, _ = _advance(u.values, dt, u.grid.dx, coef, cfg.scheme, floor)
    _check_finite(new, t + dt)
    s = u.log_scale * math.exp(p.sign.sigma * 2.0 * p.lam * dt) if u.log_scale else 0.0
    return Field(u.grid, new, s)


def _rescale(v: np.ndarray, s: float) -> tuple[np.ndarray, float, bool]:
    m = float(np.max(v))
    if m == 0.0:
        return v, s, False
    _, e = math.frexp(m)
    if -_RESCALE_EXP <= e <= _RESCALE_EXP:
        return v, s, False
    return np.ldexp(v, -e), s + e * math.log(2.0), True


def _record(traj: Trajectory, t: float, v: np.ndarray, s: float, grid: Grid1D, cfg: SolverConfig, keep: bool):
    from . import analysis

    f = Field(grid, v.copy(), s)
    traj.times.append(t)
    traj.log_l1.append(analysis.log_norm_l1(f))
    traj.log_l2.append(analysis.log_norm_l2(f))
    log_sup = f.log_max
    traj.log_linf.append(log_sup)
    mantissa, scale = analysis.energy_parts(f, cfg.params.lam, cfg.params.sign)
    traj.energy_parts.append((mantissa, scale))
    traj.energy.append(analysis.energy(f, cfg.params.lam, cfg.params.sign))
    traj.psi_hat.append(analysis.psi_hat_log(t, log_sup, cfg.params.lam))
    if traj.front is not None:
        traj.front.append(analysis.front_position(f, cfg.front_level))
    if keep:
        traj.snapshots.append((t, f))


def solve(
    u0: Field,
    cfg: SolverConfig,
    t_end: float,
    keep_snapshots: bool = False,
    snapshot_times=(),
) -> Trajectory:
    """Integrate from u0 to t_end with adaptive dt = stable_dt.

    Functionals are recorded at every multiple of ``cfg.record_every`` and at
    the stopping time. Snapshots are kept at every record if ``keep_snapshots``
    and otherwise at the recorded times nearest to ``snapshot_times``.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    grid = u0.grid
    p = cfg.params
    coef = 2.0 * p.sign.sigma * p.lam
    growth = p.sign.sigma * 2.0 * p.lam
    dx = grid.dx
    traj = Trajectory(lam=p.lam, sign=p.sign, front=[] if cfg.front_level is not None else None)

    v = u0.values.copy()
    s = u0.log_scale
    v[0] = v[-1] = 0.0
    v, s, _ = _rescale(v, s)

    n_records = int(math.floor(t_end / cfg.record_every + 1e-9))
    record_times = [k * cfg.record_every for k in range(1, n_records + 1)]
    if not record_times or record_times[-1] < t_end * (1 - 1e-12):
        record_times.append(t_end)
    wanted = {min(record_times, key=lambda r: abs(r - ts)) for ts in snapshot_times if ts > 0}

    _record(traj, 0.0, v, s, grid, cfg, keep_snapshots or 0.0 in snapshot_times)
    t = 0.0
    k = 0
    log_cap = cfg.log_cap

    if not np.any(v > 0):
        for r in record_times:
            _record(traj, r, v, s, grid, cfg, keep_snapshots or r in wanted)
        return traj

    while k < len(record_times):
        target = record_times[k]
        f = Field(grid, v, s)
        dt = stable_dt(f, cfg)
        last = t + dt >= target * (1 - 1e-14)
        if last:
            dt = target - t
        floor = cfg.floor * math.exp(-s) if cfg.floor > 0 and s > -700 else 0.0
        v, clamped = _advance(v, dt, dx, coef, cfg.scheme, floor)
        traj.clamp_count += clamped
        traj.steps += 1
        t_new = target if last else t + dt
        _check_finite(v, t_new)
        if s:
            s *= math.exp(growth * dt)
        v, s, did = _rescale(v, s)
        traj.rescales += did
        t = t_new

        m = float(np.max(v))
        log_sup = math.log(m) + s if m > 0 else -math.inf
        if last:
            _record(traj, t, v, s, grid, cfg, keep_snapshots or target in wanted)
            k += 1
        if log_sup > log_cap:
            if not last:
                _record(traj, t, v, s, grid, cfg, True)
            elif not (keep_snapshots or target in wanted):
                traj.snapshots.append((t, Field(grid, v.copy(), s)))
            traj.stop_reason = StopReason.AMPLITUDE_CAP
            return traj
        if log_sup < cfg.log_floor_stop or m == 0.0:
            if not last:
                _record(traj, t, v, s, grid, cfg, True)
            traj.stop_reason = StopReason.BELOW_FLOOR if m > 0 else StopReason.HORIZON
            if m == 0.0:
                # zero is absorbing: fill the remaining records
                for r in record_times[k:]:
                    _record(traj, r, v, s, grid, cfg, keep_snapshots or r in wanted)
            return traj
    traj.stop_reason = StopReason.HORIZON
    return traj


# ---------------------------------------------------------------------------
# log-domain variant for strictly positive data


def _log_rhs(w: np.ndarray, dx: float, coef: float) -> np.ndarray:
    out = np.zeros_like(w)
    wx = (w[2:] - w[:-2]) / (2.0 * dx)
    out[1:-1] = (w[:-2] - 2.0 * w[1:-1] + w[2:]) / (dx * dx) + wx * wx + coef * w[1:-1]
    return out


def _extrapolate(w: np.ndarray):
    # exact for quadratics, hence for the Gaussian class
    w[0] = 3.0 * w[1] - 3.0 * w[2] + w[3]
    w[-1] = 3.0 * w[-2] - 3.0 * w[-3] + w[-4]


def stable_dt_log(w: LogField, cfg: SolverConfig) -> float:
    dx = w.grid.dx
    slope = float(np.max(np.abs(np.diff(w.w_values)))) / dx
    limits = [0.5 * dx * dx, 1.0 / (2.0 * cfg.params.lam)]
    if slope > 0:
        limits.append(dx / (2.0 * slope))
    return cfg.safety * min(limits)


def solve_log_domain(w0: LogField, cfg: SolverConfig, t_end: float) -> Trajectory:
    """Evolve w = ln u by w_t = w_xx + w_x^2 +- 2 lam w.

    Boundary nodes are filled by quadratic extrapolation, which suits data
    whose logarithm is (close to) a parabola at the truncation points.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    grid = w0.grid
    p = cfg.params
    coef = 2.0 * p.sign.sigma * p.lam
    dx = grid.dx
    traj = Trajectory(lam=p.lam, sign=p.sign, front=[] if cfg.front_level is not None else None)
    w = w0.w_values.copy()

    n_records = int(math.floor(t_end / cfg.record_every + 1e-9))
    record_times = [k * cfg.record_every for k in range(1, n_records + 1)]
    if not record_times or record_times[-1] < t_end * (1 - 1e-12):
        record_times.append(t_end)

    def rec(t):
        f = LogField(grid, w).to_field()
        _record(traj, t, f.values, f.log_scale, grid, cfg, False)

    rec(0.0)
    t = 0.0
    for target in record_times:
        while t < target:
            dt = stable_dt_log(LogField(grid, w), cfg)
            last = t + dt >= target * (1 - 1e-14)
            if last:
                dt = target - t
            if cfg.scheme is Scheme.EULER:
                w = w + dt * _log_rhs(w, dx, coef)
            else:
                mid = w + 0.5 * dt * _log_rhs(w, dx, coef)
                _extrapolate(mid)
                w = w + dt * _log_rhs(mid, dx, coef)
            _extrapolate(w)
            traj.steps += 1
            t = target if last else t + dt
            if not np.all(np.isfinite(w)):
                raise IntegrationError(t)
            if np.min(w) < _LOG_MIN_W:
                raise IntegrationError(
                    t, "log-domain values fell below -1e6; use the linear solver (solve) for this datum"
                )
            if float(np.max(w)) > cfg.log_cap:
                rec(t)
                traj.stop_reason = StopReason.AMPLITUDE_CAP
                return traj
        rec(t)
    return traj


# ---------------------------------------------------------------------------
# initial data


def smoothstep5(xi):
    """Quintic smoothstep 10 xi^3 - 15 xi^4 + 6 xi^5 clipped to [0, 1]."""
    xi = np.clip(xi, 0.0, 1.0)
    return xi * xi * xi * (10.0 + xi * (-15.0 + 6.0 * xi))


def bump_profile(x, half_width: float, ramp: float, center: float = 0.0):
    """1 on |x - c| <= L - ramp, quintic ramps to 0 at |x - c| = L."""
    if not 0 < ramp <= half_width:
        raise ValueError("ramp must lie in (0, half_width]")
    r = np.abs(np.asarray(x, dtype=float) - center)
    return smoothstep5((half_width - r) / ramp)


def heavy_tail_alpha(tau: float = 1.0) -> float:
    """Decay rate alpha giving crossover time tau for m e^{-alpha(sqrt(1+x^2)-1)}.

    The L1 norm is 2 m e^alpha K_1(alpha), so tau = (e^alpha K_1(alpha))^2 / pi.
    """
    from scipy import optimize, special

    target = math.sqrt(math.pi * tau)
    return optimize.brentq(lambda a: special.k1e(a) - target, 1e-6, 1e3, xtol=1e-15, rtol=1e-15)


def heavy_tail_l1(m_infinity: float, alpha: float) -> float:
    from scipy import special

    return float(2.0 * m_infinity * special.k1e(alpha))


def initial_data(kind: str, **params) -> Callable:
    """Closed-form initial profiles.

    kinds: ``gaussian`` (a0, b0), ``scaled_steady`` (eps, lam: (1+eps) phi),
    ``heavy_tail`` (m_infinity, alpha), ``compact_bump`` (M, half_width, ramp,
    center) and ``plateau`` (L, eps, K).
    """
    kind = kind.lower()
    if kind == "gaussian":
        a0, b0 = params["a0"], params["b0"]
        if not (a0 > 0 and b0 > 0):
            raise ValueError("gaussian datum needs a0 > 0 and b0 > 0")
        return lambda x: b0 * np.exp(-0.5 * a0 * np.square(x))
    if kind == "scaled_steady":
        eps, lam = params.get("eps", 0.0), params["lam"]
        if not (eps > -1 and lam > 0):
            raise ValueError("scaled_steady needs eps > -1 and lam > 0")
        if eps == 0:
            return lambda x: np.exp(0.5 - 0.5 * lam * np.square(x))
        return lambda x: (1.0 + eps) * np.exp(0.5 - 0.5 * lam * np.square(x))
    if kind == "heavy_tail":
        m, alpha = params["m_infinity"], params["alpha"]
        if not (m > 0 and alpha > 0):
            raise ValueError("heavy_tail needs m_infinity > 0 and alpha > 0")
        return lambda x: m * np.exp(-alpha * (np.sqrt(1.0 + np.square(x)) - 1.0))
    if kind == "compact_bump":
        M = params.get("M", 1.0)
        L, ramp = params.get("half_width", 3.0), params.get("ramp", 1.0)
        c = params.get("center", 0.0)
        if not (M >= 0 and L > 0 and 0 < ramp <= L):
            raise ValueError("compact_bump needs M >= 0, half_width > 0, 0 < ramp <= half_width")
        return lambda x: M * bump_profile(x, L, ramp, c)
    if kind == "plateau":
        L, eps, K = params["L"], params["eps"], params.get("K", 1.0)
        if not (0 < eps < L and K > 0):
            raise ValueError("plateau needs 0 < eps < L and K > 0")
        return lambda x: K * bump_profile(x, L, eps, params.get("center", 0.0))
    raise ValueError(f"unknown initial data kind {kind!r}")
