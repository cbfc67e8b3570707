"""Command-line entry point.

Exit codes: 0 success or all flags pass, 1 an experiment flag failed,
2 configuration or argument error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__, analysis, bounds, experiments, io, model
from .config import ConfigError, RunConfig, load_config
from .model import GaussianParams, Sign
from .solver import IntegrationError, heavy_tail_alpha, heavy_tail_l1, sample, solve

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _out_dir(args, cfg: RunConfig) -> Path:
    return Path(args.out if args.out is not None else cfg.output_directory)


def _symmetric_half_width(cfg: RunConfig, command: str) -> float:
    if not math.isclose(cfg.grid.x_min, -cfg.grid.x_max):
        raise ConfigError(f"invalid config at 'domain': {command} needs a domain symmetric about 0")
    return cfg.grid.x_max


def _finish(report, args, cfg: RunConfig) -> int:
    path = io.write_report(report, _out_dir(args, cfg), __version__, cfg.resolved)
    failed = sorted(k for k, v in report.flags.items() if not v)
    status = "pass" if not failed else "FAIL " + ", ".join(failed)
    print(f"{report.name}: {status} ({path})")
    return EXIT_OK if not failed else EXIT_FAIL


def _front_level(cfg: RunConfig):
    if cfg.params.sign is Sign.DEFOCUSING:
        return cfg.experiment.get("front", {}).get("level", 0.5)
    return None


def _simulate(cfg: RunConfig, keep_snapshots: bool = False):
    u0 = sample(cfg.initial_profile(), cfg.grid)
    scfg = cfg.solver_config(front_level=_front_level(cfg))
    traj = solve(u0, scfg, cfg.t_end, keep_snapshots=keep_snapshots, snapshot_times=cfg.snapshot_times)
    return u0, traj


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    _, traj = _simulate(cfg)
    out = _out_dir(args, cfg)
    io.write_trajectory_csv(traj, out / "trajectory.csv")
    snaps = io.write_snapshots(traj, out / "snapshots")
    k = -1
    summary = {
        "version": __version__,
        "config": cfg.resolved,
        "stop_reason": traj.stop_reason,
        "final": {
            "t": traj.times[k],
            "log_l1": traj.log_l1[k],
            "log_l2": traj.log_l2[k],
            "log_linf": traj.log_linf[k],
            "l1": float(traj.l1[k]),
            "l2": float(traj.l2[k]),
            "linf": float(traj.linf[k]),
            "energy": traj.energy[k],
        },
        "rate_fit": analysis.rate_fit(traj),
        "regime": analysis.classify_trajectory(traj),
        "steps": traj.steps,
        "rescales": traj.rescales,
        "clamp_count": traj.clamp_count,
        "snapshots": snaps,
    }
    io.write_json(summary, out / "summary.json")
    print(f"simulate: {traj.stop_reason.value} at t={traj.t_final:.6g} ({out})")
    return EXIT_OK


def cmd_classify(args) -> int:
    for name in ("a0", "b0", "lam"):
        v = getattr(args, name)
        if not (v > 0 and math.isfinite(v)):
            flag = "lambda" if name == "lam" else name
            print(f"error: --{flag} must be a positive finite number", file=sys.stderr)
            return EXIT_CONFIG
    g = GaussianParams(args.a0, args.b0)
    rep = model.classify_gaussian(g, args.lam)
    payload = {"version": __version__, "a0": args.a0, "b0": args.b0, "lambda": args.lam,
               "psi_infinity": rep.psi_infinity, "regime": rep.regime, "tol": rep.tol}
    print(json.dumps(io.jsonable(payload), sort_keys=True))
    return EXIT_OK


def cmd_threshold(args) -> int:
    cfg = load_config(args.config)
    opts = dict(cfg.experiment.get("threshold", {}))
    _, report = experiments.threshold_bisection(
        lam=cfg.lam, dx=cfg.dx, t_end=cfg.t_end, record_every=cfg.record_every, **opts
    )
    return _finish(report, args, cfg)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    opts = dict(cfg.experiment.get("sweep", {"eps_list": [0.1, 0.5]}))
    eps_list = opts.pop("eps_list")
    report = experiments.dichotomy_sweep(
        eps_list, lam=cfg.lam, half_width=_symmetric_half_width(cfg, "sweep"), dx=cfg.dx, t_end=cfg.t_end,
        record_every=cfg.record_every, jobs=args.jobs, **opts,
    )
    return _finish(report, args, cfg)


def cmd_front(args) -> int:
    cfg = load_config(args.config)
    if cfg.params.sign is not Sign.DEFOCUSING:
        raise ConfigError("invalid config at 'equation/sign': front needs the defocusing sign")
    if cfg.initial_kind != "compact_bump":
        raise ConfigError("invalid config at 'initial_data/kind': front needs a compact_bump datum")
    p = cfg.initial_parameters
    report = experiments.kpp_spreading(
        M=p.get("M", 1.0), half_width=p.get("half_width", 3.0), ramp=p.get("ramp", 1.0), lam=cfg.lam,
        domain_half_width=_symmetric_half_width(cfg, "front"), dx=cfg.dx, t_end=cfg.t_end,
        record_every=cfg.record_every, **cfg.experiment.get("front", {}),
    )
    return _finish(report, args, cfg)


def _datum_norms(cfg: RunConfig, u0) -> tuple[float, float]:
    """(sup, L1) of the datum; exact for the heavy tail, quadrature otherwise."""
    p = cfg.initial_parameters
    if cfg.initial_kind == "heavy_tail":
        alpha = p["alpha"] if "alpha" in p else heavy_tail_alpha(p["tau"])
        return p["m_infinity"], heavy_tail_l1(p["m_infinity"], alpha)
    return analysis.norm_linf(u0), analysis.norm_l1(u0)


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    opts = cfg.experiment.get("verify", {})
    genv = opts.get("gaussian_envelope")
    u0 = sample(cfg.initial_profile(), cfg.grid)
    if args.trajectory is not None:
        try:
            traj = io.read_trajectory_csv(args.trajectory, cfg.lam, cfg.params.sign)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot use trajectory file {args.trajectory}: {e}") from e
        source = "file"
    else:
        keep = genv is not None and genv["side"] == bounds.Side.LOWER_GROWTH.value
        _, traj = _simulate(cfg, keep_snapshots=keep)
        source = "simulation"
    report = experiments.ExperimentReport("verify", {"source": source, "trajectory": args.trajectory})
    checks = experiments.standard_checks(traj, u0, cfg.lam)
    report.outcomes["checks"] = checks
    report.flags["ode_envelope"] = checks["ode_envelope"]["passed"]
    if source == "simulation":
        report.flags["energy_dissipation"] = checks["energy_dissipation"]["passed"]
    if genv is not None:
        g = GaussianParams(genv["a0"], genv["b0"])
        try:
            rep = bounds.gaussian_envelope_check(
                traj, u0, g, cfg.lam, genv["side"], genv.get("radius", 0.0), genv.get("t_min", 1.0)
            )
        except bounds.PreconditionError as e:
            raise ConfigError(f"invalid config at 'experiment/verify/gaussian_envelope': {e}") from e
        report.outcomes["gaussian_envelope"] = rep.to_dict()
        if rep.checked_times == 0 or (genv["side"] == "LowerGrowth" and not traj.snapshots):
            report.advisories["gaussian_envelope"] = "not checked: no recorded times or snapshots"
        else:
            report.flags["gaussian_envelope"] = rep.passed
    if opts.get("small_data"):
        m_inf, m_one = _datum_norms(cfg, u0)
        sd = model.small_data_criterion(m_inf, m_one, cfg.lam)
        report.outcomes["small_data_criterion"] = sd.to_dict()
        report.flags["small_data_criterion"] = sd.criterion_holds
        if sd.criterion_holds:
            rep = bounds.smalldata_supersolution_check(traj, sd, cfg.lam, rtol=opts.get("rtol", 1e-6))
            report.outcomes["small_data_supersolution"] = rep.to_dict()
            report.flags["small_data_supersolution"] = rep.passed
    return _finish(report, args, cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logheat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (overrides outputs.directory)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")
        p.set_defaults(func=func)
        return p

    with_config("simulate", cmd_simulate, "integrate one configuration")
    with_config("threshold", cmd_threshold, "bracket the decay/growth transition for M * bump")
    v = with_config("verify", cmd_verify, "check a run against the analytic envelopes")
    v.add_argument("--trajectory", default=None, help="check this trajectory CSV instead of simulating")
    with_config("sweep", cmd_sweep, "dichotomy sweep around the steady state")
    with_config("front", cmd_front, "defocusing spreading and front speed")

    c = sub.add_parser("classify", help="closed-form regime of a Gaussian datum")
    c.add_argument("--a0", type=float, required=True)
    c.add_argument("--b0", type=float, required=True)
    c.add_argument("--lambda", dest="lam", type=float, required=True)
    c.set_defaults(func=cmd_classify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
