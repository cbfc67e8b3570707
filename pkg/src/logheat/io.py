"""Deterministic CSV and JSON artifacts."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .model import Sign
from .solver import Field, StopReason, Trajectory

TRAJECTORY_COLUMNS = ("t", "l1", "l2", "linf", "energy", "psi_hat")


def fmt(x) -> str:
    """17 significant digits; blank for a missing value."""
    if x is None:
        return ""
    return "%.17g" % float(x)


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = list(TRAJECTORY_COLUMNS) + (["front"] if traj.front is not None else [])
    l1, l2, linf = traj.l1, traj.l2, traj.linf
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for k, t in enumerate(traj.times):
            row = [t, l1[k], l2[k], linf[k], traj.energy[k], traj.psi_hat[k]]
            if traj.front is not None:
                row.append(traj.front[k])
            w.writerow([fmt(v) for v in row])
    return path


def read_trajectory_csv(path, lam: float, sign: Sign = Sign.FOCUSING) -> Trajectory:
    """Inverse of ``write_trajectory_csv`` for the sup-norm based checks.

    Saturated sup norms (0 or inf) are recovered from the psi_hat column.
    Energy is read back with unit log-scale.
    """
    traj = Trajectory(lam, Sign(sign))
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TRAJECTORY_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"trajectory file lacks columns {sorted(missing)}")
        has_front = "front" in reader.fieldnames
        if has_front:
            traj.front = []
        for row in reader:
            t = float(row["t"])
            traj.times.append(t)
            for key, name in (("l1", "log_l1"), ("l2", "log_l2"), ("linf", "log_linf")):
                v = float(row[key])
                if 0 < v < math.inf:
                    getattr(traj, name).append(math.log(v))
                elif key == "linf" and math.isfinite(float(row["psi_hat"])):
                    psi = float(row["psi_hat"])
                    grow = 2.0 * lam * t
                    log_sup = psi * math.exp(grow) if grow < 709.0 else math.copysign(math.inf, psi)
                    getattr(traj, name).append(log_sup)
                else:
                    getattr(traj, name).append(-math.inf if v == 0 else math.inf)
            e = float(row["energy"])
            traj.energy.append(e)
            traj.energy_parts.append((e, 0.0))
            traj.psi_hat.append(float(row["psi_hat"]))
            if has_front:
                traj.front.append(float(row["front"]) if row["front"] else None)
    if not traj.times:
        raise ValueError("trajectory file has no rows")
    traj.stop_reason = StopReason.HORIZON
    return traj


def write_snapshot_csv(f: Field, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with np.errstate(over="ignore"):
        u = f.u
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u"])
        for xi, ui in zip(f.grid.x, u):
            w.writerow([fmt(xi), fmt(ui)])
    return path


def write_snapshots(traj: Trajectory, directory) -> list:
    """One ``snapshot_<k>.csv`` per stored snapshot; returns (t, file name) pairs."""
    index = []
    for k, (t, f) in enumerate(traj.snapshots):
        name = f"snapshot_{k:04d}.csv"
        write_snapshot_csv(f, Path(directory) / name)
        index.append([t, name])
    return index


def jsonable(obj):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "value"):  # enums
        return obj.value
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n")
    return path


def write_report(report, directory, version: str, config: dict | None = None) -> Path:
    """``<directory>/<name>/report.json`` plus one trajectory CSV per run."""
    base = Path(directory) / report.name
    files = {}
    for label, traj in report.runs.items():
        name = f"{label}.csv".replace("=", "_").replace("+", "p").replace(" ", "_")
        write_trajectory_csv(traj, base / name)
        files[label] = name
    payload = {"version": version, "config": config, "report": report.to_dict(), "run_files": files}
    return write_json(payload, base / "report.json")
