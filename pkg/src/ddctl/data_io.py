"""Trajectory and report persistence.

Trajectories go to CSV (one row per time step, full 17-significant-digit
decimals so values round-trip exactly) with a sibling JSON metadata file;
reports and plants go to JSON.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .design import DesignReport
from .lti import LtiSystem, Trajectory

_FMT = "%.17g"

_CHANNELS = ("u", "x", "zeta", "y", "xdot", "d", "w")


def _meta_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".json")


def save_trajectory(traj: Trajectory, path: str | Path) -> Path:
    """Write the trajectory CSV and its sibling metadata JSON.

    Columns are k plus channel_i groups for every present channel; rows that
    lack a sample for some channel (the input at the final state time, for
    instance) leave those cells empty.
    """
    path = Path(path)
    channels: dict[str, np.ndarray] = {}
    for name in _CHANNELS:
        val = getattr(traj, name)
        if val is not None:
            channels[name] = val
    rows = max(ch.shape[0] for ch in channels.values())
    header = ["k"]
    for name, ch in channels.items():
        header += [f"{name}_{i + 1}" for i in range(ch.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in range(rows):
            row: list[str] = [str(traj.k0 + r)]
            for ch in channels.values():
                if r < ch.shape[0]:
                    row += [_FMT % v for v in ch[r]]
                else:
                    row += [""] * ch.shape[1]
            writer.writerow(row)
    n = traj.n
    meta = {
        "n": n,
        "m": traj.m,
        "p": traj.y.shape[1] if traj.y is not None else None,
        "dt": traj.dt,
        "seed": traj.seed,
        "k0": traj.k0,
        "T": traj.T,
        "bench": traj.bench,
        "channels": {name: ch.shape[0] for name, ch in channels.items()},
    }
    with open(_meta_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_trajectory(path: str | Path) -> Trajectory:
    """Read a trajectory CSV written by `save_trajectory`."""
    path = Path(path)
    meta: dict = {}
    mp = _meta_path(path)
    if mp.exists():
        with open(mp, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [row for row in reader if row]
    groups: dict[str, list[int]] = {}
    for idx, col in enumerate(header[1:], start=1):
        name = col.rsplit("_", 1)[0]
        groups.setdefault(name, []).append(idx)
    channels: dict[str, np.ndarray] = {}
    for name, cols in groups.items():
        samples = []
        for row in data:
            vals = [row[c] for c in cols]
            if any(v == "" for v in vals):
                break
            samples.append([float(v) for v in vals])
        channels[name] = np.asarray(samples, dtype=float)
    k0 = int(data[0][0]) if data else int(meta.get("k0", 0))
    return Trajectory(
        u=channels["u"],
        x=channels.get("x"),
        y=channels.get("y"),
        zeta=channels.get("zeta"),
        w=channels.get("w"),
        xdot=channels.get("xdot"),
        d=channels.get("d"),
        k0=k0,
        dt=float(meta.get("dt") or 0.0),
        seed=meta.get("seed"),
        bench=meta.get("bench"),
    )


def save_report(report: DesignReport, path: str | Path, timestamp: bool = True) -> Path:
    """Write a design report as JSON; the timestamp field is informational."""
    path = Path(path)
    doc = report.to_dict()
    if timestamp:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_system(path: str | Path) -> LtiSystem:
    """Load a plant from JSON holding A, B and optionally C, D."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    A = np.asarray(data["A"], dtype=float)
    B = np.asarray(data["B"], dtype=float)
    if "C" in data and data["C"] is not None:
        C = np.asarray(data["C"], dtype=float)
        D = np.asarray(data.get("D", np.zeros((C.shape[0], B.shape[1]))), dtype=float)
        return LtiSystem(A, B, C, D)
    return LtiSystem.from_ab(A, B)
