"""Command-line interface: simulate experiments, design controllers, run benches.

Exit codes for `design`: 0 feasible and verified, 2 bad arguments,
3 infeasible (or data not rich enough to pose the program), 4 numerical
failure, 5 feasible but failed model-side verification.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from .config import DEFAULT_CONFIG, SolveConfig
from .data_io import load_system, load_trajectory, save_report, save_trajectory
from .design import lqr_dt, robust_stabilize, stabilize_ct, stabilize_dt, stabilize_nonlinear
from .hankel import HankelBlock, NoisyHankelBlock, RankConditionError
from .lmi import FEASIBLE, INFEASIBLE
from .lti import BENCHMARK_NAMES, benchmark, generate_pe_input, pendulum_plant, simulate_lti, simulate_noisy
from .output_feedback import build_chi_data, design_output_feedback

METHODS = ("state-feedback", "state-feedback-ct", "lqr", "robust", "nonlinear", "output-feedback")


def _load_config(config_path: str | None, **overrides) -> SolveConfig:
    cfg = SolveConfig.from_file(config_path) if config_path else DEFAULT_CONFIG
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return cfg.updated(**overrides) if overrides else cfg


def _parse_weight(text: str, dim: int) -> np.ndarray:
    if text == "identity":
        return np.eye(dim)
    try:
        return float(text) * np.eye(dim)
    except ValueError:
        pass
    path = Path(text)
    if path.exists():
        with open(path, "r", encoding="utf-8") as fh:
            return np.asarray(json.load(fh), dtype=float)
    raise click.UsageError(f"cannot interpret weight {text!r}: use 'identity', a scale, or a JSON file")


@click.group()
def main():
    """Data-driven controller design toolbox."""


# experiment lengths used by the worked examples; the generic fallback
# (m+1)n + m is the shortest length that can satisfy the excitation bound
_T_PRESETS = {"batch_reactor": 15, "pendulum": 5, "two_cart_io": 9}


@main.command()
@click.option("--bench", "bench_name", type=click.Choice(BENCHMARK_NAMES), default=None)
@click.option("--system", "system_file", type=click.Path(exists=True), default=None,
              help="JSON file with A, B (and optionally C, D) instead of a named benchmark.")
@click.option("--T", "horizon", type=int, default=None,
              help="Experiment length (defaults to the per-benchmark preset).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--amp", type=float, default=None, help="Input amplitude (default 1.0; 0.1 for the pendulum).")
@click.option("--noise", type=float, default=0.0, show_default=True, help="Measurement noise amplitude.")
@click.option("--out", "out_path", type=click.Path(), default="trajectory.csv", show_default=True)
def simulate(bench_name, system_file, horizon, seed, amp, noise, out_path):
    """Run an experiment and write the trajectory CSV plus metadata JSON."""
    if (bench_name is None) == (system_file is None):
        raise click.UsageError("give exactly one of --bench or --system")
    if horizon is None and bench_name is not None:
        horizon = _T_PRESETS[bench_name]
    try:
        if bench_name == "batch_reactor":
            traj = bench_mod.reactor_experiment(horizon, seed, amp or 1.0, noise)
        elif bench_name == "pendulum":
            traj = bench_mod.pendulum_experiment(horizon, seed, amp or 0.1)
        elif bench_name == "two_cart_io":
            traj = bench_mod.two_cart_experiment(horizon, seed, amp or 1.0)
        else:
            sys_ = load_system(system_file)
            if horizon is None:
                horizon = (sys_.m + 1) * sys_.n + sys_.m
            rngs = np.random.SeedSequence(seed).spawn(3)
            u = generate_pe_input(sys_.m, horizon, sys_.n + 1, amp or 1.0, np.random.default_rng(rngs[0]))
            x0 = np.random.default_rng(rngs[1]).uniform(-(amp or 1.0), amp or 1.0, sys_.n)
            if noise > 0:
                traj = simulate_noisy(sys_, x0, u, noise, np.random.default_rng(rngs[2]))
            else:
                traj = simulate_lti(sys_, x0, u)
            traj = type(traj)(u=traj.u, x=traj.x, y=traj.y, zeta=traj.zeta, w=traj.w, seed=seed)
        save_trajectory(traj, out_path)
    except click.UsageError:
        raise
    except Exception as exc:
        click.echo(f"simulation failed: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {out_path} and {Path(out_path).with_suffix('.json')}")


def _true_system(traj):
    if traj.bench == "batch_reactor":
        return benchmark("batch_reactor")
    if traj.bench == "pendulum":
        return pendulum_plant()
    return None


def _report_exit(report) -> int:
    if report.status == INFEASIBLE:
        return 3
    if report.status != FEASIBLE:
        return 4
    if report.rho_oracle is not None:
        threshold = 0.0 if report.method == "state-feedback-ct" else 1.0
        if not report.rho_oracle < threshold:
            return 5
    return 0


@main.command()
@click.argument("method", type=click.Choice(METHODS))
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), default="report.json", show_default=True)
@click.option("--n", "order", type=int, default=None, help="Model order (output-feedback).")
@click.option("--Qx", "qx_spec", default="identity", show_default=True)
@click.option("--R", "r_spec", default="identity", show_default=True)
@click.option("--maximize-alpha/--feasibility", "maximize_alpha", default=True, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--eps-rel", type=float, default=None)
@click.option("--stability-margin", type=float, default=None)
@click.option("--solver", type=str, default=None)
def design(method, in_path, out_path, order, qx_spec, r_spec, maximize_alpha, config_path,
           eps_rel, stability_margin, solver):
    """Design a controller from a trajectory file and write the report JSON."""
    cfg = _load_config(config_path, eps_rel=eps_rel, stability_margin=stability_margin, solver=solver)
    traj = load_trajectory(in_path)
    true_system = _true_system(traj)
    try:
        if method == "state-feedback":
            h = HankelBlock.from_trajectory(traj, use_zeta=traj.x is None)
            report = stabilize_dt(h, cfg, true_system=true_system)
        elif method == "state-feedback-ct":
            if traj.xdot is None:
                raise click.UsageError("trajectory has no state-derivative channel")
            T = traj.T
            report = stabilize_ct(traj.u.T, traj.x[:T].T, traj.xdot.T, cfg)
        elif method == "lqr":
            h = HankelBlock.from_trajectory(traj, use_zeta=traj.x is None)
            Qx = _parse_weight(qx_spec, h.n)
            R = _parse_weight(r_spec, h.m)
            report = lqr_dt(h, Qx, R, cfg, true_system=true_system)
        elif method == "robust":
            nh = NoisyHankelBlock.from_trajectory(traj)
            report = robust_stabilize(nh, maximize_alpha, cfg, true_system=true_system)
        elif method == "nonlinear":
            if traj.bench != "pendulum":
                raise click.UsageError("nonlinear design needs a pendulum trajectory (known equilibrium)")
            h = HankelBlock.from_trajectory(traj)
            remainders = traj.d.T if traj.d is not None else None
            report = stabilize_nonlinear(pendulum_plant(), h, remainders, cfg)
        else:  # output-feedback
            if order is None:
                raise click.UsageError("--n is required for output-feedback")
            if traj.y is None:
                raise click.UsageError("trajectory has no output channel")
            T = traj.T - order
            cd = build_chi_data(traj.u, traj.y, order, T)
            plant = benchmark("two_cart_io") if traj.bench == "two_cart_io" else None
            _, report = design_output_feedback(cd, cfg, plant=plant)
    except click.UsageError:
        raise
    except RankConditionError as exc:
        click.echo(f"design not posed: {exc}", err=True)
        sys.exit(3)
    report.seed = traj.seed
    save_report(report, out_path)
    code = _report_exit(report)
    click.echo(f"status={report.status} rho_data={report.rho_data} -> {out_path}")
    sys.exit(code)


@main.command(name="bench")
@click.argument("example", type=click.Choice(bench_mod.BENCH_EXAMPLES))
@click.option("--seeds", type=int, default=100, show_default=True)
@click.option("--amp", type=float, default=None, help="Noise amplitude for noisy-reactor.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def bench(example, seeds, amp, jobs, out_dir, config_path):
    """Monte Carlo run of a worked example; writes aggregate JSON and norm CSV."""
    cfg = _load_config(config_path)
    kwargs = {}
    if example == "noisy-reactor" and amp is not None:
        kwargs["noise_amplitude"] = amp
    result = bench_mod.run_bench(example, seeds, cfg, jobs=jobs, **kwargs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    agg_path = out_dir / f"{example}-summary.json"
    with open(agg_path, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    csv_path = out_dir / f"{example}-norms.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "k", "norm_x"])
        writer.writerows(bench_mod.traces_csv_rows(result))
    click.echo(
        f"{example}: {result.success_count}/{seeds} successful"
        f" (rate {result.success_rate:.2f}) -> {agg_path}, {csv_path}"
    )


if __name__ == "__main__":
    main()
