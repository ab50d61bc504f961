"""Seeded experiment generation and Monte Carlo benchmark runs.

Each benchmark example draws per-seed experiments, runs the matching design
routine, verifies the result against the ground-truth model, and aggregates
success statistics plus closed-loop norm traces for plotting.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT_CONFIG, SolveConfig
from .design import lqr_dt, robust_stabilize, stabilize_ct, stabilize_dt, stabilize_nonlinear
from .hankel import HankelBlock, NoisyHankelBlock
from .lti import (
    LtiSystem,
    PendulumParams,
    Trajectory,
    benchmark,
    generate_pe_input,
    pendulum_plant,
    simulate_lti,
    simulate_noisy,
    simulate_nonlinear_closed_loop,
    simulate_pendulum,
)
from .output_feedback import IoCoefficients, build_chi_data, closed_loop_matrix, design_output_feedback, simulate_io

BENCH_EXAMPLES = (
    "reactor-stab",
    "reactor-lqr",
    "noisy-reactor",
    "pendulum",
    "two-cart",
    "ct-double-integrator",
)


def _streams(seed: int, count: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


# ---------------------------------------------------------------------------
# experiment generation


def reactor_experiment(
    T: int = 15, seed: int = 0, amplitude: float = 1.0, noise_amplitude: float = 0.0
) -> Trajectory:
    """Open-loop batch-reactor run with excitation checked up front."""
    sys = benchmark("batch_reactor")
    rng_u, rng_x0, rng_w = _streams(seed, 3)
    u = generate_pe_input(sys.m, T, sys.n + 1, amplitude, rng_u)
    x0 = rng_x0.uniform(-amplitude, amplitude, sys.n)
    if noise_amplitude > 0:
        traj = simulate_noisy(sys, x0, u, noise_amplitude, rng_w)
    else:
        traj = simulate_lti(sys, x0, u)
    return Trajectory(
        u=traj.u, x=traj.x, y=traj.y, zeta=traj.zeta, w=traj.w, seed=seed, bench="batch_reactor"
    )


def pendulum_experiment(T: int = 5, seed: int = 0, amplitude: float = 0.1) -> Trajectory:
    """Short pendulum run near the upright equilibrium; remainder recorded."""
    rng_u, rng_x0 = _streams(seed, 2)
    u = rng_u.uniform(-amplitude, amplitude, T)
    x0 = rng_x0.uniform(-amplitude, amplitude, 2)
    traj, _ = simulate_pendulum(PendulumParams(), x0, u)
    return Trajectory(u=traj.u, x=traj.x, d=traj.d, dt=traj.dt, seed=seed, bench="pendulum")


def two_cart_experiment(T: int = 9, seed: int = 0, amplitude: float = 1.0) -> Trajectory:
    """Input/output run of the two-cart model including the n-sample pre-window.

    The experiment starts from rest n steps before time zero, so the
    pre-window samples are genuine plant responses.
    """
    coeffs: IoCoefficients = benchmark("two_cart_io")
    n = coeffs.n
    (rng_u,) = _streams(seed, 1)
    u = rng_u.uniform(-amplitude, amplitude, (n + T, coeffs.m))
    y = simulate_io(coeffs, u)
    return Trajectory(u=u, y=y, k0=-n, seed=seed, bench="two_cart_io")


def double_integrator_ct() -> LtiSystem:
    """Continuous-time double integrator (used by the sampled-derivative bench)."""
    return LtiSystem.from_ab(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]]))


def double_integrator_experiment(T: int = 8, seed: int = 0, dt: float = 0.1, amplitude: float = 1.0) -> Trajectory:
    """Sampled run of the double integrator with exact state derivatives.

    The zero-order-hold response of this plant is polynomial in time, so the
    sampled states and the derivative samples are exact.
    """
    rng_u, rng_x0 = _streams(seed, 2)
    u = rng_u.uniform(-amplitude, amplitude, T)
    x0 = rng_x0.uniform(-amplitude, amplitude, 2)
    x = np.empty((T + 1, 2))
    xdot = np.empty((T, 2))
    x[0] = x0
    for k in range(T):
        xdot[k] = (x[k, 1], u[k])
        x[k + 1] = (x[k, 0] + dt * x[k, 1] + 0.5 * dt * dt * u[k], x[k, 1] + dt * u[k])
    return Trajectory(u=u, x=x, xdot=xdot, dt=dt, seed=seed, bench="double_integrator_ct")


# ---------------------------------------------------------------------------
# per-seed bench runs


@dataclass
class SeedResult:
    seed: int
    success: bool
    feasible: bool
    rho_oracle: float | None = None
    rho_data: float | None = None
    alpha: float | None = None
    gamma: float | None = None
    extra: dict = field(default_factory=dict)
    trace: np.ndarray | None = None


@dataclass
class BenchResult:
    example: str
    seeds: int
    results: list[SeedResult]

    @property
    def success_count(self) -> int:
        return sum(r.success for r in self.results)

    @property
    def success_rate(self) -> float:
        return self.success_count / max(1, len(self.results))

    def median(self, attr: str) -> float | None:
        vals = [getattr(r, attr) for r in self.results if getattr(r, attr) is not None]
        finite = [v for v in vals if np.isfinite(v)]
        return float(np.median(finite)) if finite else None

    def to_dict(self) -> dict:
        return {
            "example": self.example,
            "seeds": self.seeds,
            "success_count": self.success_count,
            "success_rate": self.success_rate,
            "median_alpha": self.median("alpha"),
            "median_gamma": self.median("gamma"),
            "per_seed": [
                {
                    "seed": r.seed,
                    "success": r.success,
                    "feasible": r.feasible,
                    "rho_oracle": r.rho_oracle,
                    "rho_data": r.rho_data,
                    "alpha": r.alpha,
                    "gamma": r.gamma,
                    **r.extra,
                }
                for r in self.results
            ],
        }


def _norm_trace(M: np.ndarray, steps: int = 50) -> np.ndarray:
    x = np.ones(M.shape[0]) / np.sqrt(M.shape[0])
    out = np.empty(steps + 1)
    for k in range(steps + 1):
        out[k] = np.linalg.norm(x)
        x = M @ x
    return out


def _run_reactor_stab(seed: int, cfg: SolveConfig, stab_tol: float = 1e-6) -> SeedResult:
    sys = benchmark("batch_reactor")
    traj = reactor_experiment(seed=seed, amplitude=cfg.input_amplitude)
    h = HankelBlock.from_trajectory(traj)
    try:
        rep = stabilize_dt(h, cfg, true_system=sys)
    except Exception:
        return SeedResult(seed, False, False)
    ok = rep.feasible and rep.rho_oracle is not None and rep.rho_oracle <= 1.0 - stab_tol
    trace = None
    if rep.feasible:
        trace = _norm_trace(sys.A + sys.B @ rep.K)
    return SeedResult(seed, ok, rep.feasible, rep.rho_oracle, rep.rho_data, trace=trace)


def _run_reactor_lqr(seed: int, cfg: SolveConfig) -> SeedResult:
    sys = benchmark("batch_reactor")
    traj = reactor_experiment(seed=seed, amplitude=cfg.input_amplitude)
    h = HankelBlock.from_trajectory(traj)
    try:
        rep = lqr_dt(h, np.eye(sys.n), np.eye(sys.m), cfg, true_system=sys)
    except Exception:
        return SeedResult(seed, False, False)
    gap = rep.extras.get("dare_gap")
    ok = rep.feasible and gap is not None and gap <= 1e-5
    trace = _norm_trace(sys.A + sys.B @ rep.K) if rep.feasible else None
    return SeedResult(seed, ok, rep.feasible, rep.rho_oracle, rep.rho_data, extra={"dare_gap": gap}, trace=trace)


def _run_noisy_reactor(seed: int, cfg: SolveConfig, noise_amplitude: float = 0.01) -> SeedResult:
    sys = benchmark("batch_reactor")
    traj = reactor_experiment(seed=seed, amplitude=cfg.input_amplitude, noise_amplitude=noise_amplitude)
    nh = NoisyHankelBlock.from_trajectory(traj)
    try:
        rep = robust_stabilize(nh, True, cfg, true_system=sys)
    except Exception:
        return SeedResult(seed, False, False)
    ok = rep.feasible and rep.rho_oracle is not None and rep.rho_oracle < 1.0
    trace = _norm_trace(sys.A + sys.B @ rep.K) if rep.feasible else None
    return SeedResult(
        seed,
        ok,
        rep.feasible,
        rep.rho_oracle,
        rep.rho_data,
        alpha=rep.alpha,
        gamma=rep.gamma.get("gamma_min"),
        trace=trace,
    )


def _run_pendulum(seed: int, cfg: SolveConfig) -> SeedResult:
    plant = pendulum_plant()
    traj = pendulum_experiment(seed=seed, amplitude=cfg.pendulum_amplitude)
    h = HankelBlock.from_trajectory(traj)
    try:
        rep = stabilize_nonlinear(plant, h, remainders=traj.d.T, cfg=cfg)
    except Exception:
        return SeedResult(seed, False, False)
    ok = rep.feasible and rep.rho_oracle is not None and rep.rho_oracle < 1.0
    trace = None
    if rep.feasible and ok:
        xs = simulate_nonlinear_closed_loop(plant, rep.K, np.array([0.1, 0.0]), 50)
        trace = np.linalg.norm(xs, axis=1)
    return SeedResult(
        seed,
        ok,
        rep.feasible,
        rep.rho_oracle,
        rep.rho_data,
        alpha=rep.alpha,
        gamma=rep.gamma.get("gamma_min"),
        trace=trace,
    )


def _run_two_cart(seed: int, cfg: SolveConfig) -> SeedResult:
    coeffs: IoCoefficients = benchmark("two_cart_io")
    traj = two_cart_experiment(seed=seed, amplitude=cfg.input_amplitude)
    cd = build_chi_data(traj.u, traj.y, coeffs.n, traj.T - coeffs.n)
    try:
        controller, rep = design_output_feedback(cd, cfg, plant=coeffs)
    except Exception:
        return SeedResult(seed, False, False)
    ok = rep.feasible and rep.rho_oracle is not None and rep.rho_oracle < 1.0
    trace = _norm_trace(closed_loop_matrix(coeffs, controller)) if rep.feasible else None
    return SeedResult(seed, ok, rep.feasible, rep.rho_oracle, rep.rho_data, trace=trace)


def _run_ct_double_integrator(seed: int, cfg: SolveConfig) -> SeedResult:
    sys = double_integrator_ct()
    traj = double_integrator_experiment(seed=seed, amplitude=cfg.input_amplitude)
    T = traj.T
    try:
        rep = stabilize_ct(traj.u.T, traj.x[:T].T, traj.xdot.T, cfg, true_system=sys)
    except Exception:
        return SeedResult(seed, False, False)
    ok = rep.feasible and rep.rho_oracle is not None and rep.rho_oracle < 0.0
    trace = None
    if rep.feasible:
        # fine Euler rollout of the continuous closed loop, sampled each dt
        A_cl = sys.A + sys.B @ rep.K
        x = np.ones(2) / np.sqrt(2)
        sub, h = 100, traj.dt / 100
        trace = np.empty(51)
        for k in range(51):
            trace[k] = np.linalg.norm(x)
            for _ in range(sub):
                x = x + h * (A_cl @ x)
    return SeedResult(seed, ok, rep.feasible, rep.rho_oracle, rep.rho_data, trace=trace)


_RUNNERS: dict[str, Callable] = {
    "reactor-stab": _run_reactor_stab,
    "reactor-lqr": _run_reactor_lqr,
    "noisy-reactor": _run_noisy_reactor,
    "pendulum": _run_pendulum,
    "two-cart": _run_two_cart,
    "ct-double-integrator": _run_ct_double_integrator,
}


def run_bench(
    example: str,
    seeds: int = 100,
    cfg: SolveConfig = DEFAULT_CONFIG,
    jobs: int = 1,
    **kwargs,
) -> BenchResult:
    """Run a benchmark example over seeds 0..seeds-1.

    Seeds are independent; with jobs > 1 they run concurrently and results
    are merged in seed order either way.
    """
    if example not in _RUNNERS:
        raise KeyError(f"unknown bench example {example!r}; choose from {BENCH_EXAMPLES}")
    runner = _RUNNERS[example]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {s: pool.submit(runner, s, cfg, **kwargs) for s in range(seeds)}
            results = [futures[s].result() for s in range(seeds)]
    else:
        results = [runner(s, cfg, **kwargs) for s in range(seeds)]
    return BenchResult(example=example, seeds=seeds, results=results)


def traces_csv_rows(result: BenchResult) -> list[tuple[int, int, float]]:
    """Long-format (seed, k, norm_x) rows of the recorded closed-loop traces."""
    rows = []
    for r in result.results:
        if r.trace is None:
            continue
        for k, v in enumerate(r.trace):
            rows.append((r.seed, k, float(v)))
    return rows
