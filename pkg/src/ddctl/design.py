"""Controller design from data: stabilization, LQR, noise and nonlinearity.

Every routine poses a data-dependent matrix-inequality program, solves it
through the conic layer, and verifies the result on the data side before
reporting.  Plant models never enter the design path; they appear only in
optional oracle diagnostics on the returned report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import cvxpy as cp
import numpy as np

from .config import DEFAULT_CONFIG, SolveConfig
from .hankel import HankelBlock, NoisyHankelBlock, RankConditionError, check_rank_condition, numerical_rank
from .lmi import FEASIBLE, NUMERICAL_FAILURE, LmiProblem, block, solve
from .lti import LtiSystem, NonlinearPlant
from .oracles import dare, min_gamma, spectral_radius

REPORT_SCHEMA = "ddctl-report-1"


@dataclass
class DesignReport:
    """Outcome of one design call.

    `rho_data` is the data-side closed-loop spectral radius (for the
    continuous-time design, the spectral abscissa); `rho_oracle` is filled
    only when a ground-truth model is supplied for verification.
    """

    method: str
    status: str
    K: np.ndarray | None = None
    rho_data: float | None = None
    stabilizing: bool | None = None
    rho_oracle: float | None = None
    alpha: float | None = None
    alpha_max: float | None = None
    gamma: dict[str, float] = field(default_factory=dict)
    objective: float | None = None
    decision_values: dict[str, np.ndarray] = field(default_factory=dict)
    solver: str = ""
    solver_status: str = ""
    solve_time: float = 0.0
    worst_violation: float | None = None
    seed: int | None = None
    config: dict = field(default_factory=dict)
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "schema": REPORT_SCHEMA,
            "method": self.method,
            "status": self.status,
            "K": arr(self.K),
            "rho_data": self.rho_data,
            "stabilizing": self.stabilizing,
            "rho_oracle": self.rho_oracle,
            "alpha": self.alpha,
            "alpha_max": self.alpha_max,
            "gamma": dict(self.gamma),
            "objective": self.objective,
            "decision_values": {k: arr(v) for k, v in self.decision_values.items()},
            "solver": self.solver,
            "solver_status": self.solver_status,
            "solve_time": self.solve_time,
            "worst_violation": self.worst_violation,
            "seed": self.seed,
            "config": dict(self.config),
            "extras": {k: arr(v) if isinstance(v, np.ndarray) else v for k, v in self.extras.items()},
        }


def alpha_sufficiency_threshold(alpha: float) -> float:
    """Noise-to-signal level below which a solution is certified stabilizing."""
    return alpha**2 / (2.0 * (2.0 + alpha))


def _data_scale(*mats) -> float:
    s = 0.0
    for M in mats:
        M = np.asarray(M, dtype=float)
        if M.size:
            s = max(s, float(np.max(np.abs(M))))
    return s if s > 0 else 1.0


def _finish(report: DesignReport, sol, cfg: SolveConfig) -> DesignReport:
    report.solver = sol.solver
    report.solver_status = sol.solver_status
    report.solve_time = sol.solve_time
    report.worst_violation = sol.worst_violation
    report.config = cfg.to_dict()
    return report


def _oracle_rho(true_system, K) -> float | None:
    if true_system is None or K is None:
        return None
    if isinstance(true_system, NonlinearPlant):
        A, B = true_system.linearization
    elif isinstance(true_system, LtiSystem):
        A, B = true_system.A, true_system.B
    else:
        A, B = true_system
    return spectral_radius(np.asarray(A) + np.asarray(B) @ K)


def _invert_p(P: np.ndarray, label: str = "state block") -> np.ndarray:
    if not np.all(np.isfinite(P)) or np.linalg.cond(P) > 1e12:
        raise np.linalg.LinAlgError(f"{label} is singular to working precision")
    return np.linalg.inv(P)


def stabilize_dt(
    h: HankelBlock,
    cfg: SolveConfig = DEFAULT_CONFIG,
    true_system=None,
) -> DesignReport:
    """State-feedback stabilization of a discrete-time plant from one experiment.

    Solves, over a T x n matrix Q and symmetric P with X0 Q = P,

        [[P, X1 Q], [Q' X1', P]] >= t I,   t >= margin,

    maximizing the semidefinite margin t (the extra cap P <= c I only pins
    the scale of the solution cone).  The gain is K = U0 Q P^-1, and the
    data-side closed loop X1 Q P^-1 must be verified stable for the report
    to stay feasible.
    """
    chk = check_rank_condition(h.U0, h.X0, cfg.rank_rtol)
    if not chk.verdict:
        raise RankConditionError(f"rank {chk.rank} < {chk.required}: data not rich enough")
    c = 1.0 / _data_scale(h.U0, h.X0, h.X1) if cfg.normalize_data else 1.0
    U0, X0, X1 = c * h.U0, c * h.X0, c * h.X1
    n, T = h.n, h.T
    eps = cfg.eps_rel * _data_scale(U0, X0, X1)

    prob = LmiProblem(scale=_data_scale(X0, X1))
    Q = prob.matrix_var("Q", T, n)
    P = prob.matrix_var("P", n, n, symmetric=True)
    t = prob.scalar_var("t")
    prob.require_psd(block([[P, X1 @ Q], [(X1 @ Q).T, P]]) - t * np.eye(2 * n), 0.0, "lyapunov")
    prob.require_eq(X0 @ Q, P, "state_block")
    prob.require_psd(float(n) * np.eye(n) - P, 0.0, "scale_cap")
    prob.require_psd(t - eps, 0.0, "margin_floor")
    prob.maximize(t)

    sol = solve(prob, cfg)
    report = DesignReport(method="state-feedback", status=sol.status)
    if sol.status != FEASIBLE:
        return _finish(report, sol, cfg)
    Pv, Qv = sol.values["P"], sol.values["Q"]
    try:
        Pinv = _invert_p(Pv)
    except np.linalg.LinAlgError:
        report.status = NUMERICAL_FAILURE
        return _finish(report, sol, cfg)
    K = U0 @ Qv @ Pinv
    rho = spectral_radius(X1 @ Qv @ Pinv)
    report.K = K
    report.rho_data = rho
    report.stabilizing = rho < 1.0 - cfg.stability_margin
    if not report.stabilizing:
        report.status = NUMERICAL_FAILURE
    report.decision_values = {"Q": Qv, "P": Pv}
    report.objective = sol.objective
    report.rho_oracle = _oracle_rho(true_system, K)
    return _finish(report, sol, cfg)


def stabilize_ct(
    U0: np.ndarray,
    X0: np.ndarray,
    X1dot: np.ndarray,
    cfg: SolveConfig = DEFAULT_CONFIG,
    true_system=None,
) -> DesignReport:
    """Continuous-time state feedback from sampled states and their derivatives.

    X1dot holds state-derivative samples at the sampling instants.  Solves
    -(X1dot Q + Q' X1dot') >= t I with X0 Q = P >= t I, maximizing t; the
    resulting gain stabilizes the continuous-time plant, and verification
    uses the largest real part of the data-side closed loop.
    """
    U0 = np.atleast_2d(np.asarray(U0, dtype=float))
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    X1dot = np.atleast_2d(np.asarray(X1dot, dtype=float))
    chk = check_rank_condition(U0, X0, cfg.rank_rtol)
    if not chk.verdict:
        raise RankConditionError(f"rank {chk.rank} < {chk.required}: data not rich enough")
    c = 1.0 / _data_scale(U0, X0, X1dot) if cfg.normalize_data else 1.0
    U0, X0, X1dot = c * U0, c * X0, c * X1dot
    n, T = X0.shape[0], X0.shape[1]
    eps = cfg.eps_rel * _data_scale(U0, X0, X1dot)

    prob = LmiProblem(scale=_data_scale(X0, X1dot))
    Q = prob.matrix_var("Q", T, n)
    P = prob.matrix_var("P", n, n, symmetric=True)
    t = prob.scalar_var("t")
    prob.require_psd(-(X1dot @ Q + (X1dot @ Q).T) - t * np.eye(n), 0.0, "derivative_lyapunov")
    prob.require_psd(P - t * np.eye(n), 0.0, "state_block_pd")
    prob.require_eq(X0 @ Q, P, "state_block")
    prob.require_psd(float(n) * np.eye(n) - P, 0.0, "scale_cap")
    prob.require_psd(t - eps, 0.0, "margin_floor")
    prob.maximize(t)

    sol = solve(prob, cfg)
    report = DesignReport(method="state-feedback-ct", status=sol.status)
    if sol.status != FEASIBLE:
        return _finish(report, sol, cfg)
    Pv, Qv = sol.values["P"], sol.values["Q"]
    try:
        Pinv = _invert_p(Pv)
    except np.linalg.LinAlgError:
        report.status = NUMERICAL_FAILURE
        return _finish(report, sol, cfg)
    K = U0 @ Qv @ Pinv
    abscissa = float(np.max(np.real(np.linalg.eigvals(X1dot @ Qv @ Pinv))))
    report.K = K
    report.rho_data = abscissa
    report.stabilizing = abscissa < 0.0
    if not report.stabilizing:
        report.status = NUMERICAL_FAILURE
    report.decision_values = {"Q": Qv, "P": Pv}
    if true_system is not None:
        A, B = (true_system.A, true_system.B) if isinstance(true_system, LtiSystem) else true_system
        report.rho_oracle = float(np.max(np.real(np.linalg.eigvals(np.asarray(A) + np.asarray(B) @ K))))
    return _finish(report, sol, cfg)


def lqr_dt(
    h: HankelBlock,
    Qx: np.ndarray,
    R: np.ndarray,
    cfg: SolveConfig = DEFAULT_CONFIG,
    true_system=None,
) -> DesignReport:
    """Optimal quadratic-cost state feedback directly from data.

    Minimizes trace(Qx W) + trace(X) over Q, symmetric W = X0 Q and X,
    subject to the performance and Lyapunov block inequalities

        [[X, R^1/2 U0 Q], [.', W]] >= 0,
        [[W - I, X1 Q], [.', W]] >= 0.

    Observability of (Qx, A) is the caller's responsibility (not checkable
    from data).  If the returned W is singular to working precision, the
    program is retried once with a widened margin before reporting failure.
    """
    Qx = np.atleast_2d(np.asarray(Qx, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if np.max(np.abs(Qx - Qx.T)) > 1e-12 or np.max(np.abs(R - R.T)) > 1e-12:
        raise ValueError("Qx and R must be symmetric")
    if np.min(np.linalg.eigvalsh(Qx)) < -1e-12:
        raise ValueError("Qx must be positive semidefinite")
    try:
        R_half = np.linalg.cholesky(R).T
    except np.linalg.LinAlgError as exc:
        raise ValueError("R must be positive definite") from exc
    chk = check_rank_condition(h.U0, h.X0, cfg.rank_rtol)
    if not chk.verdict:
        raise RankConditionError(f"rank {chk.rank} < {chk.required}: data not rich enough")
    c = 1.0 / _data_scale(h.U0, h.X0, h.X1) if cfg.normalize_data else 1.0
    U0, X0, X1 = c * h.U0, c * h.X0, c * h.X1
    n, m, T = h.n, h.m, h.T

    def run(margin: float):
        prob = LmiProblem(scale=_data_scale(X0, X1, Qx, R))
        Q = prob.matrix_var("Q", T, n)
        W = prob.matrix_var("W", n, n, symmetric=True)
        X = prob.matrix_var("X", m, m, symmetric=True)
        prob.require_eq(X0 @ Q, W, "state_block")
        prob.require_psd(
            block([[X, R_half @ (U0 @ Q)], [(R_half @ (U0 @ Q)).T, W]]), margin, "performance"
        )
        prob.require_psd(block([[W - np.eye(n), X1 @ Q], [(X1 @ Q).T, W]]), margin, "lyapunov")
        prob.minimize(cp.trace(Qx @ W) + cp.trace(X))
        return solve(prob, cfg, tight=True)

    sol = run(0.0)
    retried = False
    Wv = sol.values.get("W") if sol.status == FEASIBLE else None
    if sol.status == NUMERICAL_FAILURE or (Wv is not None and np.linalg.cond(Wv) > 1e12):
        retried = True
        sol = run(cfg.lqr_retry_scale * cfg.eps_rel * _data_scale(X0, X1))
    report = DesignReport(method="lqr", status=sol.status)
    report.extras["retried"] = retried
    if sol.status != FEASIBLE:
        return _finish(report, sol, cfg)
    Qv, Wv = sol.values["Q"], sol.values["W"]
    try:
        Winv = _invert_p(Wv, "cost block")
    except np.linalg.LinAlgError:
        report.status = NUMERICAL_FAILURE
        return _finish(report, sol, cfg)
    K = U0 @ Qv @ Winv
    rho = spectral_radius(X1 @ Qv @ Winv)
    report.K = K
    report.rho_data = rho
    report.stabilizing = rho < 1.0 - cfg.stability_margin
    if not report.stabilizing:
        report.status = NUMERICAL_FAILURE
    report.objective = sol.objective
    report.decision_values = {"Q": Qv, "W": Wv, "X": sol.values["X"]}
    report.rho_oracle = _oracle_rho(true_system, K)
    if true_system is not None and report.K is not None:
        A, B = (true_system.A, true_system.B) if isinstance(true_system, LtiSystem) else true_system
        ref = dare(A, B, Qx, R)
        report.extras["dare_gap"] = float(np.linalg.norm(K - ref.K, "fro"))
        report.extras["dare_residual"] = ref.residual
    return _finish(report, sol, cfg)


def _robust_program(
    U0: np.ndarray,
    Z0: np.ndarray,
    Z1: np.ndarray,
    cfg: SolveConfig,
    alpha_fixed: float | None,
    maximize_alpha: bool,
):
    """Common noise-robust program; alpha is a variable unless fixed."""
    n, T = Z0.shape[0], Z0.shape[1]
    eps = cfg.eps_rel * _data_scale(U0, Z0, Z1)
    prob = LmiProblem(scale=_data_scale(Z0, Z1))
    Q = prob.matrix_var("Q", T, n)
    P = prob.matrix_var("P", n, n, symmetric=True)
    gram = Z1 @ Z1.T
    if alpha_fixed is None:
        alpha = prob.scalar_var("alpha")
        top_left = P - alpha * gram
        prob.require_psd(alpha - cfg.alpha_min, 0.0, "alpha_floor")
    else:
        alpha = None
        top_left = P - float(alpha_fixed) * gram
    prob.require_psd(
        block([[top_left, Z1 @ Q], [(Z1 @ Q).T, P]]) - eps * np.eye(2 * n), 0.0, "robust_lyapunov"
    )
    prob.require_psd(
        block([[np.eye(T), Q], [Q.T, P]]) - eps * np.eye(T + n), 0.0, "norm_coupling"
    )
    prob.require_eq(Z0 @ Q, P, "state_block")
    if alpha_fixed is None and maximize_alpha:
        prob.maximize(alpha)
    elif alpha_fixed is not None:
        # Minimum-norm selection: trace(Y) >= ||Q||_F^2 via the epigraph block.
        Y = prob.matrix_var("Y", T, T, symmetric=True)
        prob.require_psd(block([[Y, Q], [Q.T, np.eye(n)]]), 0.0, "norm_epigraph")
        prob.minimize(cp.trace(Y))
    return prob


def _robust_solve(U0, Z0, Z1, cfg: SolveConfig, maximize_alpha: bool):
    sol = solve(_robust_program(U0, Z0, Z1, cfg, None, maximize_alpha), cfg)
    if sol.status != FEASIBLE:
        return sol, None, None
    alpha_max = float(np.asarray(sol.values["alpha"]).reshape(()))
    final_alpha = alpha_max
    if maximize_alpha and cfg.refine_fraction:
        alpha_ref = cfg.refine_fraction * alpha_max
        sol_ref = solve(_robust_program(U0, Z0, Z1, cfg, alpha_ref, False), cfg)
        if sol_ref.status == FEASIBLE:
            sol, final_alpha = sol_ref, alpha_ref
    return sol, final_alpha, alpha_max


def robust_stabilize(
    nh: NoisyHankelBlock,
    maximize_alpha: bool = True,
    cfg: SolveConfig = DEFAULT_CONFIG,
    true_system: LtiSystem | None = None,
) -> DesignReport:
    """Stabilization from noise-corrupted state measurements.

    Solves, over Q, symmetric P = Z0 Q and a scalar alpha > 0,

        [[P - alpha Z1 Z1', Z1 Q], [.', P]] >= eps I,
        [[I_T, Q], [.', P]] >= eps I,

    and returns K = U0 Q P^-1.  With `maximize_alpha` the program first
    maximizes alpha (larger alpha widens the noise level the solution
    provably tolerates), then re-selects the minimum-norm Q at a backed-off
    alpha, which damps the gain's noise amplification.  Data matrices are
    rescaled to unit magnitude first; the rescaled records are trajectories
    of the same plant, and alpha is reported at the solved scale.

    When the block carries the recorded noise and a ground-truth model is
    supplied, the report includes the measured noise-to-signal level and
    whether it clears the sufficiency threshold for the final alpha.
    """
    stacked_ok = check_rank_condition(nh.U0, nh.Z0, cfg.rank_rtol)
    z1_rank, _ = numerical_rank(nh.Z1, cfg.rank_rtol)
    if not stacked_ok.verdict or z1_rank < nh.n:
        raise RankConditionError("noisy data blocks do not have full row rank")
    c = 1.0 / _data_scale(nh.U0, nh.Z0, nh.Z1) if cfg.normalize_data else 1.0
    U0, Z0, Z1 = c * nh.U0, c * nh.Z0, c * nh.Z1

    sol, alpha, alpha_max = _robust_solve(U0, Z0, Z1, cfg, maximize_alpha)
    report = DesignReport(method="robust", status=sol.status)
    if sol.status != FEASIBLE:
        return _finish(report, sol, cfg)
    Qv, Pv = sol.values["Q"], sol.values["P"]
    try:
        Pinv = _invert_p(Pv)
    except np.linalg.LinAlgError:
        report.status = NUMERICAL_FAILURE
        return _finish(report, sol, cfg)
    K = U0 @ Qv @ Pinv
    rho = spectral_radius(Z1 @ Qv @ Pinv)
    report.K = K
    report.rho_data = rho
    report.stabilizing = rho < 1.0 - cfg.stability_margin
    report.alpha = alpha
    report.alpha_max = alpha_max
    report.decision_values = {"Q": Qv, "P": Pv}
    report.rho_oracle = _oracle_rho(true_system, K)
    if nh.W0 is not None and nh.W1 is not None and true_system is not None:
        A = true_system.A if isinstance(true_system, LtiSystem) else np.asarray(true_system[0])
        R0 = A @ (c * nh.W0) - c * nh.W1
        g = snr_gamma(Z1, R0)
        report.gamma = {
            "gamma_min": g,
            "threshold": alpha_sufficiency_threshold(alpha),
            "certified": bool(g < alpha_sufficiency_threshold(alpha)),
        }
    return _finish(report, sol, cfg)


def snr_gamma(Z1: np.ndarray, R0: np.ndarray) -> float:
    """Smallest gamma with R0 R0' <= gamma Z1 Z1' (signal-to-noise measure)."""
    Z1 = np.atleast_2d(np.asarray(Z1, dtype=float))
    R0 = np.atleast_2d(np.asarray(R0, dtype=float))
    if Z1.shape[0] != R0.shape[0]:
        raise ValueError("Z1 and R0 must have the same number of rows")
    return min_gamma(R0 @ R0.T, Z1 @ Z1.T)


@dataclass(frozen=True)
class NoiseBoundGammas:
    """Noise-magnitude dominations checkable without knowing the plant."""

    gamma1: float
    gamma2: float

    @property
    def gamma1_ok(self) -> bool:
        return self.gamma1 < 0.5

    @property
    def combined(self) -> float:
        """Implied signal-to-noise bound (6 g1 + 3 g2) / (1 - 2 g1)."""
        if not self.gamma1_ok:
            return float("inf")
        return (6.0 * self.gamma1 + 3.0 * self.gamma2) / (1.0 - 2.0 * self.gamma1)

    def bound_ok(self, alpha: float) -> bool:
        return self.combined < alpha_sufficiency_threshold(alpha)


def noise_bound_gammas(U0, Z0, W0, W1, Z1) -> NoiseBoundGammas:
    """Minimal gamma1, gamma2 for the two noise-vs-data dominations.

    gamma1 bounds the padded noise block against the stacked input/measured
    data; gamma2 bounds the shifted noise against the shifted data.  A
    gamma1 at or above 0.5 means the domination assumption fails (reflected
    by an infinite combined bound).
    """
    U0 = np.atleast_2d(np.asarray(U0, dtype=float))
    Z0 = np.atleast_2d(np.asarray(Z0, dtype=float))
    W0 = np.atleast_2d(np.asarray(W0, dtype=float))
    W1 = np.atleast_2d(np.asarray(W1, dtype=float))
    Z1 = np.atleast_2d(np.asarray(Z1, dtype=float))
    padded = np.vstack([np.zeros((U0.shape[0], W0.shape[1])), W0])
    stacked = np.vstack([U0, Z0])
    g1 = min_gamma(padded @ padded.T, stacked @ stacked.T)
    g2 = min_gamma(W1 @ W1.T, Z1 @ Z1.T)
    return NoiseBoundGammas(gamma1=g1, gamma2=g2)


def gershgorin_noise_bound(w_bar: float, n: int, T: int, sigma_A: float) -> float:
    """A-priori scalar multiple of identity dominating R0 R0'.

    `w_bar` bounds every product |w_i(k) w_j(k)| (amplitude squared for
    uniform noise); `sigma_A` is the squared largest singular value of the
    transition matrix.  Follows from a Gershgorin row-sum estimate of the
    noise Gram matrices.
    """
    if w_bar < 0 or sigma_A < 0:
        raise ValueError("w_bar and sigma_A must be nonnegative")
    return 2.0 * n * w_bar * T * (1.0 + sigma_A)


def stabilize_nonlinear(
    plant: NonlinearPlant,
    h: HankelBlock,
    remainders: np.ndarray | None = None,
    cfg: SolveConfig = DEFAULT_CONFIG,
) -> DesignReport:
    """Local stabilization of an equilibrium from deviation data.

    `h` holds deviation data (u - u_eq, x - x_eq) collected near the
    equilibrium; the higher-order remainder plays the role of noise, so the
    noise-robust program applies verbatim with the deviation blocks.  The
    returned gain defines the affine law u = u_eq + K (x - x_eq).  When the
    test harness supplies the exact remainder sequence (n x T), the report
    records its size relative to the data and the sufficiency flag.
    """
    stacked_ok = check_rank_condition(h.U0, h.X0, cfg.rank_rtol)
    x1_rank, _ = numerical_rank(h.X1, cfg.rank_rtol)
    if not stacked_ok.verdict or x1_rank < h.n:
        raise RankConditionError("deviation data blocks do not have full row rank")
    c = 1.0 / _data_scale(h.U0, h.X0, h.X1) if cfg.normalize_data else 1.0
    U0, X0, X1 = c * h.U0, c * h.X0, c * h.X1

    sol, alpha, alpha_max = _robust_solve(U0, X0, X1, cfg, True)
    report = DesignReport(method="nonlinear", status=sol.status)
    if sol.status != FEASIBLE:
        return _finish(report, sol, cfg)
    Qv, Pv = sol.values["Q"], sol.values["P"]
    try:
        Pinv = _invert_p(Pv)
    except np.linalg.LinAlgError:
        report.status = NUMERICAL_FAILURE
        return _finish(report, sol, cfg)
    K = U0 @ Qv @ Pinv
    rho = spectral_radius(X1 @ Qv @ Pinv)
    report.K = K
    report.rho_data = rho
    report.stabilizing = rho < 1.0 - cfg.stability_margin
    report.alpha = alpha
    report.alpha_max = alpha_max
    report.decision_values = {"Q": Qv, "P": Pv}
    report.rho_oracle = _oracle_rho(plant, K)
    report.extras["x_eq"] = plant.x_eq
    report.extras["u_eq"] = plant.u_eq
    report.extras["law"] = "u = u_eq + K (x - x_eq)"
    if remainders is not None:
        D0 = np.atleast_2d(np.asarray(remainders, dtype=float))
        if D0.shape[0] != h.n:
            D0 = D0.T
        g = snr_gamma(X1, c * D0)
        report.gamma = {
            "gamma_min": g,
            "threshold": alpha_sufficiency_threshold(alpha),
            "certified": bool(g < alpha_sufficiency_threshold(alpha)),
        }
    return _finish(report, sol, cfg)
