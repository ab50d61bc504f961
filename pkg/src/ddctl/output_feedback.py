"""Output-feedback design from input/output data via history lifting.

An input/output difference model of order n becomes a (non-minimal)
state-space system on the stacked history vector

    chi(k) = col(y(k-n), ..., y(k-1), u(k-n), ..., u(k-1)),

so the state-feedback machinery applies verbatim with data matrices built
from shifted input/output Hankel blocks.  A gain on chi is nothing but the
coefficient row of a dynamic output controller of the same order, which is
realized in observer form at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG, SolveConfig
from .hankel import RankConditionError, build_hankel, check_rank_condition
from .lmi import FEASIBLE, NUMERICAL_FAILURE, LmiProblem, block, solve
from .oracles import spectral_radius


def _coeff_blocks(coeffs, rows: int, cols: int, n: int) -> np.ndarray:
    """Normalize coefficients to an (n, rows, cols) stack; scalars allowed."""
    arr = np.asarray(coeffs, dtype=float)
    if arr.ndim == 1:
        if rows != 1 or cols != 1:
            raise ValueError("scalar coefficient list given for a matrix-coefficient model")
        return arr.reshape(n, 1, 1)
    if arr.shape != (n, rows, cols):
        raise ValueError(f"expected {n} coefficient blocks of shape {rows}x{cols}, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class IoCoefficients:
    """Input/output difference model of order n.

    The recursion, with a_i scalars (p = m = 1) or A_i p x p and B_i p x m,

        y(k) + a_n y(k-1) + ... + a_1 y(k-n)
            = b_n u(k-1) + ... + b_1 u(k-n),

    indexes coefficients so that a_1, b_1 multiply the oldest samples.
    Requires zero feedthrough.  Coprimeness of the two coefficient
    polynomials is reported as a diagnostic, not enforced; the operative
    richness check lives on the data.
    """

    n: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim == 1:
            if a.shape != (self.n,) or b.shape != (self.n,):
                raise ValueError(f"need {self.n} coefficients on both sides")
        else:
            p = a.shape[1]
            a = _coeff_blocks(a, p, p, self.n)
            m = np.asarray(b).shape[2] if np.asarray(b).ndim == 3 else 1
            b = _coeff_blocks(b, p, m, self.n)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def p(self) -> int:
        return 1 if self.a.ndim == 1 else self.a.shape[1]

    @property
    def m(self) -> int:
        return 1 if self.b.ndim == 1 else self.b.shape[2]

    @property
    def siso(self) -> bool:
        return self.a.ndim == 1

    def coprimeness(self) -> float:
        """Normalized resultant of the two SISO polynomials; near 0 flags trouble."""
        if not self.siso:
            raise ValueError("coprimeness diagnostic is defined for the scalar model")
        # poly coefficients highest degree first
        pa = np.concatenate([[1.0], self.a[::-1]])
        pb = self.b[::-1]
        lead = np.max(np.abs(pb))
        if lead == 0:
            return 0.0
        n, d = self.n, self.n - 1
        # Sylvester matrix of p (degree n) and q (degree n-1)
        S = np.zeros((n + d, n + d))
        for i in range(d):
            S[i, i : i + n + 1] = pa
        for i in range(n):
            S[d + i, i : i + d + 1] = pb
        det = np.linalg.det(S)
        return float(abs(det) / (lead**n * max(1.0, np.max(np.abs(pa))) ** d))

    def to_dict(self) -> dict:
        return {"n": self.n, "a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "IoCoefficients":
        return cls(n=int(data["n"]), a=np.asarray(data["a"]), b=np.asarray(data["b"]))


def simulate_io(coeffs: IoCoefficients, u: np.ndarray, y_init=None, u_init=None) -> np.ndarray:
    """Run the difference recursion for inputs u(0..T-1).

    `y_init`, `u_init` supply the n history samples at times -n..-1 (oldest
    first); both default to zero.  Returns y(0..T-1) with shape (T, p).
    """
    n, p, m = coeffs.n, coeffs.p, coeffs.m
    u = np.asarray(u, dtype=float).reshape(-1, m)
    T = u.shape[0]
    yh = np.zeros((n, p)) if y_init is None else np.asarray(y_init, dtype=float).reshape(n, p)
    uh = np.zeros((n, m)) if u_init is None else np.asarray(u_init, dtype=float).reshape(n, m)
    a = coeffs.a.reshape(n, p, p) if coeffs.siso else coeffs.a
    b = coeffs.b.reshape(n, p, m) if coeffs.siso else coeffs.b
    ys = np.empty((T, p))
    yh, uh = list(yh), list(uh)
    for k in range(T):
        acc = np.zeros(p)
        for i in range(n):
            # a_{n-i}, b_{n-i} multiply the samples i+1 steps in the past
            acc -= a[n - 1 - i] @ yh[-1 - i]
            acc += b[n - 1 - i] @ uh[-1 - i]
        ys[k] = acc
        yh.append(acc)
        uh.append(u[k])
    return ys


def chi_state(u: np.ndarray, y: np.ndarray, k: int, n: int, start: int = 0) -> np.ndarray:
    """History vector col(y(k-n..k-1), u(k-n..k-1)).

    `u` and `y` are time-major arrays whose first row is the sample at time
    `start`; the window [k-n, k-1] must be covered by both.
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if u.ndim == 1:
        u = u.reshape(-1, 1)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    lo = k - n - start
    if lo < 0 or k - start > u.shape[0] or k - start > y.shape[0]:
        raise IndexError(f"histories do not cover [{k - n}, {k - 1}]")
    return np.concatenate([y[lo : lo + n].reshape(-1), u[lo : lo + n].reshape(-1)])


def companion_realization(coeffs: IoCoefficients) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Non-minimal state-space model on the history vector.

    Returns (A, B, C) of dimension (m+p)n with shift blocks moving the
    histories, the coefficient row injecting y(k), and a unit block loading
    u(k); C reads y(k) out of chi(k) by the same coefficient row.
    """
    n, p, m = coeffs.n, coeffs.p, coeffs.m
    a = coeffs.a.reshape(n, p, p) if coeffs.siso else coeffs.a
    b = coeffs.b.reshape(n, p, m) if coeffs.siso else coeffs.b
    ny, nu = n * p, n * m
    dim = ny + nu
    A = np.zeros((dim, dim))
    for i in range(n - 1):
        A[i * p : (i + 1) * p, (i + 1) * p : (i + 2) * p] = np.eye(p)
        A[ny + i * m : ny + (i + 1) * m, ny + (i + 1) * m : ny + (i + 2) * m] = np.eye(m)
    row = np.zeros((p, dim))
    for i in range(n):
        row[:, i * p : (i + 1) * p] = -a[i]
        row[:, ny + i * m : ny + (i + 1) * m] = b[i]
    A[(n - 1) * p : n * p, :] = row
    B = np.zeros((dim, m))
    B[ny + (n - 1) * m :, :] = np.eye(m)
    C = row.copy()
    return A, B, C


@dataclass(frozen=True)
class ChiData:
    """Data matrices of an input/output experiment lifted to history states.

    Built from samples over [-n, T-1]; U0 is m x T, X0h and X1h stack the
    output and input Hankel blocks of depth n starting at -n and -n+1.  By
    construction [U0; X0h] equals the plain stack of the shifted
    input/output Hankel matrices.
    """

    U0: np.ndarray
    X0h: np.ndarray
    X1h: np.ndarray
    n: int

    @property
    def T(self) -> int:
        return self.U0.shape[1]

    @property
    def m(self) -> int:
        return self.U0.shape[0]

    @property
    def p(self) -> int:
        return (self.X0h.shape[0] - self.n * self.m) // self.n

    @property
    def lift_dim(self) -> int:
        return self.X0h.shape[0]

    def rank_check(self, rtol: float = 1e-12):
        return check_rank_condition(self.U0, self.X0h, rtol)


def build_chi_data(u_d: np.ndarray, y_d: np.ndarray, n: int, T: int) -> ChiData:
    """Assemble lifted data matrices from samples covering [-n, T-1].

    `u_d` and `y_d` are time-major with first row at time -n, so they need
    n + T samples each; the leading n samples form the experiment's
    pre-window (the initial history).
    """
    u_d = np.asarray(u_d, dtype=float)
    y_d = np.asarray(y_d, dtype=float)
    if u_d.ndim == 1:
        u_d = u_d.reshape(-1, 1)
    if y_d.ndim == 1:
        y_d = y_d.reshape(-1, 1)
    if u_d.shape[0] < n + T or y_d.shape[0] < n + T:
        raise ValueError(f"need {n + T} samples covering the pre-window, got {u_d.shape[0]}, {y_d.shape[0]}")
    U0 = u_d[n : n + T].T
    X0h = np.vstack([build_hankel(y_d, 0, n, T), build_hankel(u_d, 0, n, T)])
    X1h = np.vstack([build_hankel(y_d, 1, n, T), build_hankel(u_d, 1, n, T)])
    return ChiData(U0=U0, X0h=X0h, X1h=X1h, n=n)


@dataclass(frozen=True)
class IoPredictor:
    """One-step predictor of the lifted state and the current output."""

    M: np.ndarray
    n: int
    m: int
    p: int

    def predict_chi(self, u, chi) -> np.ndarray:
        v = np.concatenate([np.atleast_1d(np.asarray(u, float)), np.asarray(chi, float)])
        return self.M @ v

    def predict_y(self, chi) -> np.ndarray:
        state_part = self.M[:, self.m :]
        rows = slice((self.n - 1) * self.p, self.n * self.p)
        return state_part[rows] @ np.asarray(chi, float)


def io_predictor(cd: ChiData, rtol: float = 1e-12) -> IoPredictor:
    """Least-squares lifted dynamics; the output is read from the new history.

    The current output sits at block position n of the advanced history
    vector, so y(k) is the corresponding row of the state-transition part.
    """
    chk = cd.rank_check(rtol)
    if not chk.verdict:
        raise RankConditionError(f"rank {chk.rank} < {chk.required}: data not rich enough")
    S = np.vstack([cd.U0, cd.X0h])
    M = cd.X1h @ np.linalg.pinv(S, rcond=max(S.shape) * rtol)
    return IoPredictor(M=M, n=cd.n, m=cd.m, p=cd.p)


@dataclass(frozen=True)
class OutputController:
    """Dynamic output controller of order n given by its coefficient row.

    The row stacks (d_1 .. d_n, -c_1 .. -c_n); as a difference equation the
    controller maps measured plant outputs to plant inputs with the same
    structure as the plant model.
    """

    n: int
    gain_row: np.ndarray  # m x (m+p) n
    m: int = 1
    p: int = 1

    @property
    def d(self) -> np.ndarray:
        if self.m == self.p == 1:
            return self.gain_row[0, : self.n]
        return self.gain_row[:, : self.n * self.p].reshape(self.m, self.n, self.p).swapaxes(0, 1)

    @property
    def c(self) -> np.ndarray:
        if self.m == self.p == 1:
            return -self.gain_row[0, self.n :]
        return -self.gain_row[:, self.n * self.p :].reshape(self.m, self.n, self.m).swapaxes(0, 1)

    def realization(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return realize_controller(self.gain_row, self.n)


def realize_controller(gain_row: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Observer-form state space of order n for a scalar coefficient row.

    The row (d_1..d_n, -c_1..-c_n) realizes as A_c with first column
    (-c_n, ..., -c_1), ones on the superdiagonal, B_c = (d_n, ..., d_1)',
    C_c the first unit row and D_c = 0.
    """
    row = np.asarray(gain_row, dtype=float).reshape(-1)
    if row.shape[0] != 2 * n:
        raise ValueError(f"coefficient row must have length {2 * n}, got {row.shape[0]}")
    d = row[:n]
    c = -row[n:]
    A_c = np.zeros((n, n))
    for i in range(n - 1):
        A_c[i, i + 1] = 1.0
    A_c[:, 0] = -c[::-1]
    B_c = d[::-1].reshape(n, 1)
    C_c = np.zeros((1, n))
    C_c[0, 0] = 1.0
    D_c = np.zeros((1, 1))
    return A_c, B_c, C_c, D_c


def closed_loop_matrix(plant: IoCoefficients, controller: OutputController) -> np.ndarray:
    """Lifted closed-loop transition matrix under u(k) fed by the controller.

    Equals the companion form of the plant with the controller coefficient
    row loaded in place of the new-input row (A + B K on the lifted state).
    """
    if controller.n != plant.n or controller.m != plant.m or controller.p != plant.p:
        raise ValueError("plant and controller orders/dimensions do not match")
    A, B, _ = companion_realization(plant)
    return A + B @ controller.gain_row


def cosimulate(
    plant: IoCoefficients,
    controller: OutputController,
    y_init=None,
    u_init=None,
    steps: int = 200,
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-loop run of the plant recursion against the realized controller.

    Starts the controller at rest, seeds the plant histories, applies
    u(k) = controller output, and returns (y, u) over `steps` samples.
    """
    n, p, m = plant.n, plant.p, plant.m
    if not plant.siso:
        raise ValueError("co-simulation helper covers the scalar case")
    A_c, B_c, C_c, _ = controller.realization()
    yh = list(np.zeros((n, 1)) if y_init is None else np.asarray(y_init, float).reshape(n, 1))
    uh = list(np.zeros((n, 1)) if u_init is None else np.asarray(u_init, float).reshape(n, 1))
    xi = np.zeros(n)
    a, b = plant.a, plant.b
    ys = np.empty(steps)
    us = np.empty(steps)
    for k in range(steps):
        u_k = (C_c @ xi).item()
        y_k = 0.0
        for i in range(n):
            y_k += -a[n - 1 - i] * yh[-1 - i].item() + b[n - 1 - i] * uh[-1 - i].item()
        xi = A_c @ xi + (B_c * y_k).reshape(-1)
        ys[k] = y_k
        us[k] = u_k
        yh.append(np.array([y_k]))
        uh.append(np.array([u_k]))
    return ys, us


def design_output_feedback(
    cd: ChiData,
    cfg: SolveConfig = DEFAULT_CONFIG,
    plant: IoCoefficients | None = None,
) -> tuple[OutputController, "DesignReport"]:
    """Stabilizing output-feedback controller from input/output data.

    Runs the margin-maximized stabilization program on the lifted data
    blocks and reads the controller coefficients off the resulting gain.
    When the true plant coefficients are supplied, the report's oracle field
    holds the closed-loop spectral radius computed on the model side.
    """
    from .design import DesignReport, _data_scale, _finish, _invert_p

    chk = cd.rank_check(cfg.rank_rtol)
    if not chk.verdict:
        raise RankConditionError(f"rank {chk.rank} < {chk.required}: data not rich enough")
    c = 1.0 / _data_scale(cd.U0, cd.X0h, cd.X1h) if cfg.normalize_data else 1.0
    U0, X0h, X1h = c * cd.U0, c * cd.X0h, c * cd.X1h
    dim, T = cd.lift_dim, cd.T
    eps = cfg.eps_rel * _data_scale(U0, X0h, X1h)

    prob = LmiProblem(scale=_data_scale(X0h, X1h))
    Q = prob.matrix_var("Q", T, dim)
    P = prob.matrix_var("P", dim, dim, symmetric=True)
    t = prob.scalar_var("t")
    prob.require_psd(block([[P, X1h @ Q], [(X1h @ Q).T, P]]) - t * np.eye(2 * dim), 0.0, "lyapunov")
    prob.require_eq(X0h @ Q, P, "state_block")
    prob.require_psd(float(dim) * np.eye(dim) - P, 0.0, "scale_cap")
    prob.require_psd(t - eps, 0.0, "margin_floor")
    prob.maximize(t)

    sol = solve(prob, cfg)
    report = DesignReport(method="output-feedback", status=sol.status)
    controller = OutputController(n=cd.n, gain_row=np.zeros((cd.m, dim)), m=cd.m, p=cd.p)
    if sol.status != FEASIBLE:
        return controller, _finish(report, sol, cfg)
    Qv, Pv = sol.values["Q"], sol.values["P"]
    try:
        Pinv = _invert_p(Pv)
    except np.linalg.LinAlgError:
        report.status = NUMERICAL_FAILURE
        return controller, _finish(report, sol, cfg)
    gain_row = U0 @ Qv @ Pinv
    controller = OutputController(n=cd.n, gain_row=gain_row, m=cd.m, p=cd.p)
    rho = spectral_radius(X1h @ Qv @ Pinv)
    report.K = gain_row
    report.rho_data = rho
    report.stabilizing = rho < 1.0 - cfg.stability_margin
    if not report.stabilizing:
        report.status = NUMERICAL_FAILURE
    report.decision_values = {"Q": Qv, "P": Pv}
    if plant is not None:
        report.rho_oracle = spectral_radius(closed_loop_matrix(plant, controller))
    return controller, _finish(report, sol, cfg)
