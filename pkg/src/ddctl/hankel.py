"""Hankel/Toeplitz matrix construction and data-richness checks.

Signals are time-major arrays of shape (N, sigma); the block matrices built
here use the control convention with one column per time window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class RankConditionError(RuntimeError):
    """Raised when collected data is not rich enough for a design."""


def numerical_rank(M: np.ndarray, rtol: float = 1e-12) -> tuple[int, float]:
    """Rank as the number of singular values above max(dims)*smax*rtol.

    Returns (rank, smallest significant singular value); the second entry is
    0.0 for the zero matrix.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0, 0.0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0, 0.0
    thresh = max(M.shape) * s[0] * rtol
    rank = int(np.sum(s > thresh))
    return rank, float(s[rank - 1]) if rank else 0.0


def restrict(signal, k: int, T: int) -> np.ndarray:
    """Stack samples signal[k], ..., signal[k+T] into one vector.

    The output has length sigma*(T+1), ordered by time step with the channel
    index fastest.
    """
    z = np.asarray(signal, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    if k < 0 or k + T >= z.shape[0]:
        raise IndexError(f"window [{k}, {k + T}] outside available samples [0, {z.shape[0] - 1}]")
    return z[k : k + T + 1].reshape(-1)


def build_hankel(signal, i: int, t: int, N: int) -> np.ndarray:
    """Block Hankel matrix with t stacked samples per column and N columns.

    Column c holds samples i+c ... i+c+t-1, so the matrix has shape
    (sigma*t, N).  Indices refer to positions in `signal`, whose first row
    is taken as time i = 0 from the caller's point of view.
    """
    z = np.asarray(signal, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    if t < 1 or N < 1:
        raise ValueError("t and N must be positive")
    if i < 0 or i + t + N - 2 >= z.shape[0]:
        raise IndexError(
            f"Hankel window needs samples [{i}, {i + t + N - 2}], have [0, {z.shape[0] - 1}]"
        )
    sigma = z.shape[1]
    H = np.empty((sigma * t, N))
    for c in range(N):
        H[:, c] = z[i + c : i + c + t].reshape(-1)
    return H


@dataclass(frozen=True)
class PeResult:
    verdict: bool
    rank: int
    min_singular_value: float


def is_persistently_exciting(signal, order: int, rtol: float = 1e-12) -> PeResult:
    """Check excitation of a given order via the rank of the depth-`order` Hankel matrix.

    A signal of sigma channels passes when that matrix has full row rank
    sigma*order.  Signals too short to form the matrix simply fail.
    """
    z = np.asarray(signal, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    N, sigma = z.shape
    cols = N - order + 1
    if order < 1 or cols < 1:
        return PeResult(False, 0, 0.0)
    H = build_hankel(z, 0, order, cols)
    rank, smin = numerical_rank(H, rtol)
    return PeResult(rank == sigma * order, rank, smin)


@dataclass(frozen=True)
class RankCheck:
    verdict: bool
    rank: int
    required: int


def check_rank_condition(U0: np.ndarray, X0: np.ndarray, rtol: float = 1e-12) -> RankCheck:
    """Full-row-rank test of the stacked input/state data matrix [U0; X0]."""
    U0 = np.atleast_2d(np.asarray(U0, dtype=float))
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    if U0.shape[1] != X0.shape[1]:
        raise ValueError("U0 and X0 must have the same number of columns")
    stacked = np.vstack([U0, X0])
    required = U0.shape[0] + X0.shape[0]
    rank, _ = numerical_rank(stacked, rtol)
    return RankCheck(rank == required, rank, required)


def build_toeplitz_observability(sys, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Input/output response operators of depth t.

    Returns the lower block-triangular convolution (Toeplitz) matrix mapping
    stacked inputs to stacked outputs, and the observability matrix mapping
    the initial state to the same stacked outputs.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n, m, p = sys.n, sys.m, sys.p
    obs = np.empty((t * p, n))
    Ak = np.eye(n)
    markov = []  # C A^j B for j = 0..t-2
    for j in range(t):
        obs[j * p : (j + 1) * p] = C @ Ak
        if j < t - 1:
            markov.append(C @ Ak @ B)
        Ak = Ak @ A
    toep = np.zeros((t * p, t * m))
    for r in range(t):
        toep[r * p : (r + 1) * p, r * m : (r + 1) * m] = D
        for c in range(r):
            toep[r * p : (r + 1) * p, c * m : (c + 1) * m] = markov[r - c - 1]
    return toep, obs


def fundamental_lemma_solve(H: np.ndarray, target) -> tuple[np.ndarray, float]:
    """Express a trajectory window as a combination of data-matrix columns.

    Solves H g = target in the least-squares sense, returning the
    minimum-norm coefficient vector and the combination residual
    ||H g - target||_2.  A residual at round-off level certifies that the
    target is a trajectory the data can represent.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    target = np.asarray(target, dtype=float).reshape(-1)
    if H.shape[0] != target.shape[0]:
        raise ValueError(f"target length {target.shape[0]} does not match {H.shape[0]} rows")
    g, *_ = np.linalg.lstsq(H, target, rcond=None)
    residual = float(np.linalg.norm(H @ g - target))
    return g, residual


@dataclass(frozen=True)
class HankelBlock:
    """One-step data matrices of a state-accessible experiment.

    U0 is m x T (inputs), X0 and X1 are n x T (states and shifted states),
    all sharing the column/time index.
    """

    U0: np.ndarray
    X0: np.ndarray
    X1: np.ndarray

    def __post_init__(self):
        U0 = np.atleast_2d(np.asarray(self.U0, dtype=float))
        X0 = np.atleast_2d(np.asarray(self.X0, dtype=float))
        X1 = np.atleast_2d(np.asarray(self.X1, dtype=float))
        if U0.shape[0] < 1:
            raise ValueError("input data must have at least one channel")
        if not (U0.shape[1] == X0.shape[1] == X1.shape[1]):
            raise ValueError("U0, X0, X1 must share the number of columns")
        if X0.shape != X1.shape:
            raise ValueError("X0 and X1 must have equal shapes")
        object.__setattr__(self, "U0", U0)
        object.__setattr__(self, "X0", X0)
        object.__setattr__(self, "X1", X1)

    @property
    def m(self) -> int:
        return self.U0.shape[0]

    @property
    def n(self) -> int:
        return self.X0.shape[0]

    @property
    def T(self) -> int:
        return self.U0.shape[1]

    @classmethod
    def from_trajectory(cls, traj, use_zeta: bool = False) -> "HankelBlock":
        states = traj.zeta if use_zeta else traj.x
        if states is None:
            raise ValueError("trajectory has no state channel to build data matrices from")
        T = traj.u.shape[0]
        if states.shape[0] < T + 1:
            raise ValueError("need T+1 state samples for T input samples")
        return cls(U0=traj.u.T, X0=states[:T].T, X1=states[1 : T + 1].T)


@dataclass(frozen=True)
class NoisyHankelBlock:
    """Data matrices of a noisy experiment, optionally with the true noise.

    Z0/Z1 are the measured (noise-corrupted) state blocks.  W0/W1, when
    recorded by the simulator, allow tests to recover the exact noise-free
    blocks; design code must never read them.
    """

    U0: np.ndarray
    Z0: np.ndarray
    Z1: np.ndarray
    W0: np.ndarray | None = None
    W1: np.ndarray | None = None

    def __post_init__(self):
        U0 = np.atleast_2d(np.asarray(self.U0, dtype=float))
        Z0 = np.atleast_2d(np.asarray(self.Z0, dtype=float))
        Z1 = np.atleast_2d(np.asarray(self.Z1, dtype=float))
        if not (U0.shape[1] == Z0.shape[1] == Z1.shape[1]):
            raise ValueError("U0, Z0, Z1 must share the number of columns")
        object.__setattr__(self, "U0", U0)
        object.__setattr__(self, "Z0", Z0)
        object.__setattr__(self, "Z1", Z1)
        for name in ("W0", "W1"):
            val = getattr(self, name)
            if val is not None:
                val = np.atleast_2d(np.asarray(val, dtype=float))
                if val.shape != Z0.shape:
                    raise ValueError(f"{name} must match the shape of Z0/Z1")
                object.__setattr__(self, name, val)

    @property
    def m(self) -> int:
        return self.U0.shape[0]

    @property
    def n(self) -> int:
        return self.Z0.shape[0]

    @property
    def T(self) -> int:
        return self.U0.shape[1]

    @classmethod
    def from_trajectory(cls, traj) -> "NoisyHankelBlock":
        if traj.zeta is None:
            raise ValueError("trajectory has no measured-state channel")
        T = traj.u.shape[0]
        w0 = w1 = None
        if traj.w is not None:
            w0, w1 = traj.w[:T].T, traj.w[1 : T + 1].T
        return cls(
            U0=traj.u.T,
            Z0=traj.zeta[:T].T,
            Z1=traj.zeta[1 : T + 1].T,
            W0=w0,
            W1=w1,
        )

    def noise_free(self) -> HankelBlock:
        """Exact noise-free block; available only when noise was recorded."""
        if self.W0 is None or self.W1 is None:
            raise ValueError("true noise not recorded in this block")
        return HankelBlock(U0=self.U0, X0=self.Z0 - self.W0, X1=self.Z1 - self.W1)


def format_matrix(M: np.ndarray, precision: int = 6) -> str:
    """Plain text grid of a matrix for CLI debugging output."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return np.array2string(M, precision=precision, suppress_small=True, max_line_width=120)
