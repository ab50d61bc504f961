"""Ground-truth plant models, benchmark systems and experiment simulation.

Everything in this module exists to generate data and to verify designs;
the design routines themselves never look at a plant model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .output_feedback import IoCoefficients

BENCHMARK_NAMES = ("batch_reactor", "pendulum", "two_cart_io")


class ExcitationError(RuntimeError):
    """Raised when a persistently exciting input could not be produced."""


def _time_major(arr) -> np.ndarray:
    """Coerce a signal to shape (samples, channels); 1-D becomes (T, 1)."""
    a = np.asarray(arr, dtype=float)
    if a.ndim == 1:
        return a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected 1-D or 2-D signal, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class LtiSystem:
    """Discrete-time linear system x(k+1) = A x(k) + B u(k), y = C x + D u."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        n, m, p = A.shape[0], B.shape[1], C.shape[0]
        if n < 1 or m < 1:
            raise ValueError("state and input dimensions must be at least 1")
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape != (n, m):
            raise ValueError(f"B must be {n}x{m}, got {B.shape}")
        if C.shape != (p, n):
            raise ValueError(f"C must have {n} columns, got {C.shape}")
        if D.shape != (p, m):
            raise ValueError(f"D must be {p}x{m}, got {D.shape}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @classmethod
    def from_ab(cls, A, B) -> "LtiSystem":
        """State-feedback plant with full state output (C = I, D = 0)."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        n, m = A.shape[0], B.shape[1]
        return cls(A, B, np.eye(n), np.zeros((n, m)))


@dataclass(frozen=True)
class NonlinearPlant:
    """Smooth plant x(k+1) = f(x, u) with a known equilibrium pair.

    `linearization` holds the Jacobian pair (A, B) of f at the equilibrium;
    deviation data (x - x_eq, u - u_eq) then follows the linear dynamics up
    to a remainder that shrinks faster than the deviations themselves.
    """

    n: int
    m: int
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    x_eq: np.ndarray
    u_eq: np.ndarray
    linearization: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        x_eq = np.asarray(self.x_eq, dtype=float).reshape(self.n)
        u_eq = np.asarray(self.u_eq, dtype=float).reshape(self.m)
        A, B = self.linearization
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        if A.shape != (self.n, self.n) or B.shape != (self.n, self.m):
            raise ValueError("linearization dimensions inconsistent with n, m")
        object.__setattr__(self, "x_eq", x_eq)
        object.__setattr__(self, "u_eq", u_eq)
        object.__setattr__(self, "linearization", (A, B))
        resid = np.max(np.abs(np.asarray(self.f(x_eq, u_eq), dtype=float) - x_eq))
        if resid > 1e-12:
            raise ValueError(f"(x_eq, u_eq) is not an equilibrium, residual {resid:.3g}")

    def step(self, x: np.ndarray, u) -> np.ndarray:
        return np.asarray(self.f(np.asarray(x, float), np.atleast_1d(np.asarray(u, float))), float)


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed experiment record.

    Arrays are time-major: `u` has shape (Tu, m); state-like channels have
    shape (Tx, n) with one more sample than the input when produced by a
    state-space simulation.  `k0` is the time index of the first row (i/o
    experiments carry a pre-window and start at k0 = -order).  `dt` is the
    sample period; 0 means a pure discrete-time index.
    """

    u: np.ndarray
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    zeta: np.ndarray | None = None
    w: np.ndarray | None = None
    xdot: np.ndarray | None = None
    d: np.ndarray | None = None
    k0: int = 0
    dt: float = 0.0
    seed: int | None = None
    bench: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "u", _time_major(self.u))
        for name in ("x", "y", "zeta", "w", "xdot", "d"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _time_major(val))
        Tu = self.u.shape[0]
        for name in ("x", "y", "zeta", "w", "xdot", "d"):
            val = getattr(self, name)
            if val is not None and val.shape[0] not in (Tu, Tu + 1):
                raise ValueError(
                    f"channel {name} has {val.shape[0]} samples, inconsistent with {Tu} input samples"
                )

    @property
    def m(self) -> int:
        return self.u.shape[1]

    @property
    def n(self) -> int | None:
        for ch in (self.x, self.zeta):
            if ch is not None:
                return ch.shape[1]
        return None

    @property
    def T(self) -> int:
        return self.u.shape[0]


def simulate_lti(sys: LtiSystem, x0, u) -> Trajectory:
    """Run the exact state recursion for a given input sequence.

    Args:
        sys: plant to simulate.
        x0: initial state, length n.
        u: input sequence, shape (T, m) (a 1-D array is accepted for m = 1).

    Returns:
        Trajectory with T input samples, T+1 states and T outputs.
    """
    u = _time_major(u)
    if u.shape[1] != sys.m:
        raise ValueError(f"input has {u.shape[1]} channels, plant expects {sys.m}")
    x0 = np.asarray(x0, dtype=float).reshape(sys.n)
    T = u.shape[0]
    x = np.empty((T + 1, sys.n))
    y = np.empty((T, sys.p))
    x[0] = x0
    for k in range(T):
        y[k] = sys.C @ x[k] + sys.D @ u[k]
        x[k + 1] = sys.A @ x[k] + sys.B @ u[k]
    return Trajectory(u=u, x=x, y=y)


def simulate_noisy(sys: LtiSystem, x0, u, noise_amplitude: float, seed: int) -> Trajectory:
    """Simulate and overlay componentwise uniform measurement noise.

    The measured channel is zeta(k) = x(k) + w(k) with w uniform on
    [-noise_amplitude, noise_amplitude]; the drawn noise is recorded in the
    trajectory so tests can reconstruct the exact state sequence.  Results
    are deterministic per seed.
    """
    if noise_amplitude < 0:
        raise ValueError("noise amplitude must be nonnegative")
    traj = simulate_lti(sys, x0, u)
    rng = np.random.default_rng(seed)
    if noise_amplitude == 0:
        w = np.zeros_like(traj.x)
    else:
        w = rng.uniform(-noise_amplitude, noise_amplitude, size=traj.x.shape)
    return Trajectory(u=traj.u, x=traj.x, y=traj.y, zeta=traj.x + w, w=w, seed=seed)


@dataclass(frozen=True)
class PendulumParams:
    dt: float = 0.1
    mass: float = 1.0
    length: float = 1.0
    gravity: float = 9.8
    friction: float = 0.01

    def __post_init__(self):
        if self.dt <= 0 or self.mass <= 0 or self.length <= 0:
            raise ValueError("dt, mass and length must be positive")


def pendulum_plant(params: PendulumParams = PendulumParams()) -> NonlinearPlant:
    """Forward-Euler inverted pendulum about its upright equilibrium."""
    dt, mass, ell, g, mu = (
        params.dt,
        params.mass,
        params.length,
        params.gravity,
        params.friction,
    )

    def f(x, u):
        return np.array(
            [
                x[0] + dt * x[1],
                (dt * g / ell) * np.sin(x[0])
                + (1.0 - dt * mu / (mass * ell**2)) * x[1]
                + (dt / (mass * ell**2)) * u[0],
            ]
        )

    A = np.array([[1.0, dt], [dt * g / ell, 1.0 - dt * mu / (mass * ell**2)]])
    B = np.array([[0.0], [dt / (mass * ell**2)]])
    return NonlinearPlant(n=2, m=1, f=f, x_eq=np.zeros(2), u_eq=np.zeros(1), linearization=(A, B))


def simulate_pendulum(params: PendulumParams, x0, u) -> tuple[Trajectory, np.ndarray]:
    """Simulate the Euler pendulum and return the linearization remainder.

    The remainder d(k) collects the terms the linearized model misses, so
    x(k+1) = A x(k) + B u(k) + d(k) holds exactly along the produced
    trajectory.  Shape of d is (T, 2).
    """
    plant = pendulum_plant(params)
    A, B = plant.linearization
    u = np.asarray(u, dtype=float).reshape(-1, 1)
    T = u.shape[0]
    x = np.empty((T + 1, 2))
    d = np.empty((T, 2))
    x[0] = np.asarray(x0, dtype=float).reshape(2)
    scale = params.dt * params.gravity / params.length
    for k in range(T):
        x[k + 1] = plant.f(x[k], u[k])
        d[k] = (0.0, scale * (np.sin(x[k, 0]) - x[k, 0]))
    traj = Trajectory(u=u, x=x, d=d, dt=params.dt, bench="pendulum")
    return traj, d


def simulate_nonlinear_closed_loop(plant: NonlinearPlant, K: np.ndarray, x0, steps: int) -> np.ndarray:
    """Iterate x(k+1) = f(x, u_eq + K (x - x_eq)); returns (steps+1, n) states."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    x = np.empty((steps + 1, plant.n))
    x[0] = np.asarray(x0, dtype=float).reshape(plant.n)
    for k in range(steps):
        u = plant.u_eq + K @ (x[k] - plant.x_eq)
        x[k + 1] = plant.step(x[k], u)
    return x


def generate_pe_input(
    m: int, T: int, order: int, amplitude: float = 1.0, seed: int | None = None, retries: int = 100
) -> np.ndarray:
    """Draw a uniform input sequence that is persistently exciting of `order`.

    Requires T >= (m+1) * order - 1, the minimum length for which the
    excitation condition can hold.  The draw is repeated on the same random
    stream up to `retries` times before giving up.
    """
    from .hankel import is_persistently_exciting

    needed = (m + 1) * order - 1
    if T < needed:
        raise ValueError(f"T={T} too short for excitation order {order}: need T >= {needed}")
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        u = rng.uniform(-amplitude, amplitude, size=(T, m))
        if is_persistently_exciting(u, order).verdict:
            return u
    raise ExcitationError(f"no persistently exciting draw of order {order} in {retries} attempts")


def _batch_reactor() -> LtiSystem:
    # Discretized batch reactor benchmark (0.1 s sampling), open-loop unstable.
    A = np.array(
        [
            [1.178, 0.001, 0.511, -0.403],
            [-0.051, 0.661, -0.011, 0.061],
            [0.076, 0.335, 0.560, 0.382],
            [0.0, 0.335, 0.089, 0.849],
        ]
    )
    B = np.array(
        [
            [0.004, -0.087],
            [0.467, 0.001],
            [0.213, -0.235],
            [0.213, -0.016],
        ]
    )
    return LtiSystem.from_ab(A, B)


# Continuous-time two-cart model, kept for reference only; the benchmark is
# defined directly by the sampled i/o coefficients below.
#   A = [[0, 1, 0, 0], [-k, 0, k, 0], [0, 0, 0, 1], [k, 0, -k, 0]]  (k = 1)
#   B = [0, 1, 0, 0]',  C = [0, 0, 1, 0],  D = 0
def _two_cart_io() -> IoCoefficients:
    # Two carts coupled by a spring, force on one cart, position of the other
    # measured; i/o coefficients of the 1 s sampled model, all open-loop poles
    # on the unit circle.
    return IoCoefficients(
        n=4,
        a=np.array([1.0, -2.311, 2.623, -2.311]),
        b=np.array([0.039, 0.383, 0.383, 0.039]),
    )


def benchmark(name: str) -> LtiSystem | NonlinearPlant | IoCoefficients:
    """Return one of the stock benchmark plants by name."""
    if name == "batch_reactor":
        return _batch_reactor()
    if name == "pendulum":
        return pendulum_plant()
    if name == "two_cart_io":
        return _two_cart_io()
    raise KeyError(f"unknown benchmark {name!r}; choose from {BENCHMARK_NAMES}")
