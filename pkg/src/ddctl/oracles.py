"""Model-based verification routines.

These are the independent checks a design must pass; none of them is called
from inside a design routine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UnstableMatrixError(ValueError):
    """Raised when a routine requiring a stable matrix receives an unstable one."""


class RiccatiDivergenceError(RuntimeError):
    """Raised when the Riccati iteration fails to converge."""


def spectral_radius(M) -> float:
    """Largest eigenvalue magnitude of a square matrix."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got {M.shape}")
    return float(np.max(np.abs(np.linalg.eigvals(M))))


@dataclass(frozen=True)
class DareSolution:
    X: np.ndarray
    K: np.ndarray
    residual: float
    iterations: int


def dare(A, B, Qx, R, rel_tol: float = 1e-12, max_iter: int = 100_000) -> DareSolution:
    """Discrete-time algebraic Riccati equation by fixed-point value iteration.

    Iterates X <- A'XA - (A'XB)(R + B'XB)^-1(B'XA) + Qx from X = Qx until the
    Frobenius increment drops below rel_tol * ||X||, then returns the cost
    matrix, the optimal feedback gain K = -(R + B'XB)^-1 B'XA and the
    residual of the fixed-point equation.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Qx = np.atleast_2d(np.asarray(Qx, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    X = Qx.copy()
    iterations = max_iter
    for j in range(max_iter):
        gain_term = np.linalg.solve(R + B.T @ X @ B, B.T @ X @ A)
        Xn = A.T @ X @ A - (A.T @ X @ B) @ gain_term + Qx
        step = np.linalg.norm(Xn - X, "fro")
        X = Xn
        if not np.isfinite(step):
            raise RiccatiDivergenceError("Riccati iteration diverged (non-stabilizable pair?)")
        if step <= rel_tol * max(1.0, np.linalg.norm(X, "fro")):
            iterations = j + 1
            break
    else:
        raise RiccatiDivergenceError(f"Riccati iteration did not settle in {max_iter} steps")
    gain_term = np.linalg.solve(R + B.T @ X @ B, B.T @ X @ A)
    K = -gain_term
    residual = np.linalg.norm(A.T @ X @ A - X - (A.T @ X @ B) @ gain_term + Qx, "fro")
    return DareSolution(X=X, K=K, residual=float(residual), iterations=iterations)


def dlyap(A_cl, rel_tol: float = 1e-14, max_doublings: int = 200) -> np.ndarray:
    """Solve A W A' - W + I = 0 for a stable A by doubling the power series.

    W is the sum of A^k (A^k)' over k >= 0; squaring the propagator at each
    step gives quadratic convergence.  Requires spectral radius below 1.
    """
    A = np.atleast_2d(np.asarray(A_cl, dtype=float))
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise UnstableMatrixError(f"spectral radius {rho:.6g} >= 1")
    n = A.shape[0]
    W = np.eye(n)
    E = A.copy()
    for _ in range(max_doublings):
        increment = E @ W @ E.T
        W = W + increment
        E = E @ E
        if np.linalg.norm(increment, "fro") <= rel_tol * np.linalg.norm(W, "fro"):
            break
    return (W + W.T) / 2.0


def h2_norm(A, B, K, Qx, R) -> float:
    """Closed-loop H2 norm of the performance channel under state feedback.

    The loop is x+ = (A + BK) x + noise with unit-covariance noise on every
    state; the performance output stacks Qx^(1/2) x and R^(1/2) u.  Computed
    from the closed-loop controllability Gramian as
    sqrt(trace(Qx W) + trace(K' R K W)).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    Qx = np.atleast_2d(np.asarray(Qx, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    W = dlyap(A + B @ K)
    value = np.trace(Qx @ W) + np.trace(K.T @ R @ K @ W)
    return float(np.sqrt(max(value, 0.0)))


def min_gamma(P, S, rtol: float = 1e-12) -> float:
    """Smallest gamma with P <= gamma * S for symmetric PSD P and S.

    Computed as the largest generalized eigenvalue of (P, S) restricted to
    the range of S; returns inf when P acts on directions S annihilates.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    S = np.atleast_2d(np.asarray(S, dtype=float))
    P = (P + P.T) / 2.0
    S = (S + S.T) / 2.0
    evals, V = np.linalg.eigh(S)
    smax = float(evals[-1]) if evals.size else 0.0
    if smax <= 0.0:
        return 0.0 if float(np.max(np.abs(P), initial=0.0)) == 0.0 else float("inf")
    thresh = max(S.shape) * smax * rtol
    in_range = evals > thresh
    pscale = float(np.max(np.abs(P)))
    if pscale == 0.0:
        return 0.0
    if not np.all(in_range):
        null_basis = V[:, ~in_range]
        # PSD P vanishes on a direction iff P v = 0 there.
        if np.max(np.abs(P @ null_basis)) > np.sqrt(rtol) * pscale:
            return float("inf")
    Vr = V[:, in_range]
    scale = 1.0 / np.sqrt(evals[in_range])
    M = (Vr * scale).T @ P @ (Vr * scale)
    gamma = float(np.max(np.linalg.eigvalsh((M + M.T) / 2.0)))
    return max(gamma, 0.0)
