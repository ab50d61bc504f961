"""Data-based open-loop and closed-loop system representations.

With rich enough data, the one-step response matrices replace the plant:
the shifted state block factors through the stacked input/state block, which
yields both a least-squares predictor of the dynamics and a data-only
parametrization of any state-feedback loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hankel import HankelBlock, RankConditionError, check_rank_condition
from .oracles import spectral_radius


def _pinv(M: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """SVD pseudoinverse with the same singular-value cutoff as the rank rule."""
    return np.linalg.pinv(M, rcond=max(M.shape) * rtol)


def _require_rank(h: HankelBlock, rtol: float) -> None:
    chk = check_rank_condition(h.U0, h.X0, rtol)
    if not chk.verdict:
        raise RankConditionError(
            f"stacked data matrix has rank {chk.rank} < {chk.required}; collect richer data"
        )


@dataclass(frozen=True)
class OpenLoopPredictor:
    """One-step predictor x(k+1) = M (u(k); x(k)) recovered from data."""

    M: np.ndarray
    m: int
    n: int

    @property
    def B_hat(self) -> np.ndarray:
        return self.M[:, : self.m]

    @property
    def A_hat(self) -> np.ndarray:
        return self.M[:, self.m :]

    def predict(self, u, x) -> np.ndarray:
        v = np.concatenate([np.atleast_1d(u), np.atleast_1d(x)]).astype(float)
        return self.M @ v


def open_loop_predictor(h: HankelBlock, rtol: float = 1e-12) -> OpenLoopPredictor:
    """Least-squares dynamics recovered as X1 times the pseudoinverse of [U0; X0].

    For exact data from a linear plant under the rank condition this equals
    the true [B A] block row.
    """
    _require_rank(h, rtol)
    S = np.vstack([h.U0, h.X0])
    M = h.X1 @ _pinv(S, rtol)
    return OpenLoopPredictor(M=M, m=h.m, n=h.n)


def dmd_predictor(h: HankelBlock, rtol: float = 1e-12) -> OpenLoopPredictor:
    """Same predictor through the thin SVD factorization of the data.

    Writes [U0; X0] = U1 S V1' with the significant singular values only and
    evaluates X1 V1 S^-1 U1'; agrees with `open_loop_predictor` to solver
    precision and exposes the decomposition route explicitly.
    """
    if h.m < 1:
        raise ValueError("input channel required")
    _require_rank(h, rtol)
    S = np.vstack([h.U0, h.X0])
    U1, sv, V1t = np.linalg.svd(S, full_matrices=False)
    keep = sv > max(S.shape) * sv[0] * rtol
    U1, sv, V1t = U1[:, keep], sv[keep], V1t[keep]
    M = h.X1 @ (V1t.T / sv) @ U1.T
    return OpenLoopPredictor(M=M, m=h.m, n=h.n)


@dataclass(frozen=True)
class GainParametrization:
    """Data-side factorization of a closed loop under u = K x.

    G satisfies [U0; X0] G = [K; I], so X1 G reproduces the closed-loop
    transition matrix without ever forming the plant.
    """

    K: np.ndarray
    G: np.ndarray
    closed_loop: np.ndarray


def gk_for_gain(h: HankelBlock, K, rtol: float = 1e-12) -> GainParametrization:
    """Minimum-norm G with [U0; X0] G = [K; I] and the implied closed loop."""
    _require_rank(h, rtol)
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape != (h.m, h.n):
        raise ValueError(f"gain must be {h.m}x{h.n}, got {K.shape}")
    S = np.vstack([h.U0, h.X0])
    target = np.vstack([K, np.eye(h.n)])
    G = _pinv(S, rtol) @ target
    return GainParametrization(K=K, G=G, closed_loop=h.X1 @ G)


@dataclass(frozen=True)
class GainCheck:
    spectral_radius: float
    stabilizing: bool


def verify_gain(h: HankelBlock, K, margin: float = 1e-8, rtol: float = 1e-12) -> GainCheck:
    """Identification-free stability check of a candidate gain.

    Computes the closed-loop transition matrix from data alone and reports
    whether its spectral radius clears 1 - margin; the gain never has to be
    placed in feedback.
    """
    param = gk_for_gain(h, K, rtol)
    rho = spectral_radius(param.closed_loop)
    return GainCheck(spectral_radius=rho, stabilizing=rho < 1.0 - margin)
