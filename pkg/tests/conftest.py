"""Shared generators for randomized system/data tests."""

from __future__ import annotations

import numpy as np
import pytest

from ddctl.hankel import HankelBlock
from ddctl.lti import LtiSystem, generate_pe_input, simulate_lti


def controllability_rank(A: np.ndarray, B: np.ndarray) -> int:
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.linalg.matrix_rank(np.hstack(blocks))


def random_controllable_system(rng: np.random.Generator, n: int, m: int, p: int | None = None) -> LtiSystem:
    """Uniform random (A, B) redrawn until controllable; optional random C, D."""
    for _ in range(50):
        A = rng.uniform(-1, 1, (n, n))
        B = rng.uniform(-1, 1, (n, m))
        if controllability_rank(A, B) == n:
            break
    else:
        raise RuntimeError("could not draw a controllable pair")
    if p is None:
        return LtiSystem.from_ab(A, B)
    C = rng.uniform(-1, 1, (p, n))
    D = rng.uniform(-1, 1, (p, m))
    return LtiSystem(A, B, C, D)


def pe_hankel_block(sys: LtiSystem, rng: np.random.Generator, T: int | None = None, order: int | None = None) -> HankelBlock:
    """Persistently excited experiment packaged as one-step data matrices."""
    order = order if order is not None else sys.n + 1
    T = T if T is not None else (sys.m + 1) * order - 1
    u = generate_pe_input(sys.m, T, order, 1.0, rng)
    x0 = rng.uniform(-1, 1, sys.n)
    traj = simulate_lti(sys, x0, u)
    return HankelBlock.from_trajectory(traj)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
