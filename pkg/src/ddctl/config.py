"""Numerical configuration shared by the design and LMI layers.

All tolerance and margin choices live here so that every design report can
echo the exact configuration it ran with.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path


@dataclass(frozen=True)
class SolveConfig:
    """Tolerances, margins and solver settings for LMI-based designs.

    Attributes:
        eps_rel: relative margin turning strict inequalities into
            semidefinite ones (constraint >= eps * I with
            eps = eps_rel * max(1, data scale)).
        rank_rtol: relative threshold for numerical rank, singular values
            above max(rows, cols) * sigma_max * rank_rtol count.
        stability_margin: a gain is reported stabilizing when the spectral
            radius is below 1 - stability_margin.
        check_tol: absolute slack allowed when re-certifying a returned
            solution against its constraints.
        solver: primary conic solver name (cvxpy identifier).
        fallback_solver: solver tried when the primary one fails; empty
            string disables the fallback.
        max_iters: iteration cap passed to first-order solvers.
        scs_eps: accuracy target for the SCS fallback.
        tight_tolerance: interior-point gap/feasibility target used for
            trace-minimization programs, where gain accuracy matters.
        alpha_min: lower bound standing in for "alpha > 0".
        refine_fraction: after maximizing alpha, the returned solution is
            re-selected at refine_fraction * alpha_max with minimum-norm
            decision matrix; None or 0 keeps the maximizer itself.
        normalize_data: rescale data matrices to unit magnitude before
            solving (the scaled data is a trajectory of the same system).
        lqr_retry_scale: multiplier applied to the margin when the LQR
            program returns a nearly singular state-block product and is
            retried once.
        input_amplitude: default excitation amplitude for experiments.
        pendulum_amplitude: excitation amplitude for the pendulum benchmark.
        pe_retries: redraw attempts when generating persistently exciting
            inputs.
    """

    eps_rel: float = 1e-6
    rank_rtol: float = 1e-12
    stability_margin: float = 1e-8
    check_tol: float = 1e-6
    solver: str = "CLARABEL"
    fallback_solver: str = "SCS"
    max_iters: int = 50_000
    scs_eps: float = 1e-7
    tight_tolerance: float = 1e-12
    alpha_min: float = 1e-12
    refine_fraction: float | None = 0.5
    normalize_data: bool = True
    lqr_retry_scale: float = 10.0
    # The experiment amplitude is a free choice: the source experiments used
    # unit draws without recording the exact range, so 1.0 is a default, not
    # a derived value.
    input_amplitude: float = 1.0
    pendulum_amplitude: float = 0.1
    pe_retries: int = 100

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **changes) -> "SolveConfig":
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict) -> "SolveConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "SolveConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


DEFAULT_CONFIG = SolveConfig()
