"""Data-driven controller design from raw experiment data.

Builds Hankel-style data matrices from input/state or input/output records,
poses the stabilization, LQR, noise-robust and output-feedback designs as
data-dependent matrix inequalities, and verifies every result with
independent model-based oracles.
"""

from .config import DEFAULT_CONFIG, SolveConfig
from .design import (
    DesignReport,
    alpha_sufficiency_threshold,
    gershgorin_noise_bound,
    lqr_dt,
    noise_bound_gammas,
    robust_stabilize,
    snr_gamma,
    stabilize_ct,
    stabilize_dt,
    stabilize_nonlinear,
)
from .hankel import (
    HankelBlock,
    NoisyHankelBlock,
    RankConditionError,
    build_hankel,
    build_toeplitz_observability,
    check_rank_condition,
    fundamental_lemma_solve,
    is_persistently_exciting,
    restrict,
)
from .data_repr import dmd_predictor, gk_for_gain, open_loop_predictor, verify_gain
from .lti import (
    LtiSystem,
    NonlinearPlant,
    PendulumParams,
    Trajectory,
    benchmark,
    generate_pe_input,
    pendulum_plant,
    simulate_lti,
    simulate_noisy,
    simulate_pendulum,
)
from .oracles import dare, dlyap, h2_norm, min_gamma, spectral_radius
from .output_feedback import (
    ChiData,
    IoCoefficients,
    OutputController,
    build_chi_data,
    chi_state,
    closed_loop_matrix,
    companion_realization,
    design_output_feedback,
    io_predictor,
    realize_controller,
    simulate_io,
)

__version__ = "0.1.0"
