"""Acceptance gate: every criterion runs end to end at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail line
per criterion.  Later criteria reuse the designs produced by earlier ones
(the cross-check sweep needs them), so the module is meant to run in order.
"""

import time

import numpy as np
import pytest

from ddctl.config import SolveConfig
from ddctl.data_repr import dmd_predictor, open_loop_predictor, verify_gain
from ddctl.design import lqr_dt, robust_stabilize, stabilize_ct, stabilize_dt, stabilize_nonlinear
from ddctl.hankel import (
    HankelBlock,
    NoisyHankelBlock,
    build_hankel,
    check_rank_condition,
    fundamental_lemma_solve,
)
from ddctl.lti import (
    PendulumParams,
    benchmark,
    generate_pe_input,
    pendulum_plant,
    simulate_lti,
    simulate_noisy,
    simulate_nonlinear_closed_loop,
    simulate_pendulum,
)
from ddctl.oracles import dare, spectral_radius
from ddctl.output_feedback import (
    IoCoefficients,
    OutputController,
    build_chi_data,
    closed_loop_matrix,
    companion_realization,
    design_output_feedback,
    simulate_io,
)
from ddctl.design import noise_bound_gammas, snr_gamma

from conftest import random_controllable_system

CFG = SolveConfig()

# designs accumulated by criteria 3-8 for the cross-verification sweep
REGISTRY: list[dict] = []


def _register(tag: str, U0, X0_exact, X1_exact, K, A, B):
    REGISTRY.append(
        dict(tag=tag, U0=np.asarray(U0), X0=np.asarray(X0_exact), X1=np.asarray(X1_exact),
             K=np.asarray(K), A=np.asarray(A), B=np.asarray(B))
    )


def _report_line(num: int, ok: bool, detail: str, elapsed: float, budget: float):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} ({detail}; {elapsed:.1f}s / budget {budget:.0f}s)")


def _population(seed=2024, count=100):
    rng = np.random.default_rng(seed)
    pop = []
    for _ in range(count):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 3))
        p = int(rng.integers(1, 3))
        t = int(rng.integers(1, 5))
        sys = random_controllable_system(rng, n, m, p=p)
        order = n + t
        T = (m + 1) * order - 1 + int(rng.integers(0, 3))
        u = generate_pe_input(m, T, order, 1.0, rng)
        traj = simulate_lti(sys, rng.uniform(-1, 1, n), u)
        pop.append((sys, traj, t, rng.integers(0, 2**32)))
    return pop


POPULATION = _population()


def test_criterion_1_fundamental_lemma_suite():
    budget, start = 30.0, time.perf_counter()
    for sys, traj, t, sub in POPULATION:
        n, m = sys.n, sys.m
        T = traj.u.shape[0]
        N = T - t + 1
        U_block = build_hankel(traj.u, 0, t, N)
        assert check_rank_condition(U_block, traj.x[:N].T).verdict
        H = np.vstack([U_block, build_hankel(traj.y, 0, t, N)])
        rng = np.random.default_rng(sub)
        for _ in range(10):
            fresh = simulate_lti(sys, rng.uniform(-1, 1, n), rng.uniform(-1, 1, (t, m)))
            target = np.concatenate([fresh.u.reshape(-1), fresh.y.reshape(-1)])
            _, resid = fundamental_lemma_solve(H, target)
            assert resid <= 1e-8
    elapsed = time.perf_counter() - start
    _report_line(1, True, "100 systems x 10 trajectories, residual <= 1e-8", elapsed, budget)
    assert elapsed < budget


def test_criterion_2_open_loop_recovery():
    budget, start = 10.0, time.perf_counter()
    for sys, traj, _, _ in POPULATION:
        h = HankelBlock.from_trajectory(traj)
        pred = open_loop_predictor(h)
        assert np.linalg.norm(pred.M - np.hstack([sys.B, sys.A]), "fro") <= 1e-8
        alt = dmd_predictor(h)
        assert np.linalg.norm(pred.M - alt.M, "fro") <= 1e-10
    elapsed = time.perf_counter() - start
    _report_line(2, True, "recovery <= 1e-8, factorization agreement <= 1e-10", elapsed, budget)
    assert elapsed < budget


def test_criterion_3_reactor_stabilization():
    budget, start = 60.0, time.perf_counter()
    sys = benchmark("batch_reactor")
    wins = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        u = generate_pe_input(2, 15, 5, 1.0, rng)
        traj = simulate_lti(sys, rng.uniform(-1, 1, 4), u)
        h = HankelBlock.from_trajectory(traj)
        rep = stabilize_dt(h, CFG, true_system=sys)
        if rep.feasible and rep.rho_oracle <= 1.0 - 1e-6:
            wins += 1
            _register("reactor-stab", h.U0, h.X0, h.X1, rep.K, sys.A, sys.B)
    elapsed = time.perf_counter() - start
    _report_line(3, wins >= 95, f"{wins}/100 stabilized", elapsed, budget)
    assert wins >= 95
    assert elapsed < budget


def test_criterion_4_lqr_matches_riccati():
    budget, start = 30.0, time.perf_counter()
    sys = benchmark("batch_reactor")
    ref = dare(sys.A, sys.B, np.eye(4), np.eye(2))
    assert ref.residual <= 1e-10
    gaps = []
    for seed in range(3):
        rng = np.random.default_rng(1000 + seed)
        u = generate_pe_input(2, 15, 5, 1.0, rng)
        traj = simulate_lti(sys, rng.uniform(-1, 1, 4), u)
        h = HankelBlock.from_trajectory(traj)
        rep = lqr_dt(h, np.eye(4), np.eye(2), CFG, true_system=sys)
        assert rep.feasible
        gaps.append(np.linalg.norm(rep.K - ref.K, "fro"))
        _register("reactor-lqr", h.U0, h.X0, h.X1, rep.K, sys.A, sys.B)
    elapsed = time.perf_counter() - start
    ok = max(gaps) <= 1e-5
    _report_line(4, ok, f"max gain gap {max(gaps):.2e}, Riccati residual {ref.residual:.1e}", elapsed, budget)
    assert ok
    assert elapsed < budget


def test_criterion_5_noise_robust_rates():
    budget, start = 180.0, time.perf_counter()
    sys = benchmark("batch_reactor")
    wins = {0.01: 0, 0.1: 0}
    for amp in wins:
        for seed in range(100):
            rng = np.random.default_rng(seed)
            u = rng.uniform(-1, 1, (15, 2))
            x0 = rng.uniform(-1, 1, 4)
            traj = simulate_noisy(sys, x0, u, amp, seed=seed + 50_000)
            nh = NoisyHankelBlock.from_trajectory(traj)
            try:
                rep = robust_stabilize(nh, True, CFG, true_system=sys)
            except Exception:
                continue
            if rep.feasible and rep.rho_oracle < 1.0:
                wins[amp] += 1
                clean = nh.noise_free()
                _register("noisy-reactor", clean.U0, clean.X0, clean.X1, rep.K, sys.A, sys.B)
    elapsed = time.perf_counter() - start
    ok = wins[0.01] >= 90 and wins[0.1] > 50
    _report_line(5, ok, f"amp 0.01: {wins[0.01]}/100, amp 0.1: {wins[0.1]}/100", elapsed, budget)
    assert wins[0.01] >= 90
    assert wins[0.1] > 50
    assert elapsed < budget


def test_criterion_6_noise_bound_chain():
    budget, start = 30.0, time.perf_counter()
    rng = np.random.default_rng(60)
    checked = 0
    trial = 0
    while checked < 200 and trial < 1000:
        trial += 1
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 3))
        sys = random_controllable_system(rng, n, m)
        T = (m + 1) * (n + 1) - 1 + 2
        amp = float(rng.uniform(1e-4, 5e-2))
        u = rng.uniform(-1, 1, (T, m))
        traj = simulate_noisy(sys, rng.uniform(-1, 1, n), u, amp, seed=trial)
        nh = NoisyHankelBlock.from_trajectory(traj)
        g = noise_bound_gammas(nh.U0, nh.Z0, nh.W0, nh.W1, nh.Z1)
        if not g.gamma1_ok:
            continue
        measured = snr_gamma(nh.Z1, sys.A @ nh.W0 - nh.W1)
        assert measured <= g.combined * (1.0 + 1e-9), f"chain violated: {measured} > {g.combined}"
        checked += 1
    elapsed = time.perf_counter() - start
    _report_line(6, checked >= 200, f"{checked} draws validated", elapsed, budget)
    assert checked >= 200
    assert elapsed < budget


def test_criterion_7_pendulum_local_stabilization():
    budget, start = 120.0, time.perf_counter()
    plant = pendulum_plant()
    A_lin = np.array([[1.0, 0.1], [0.98, 0.999]])
    B_lin = np.array([[0.0], [0.1]])
    wins = 0
    nonlinear_checked = False
    for seed in range(100):
        rng = np.random.default_rng(seed)
        u = rng.uniform(-0.1, 0.1, 5)
        x0 = rng.uniform(-0.1, 0.1, 2)
        traj, d = simulate_pendulum(PendulumParams(), x0, u)
        h = HankelBlock.from_trajectory(traj)
        try:
            rep = stabilize_nonlinear(plant, h, remainders=d.T, cfg=CFG)
        except Exception:
            continue
        if rep.feasible and spectral_radius(A_lin + B_lin @ rep.K) < 1.0:
            wins += 1
            _register("pendulum", h.U0, h.X0, h.X1 - d.T, rep.K, A_lin, B_lin)
            if not nonlinear_checked:
                xs = simulate_nonlinear_closed_loop(plant, rep.K, np.array([0.1, 0.0]), 200)
                assert np.linalg.norm(xs[200]) <= 1e-3
                nonlinear_checked = True
    elapsed = time.perf_counter() - start
    ok = wins >= 90 and nonlinear_checked
    _report_line(7, ok, f"{wins}/100 stabilized; nonlinear settle verified", elapsed, budget)
    assert wins >= 90
    assert nonlinear_checked
    assert elapsed < budget


def test_criterion_8_two_cart_output_feedback():
    budget, start = 60.0, time.perf_counter()
    coeffs: IoCoefficients = benchmark("two_cart_io")
    n = coeffs.n
    A_lift, B_lift, _ = companion_realization(coeffs)
    published = OutputController(
        n=4,
        gain_row=np.array([[1.1837, -1.5214, 1.3408, -1.4770, 0.0005, -0.5035, -0.9589, -0.9620]]),
    )
    assert spectral_radius(closed_loop_matrix(coeffs, published)) < 1.0
    wins = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        u = rng.uniform(-1, 1, (n + 9, 1))
        y = simulate_io(coeffs, u)
        cd = build_chi_data(u, y, n, 9)
        try:
            controller, rep = design_output_feedback(cd, CFG, plant=coeffs)
        except Exception:
            continue
        if rep.feasible and spectral_radius(closed_loop_matrix(coeffs, controller)) < 1.0:
            wins += 1
            _register("two-cart", cd.U0, cd.X0h, cd.X1h, controller.gain_row, A_lift, B_lift)
    elapsed = time.perf_counter() - start
    ok = wins >= 90
    _report_line(8, ok, f"{wins}/100 stabilized; published coefficients verified", elapsed, budget)
    assert wins >= 90
    assert elapsed < budget


def test_criterion_9_data_vs_model_verification_sweep():
    budget, start = 60.0, time.perf_counter()
    assert len(REGISTRY) >= 300, "earlier criteria did not register designs"
    worst = 0.0
    for entry in REGISTRY:
        h = HankelBlock(U0=entry["U0"], X0=entry["X0"], X1=entry["X1"])
        chk = verify_gain(h, entry["K"])
        rho_model = spectral_radius(entry["A"] + entry["B"] @ entry["K"])
        worst = max(worst, abs(chk.spectral_radius - rho_model))
        assert abs(chk.spectral_radius - rho_model) <= 1e-6, entry["tag"]
    elapsed = time.perf_counter() - start
    _report_line(9, True, f"{len(REGISTRY)} designs swept, worst gap {worst:.1e}", elapsed, budget)
    assert elapsed < budget


def test_criterion_10_continuous_time_designs():
    budget, start = 10.0, time.perf_counter()
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    wins = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        dt = 0.1
        u = rng.uniform(-1, 1, 8)
        x = np.empty((9, 2))
        xdot = np.empty((8, 2))
        x[0] = rng.uniform(-1, 1, 2)
        for k in range(8):
            xdot[k] = (x[k, 1], u[k])
            x[k + 1] = (x[k, 0] + dt * x[k, 1] + 0.5 * dt * dt * u[k], x[k, 1] + dt * u[k])
        rep = stabilize_ct(u.reshape(1, -1), x[:8].T, xdot.T, CFG, true_system=(A, B))
        if rep.feasible and np.max(np.real(np.linalg.eigvals(A + B @ rep.K))) < 0.0:
            wins += 1
    elapsed = time.perf_counter() - start
    ok = wins == 20
    _report_line(10, ok, f"{wins}/20 placed in the open left half plane", elapsed, budget)
    assert wins == 20
    assert elapsed < budget
