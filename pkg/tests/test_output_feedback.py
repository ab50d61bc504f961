import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddctl.config import SolveConfig
from ddctl.hankel import RankConditionError
from ddctl.lti import benchmark
from ddctl.oracles import spectral_radius
from ddctl.output_feedback import (
    ChiData,
    IoCoefficients,
    OutputController,
    build_chi_data,
    chi_state,
    closed_loop_matrix,
    companion_realization,
    cosimulate,
    design_output_feedback,
    io_predictor,
    realize_controller,
    simulate_io,
)

CFG = SolveConfig()

# two-cart coefficient row of the published controller: (d_1..d_4, -c_1..-c_4)
K_CART = np.array([1.1837, -1.5214, 1.3408, -1.4770, 0.0005, -0.5035, -0.9589, -0.9620])


def cart_experiment(seed: int, T: int = 9, amplitude: float = 1.0):
    coeffs = benchmark("two_cart_io")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-amplitude, amplitude, (coeffs.n + T, 1))
    y = simulate_io(coeffs, u)
    return coeffs, u, y


def random_io_plant(rng, n: int) -> IoCoefficients:
    # poles spread around the unit circle, redrawn until clearly coprime
    for _ in range(50):
        radii = rng.uniform(0.5, 1.1, n)
        angles = rng.uniform(0, np.pi, n)
        poles = []
        i = 0
        while len(poles) < n:
            if n - len(poles) >= 2 and rng.uniform() < 0.5:
                poles += [radii[i] * np.exp(1j * angles[i]), radii[i] * np.exp(-1j * angles[i])]
            else:
                poles.append(radii[i] * np.cos(angles[i]))
            i += 1
        pa = np.real(np.poly(np.array(poles[:n])))
        a = pa[1:][::-1]  # a_1..a_n with a_n the z^{n-1} weight reversed to oldest-first
        b = rng.uniform(-1, 1, n)
        plant = IoCoefficients(n=n, a=a, b=b)
        if plant.coprimeness() > 1e-6:
            return plant
    raise RuntimeError("no coprime draw")


# ---------------------------------------------------------------------------
# history state and companion form


def test_chi_state_order_one():
    u = np.array([5.0, 6.0])
    y = np.array([3.0, 4.0])
    assert np.array_equal(chi_state(u, y, 1, 1), [3.0, 5.0])


def test_chi_state_order_two():
    u = np.array([9.0, 5.0, 6.0])
    y = np.array([9.0, 3.0, 4.0])
    assert np.array_equal(chi_state(u, y, 3, 2), [3.0, 4.0, 5.0, 6.0])


def test_chi_state_insufficient_history():
    with pytest.raises(IndexError):
        chi_state(np.zeros(3), np.zeros(3), 2, 3)


def test_chi_state_advances_with_companion_dynamics():
    coeffs, u, y = cart_experiment(seed=0, T=20)
    A, B, _ = companion_realization(coeffs)
    n = coeffs.n
    for k in range(5, 12):
        chi_k = chi_state(u, y, k, n, start=-n)
        chi_next = chi_state(u, y, k + 1, n, start=-n)
        pred = A @ chi_k + B @ u[k + n]
        assert np.max(np.abs(chi_next - pred)) <= 1e-12


def test_companion_order_one_structure():
    a1, b1 = 0.7, 2.0
    A, B, C = companion_realization(IoCoefficients(n=1, a=[a1], b=[b1]))
    assert np.allclose(A, [[-a1, b1], [0.0, 0.0]])
    assert np.allclose(B.reshape(-1), [0.0, 1.0])
    assert np.allclose(C, [[-a1, b1]])


def test_companion_two_cart_matches_direct_recursion():
    coeffs, u, y = cart_experiment(seed=3, T=50)
    A, B, C = companion_realization(coeffs)
    assert A.shape == (8, 8)
    n = coeffs.n
    chi = chi_state(u, y, 0, n, start=-n)
    for k in range(50):
        y_pred = C @ chi
        assert abs(y_pred - y[k + n]) <= 1e-9  # y[k + n] is the sample at time k
        chi = A @ chi + B @ u[k + n]


def test_companion_mimo_reduces_to_siso():
    a = np.array([0.3, -0.5, 0.2])
    b = np.array([1.0, 0.5, -0.25])
    siso = companion_realization(IoCoefficients(n=3, a=a, b=b))
    mimo = companion_realization(
        IoCoefficients(n=3, a=a.reshape(3, 1, 1), b=b.reshape(3, 1, 1))
    )
    for M, N in zip(siso, mimo):
        assert np.array_equal(M, N)


# ---------------------------------------------------------------------------
# data matrices


def test_build_chi_data_minimal_example():
    u = np.array([10.0, 20.0, 30.0])  # u(-1), u(0), u(1)
    y = np.array([1.0, 2.0, 3.0])
    cd = build_chi_data(u, y, n=1, T=2)
    assert np.array_equal(cd.U0, [[20.0, 30.0]])
    assert np.array_equal(cd.X0h, [[1.0, 2.0], [10.0, 20.0]])
    assert np.array_equal(cd.X1h, [[2.0, 3.0], [20.0, 30.0]])


def test_build_chi_data_requires_pre_window():
    with pytest.raises(ValueError):
        build_chi_data(np.zeros(5), np.zeros(5), n=2, T=4)


def test_chi_data_stacks_shifted_hankels():
    from ddctl.hankel import build_hankel

    coeffs, u, y = cart_experiment(seed=1)
    n, T = coeffs.n, 9
    cd = build_chi_data(u, y, n, T)
    stacked = np.vstack([u[n : n + T].T, build_hankel(y, 0, n, T), build_hankel(u, 0, n, T)])
    assert np.array_equal(np.vstack([cd.U0, cd.X0h]), stacked)


def test_chi_data_rank_two_cart():
    coeffs, u, y = cart_experiment(seed=2)
    cd = build_chi_data(u, y, coeffs.n, 9)
    chk = cd.rank_check()
    assert chk.verdict and chk.rank == 2 * coeffs.n + 1


def test_chi_data_constant_input_rank_deficient():
    coeffs = benchmark("two_cart_io")
    u = np.ones((13, 1))
    y = simulate_io(coeffs, u)
    cd = build_chi_data(u, y, coeffs.n, 9)
    assert not cd.rank_check().verdict


def test_chi_data_shift_structure():
    coeffs, u, y = cart_experiment(seed=5)
    cd = build_chi_data(u, y, coeffs.n, 9)
    n, p, m = coeffs.n, 1, 1
    # all but the newest block row of the shifted stack appear one row up
    assert np.array_equal(cd.X1h[: (n - 1) * p], cd.X0h[p : n * p])
    assert np.array_equal(cd.X1h[n * p : n * p + (n - 1) * m], cd.X0h[n * p + m :])


# ---------------------------------------------------------------------------
# prediction


def test_io_predictor_recovers_order_one_model(rng):
    plant = IoCoefficients(n=1, a=[0.5], b=[1.0])
    u = rng.uniform(-1, 1, (8, 1))
    y = simulate_io(plant, u)
    cd = build_chi_data(u, y, 1, 7)
    pred = io_predictor(cd)
    A, B, _ = companion_realization(plant)
    M_ref = np.hstack([B, A])[:, [0, 1, 2]]  # columns ordered (u, chi)
    # predictor maps (u, chi) while the companion maps (chi, u)
    got = np.hstack([pred.M[:, 1:], pred.M[:, :1]])
    assert np.allclose(got, np.hstack([A, B]), atol=1e-9)


def test_io_predictor_two_cart_one_step(rng):
    coeffs, u, y = cart_experiment(seed=7, T=20)
    n = coeffs.n
    cd = build_chi_data(u[: n + 12], y[: n + 12], n, 12)
    pred = io_predictor(cd)
    for k in range(12, 16):  # held-out steps
        chi_k = chi_state(u, y, k, n, start=-n)
        chi_next = chi_state(u, y, k + 1, n, start=-n)
        assert np.max(np.abs(pred.predict_chi(u[k + n], chi_k) - chi_next)) <= 1e-8
        assert np.max(np.abs(pred.predict_y(chi_k) - y[k + n])) <= 1e-8


def test_io_predictor_zero_maps_to_zero(rng):
    coeffs, u, y = cart_experiment(seed=8)
    cd = build_chi_data(u, y, coeffs.n, 9)
    pred = io_predictor(cd)
    assert np.max(np.abs(pred.predict_chi(np.zeros(1), np.zeros(8)))) == 0.0


def test_io_predictor_requires_rank():
    coeffs = benchmark("two_cart_io")
    u = np.ones((13, 1))
    y = simulate_io(coeffs, u)
    with pytest.raises(RankConditionError):
        io_predictor(build_chi_data(u, y, coeffs.n, 9))


# ---------------------------------------------------------------------------
# design


def test_two_cart_design_stabilizes():
    coeffs, u, y = cart_experiment(seed=0)
    cd = build_chi_data(u, y, coeffs.n, 9)
    controller, rep = design_output_feedback(cd, CFG, plant=coeffs)
    assert rep.feasible
    assert rep.rho_oracle < 1.0
    assert rep.rho_data == pytest.approx(rep.rho_oracle, abs=1e-6)


def test_lifted_data_loop_equals_model_loop():
    # the data-side closed loop reproduces the lifted model-side matrix
    coeffs, u, y = cart_experiment(seed=4)
    cd = build_chi_data(u, y, coeffs.n, 9)
    controller, rep = design_output_feedback(cd, CFG, plant=coeffs)
    S = np.vstack([cd.U0, cd.X0h])
    target = np.vstack([controller.gain_row, np.eye(8)])
    G = np.linalg.lstsq(S, target, rcond=None)[0]
    data_side = cd.X1h @ G
    model_side = closed_loop_matrix(coeffs, controller)
    assert np.max(np.abs(data_side - model_side)) <= 1e-8


def test_io_coefficients_json_round_trip():
    coeffs = benchmark("two_cart_io")
    doc = coeffs.to_dict()
    assert doc["n"] == 4
    back = IoCoefficients.from_dict(doc)
    assert np.array_equal(back.a, coeffs.a)
    assert np.array_equal(back.b, coeffs.b)


def test_published_two_cart_controller_stabilizes():
    coeffs = benchmark("two_cart_io")
    controller = OutputController(n=4, gain_row=K_CART.reshape(1, -1))
    assert spectral_radius(closed_loop_matrix(coeffs, controller)) < 1.0


def test_order_one_unstable_plant_design(rng):
    plant = IoCoefficients(n=1, a=[-2.0], b=[1.0])  # pole at 2
    u = rng.uniform(-1, 1, (9, 1))
    y = simulate_io(plant, u)
    cd = build_chi_data(u, y, 1, 8)
    controller, rep = design_output_feedback(cd, CFG, plant=plant)
    assert rep.feasible
    M = closed_loop_matrix(plant, controller)
    assert np.max(np.abs(np.linalg.eigvals(M))) < 1.0


def test_design_soundness_over_random_plants():
    rng = np.random.default_rng(77)
    feasible = 0
    for trial in range(100):
        n = int(rng.integers(1, 5))
        plant = random_io_plant(rng, n)
        T = 2 * n + 3
        u = rng.uniform(-1, 1, (n + T, 1))
        y = simulate_io(plant, u)  # record over times -n..T-1 from rest
        cd = build_chi_data(u, y, n, T)
        if not cd.rank_check().verdict:
            continue
        try:
            controller, rep = design_output_feedback(cd, CFG, plant=plant)
        except RankConditionError:
            continue
        if rep.feasible:
            feasible += 1
            rho = spectral_radius(closed_loop_matrix(plant, controller))
            assert rho < 1.0, f"unsound output design at trial {trial}: rho={rho}"
    assert feasible >= 50


def test_mimo_design_soundness(rng):
    # two outputs, one input, order 1: lifted dimension (m+p)n = 3
    n, p, m = 1, 2, 1
    A1 = np.array([[[1.2, 0.1], [0.0, 0.8]]])
    B1 = np.array([[[1.0], [0.5]]])
    plant = IoCoefficients(n=n, a=A1, b=B1)
    T = 12
    u = rng.uniform(-1, 1, (n + T, m))
    y = simulate_io(plant, u)  # record over times -n..T-1 from rest
    cd = build_chi_data(u, y, n, T)
    assert cd.p == p and cd.m == m
    controller, rep = design_output_feedback(cd, CFG, plant=plant)
    assert rep.feasible
    assert spectral_radius(closed_loop_matrix(plant, controller)) < 1.0


# ---------------------------------------------------------------------------
# closed-loop matrix and realization


def test_closed_loop_matrix_order_one():
    plant = IoCoefficients(n=1, a=[0.7], b=[2.0])
    controller = OutputController(n=1, gain_row=np.array([[0.3, -0.4]]))  # d1=0.3, c1=0.4
    M = closed_loop_matrix(plant, controller)
    assert np.allclose(M, [[-0.7, 2.0], [0.3, -0.4]])


def test_closed_loop_matrix_zero_controller():
    plant = benchmark("two_cart_io")
    controller = OutputController(n=4, gain_row=np.zeros((1, 8)))
    M = closed_loop_matrix(plant, controller)
    A, _, _ = companion_realization(plant)
    assert np.array_equal(M[:7], A[:7])
    assert np.all(M[7] == 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_closed_loop_matrix_two_paths(seed, n):
    rng = np.random.default_rng(seed)
    plant = IoCoefficients(n=n, a=rng.uniform(-1, 1, n), b=rng.uniform(-1, 1, n))
    row = rng.uniform(-1, 1, (1, 2 * n))
    controller = OutputController(n=n, gain_row=row)
    A, B, _ = companion_realization(plant)
    direct = closed_loop_matrix(plant, controller)
    assert np.max(np.abs(direct - (A + B @ row))) <= 1e-14


def test_realize_published_controller():
    A_c, B_c, C_c, D_c = realize_controller(K_CART, 4)
    assert np.allclose(
        A_c,
        [
            [-0.9620, 1.0, 0.0, 0.0],
            [-0.9589, 0.0, 1.0, 0.0],
            [-0.5035, 0.0, 0.0, 1.0],
            [0.0005, 0.0, 0.0, 0.0],
        ],
    )
    assert np.allclose(B_c.reshape(-1), [-1.4770, 1.3408, -1.5214, 1.1837])
    assert np.array_equal(C_c, [[1.0, 0.0, 0.0, 0.0]])
    assert np.array_equal(D_c, [[0.0]])


def test_realize_order_one():
    A_c, B_c, C_c, D_c = realize_controller(np.array([0.25, -0.5]), 1)
    assert A_c.item() == -0.5
    assert B_c.item() == 0.25
    assert C_c.item() == 1.0
    assert D_c.item() == 0.0


def test_realize_rejects_wrong_length():
    with pytest.raises(ValueError):
        realize_controller(np.zeros(5), 2)


def test_realization_reproduces_coefficient_recursion(rng):
    # feed a random signal: realized state space == difference equation
    n = 3
    row = rng.uniform(-1, 1, 2 * n)
    d, c = row[:n], -row[n:]
    A_c, B_c, C_c, _ = realize_controller(row, n)
    inputs = rng.uniform(-1, 1, 30)
    as_model = IoCoefficients(n=n, a=c, b=d)
    ref = simulate_io(as_model, inputs.reshape(-1, 1)).reshape(-1)
    xi = np.zeros(n)
    got = np.empty(30)
    for k in range(30):
        got[k] = (C_c @ xi).item()
        xi = A_c @ xi + (B_c[:, 0] * inputs[k])
    assert np.allclose(got, ref, atol=1e-12)


def test_cosimulation_decays_iff_stable(rng):
    coeffs, u, y = cart_experiment(seed=11)
    cd = build_chi_data(u, y, coeffs.n, 9)
    controller, rep = design_output_feedback(cd, CFG, plant=coeffs)
    assert rep.feasible
    ys, us = cosimulate(coeffs, controller, y_init=rng.uniform(-1, 1, 4), u_init=rng.uniform(-1, 1, 4), steps=200)
    assert abs(ys[-1]) < 1e-3
    unstable = OutputController(n=4, gain_row=np.zeros((1, 8)))
    ys2, _ = cosimulate(coeffs, unstable, y_init=np.ones(4), u_init=np.zeros(4), steps=200)
    assert np.max(np.abs(ys2)) > 1e-2  # marginally stable plant does not settle


def test_cosimulation_matches_lifted_spectrum(rng):
    # the realized-controller loop decays at the lifted spectral radius
    coeffs, u, y = cart_experiment(seed=13)
    cd = build_chi_data(u, y, coeffs.n, 9)
    controller, rep = design_output_feedback(cd, CFG, plant=coeffs)
    rho = spectral_radius(closed_loop_matrix(coeffs, controller))
    ys, _ = cosimulate(coeffs, controller, y_init=np.ones(4), u_init=np.zeros(4), steps=400)
    tail = np.abs(ys[250:])
    rate = (tail[-1] / tail[0]) ** (1.0 / 149.0)
    assert rate == pytest.approx(rho, abs=0.05)


def test_coprimeness_diagnostic():
    assert benchmark("two_cart_io").coprimeness() > 1e-6
    # shared root at z = 0.5 collapses the resultant
    shared = IoCoefficients(n=2, a=[0.25 * 1.0, -(0.5 + 0.5)], b=[-0.5 * 1.0, 1.0])
    assert shared.coprimeness() < 1e-12
