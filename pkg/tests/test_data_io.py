import json

import numpy as np

from ddctl.data_io import load_system, load_trajectory, save_report, save_trajectory
from ddctl.design import stabilize_dt
from ddctl.lti import Trajectory, benchmark, simulate_noisy, simulate_pendulum, PendulumParams

from conftest import pe_hankel_block


def test_noisy_trajectory_round_trip(tmp_path, rng):
    sys = benchmark("batch_reactor")
    traj = simulate_noisy(sys, rng.uniform(-1, 1, 4), rng.uniform(-1, 1, (15, 2)), 0.01, seed=4)
    traj = Trajectory(u=traj.u, x=traj.x, y=traj.y, zeta=traj.zeta, w=traj.w, seed=4, bench="batch_reactor")
    path = tmp_path / "run.csv"
    save_trajectory(traj, path)
    back = load_trajectory(path)
    for name in ("u", "x", "y", "zeta", "w"):
        assert np.array_equal(getattr(back, name), getattr(traj, name)), name
    assert back.seed == 4
    assert back.bench == "batch_reactor"
    meta = json.loads((tmp_path / "run.json").read_text())
    assert meta["n"] == 4 and meta["m"] == 2 and meta["p"] == 4
    assert meta["T"] == 15


def test_pendulum_trajectory_keeps_remainder(tmp_path):
    traj, _ = simulate_pendulum(PendulumParams(), [0.05, -0.02], np.linspace(-0.1, 0.1, 5))
    path = tmp_path / "pend.csv"
    save_trajectory(traj, path)
    back = load_trajectory(path)
    assert np.array_equal(back.d, traj.d)
    assert back.dt == 0.1


def test_io_trajectory_negative_index(tmp_path, rng):
    from ddctl.bench import two_cart_experiment

    traj = two_cart_experiment(T=9, seed=1)
    path = tmp_path / "cart.csv"
    save_trajectory(traj, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 1 + 13  # header + k = -4..8
    assert lines[1].split(",")[0] == "-4"
    assert lines[-1].split(",")[0] == "8"
    back = load_trajectory(path)
    assert back.k0 == -4
    assert np.array_equal(back.u, traj.u)
    assert np.array_equal(back.y, traj.y)


def test_final_row_has_no_input(tmp_path, rng):
    sys = benchmark("batch_reactor")
    traj = Trajectory(u=rng.uniform(-1, 1, (3, 2)), x=rng.uniform(-1, 1, (4, 4)))
    path = tmp_path / "t.csv"
    save_trajectory(traj, path)
    last = path.read_text().strip().splitlines()[-1].split(",")
    assert last[0] == "3"
    assert last[1] == "" and last[2] == ""  # u columns empty at k = T
    back = load_trajectory(path)
    assert back.u.shape == (3, 2)
    assert back.x.shape == (4, 4)


def test_report_json(tmp_path, rng):
    sys = benchmark("batch_reactor")
    rep = stabilize_dt(pe_hankel_block(sys, rng, T=15), true_system=sys)
    path = tmp_path / "report.json"
    save_report(rep, path)
    doc = json.loads(path.read_text())
    assert doc["schema"] == "ddctl-report-1"
    assert doc["status"] == "feasible"
    assert "timestamp" in doc
    assert np.asarray(doc["K"]).shape == (2, 4)


def test_load_system(tmp_path):
    doc = {"A": [[0.5, 0.0], [0.1, 0.2]], "B": [[1.0], [0.0]]}
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(doc))
    sys = load_system(path)
    assert sys.n == 2 and sys.m == 1 and sys.p == 2
    assert np.allclose(sys.C, np.eye(2))
