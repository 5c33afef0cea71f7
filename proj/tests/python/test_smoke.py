import math

import numpy as np
import pytest

import penalearn as pl


def test_registry():
    assert pl.problem_names() == ["rosenbrock-1c", "rosenbrock-3c", "ackley-1c", "ackley-3c"]
    spec = pl.make_problem("rosenbrock-1c")
    assert spec.decision_dim == 2
    assert spec.default_net_shape == [2, 20, 20, 2]
    with pytest.raises(pl.RegistryError):
        pl.make_problem("nope")


def test_objective_gradient_matches_finite_differences():
    spec = pl.make_problem("rosenbrock-1c")
    x, p = np.array([0.3, -0.2]), np.array([5.0, 0.1])
    value, grad = pl.objective(spec, x, p)
    assert value == pytest.approx(5.0 * (x[1] - x[0] ** 2) ** 2 + (0.1 - x[0]) ** 2)
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (pl.objective(spec, x + e, p)[0] - pl.objective(spec, x - e, p)[0]) / (2 * h)
        assert grad[i] == pytest.approx(fd, rel=1e-6)


def test_penalty_terms():
    spec = pl.make_problem("rosenbrock-1c")
    p = np.array([1.0, 1.0])
    inside = pl.total_loss(spec, np.array([0.1, 0.1]), p)
    assert inside["penalty"] == 0.0
    outside = pl.total_loss(spec, np.array([1.0, 1.0]), p, pl.PenaltyConfig(eta=10.0, gamma=2.0))
    assert outside["penalty"] == pytest.approx(10.0)
    assert outside["loss"] == pytest.approx(outside["objective"] + outside["penalty"])


def test_mac_count():
    assert pl.mac_count([2, 20, 20, 2]) == 480
    assert pl.mac_count([2, 10, 20, 20, 20, 10, 2]) == 1240


def test_train_predict_roundtrip(tmp_path):
    spec = pl.make_problem("rosenbrock-1c")
    cfg = pl.TrainConfig()
    cfg.epochs = 30
    cfg.sample_count = 50
    cfg.batch_size = 25
    cfg.log_every = 10
    net, log = pl.train(spec, cfg)
    assert [e["epoch"] for e in log] == [0, 10, 20, 30]
    assert net.layer_sizes == [2, 20, 20, 2]

    batch = pl.sample_params(spec, 5, seed=1)
    assert batch.shape == (5, 2)
    out = net.forward(batch)
    assert np.allclose(out[0], net.predict(batch[0]))

    path = tmp_path / "net.model"
    net.save(path)
    again = pl.Mlp.load(path)
    assert again.to_string() == net.to_string()
    twin, _ = pl.train(spec, cfg)
    assert twin.to_string() == net.to_string()


def test_oracle_reference_point():
    spec = pl.make_problem("rosenbrock-1c")
    sol = pl.oracle_solve(spec, np.array([1.0, 1.0]))
    assert sol.feasible
    assert math.dist(sol.x, (0.8082, 0.5889)) <= 1e-2


def test_benchmark_and_cli(tmp_path):
    spec = pl.make_quadratic_problem()
    cfg = pl.TrainConfig()
    cfg.epochs = 50
    cfg.sample_count = 32
    cfg.batch_size = 16
    net, _ = pl.train(spec, cfg)
    oracle = pl.OracleConfig()
    oracle.starts = 2
    report = pl.benchmark(spec, net, pl.sample_params(spec, 4, seed=2), oracle)
    assert report.row_count == 4
    assert report.aggregates.defined
    assert report.to_csv().startswith("c1,x_dnn1,x_oracle1,")

    status, out, _ = pl.run_cli(["oracle", "--problem", "rosenbrock-1c", "--params", "25,0.3"])
    assert status == 0
    assert "feasible 1" in out
    status, _, err = pl.run_cli(["bench", "--problem", "rosenbrock-1c", "--model", str(tmp_path / "missing")])
    assert status == 2
    assert "missing" in err
