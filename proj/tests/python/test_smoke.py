import json
import math

import _sao as sao


def test_scaling_basics():
    assert abs(sao.length_scale(0.1) - 10.50149) < 1e-4
    beta = math.exp(-8.0 / 3.0)
    assert abs(sao.length_scale(beta) - math.exp(8.0 / 3.0)) < 1e-9
    m2 = sao.mean_explosion_time(2.0)
    assert abs(sao.a_L_inverse(m2) - 2.0) < 1e-4


def test_zero_noise_riccati_oracle():
    path = sao.BrownianPath.zero(0.0, 10.0, 2e-4)
    traj = sao.integrate_forward(path, sao.DriftSpec(-1.0), 0.0, sao.PLUS_INFINITY, 10.0)
    assert len(traj.explosions) == 3
    for i, z in enumerate(traj.explosions):
        assert abs(z - math.pi * (i + 1)) < 1e-6


def test_sine_spectrum():
    path = sao.BrownianPath.zero(0.0, 1.0, 1e-4)
    lam, tie = sao.eigenvalue_bisect(path, 0.0, 1.0, 1, 1e-5)
    assert abs(lam - math.pi**2) < 1e-3
    assert not tie
    op = sao.build_operator(path, 0.0, 1.0, 2000)
    assert sao.sturm_count(op, -50.0) == 2


def test_ensemble_and_stats():
    s = sao.sample_ensemble_edge(64, 2.0, 7, 2)
    assert s.mu[0] >= s.mu[1]
    d, p = sao.ks_statistic([(i - 0.5) / 100.0 for i in range(1, 101)], sao.NamedCdf.Uniform01)
    assert abs(d - 0.005) < 1e-9
    assert abs(sao.ou_exit_laplace(1.0, 1.0, 1.0) - math.exp(-0.5)) < 1e-9


def test_run_experiment_roundtrip(tmp_path):
    cfg = {
        "kind": "explosions",
        "a": 0.5,
        "beta": 0.0,
        "T": 30.0,
        "replicas": 4,
        "dt": 1e-3,
        "tol": 1e-5,
        "seed": 11,
        "workers": 2,
    }
    report = json.loads(sao.run_experiment(json.dumps(cfg)))
    assert report["schema_version"] == sao.schema_version()
    assert len(report["replicas"]) == 4
    report2 = json.loads(sao.run_experiment(json.dumps(cfg)))
    assert report["replicas"] == report2["replicas"]
