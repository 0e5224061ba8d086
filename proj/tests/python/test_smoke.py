import math
import os
from pathlib import Path

import pytest

import yoto

CONFIG_DIR = Path(os.environ.get("YOTO_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def test_softmax_weights_grid_point():
    lam = yoto.softmax_weights([0.0, math.log(0.25), math.log(0.1)])
    assert lam == pytest.approx([0.7407, 0.1852, 0.0741], abs=5e-5)


def test_composite_and_gradients():
    assert yoto.composite_loss([0.5, 0.5], [1.0, 3.0]) == 2.0
    assert yoto.hp_gradient_empirical([0.0, 0.0], [1.0, 3.0]) == [0.0, 0.5]
    assert yoto.naive_exp_gradient([0.0, 0.0], [1.0, 3.0]) == [1.0, 3.0]
    assert yoto.regularizer_value([0.0, 0.0, 0.0], 1.0) == pytest.approx(0.28768, abs=5e-6)
    assert yoto.regularizer_gradient([0.0, 0.0]) == [0.0, 0.5]


def test_central_fd_matches_analytic():
    fd = yoto.central_fd(lambda x: x[0] ** 2 + x[1] ** 2, [1.0, 2.0])
    assert fd == pytest.approx([2.0, 4.0], abs=1e-7)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        yoto.softmax_weights([1.0, 0.0])
    with pytest.raises(ValueError):
        yoto.naive_exp_gradient([0.0, 0.0], [1.0, 0.0])


def test_sgdw_step_examples():
    cfg = yoto.OptimizerConfig()
    cfg.alpha, cfg.beta1, cfg.hp_decay = 0.1, 0.0, 0.0
    cfg.schedule = yoto.ScheduleKind.CONSTANT
    params, hps = yoto.sgdw_yoto_step(yoto.ParamState([1.0]), yoto.init_hp_state(1, 1.0),
                                      [2.0], [0.0, 0.0], 1, cfg)
    assert params.w == [pytest.approx(0.8)]
    assert hps.mu == [0.0, 0.0]

    cfg.kind = yoto.OptimizerKind.ADAMW
    cfg.weight_decay = 0.1
    params, _ = yoto.adamw_yoto_step(yoto.ParamState([1.0]), yoto.init_hp_state(1, 1.0),
                                     [0.0], [0.0, 0.0], 1, cfg)
    assert params.w == [pytest.approx(0.99)]


def test_schedule_multiplier():
    cfg = yoto.OptimizerConfig()
    cfg.total_steps = 100
    cfg.schedule = yoto.ScheduleKind.COSINE
    assert yoto.schedule_multiplier(100, cfg) == pytest.approx(0.0, abs=1e-15)


def test_gradcheck_suite_passes():
    report = yoto.gradcheck(trials=100, tol=1e-6)
    assert report["pass"]
    assert len(report["reports"]) == 4


def test_training_from_config_text():
    text = (CONFIG_DIR / "demo.cfg").read_text()
    out = yoto.run_training(text, seed=0, overrides=["train.steps=100", "train.record_every=20"])
    assert not out["diverged"]
    ts = [r["t"] for r in out["trajectory"]]
    assert ts == [0, 20, 40, 60, 80, 100]
    for rec in out["trajectory"]:
        assert rec["mu"][0] == 0.0
        assert sum(rec["lambda"]) == pytest.approx(1.0, abs=1e-12)


def test_training_is_deterministic():
    text = (CONFIG_DIR / "demo.cfg").read_text()
    a = yoto.run_training(text, seed=1, overrides=["train.steps=50"])
    b = yoto.run_training(text, seed=1, overrides=["train.steps=50"])
    assert a["final_parameters"] == b["final_parameters"]


def test_bad_config_raises():
    with pytest.raises(yoto.ConfigError):
        yoto.run_training("no.such.key = 1\n")
