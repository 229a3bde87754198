import json
import math

import pytest

import aqmlab


def test_red_formulas():
    assert aqmlab.ewma_update(0.0, 50.0, 1e-4) == pytest.approx(0.005, rel=1e-12)
    assert aqmlab.red_mark_prob(125.0) == pytest.approx(0.05, rel=1e-12)
    hard = aqmlab.RedParams()
    hard.gentle = False
    assert aqmlab.red_mark_prob(150.0, hard) == 1.0
    assert aqmlab.red_count_corrected(0.05, 10) == pytest.approx(0.1, rel=1e-12)


def test_adaptive_steps():
    assert aqmlab.fred_adapt(0.1, "decreased", 160.0) == pytest.approx((0.3, "increased"))
    assert aqmlab.fred_adapt(0.1, "increased", 160.0)[0] == 0.1
    max_p, next_update = aqmlab.ared_adapt(0.1, 0.3, 140.0, 0.3)
    assert max_p == pytest.approx(0.11, rel=1e-12)
    assert next_update == pytest.approx(0.6)
    assert aqmlab.pi_probability(0.0, 100.0, 110.0) == pytest.approx(1.822e-4, rel=1e-12)


def test_teacher_and_convergence():
    assert aqmlab.teacher(125.0) == pytest.approx(0.1, rel=1e-12)
    assert aqmlab.teacher(150.0) == pytest.approx(0.4, rel=1e-12)
    assert aqmlab.teacher(150.0, gain=math.log(4.0)) == pytest.approx(0.2, rel=1e-12)
    assert aqmlab.convergence_check([125.0] * 300)
    assert not aqmlab.convergence_check([125.0] * 299 + [151.0])


def test_scenario_presets():
    s1 = aqmlab.scenario_spec("scenario1")
    assert s1["max_flows"] == 250
    s = aqmlab.scenario_spec("scenario2", json.dumps({"seed": 7, "aqm": {"name": "pi"}}))
    assert (s["seed"], s["aqm"]) == (7, "pi")
    with pytest.raises(ValueError):
        aqmlab.scenario_spec("scenario1", json.dumps({"no_such_key": 1}))


def test_run_is_deterministic():
    ov = json.dumps({"duration": 15, "aqm": {"name": "red"}})
    a = aqmlab.run_scenario("scenario1", ov, series=True)
    b = aqmlab.run_scenario("scenario1", ov, series=True)
    assert a == b
    assert a["aqm"] == "red"
    assert 0.0 < a["mean_tput_bps"] <= a["capacity_bps"]
    assert len(a["time"]) == len(a["avg_queue"]) > 0


def test_kred_requires_map():
    with pytest.raises(ValueError):
        aqmlab.run_scenario("scenario1", json.dumps({"duration": 1, "aqm": {"name": "kred"}}))


def test_train_save_load_run(tmp_path):
    res = aqmlab.kred_train(seed=42)
    assert res["converged"], res["report"]
    m = res["map"]
    assert m.frozen and (m.rows, m.cols) == (25, 25)
    path = tmp_path / "kred.ksom"
    aqmlab.save_map(m, path)
    loaded = aqmlab.load_map(path)
    assert loaded == m
    assert 0.0 <= loaded.respond(0.6, 0.6) <= 1.0
    out = aqmlab.run_scenario("scenario1", json.dumps({"duration": 30, "aqm": {"name": "kred"}}), loaded)
    assert out["aqm"] == "kred"
    assert loaded.checksum() == m.checksum()


def test_pole_balance():
    assert aqmlab.pole_balance_validate(seed=42)["passed"]


def test_cli(tmp_path, capsys):
    code = aqmlab.cli(["run", "--aqm", "fred", "--duration", "5", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "scenario1_fred.csv").exists()
    assert aqmlab.cli(["run", "--aqm", "kred", "--duration", "1", "--out", str(tmp_path)]) == 1
    assert "requires --map-file" in capsys.readouterr().err
