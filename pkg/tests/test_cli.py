import json

import numpy as np
import pytest

from thermrom.cases import silver_fr4_pair, single_block
from thermrom.cli import main
from thermrom.compare import compare_traces
from thermrom.core import config_to_dict
from thermrom.errors import IdMismatch, NoOverlap
from thermrom.rom import CharacterizedModel, deviation_piecewise, linear_curve, slope_schedule
from thermrom.trace import TemperatureTrace


def write_config(path, system):
    path.write_text(json.dumps(config_to_dict(system)))
    return str(path)


# -- compare ------------------------------------------------------------------

def trace(times, **series):
    return TemperatureTrace(np.asarray(times, float), np.column_stack(list(series.values())), tuple(series))


def test_compare_identical_is_zero():
    t = np.linspace(0, 10, 11)
    a = trace(t, x=20 + t, y=20 + 2 * t)
    rep = compare_traces(a, a)
    assert rep.avg_percent_error == {"x": 0.0, "y": 0.0}
    assert rep.max_abs_error["x"] == 0.0


def test_compare_one_kelvin_on_ten_kelvin_rise():
    t = np.linspace(0, 10, 11)
    rep = compare_traces(trace(t, x=np.full(11, 30.0)), trace(t, x=np.full(11, 31.0)), t0=20.0)
    assert rep.avg_percent_error["x"] == pytest.approx(10.0)
    assert rep.rmse["x"] == pytest.approx(1.0)


def test_compare_resamples_to_coarser_grid():
    fine = np.linspace(0, 10, 101)
    coarse = np.linspace(0, 10, 11)
    rep = compare_traces(trace(fine, x=20 + fine), trace(coarse, x=20 + coarse))
    assert rep.n_samples == 11
    assert rep.max_abs_error["x"] < 1e-12


def test_compare_errors():
    t = np.linspace(0, 1, 5)
    with pytest.raises(IdMismatch):
        compare_traces(trace(t, x=t), trace(t, y=t))
    with pytest.raises(NoOverlap):
        compare_traces(trace(t, x=t), trace(t + 5, x=t))


def test_compare_speedup():
    t = np.linspace(0, 1, 3)
    rep = compare_traces(trace(t, x=t), trace(t, x=t), oracle_s=2.0, rom_s=0.01)
    assert rep.speedup == pytest.approx(200.0)
    assert "speedup" in rep.table()


def test_trace_csv_round_trip(tmp_path):
    t = np.linspace(0, 1, 7)
    a = trace(t, x=np.sin(t) + 20, y=np.exp(t))
    a.to_csv(tmp_path / "a.csv")
    b = TemperatureTrace.from_csv(tmp_path / "a.csv")
    assert b.ids == a.ids
    np.testing.assert_array_equal(b.values, a.values)
    np.testing.assert_array_equal(b.times, a.times)


# -- simulate -----------------------------------------------------------------

def test_simulate_single_block_rise(tmp_path):
    system = single_block(0.5)
    cfg = write_config(tmp_path / "c.json", system)
    out = tmp_path / "o.csv"
    assert main(["simulate", "--config", cfg, "--duration", "4", "--dx", "0.001", "--sample-dt", "1", "--out", str(out)]) == 0
    tr = TemperatureTrace.from_csv(out)
    assert out.read_text().splitlines()[0] == "time,block"
    assert len(tr) == 5
    assert tr.values[-1, 0] == pytest.approx(20 + 0.5 * 4 / system.total_capacitance, rel=1e-9)


def test_simulate_zero_duration(tmp_path):
    cfg = write_config(tmp_path / "c.json", silver_fr4_pair())
    out = tmp_path / "o.csv"
    assert main(["simulate", "--config", cfg, "--duration", "0", "--dx", "0.0005", "--sample-dt", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("0")


def test_simulate_malformed_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{ not json")
    rc = main(["simulate", "--config", str(cfg), "--duration", "1", "--dx", "0.001", "--sample-dt", "1", "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert not (tmp_path / "o.csv").exists()


def test_simulate_unresolvable_geometry(tmp_path):
    cfg = write_config(tmp_path / "c.json", silver_fr4_pair())
    rc = main(["simulate", "--config", cfg, "--duration", "1", "--dx", "0.0007", "--sample-dt", "1", "--out", str(tmp_path / "o.csv")])
    assert rc == 2


def test_missing_config_file(tmp_path):
    rc = main(["simulate", "--config", str(tmp_path / "none.json"), "--duration", "1", "--dx", "0.001", "--sample-dt", "1", "--out", str(tmp_path / "o.csv")])
    assert rc == 2


# -- characterize / predict ---------------------------------------------------

@pytest.fixture(scope="module")
def pair_model_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("model")
    cfg = write_config(d / "pair.json", silver_fr4_pair())
    out = d / "pair.model.json"
    assert main(["characterize", "--config", cfg, "--tm", "20", "--dx", "0.0005", "--out", str(out)]) == 0
    return d, out


def test_characterize_writes_model_report_and_trials(pair_model_file):
    d, out = pair_model_file
    model = CharacterizedModel.load(out)
    assert model.R.shape == (2, 2)
    assert model.T0 == 20.0
    report = json.loads((d / "pair.model.report.json").read_text())
    assert len(report["entries"]) == 4
    for sid in ("silver", "fr4"):
        assert (d / f"pair.model.trial-{sid}.csv").exists()


def test_characterize_single_body_warns(tmp_path, caplog):
    cfg = write_config(tmp_path / "one.json", single_block(1.0))
    with caplog.at_level("WARNING"):
        rc = main(["characterize", "--config", cfg, "--tm", "5", "--dx", "0.0005", "--sample-dt", "0.5", "--out", str(tmp_path / "m.json")])
    assert rc == 0
    assert "single insulated body" in caplog.text


def test_characterize_without_sources(tmp_path):
    cfg = write_config(tmp_path / "c.json", silver_fr4_pair().with_powers({}))
    assert main(["characterize", "--config", cfg, "--dx", "0.0005", "--out", str(tmp_path / "m.json")]) == 2


def test_predict_zero_schedule_is_flat(pair_model_file, tmp_path):
    _, model = pair_model_file
    sched = tmp_path / "s.json"
    sched.write_text(json.dumps({"silver": 0.0, "fr4": 0.0}))
    out = tmp_path / "p.csv"
    assert main(["predict", "--model", str(model), "--schedule", str(sched), "--duration", "30", "--sample-dt", "1", "--out", str(out)]) == 0
    tr = TemperatureTrace.from_csv(out)
    assert np.all(tr.values == 20.0)


def test_predict_unknown_source(pair_model_file, tmp_path):
    _, model = pair_model_file
    sched = tmp_path / "s.json"
    sched.write_text(json.dumps({"silver": 1.0, "copper": 1.0}))
    rc = main(["predict", "--model", str(model), "--schedule", str(sched), "--duration", "1", "--sample-dt", "1", "--out", str(tmp_path / "p.csv")])
    assert rc == 2


def test_predict_from_config_schedule_matches_library(pair_model_file, tmp_path):
    _, model_path = pair_model_file
    model = CharacterizedModel.load(model_path)
    system = silver_fr4_pair()
    cfg = write_config(tmp_path / "c.json", system)
    out = tmp_path / "p.csv"
    assert main(["predict", "--model", str(model_path), "--schedule", cfg, "--duration", "120", "--sample-dt", "0.5", "--out", str(out)]) == 0
    tr = TemperatureTrace.from_csv(out)
    profiles = [system.body(s).power for s in model.source_ids]
    line = model.T0 + linear_curve(slope_schedule(profiles, model.C_T), tr.times)
    for i, b in enumerate(model.body_ids):
        expected = line + deviation_piecewise(model, i, profiles, tr.times)
        np.testing.assert_allclose(tr.series(b), expected, rtol=1e-12)


def test_compare_cli_and_determinism(pair_model_file, tmp_path, capsys):
    _, model = pair_model_file
    cfg = write_config(tmp_path / "c.json", silver_fr4_pair())
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.csv"
        main(["predict", "--model", str(model), "--schedule", cfg, "--duration", "10", "--sample-dt", "0.5", "--out", str(out)])
        outs.append(out)
    assert outs[0].read_bytes() == outs[1].read_bytes()
    rep = tmp_path / "r.json"
    assert main(["compare", str(outs[0]), str(outs[1]), "--out", str(rep)]) == 0
    doc = json.loads(rep.read_text())
    assert doc["avg_percent_error"] == {"silver": 0.0, "fr4": 0.0}
    assert "avg %" in capsys.readouterr().out


def test_simulate_deterministic(tmp_path):
    cfg = write_config(tmp_path / "c.json", silver_fr4_pair())
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.csv"
        main(["simulate", "--config", cfg, "--duration", "5", "--dx", "0.0005", "--sample-dt", "0.5", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_fit_h_cli(tmp_path, capsys):
    from thermrom.cases import convection_block

    cfg = write_config(tmp_path / "c.json", convection_block(235.7))
    assert main(["fit-h", "--config", cfg, "--dx", "0.001", "--duration", "600"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["h_est"] == pytest.approx(235.7, rel=0.02)
