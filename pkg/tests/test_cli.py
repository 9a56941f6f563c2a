import json
import logging
import subprocess
import sys

import numpy as np
import pytest

from spherear.cli import main
from spherear.dataio import read_compositions, read_density_series, read_samples, write_compositions
from spherear.errors import FormatError
from spherear.hilbert import geodesic_distance
from spherear.sar import SarModel, fit, forecast


def simulate(tmp_path, *extra, name="sim"):
    out = tmp_path / name
    args = ["simulate", "--alphas", "0.4,-0.3", "--variant", "dsar", "--length", "40",
            "--sigma", "0.05", "--seed", "3", "--out", str(out), *extra]
    assert main(args) == 0
    return out


def write_csv(path, text):
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------- workflow


def test_simulate_fit_predict(tmp_path, capsys):
    sim = simulate(tmp_path)
    manifest = json.loads((sim / "manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["format"] == "composition"
    series = read_compositions(sim / "series.csv")
    assert len(series) == 40

    fit_dir = tmp_path / "fit"
    assert main(["fit", "--input", str(sim / "series.csv"), "--variant", "dsar", "--order", "2",
                 "--out", str(fit_dir)]) == 0
    model = json.loads((fit_dir / "model.json").read_text())
    diag = json.loads((fit_dir / "diagnostics.json").read_text())
    assert len(model["alphas"]) == 2
    assert diag["stationarity"]["stationary"] in (True, False)
    assert len(diag["lags"]) == 3

    pred_dir = tmp_path / "pred"
    assert main(["predict", "--model", str(fit_dir / "model.json"), "--out", str(pred_dir)]) == 0
    pred = json.loads((pred_dir / "prediction.json").read_text())
    assert pred["projection"] == "proj2"
    parts = np.array(pred["composition"])
    assert np.all(parts >= 0) and parts.sum() == pytest.approx(1.0)
    assert "prediction written" in capsys.readouterr().out


def test_model_file_round_trip_is_idempotent(tmp_path):
    sim = simulate(tmp_path)
    fit_dir = tmp_path / "fit"
    main(["fit", "--input", str(sim / "series.csv"), "--variant", "dsar", "--order", "2", "--out", str(fit_dir)])
    data = json.loads((fit_dir / "model.json").read_text())
    model = SarModel.from_dict(data)
    assert model.to_dict() == data
    direct = fit(read_compositions(sim / "series.csv").points, 2, "dsar")
    assert np.allclose(model.alphas, direct.alphas, atol=1e-12)
    a, b = forecast(model).point, forecast(direct).point
    assert geodesic_distance(a, b) <= 1e-12


def test_holdout_reports_distances(tmp_path):
    sim = simulate(tmp_path)
    out = tmp_path / "fit"
    assert main(["fit", "--input", str(sim / "series.csv"), "--variant", "dsar", "--order", "2",
                 "--holdout", "1", "--out", str(out)]) == 0
    h = json.loads((out / "diagnostics.json").read_text())["holdout"]
    assert h["time"] == "39"
    assert 0 <= h["prediction_distance"] <= np.pi and h["carry_forward_distance"] > 0
    assert isinstance(h["projection_fired"], bool)


def test_seed_determinism(tmp_path):
    a = simulate(tmp_path, name="a")
    b = simulate(tmp_path, name="b")
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()


def test_density_workflow(tmp_path):
    sim = tmp_path / "sim"
    assert main(["simulate", "--alphas", "0.5", "--format", "density", "--grid", "x:-4:4:12,y:-4:4:12",
                 "--length", "20", "--sigma", "0.05", "--out", str(sim)]) == 0
    series = read_density_series(sim / "series.json")
    assert len(series) == 20 and series.grid.shape == (12, 12)
    fit_dir = tmp_path / "fit"
    assert main(["fit", "--input", str(sim / "series.json"), "--format", "density", "--order", "1",
                 "--projection", "proj1", "--out", str(fit_dir)]) == 0
    pred_dir = tmp_path / "pred"
    assert main(["predict", "--model", str(fit_dir / "model.json"), "--out", str(pred_dir)]) == 0
    dens = json.loads((pred_dir / "prediction.json").read_text())["density"]
    cell = 64.0 / 144
    assert sum(dens["values"]) * cell == pytest.approx(1.0, abs=1e-6)
    plot = tmp_path / "plot"
    assert main(["plot-data", "--input", str(sim / "series.json"), "--format", "density", "--out", str(plot)]) == 0
    lines = (plot / "grid_values.csv").read_text().splitlines()
    assert lines[0] == "time,x,y,density" and len(lines) == 1 + 20 * 144


def test_samples_format(tmp_path):
    rng = np.random.default_rng(0)
    rows = ["time,x"]
    for t in range(6):
        rows += [f"{t},{float(v)!r}" for v in rng.normal(0.1 * t, 1.0, 200)]
    path = write_csv(tmp_path / "samples.csv", "\n".join(rows) + "\n")
    series = read_samples(path)
    assert len(series) == 6 and len(series.grid.axes) == 1
    assert main(["fit", "--input", path, "--format", "samples", "--grid", "x:-5:5:30",
                 "--out", str(tmp_path / "fit")]) == 0


def test_plot_data_compositions(tmp_path):
    sim = simulate(tmp_path)
    out = tmp_path / "plot"
    assert main(["plot-data", "--input", str(sim / "series.csv"), "--out", str(out)]) == 0
    for name in ("ternary.csv", "lonlat.csv", "compositions.csv"):
        assert len((out / name).read_text().splitlines()) == 41
    comps = np.loadtxt(out / "compositions.csv", delimiter=",", skiprows=1)[:, 1:]
    assert np.allclose(comps.sum(axis=1), 1.0)


def test_validate_writes_report(tmp_path):
    out = tmp_path / "val"
    assert main(["validate", "--replicates", "200", "--length", "200", "--threads", "2", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert np.array(rep["theoretical_V"]).shape == (2, 2)


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "spherear", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "spherear" in r.stdout


# ---------------------------------------------------------------- errors and exit codes


def test_exit_input_errors(tmp_path, capsys):
    bad = write_csv(tmp_path / "bad.csv", "time,a,b,c\n0,0.2,0.3,0.5\n1,0.2,oops,0.5\n")
    assert main(["fit", "--input", bad, "--out", str(tmp_path / "o")]) == 2
    assert "bad.csv:3" in capsys.readouterr().err
    empty = write_csv(tmp_path / "empty.csv", "")
    assert main(["fit", "--input", empty, "--out", str(tmp_path / "o")]) == 2
    assert "empty input" in capsys.readouterr().err
    assert main(["fit", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o")]) == 2
    assert main(["validate", "--replicates", "50", "--out", str(tmp_path / "o")]) == 2
    assert "200" in capsys.readouterr().err


def test_exit_degenerate_fit(tmp_path, capsys):
    const = write_csv(tmp_path / "const.csv", "time,a,b,c\n" + "".join(f"{t},0.2,0.3,0.5\n" for t in range(10)))
    assert main(["fit", "--input", const, "--out", str(tmp_path / "o")]) == 3
    assert "degenerate" in capsys.readouterr().err


def test_exit_model_version(tmp_path):
    sim = simulate(tmp_path)
    fit_dir = tmp_path / "fit"
    main(["fit", "--input", str(sim / "series.csv"), "--out", str(fit_dir)])
    data = json.loads((fit_dir / "model.json").read_text())
    data["format"] = "sar-model/99"
    (fit_dir / "model.json").write_text(json.dumps(data))
    assert main(["predict", "--model", str(fit_dir / "model.json"), "--out", str(tmp_path / "p")]) == 4


def test_exit_stationarity(tmp_path):
    args = ["simulate", "--alphas", "1.0", "--length", "10", "--out", str(tmp_path / "s")]
    assert main(args) == 5
    assert main(args + ["--force"]) == 0


# ---------------------------------------------------------------- readers


def test_read_compositions_errors(tmp_path, caplog):
    with pytest.raises(FormatError, match="negative"):
        read_compositions(write_csv(tmp_path / "a.csv", "t,a,b\n0,-0.5,1.5\n"))
    with pytest.raises(FormatError, match="columns"):
        read_compositions(write_csv(tmp_path / "b.csv", "t,a,b\n0,0.5\n"))
    with pytest.raises(FormatError, match="header only"):
        read_compositions(write_csv(tmp_path / "c.csv", "t,a,b\n"))
    with caplog.at_level(logging.WARNING):
        s = read_compositions(write_csv(tmp_path / "d.csv", "t,a,b\n0,1,3\n"))
    assert "renormalizing" in caplog.text
    assert np.allclose(s.points[0].values**2, [0.25, 0.75])


def test_write_read_compositions_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    comps = rng.dirichlet(np.ones(4), size=5)
    write_compositions(tmp_path / "x.csv", range(5), comps, labels=list("abcd"))
    s = read_compositions(tmp_path / "x.csv")
    assert s.labels == list("abcd") and s.times == [str(t) for t in range(5)]
    assert np.allclose(np.vstack([p.values**2 for p in s.points]), comps, atol=1e-15)


def test_read_density_errors(tmp_path):
    p = tmp_path / "d.json"
    p.write_text("{not json")
    with pytest.raises(FormatError, match="invalid JSON"):
        read_density_series(p)
    p.write_text(json.dumps({"axes": [{"min": 0, "max": 1, "cells": 2}], "series": []}))
    with pytest.raises(FormatError, match="empty"):
        read_density_series(p)
    p.write_text(json.dumps({"axes": [{"min": 0, "max": 1, "cells": 2}], "series": [{"values": [1.0]}]}))
    with pytest.raises(FormatError, match="entry 0"):
        read_density_series(p)


def test_candidate_orders_report_residuals(tmp_path):
    sim = simulate(tmp_path)
    out = tmp_path / "fit"
    assert main(["fit", "--input", str(sim / "series.csv"), "--variant", "dsar", "--order", "2",
                 "--candidate-orders", "1,2,3", "--out", str(out)]) == 0
    rows = json.loads((out / "diagnostics.json").read_text())["order_candidates"]
    assert [r["p"] for r in rows] == [1, 2, 3]
    assert all(len(r["alphas"]) == r["p"] and r["mean_residual_norm"] > 0 for r in rows)
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--input", str(sim / "series.csv"), "--candidate-orders", "0", "--out", str(out)])
    assert exc.value.code == 2
