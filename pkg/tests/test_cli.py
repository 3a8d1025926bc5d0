import csv
import json

import numpy as np
import pytest

from bdarch.cli import main, read_series, select_stage1, select_stage2, sweep_from_cells

TINY = ["--chains", "1", "--warmup", "40", "--draws", "30"]

REGION1 = [
    # stage, P, Q, K_year, FMAE, FRSS  (validation metrics x 1e-2)
    (1, 1, 0, 6, 0.38, 1.75), (1, 1, 0, 8, 0.36, 1.73), (1, 1, 0, 10, 0.45, 2.65),
    (1, 1, 0, 12, 6.40, 442.25), (1, 1, 0, 14, 18.66, 3662.84), (1, 1, 0, 16, 12.42, 1638.80),
    (1, 1, 0, 18, 18.87, 3809.00),
    (2, 0, 1, 8, 5.81, 404.83), (2, 1, 1, 8, 1.05, 14.60), (2, 1, 2, 8, 0.98, 15.02),
    (2, 1, 3, 8, 1.03, 16.12), (2, 2, 1, 8, 0.40, 3.96), (2, 2, 2, 8, 6.57, 716.43),
    (2, 2, 3, 8, 2.09, 60.38), (2, 3, 1, 8, 8.17, 984.45), (2, 3, 2, 8, 8.91, 1209.30),
    (2, 3, 3, 8, 1.17, 16.30),
]


def region1_cells():
    keys = ("stage", "P", "Q", "K_year", "fmae", "frss")
    return [dict(zip(keys, map(str, r))) for r in REGION1]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def series_csv(tmp_path, rng):
    y = rng.dirichlet(np.array([8.0, 6.0, 5.0, 4.0, 3.0]) * 10, size=40)
    path = tmp_path / "shares.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["week", "EUR", "USD", "GBP", "JPY", "AUD"])
        for t, row in enumerate(y, start=1):
            w.writerow([t] + [repr(float(v)) for v in row])
    return path


def test_simulate_shape_and_determinism(tmp_path):
    args = ["simulate", "--study", "2", "--replicates", "2", "--seed", "7", "--T", "40", "--train-len", "30"] + TINY
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    rows = read_csv(tmp_path / "a" / "metrics.csv")
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seed"] == 7
    n_ok = len({r["replicate"] for r in rows})
    assert len(rows) == 3 * n_ok and {r["model"] for r in rows} == {"B-DARMA", "B-DARCH", "B-tVARMA"}
    for name in ("metrics.csv", "pacf.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_bad_study(tmp_path, capsys):
    assert main(["simulate", "--study", "7", "--out", str(tmp_path)]) == 2
    assert "study" in capsys.readouterr().err


def test_fit_forecast_evaluate_round_trip(tmp_path, series_csv):
    fit_dir = tmp_path / "fit"
    code = main(["fit", "--data", str(series_csv), "--variant", "BDARMA", "--P", "1", "--train-end", "35",
                 "--seed", "3", "--out", str(fit_dir), "--ref-component", "USD"] + TINY)
    assert code in (0, 3)
    summary = json.loads((fit_dir / "fit_summary.json").read_text())
    assert summary["ref_component"] == "USD" and summary["model"]["ref"] == 1
    assert summary["converged"] == (code == 0)
    draws = read_csv(fit_dir / "draws.csv")
    assert len(draws) == 30 and "chain" in draws[0]
    assert list(draws[0])[1:] == list(summary["diagnostics"]["rhat"])
    assert "A1[1,1]" in draws[0] and "gamma[1]" in draws[0]

    fc_dir = tmp_path / "fc"
    assert main(["forecast", "--fit", str(fit_dir), "--horizon", "5", "--seed", "1", "--out", str(fc_dir)]) == 0
    fc = read_csv(fc_dir / "forecast.csv")
    assert len(fc) == 5 * 5
    assert [(r["time"], r["component"]) for r in fc[:6]] == [("36", c) for c in
                                                             ("EUR", "USD", "GBP", "JPY", "AUD")] + [("37", "EUR")]
    for r in fc:
        assert float(r["lower_95"]) <= float(r["lower_50"]) <= float(r["upper_50"]) <= float(r["upper_95"])

    ev_dir = tmp_path / "ev"
    assert main(["evaluate", "--forecast", str(fc_dir / "forecast.csv"), "--actuals", str(series_csv),
                 "--scale", "100", "--out", str(ev_dir)]) == 0
    ev = read_csv(ev_dir / "evaluation.csv")
    assert [r["component"] for r in ev][-2:] == ["mean", "total"]


def test_evaluate_perfect_forecast_scores_zero(tmp_path, series_csv):
    y = read_series(series_csv)
    fc = tmp_path / "perfect.csv"
    with fc.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "component", "point", "lower_95", "upper_95"])
        for t, row in zip(y.time_index[-4:], y.values[-4:]):
            for n, v in zip(y.names, row):
                w.writerow([t, n, repr(float(v)), repr(float(v)), repr(float(v))])
    assert main(["evaluate", "--forecast", str(fc), "--actuals", str(series_csv), "--out", str(tmp_path / "e")]) == 0
    ev = read_csv(tmp_path / "e" / "evaluation.csv")
    mean = next(r for r in ev if r["component"] == "mean")
    assert float(mean["frmse"]) == 0 and float(mean["fmae"]) == 0 and float(mean["coverage"]) == 1.0


def test_evaluate_misaligned_keys(tmp_path, series_csv):
    fc = tmp_path / "bad.csv"
    fc.write_text("time,component,point\n999,EUR,0.2\n")
    assert main(["evaluate", "--forecast", str(fc), "--actuals", str(series_csv), "--out", str(tmp_path / "e")]) == 2


def test_malformed_row_names_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,a,b\n1,0.5,0.5\n2,0.5,0.5\n3,-0.2,1.2\n")
    assert main(["fit", "--data", str(bad), "--out", str(tmp_path / "f")] + TINY) == 2
    assert "line 4" in capsys.readouterr().err


def test_long_format_equals_wide(tmp_path, series_csv):
    wide = read_series(series_csv)
    long = tmp_path / "long.csv"
    with long.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "component", "value"])
        for t, row in zip(wide.time_index, wide.values):
            for n, v in zip(wide.names, row):
                w.writerow([t, n, repr(float(v))])
    got = read_series(long, "long")
    assert got.names == wide.names
    np.testing.assert_allclose(got.values, wide.values, atol=1e-15)


def test_forecast_bad_horizon(tmp_path):
    assert main(["forecast", "--fit", str(tmp_path), "--horizon", "0"]) == 2


def test_sweep_stage1_region1():
    best = select_stage1([c for c in region1_cells() if c["stage"] == "1"][:3])
    assert best["K_year"] == "8"


def test_sweep_region1_two_stage(tmp_path):
    res = sweep_from_cells(region1_cells())
    assert res["stage1"]["K_year"] == "8"
    assert (res["stage2"]["P"], res["stage2"]["Q"]) == ("1", "0")
    assert float(res["stage2"]["fmae"]) == 0.36 and float(res["stage2"]["frss"]) == 1.73

    path = tmp_path / "grid.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stage", "P", "Q", "K_year", "fmae", "frss"])
        w.writerows(REGION1)
    assert main(["sweep", "--metrics", str(path), "--out", str(tmp_path / "s")]) == 0
    best = json.loads((tmp_path / "s" / "sweep_best.json").read_text())["best"]
    assert (int(best["P"]), int(best["Q"]), int(best["K_year"])) == (1, 0, 8)


def test_sweep_single_cell_and_ties():
    one = [{"stage": "1", "P": "1", "Q": "0", "K_year": "4", "fmae": "1.0"}]
    assert sweep_from_cells(one)["stage2"]["K_year"] == "4"
    tie1 = [{"P": "1", "Q": "0", "K_year": k, "fmae": "0.5"} for k in ("10", "6", "8")]
    assert select_stage1(tie1)["K_year"] == "6"
    winner = {"P": "1", "Q": "0", "K_year": "6", "fmae": "0.5"}
    tie2 = [{"P": "2", "Q": "1", "K_year": "6", "fmae": "0.5"}, {"P": "0", "Q": "1", "K_year": "6", "fmae": "0.5"}]
    got = select_stage2(tie2, winner)
    assert (got["P"], got["Q"]) in {("1", "0"), ("0", "1")} and int(got["P"]) + int(got["Q"]) == 1


def test_sweep_empty_grid(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("stage,P,Q,K_year,fmae\n")
    assert main(["sweep", "--metrics", str(path), "--out", str(tmp_path / "s")]) == 2


def test_forecast_same_seed_identical(tmp_path, series_csv):
    fit_dir = tmp_path / "fit"
    main(["fit", "--data", str(series_csv), "--variant", "BDARMA", "--P", "1", "--seed", "5",
          "--out", str(fit_dir)] + TINY)
    outs = []
    for tag in ("a", "b"):
        assert main(["forecast", "--fit", str(fit_dir), "--horizon", "3", "--seed", "9",
                     "--out", str(tmp_path / tag)]) == 0
        outs.append((tmp_path / tag / "forecast.csv").read_bytes())
    assert outs[0] == outs[1]
    summary = json.loads((fit_dir / "fit_summary.json").read_text())
    assert summary["conditioning_window"] == 1
