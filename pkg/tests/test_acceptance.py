"""Acceptance suite: one test per criterion, each printing a PASS line.

Heavy pipeline artifacts are module-scoped and share the session forecast
cache, so each model run fits every rolling window at most once.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from quartercast import (
    ArimaOrder,
    Dataset,
    FeatureConfig,
    FiscalQuarter,
    ForecastCache,
    ForestParams,
    IndicatorConfig,
    QuarterlySeries,
    TOTAL_ID,
    auto_select,
    backtest,
    best_split,
    fit_arima,
    fit_ets,
    forest_to_json,
    mape,
    model1_forecast,
    model2_run,
    model3_run,
    quarter_add,
    relative_improvement,
    train_forest,
)
from quartercast.arima import order_grid
from quartercast.ets import EtsSpec
from quartercast.stl import stl_decompose

from conftest import ar1_series
from test_ets import grid_oracle_alpha, ses_series
from test_forest import friedman

START = FiscalQuarter(2009, 1)


def ok(num, message):
    print(f"\nACCEPTANCE {num:02d} PASS - {message}")


# ---------------------------------------------------------------- criterion 1
def test_criterion_01_evaluation_formula_fidelity(small_dataset, small_ranges):
    assert relative_improvement(4.0, 3.0) == 25.0
    train, test = small_ranges
    report = backtest(small_dataset, "m2", train, test, oracle=lambda g, o, h: 1.0)
    for geo in report.geos:
        counts = [len(report.cells[(geo, h)].details) for h in (1, 2, 3, 4)]
        assert counts == [4, 3, 2, 1]
    ok(1, "relative improvement is exact and the horizon triangle is (4,3,2,1)")


# ---------------------------------------------------------------- criterion 2
def test_criterion_02_arima_parameter_recovery():
    series = ar1_series(phi=0.6, n=200, seed=7)
    fit = fit_arima(series, ArimaOrder(1, 0, 0))
    y = series.to_array()
    ybar = y.mean()
    r1 = float(np.sum((y[1:] - ybar) * (y[:-1] - ybar)) / np.sum((y - ybar) ** 2))
    assert abs(fit.ar_coeffs[0] - r1) < 0.1
    best = auto_select(series)
    for order in order_grid():
        refit = fit_arima(series, order)
        assert best.aicc <= refit.aicc + 1e-12
    ok(2, f"AR(1) coefficient within {abs(fit.ar_coeffs[0] - r1):.4f} of Yule-Walker; "
          "selected AICc beats every grid member")


# ---------------------------------------------------------------- criterion 3
def test_criterion_03_ets_oracle_equivalence():
    s = ses_series(seed=7)
    fit = fit_ets(s, EtsSpec("none", "none"))
    oracle = grid_oracle_alpha(np.asarray(s.values))
    assert abs(fit.alpha - oracle) <= 0.02
    rng = np.random.default_rng(11)
    y = rng.normal(20, 2, 16)
    naive = fit_ets(QuarterlySeries("n", START, y), EtsSpec("none", "none"), fixed_alpha=1.0)
    assert naive.sse == pytest.approx(float(np.sum((y[1:] - y[:-1]) ** 2)), rel=1e-12)
    ok(3, f"free alpha {fit.alpha:.4f} within 0.02 of grid oracle {oracle:.2f}; "
          "alpha=1 equals naive forecasts")


# ---------------------------------------------------------------- criterion 4
def test_criterion_04_stl_reconstruction_and_recovery():
    rng = np.random.default_rng(23)
    for _ in range(5):
        y = rng.uniform(10, 200) + np.cumsum(rng.standard_normal(rng.integers(8, 40)))
        dec = stl_decompose(QuarterlySeries("r", START, y))
        recon = np.asarray(dec.trend) + np.asarray(dec.seasonal) + np.asarray(dec.remainder)
        assert np.max(np.abs(recon - y)) <= 1e-9 * max(1.0, np.max(np.abs(y)))
    seasonal = [4.0, -1.0, -2.0, -1.0]
    y = np.asarray([5.0 * t + seasonal[t % 4] for t in range(24)])
    dec = stl_decompose(QuarterlySeries("s", START, y))
    err = np.max(np.abs(np.asarray(dec.seasonal[:4]) - np.asarray(seasonal)))
    rms = float(np.sqrt(np.mean(np.asarray(dec.remainder) ** 2)))
    assert err < 0.15
    assert rms < 0.15
    ok(4, f"identity within 1e-9; seasonal recovered to {err:.4f}, remainder RMS {rms:.4f}")


# ---------------------------------------------------------------- criterion 5
def test_criterion_05_forest_correctness():
    rng = np.random.default_rng(31)
    for _ in range(25):
        X = rng.integers(0, 4, size=(8, 2)).astype(float)
        y = rng.integers(0, 5, size=8).astype(float)
        parent = np.sum((y - y.mean()) ** 2)
        want = None
        for f in (0, 1):
            vs = np.unique(X[:, f])
            for lo, hi in zip(vs, vs[1:]):
                thr = (lo + hi) / 2
                left, right = y[X[:, f] <= thr], y[X[:, f] > thr]
                sse = np.sum((left - left.mean()) ** 2) + np.sum((right - right.mean()) ** 2)
                gain = parent - sse
                if gain > 0 and (want is None or gain > want[2] + 1e-12):
                    want = (f, thr, gain)
        got = best_split(X, y, [0, 1])
        if want is None:
            assert got is None
        else:
            assert got[0] == want[0] and got[1] == pytest.approx(want[1])

    Xd = rng.normal(size=(60, 5))
    yd = rng.normal(size=60)
    jsons = {
        k: forest_to_json(train_forest(Xd, yd, ForestParams(n_trees=12, seed=9), n_threads=k))
        for k in (1, 2, os.cpu_count() or 4)
    }
    assert len(set(jsons.values())) == 1

    Xtr, ytr = friedman(500, 1)
    Xte, yte = friedman(200, 2)
    from quartercast import predict_forest

    forest = train_forest(Xtr, ytr, ForestParams(n_trees=100, seed=5))
    single = train_forest(Xtr, ytr, ForestParams(n_trees=1, seed=5))
    mse_f = np.mean([(predict_forest(forest, x) - t) ** 2 for x, t in zip(Xte, yte)])
    mse_s = np.mean([(predict_forest(single, x) - t) ** 2 for x, t in zip(Xte, yte)])
    assert mse_f < mse_s
    ok(5, f"splits match enumeration; thread counts agree; forest MSE {mse_f:.2f} < "
          f"single-tree {mse_s:.2f}")


# ---------------------------------------------------------------- criterion 6
def test_criterion_06_model1_selection():
    const = QuarterlySeries("c", START, [100.0] * 24)
    res_const = model1_forecast(const, const.end, cache=ForecastCache())
    assert res_const.chosen == "arima"

    rng = np.random.default_rng(3)
    y = np.zeros(30)
    for t in range(1, 30):
        y[t] = 0.92 * y[t - 1] + rng.standard_normal()
    series = QuarterlySeries("ar", START, y + 60.0)
    result = model1_forecast(series, series.end, cache=ForecastCache())
    chosen = result.candidates[result.chosen]
    for cand in result.candidates.values():
        assert chosen.trailing_mape <= cand.trailing_mape

    from quartercast import auto_select_ets, forecast_arima, forecast_ets, stlf_forecast

    pairs = {name: [] for name in result.candidates}
    for k in range(3, -1, -1):
        t = quarter_add(series.end, -k)
        window = series.window(quarter_add(t, -1), 14)
        actual = series.value_at(t)
        fa = float(forecast_arima(auto_select(window), 1)[0])
        fe = float(forecast_ets(auto_select_ets(window), 1)[0])
        fs = float(stlf_forecast(window, 1)[0])
        for name, val in (("arima", fa), ("ets", fe), ("stl", fs), ("average", (fa + fe + fs) / 3)):
            pairs[name].append((actual, val))
    for name, cand in result.candidates.items():
        assert cand.trailing_mape == pytest.approx(mape(pairs[name]), rel=1e-12)
    bases = [result.candidates[n].forecast for n in ("arima", "ets", "stl")]
    assert result.candidates["average"].forecast == pytest.approx(sum(bases) / 3.0, rel=1e-12)
    ok(6, f"selection is the literal argmin (chose {result.chosen}); constant series "
          "tie-breaks to arima; average is the exact mean")


# ------------------------------------------------------- criteria 7, 8 setup
@pytest.fixture(scope="module")
def leak_runs(small_dataset, small_ranges, small_cache):
    train, test = small_ranges
    params = ForestParams(n_trees=50, seed=17)
    cfg3 = FeatureConfig(indicators=(IndicatorConfig("indicator"),))
    base = {
        "m2": model2_run(small_dataset, train, test, params, cache=small_cache),
        "m3": model3_run(small_dataset, train, test, params, cfg3, cache=small_cache),
        "m1": {
            (geo, str(origin)): model1_forecast(
                small_dataset.series_for(geo), origin, cache=small_cache
            ).forecast
            for geo in small_dataset.series_ids()
            for origin in [quarter_add(test[0], k - 1) for k in range(4)]
        },
    }
    return base


def _perturbed(dataset, quarter, factor=1.5):
    revenue = {}
    for geo, series in dataset.revenue.items():
        values = list(series.values)
        values[series.index_of(quarter)] *= factor
        revenue[geo] = QuarterlySeries(geo, series.start, values)
    return Dataset.build(revenue, indicators=dataset.indicators)


# ---------------------------------------------------------------- criterion 7
def test_criterion_07_leakage_freedom(small_dataset, small_ranges, small_cache, leak_runs):
    train, test = small_ranges
    last = test[1]
    bumped = _perturbed(small_dataset, last)
    params = ForestParams(n_trees=50, seed=17)
    cfg3 = FeatureConfig(indicators=(IndicatorConfig("indicator"),))

    run2 = model2_run(bumped, train, test, params, cache=small_cache)
    assert run2.predictions == leak_runs["m2"].predictions
    rows_before = {(r.geo, r.origin, r.horizon): r for r in leak_runs["m2"].test_rows}
    for row in run2.test_rows:
        assert row == rows_before[(row.geo, row.origin, row.horizon)]

    run3 = model3_run(bumped, train, test, params, cfg3, cache=small_cache)
    assert run3.predictions == leak_runs["m3"].predictions

    for geo in bumped.series_ids():
        for k in range(4):
            origin = quarter_add(test[0], k - 1)
            fc = model1_forecast(bumped.series_for(geo), origin, cache=small_cache).forecast
            assert fc == leak_runs["m1"][(geo, str(origin))]

    # a mid-test-year perturbation may only affect later origins
    mid = quarter_add(test[0], 2)
    run2_mid = model2_run(_perturbed(small_dataset, mid), train, test, params, cache=small_cache)
    for row in run2_mid.test_rows:
        if row.origin < mid:
            key = (row.geo, row.target_quarter, row.horizon)
            assert run2_mid.predictions[key] == leak_runs["m2"].predictions[key]
    ok(7, "post-origin perturbations leave every feature and prediction bit-identical "
          "for models 1, 2 and 3")


# ---------------------------------------------------------------- criterion 8
@pytest.fixture(scope="module")
def accept_runs(accept_dataset, accept_ranges, accept_cache, accept_forest_params, accept_spec):
    train, test = accept_ranges
    cfg3 = FeatureConfig(indicators=(IndicatorConfig(accept_spec.indicator_id),))
    run2 = model2_run(accept_dataset, train, test, accept_forest_params, cache=accept_cache)
    run3 = model3_run(accept_dataset, train, test, accept_forest_params, cfg3, cache=accept_cache)
    return run2, run3, cfg3


def test_criterion_08_model3_informativeness(
    accept_dataset, accept_ranges, accept_cache, accept_forest_params, accept_spec, accept_runs
):
    train, test = accept_ranges
    run2, run3, cfg3 = accept_runs
    assert len(run2.predictions) == (6 + 1) * (4 + 3 + 2 + 1)

    def h1_mape(run):
        pairs = [
            (accept_dataset.series_for(g).value_at(tq), fc)
            for (g, tq, h), fc in run.predictions.items()
            if g == TOTAL_ID and h == 1
        ]
        return mape(pairs)

    m2_total, m3_total = h1_mape(run2), h1_mape(run3)
    assert m3_total < m2_total

    flat = {
        key: QuarterlySeries(key[0], s.start, [100.0] * len(s))
        for key, s in accept_dataset.indicators.items()
    }
    ds_flat = Dataset.build(accept_dataset.revenue, indicators=flat)
    run3_flat = model3_run(ds_flat, train, test, accept_forest_params, cfg3, cache=accept_cache)
    assert run3_flat.predictions == run2.predictions
    ok(8, f"with linkage 1.0, model 3 TOTAL h1 MAPE {m3_total:.3f} < model 2's "
          f"{m2_total:.3f}; zero-variance indicators reproduce model 2 exactly")


# ---------------------------------------------------------------- criterion 9
def test_criterion_09_end_to_end_reproducibility(tmp_path):
    synth_cfg = {"synth": {"n_geos": 3, "n_quarters": 24, "noise_scale": 0.5, "seed": 99}}
    cfg_path = tmp_path / "synth.json"
    cfg_path.write_text(json.dumps(synth_cfg))
    rev = tmp_path / "rev.csv"
    env = dict(os.environ)

    def run_cli(args, threads):
        env["QUARTERCAST_THREADS"] = str(threads)
        proc = subprocess.run(
            [sys.executable, "-m", "quartercast.cli", *args],
            capture_output=True, text=True, env=env,
        )
        assert proc.returncode == 0, proc.stderr
        return proc

    run_cli(["synth", "--config", str(cfg_path), "--out", str(rev)], threads=1)

    run_cfg = {
        "revenue_csv": str(rev),
        "train_range": ["2013Q1", "2013Q4"],
        "test_range": ["2014Q1", "2014Q4"],
        "seed": 5,
        "forest": {"n_trees": 60},
    }
    bt_cfg = tmp_path / "bt.json"
    bt_cfg.write_text(json.dumps(run_cfg))

    outputs = {}
    for label, model, threads in (
        ("m1_a", "m1", 1),
        ("m1_b", "m1", 2),
        ("m2_t1", "m2", 1),
        ("m2_t2", "m2", 2),
    ):
        out = tmp_path / f"{label}.json"
        run_cli(
            ["backtest", "--config", str(bt_cfg), "--model", model, "--out", str(out)],
            threads=threads,
        )
        outputs[label] = out.read_bytes()
    assert outputs["m1_a"] == outputs["m1_b"]
    assert outputs["m2_t1"] == outputs["m2_t2"]

    cmp_out = tmp_path / "cmp.json"
    run_cli(
        [
            "compare", "--mode", "models",
            "--baseline", str(tmp_path / "m1_a.json"),
            "--candidate", str(tmp_path / "m2_t1.json"),
            "--out", str(cmp_out),
        ],
        threads=1,
    )
    table = json.loads(cmp_out.read_text())
    assert table["row_labels"] == ["Geo_1", "Geo_2", "Geo_3", "TOTAL"]
    assert table["col_labels"] == ["horizon_1"]
    ok(9, "synth -> backtest (m1, m2) -> compare is byte-identical across runs and "
          "thread counts; comparison table has per-geo rows plus Total")


# --------------------------------------------------------------- criterion 10
def test_criterion_10_perfect_oracle(small_dataset, small_ranges):
    train, test = small_ranges

    def oracle(geo, origin, h):
        return small_dataset.series_for(geo).value_at(quarter_add(origin, h))

    report = backtest(small_dataset, "m2", train, test, oracle=oracle)
    for cell in report.cells.values():
        assert cell.mape == 0.0
        for d in cell.details:
            assert d.ape == 0.0
    ok(10, "an oracle forecaster yields exactly zero MAPE everywhere")
