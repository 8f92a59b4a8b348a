import csv
import io
import json
import math

import numpy as np
import pytest

from wavecast import experiment as ex
from wavecast.data import DatasetSplit, NormalizationParams, TimeSeriesFrame
from wavecast.exceptions import ConfigurationError
from wavecast.forecasting import LagSpec

SPEC = LagSpec(12, 4, 12)


def _frame(seed, n=600):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    f = np.sin(t / 17.0) + 0.1 * rng.standard_normal(n)
    y = np.cumsum(0.05 * rng.standard_normal(n)) + 0.5 * f
    return TimeSeriesFrame(
        10**7 * seed + 60 * t, y, {"p": np.roll(y, 3) + 0.01 * rng.standard_normal(n)}, {"f": f}, 60, "y"
    )


@pytest.fixture(scope="module")
def split():
    return DatasetSplit([_frame(1), _frame(2)], [_frame(3)], [_frame(4), _frame(5)], seed=0)


def _config(**kw):
    base = dict(
        wavelets=("bior1.1", "bior2.8"), rates=(0.5, 0.9), lag_spec=SPEC, test_stride=6,
        gbt_params={"n_rounds": 4, "max_depth": 2}, nmi_k=3,
    )
    base.update(kw)
    return ex.GridConfig(**base)


@pytest.fixture(scope="module")
def records(split):
    return ex.run_grid(split, _config())


def test_cardinality_and_order(records):
    assert len(records) == 2 * 2 * 2 + 2
    assert [(r.wavelet, r.rate, r.model) for r in records[:2]] == [("none", 0.0, "ols"), ("none", 0.0, "gbt")]
    assert records == sorted(records, key=ex.EvaluationRecord.sort_key)
    assert [r.wavelet for r in records[2:]] == ["bior1.1"] * 4 + ["bior2.8"] * 4
    assert all(r.ok and r.rmse >= r.mae > 0 for r in records)


def test_baseline_fields(records):
    base = records[0]
    assert base.nmi == 1.0 and base.achieved_rate == 0.0
    assert all(0 <= r.nmi <= 1 for r in records)
    lossy = [r for r in records if not r.is_baseline]
    assert all(r.achieved_rate >= r.rate - 0.01 for r in lossy)
    assert len(base.segment_rmse) == 2 and base.n_windows > 0


def test_models_subset(split):
    recs = ex.run_grid(split, _config(models=("ols",)))
    assert len(recs) == 5 and {r.model for r in recs} == {"ols"}


def test_deterministic(split, records):
    again = ex.run_grid(split, _config())
    assert ex.results_csv(again) == ex.results_csv(records)


def test_parallel_matches_serial(split, records):
    assert ex.results_csv(ex.run_grid(split, _config(jobs=2))) == ex.results_csv(records)


def test_errors_in_original_units(split, records):
    norm = NormalizationParams(("y", "p", "f"), (10.0, 0.0, 0.0), (14.0, 1.0, 1.0))
    scaled = ex.run_grid(split, _config(wavelets=("bior1.1",), rates=(0.5,)), norm)
    for a, b in zip(scaled, records):
        assert math.isclose(a.rmse, 4 * b.rmse, rel_tol=1e-12)


def test_test_frames_are_never_compressed(split, monkeypatch):
    seen = []
    real = ex.compress_frame

    def spy(frame, *args, **kw):
        seen.append(id(frame))
        return real(frame, *args, **kw)

    monkeypatch.setattr(ex, "compress_frame", spy)
    ex.run_grid(split, _config(wavelets=("bior1.1",), rates=(0.5,)))
    assert seen and not {id(f) for f in split.test} & set(seen)
    assert set(seen) == {id(f) for f in split.train + split.validation}


def test_failed_cell_is_recorded(split, monkeypatch, tmp_path):
    real = ex.compress_frame

    def flaky(frame, wavelet, *args, **kw):
        if wavelet == "bior2.8":
            raise RuntimeError("boom")
        return real(frame, wavelet, *args, **kw)

    monkeypatch.setattr(ex, "compress_frame", flaky)
    recs = ex.run_grid(split, _config(models=("ols",)))
    failed = [r for r in recs if not r.ok]
    assert len(recs) == 5 and [r.wavelet for r in failed] == ["bior2.8"] * 2
    assert failed[0].error == "RuntimeError: boom" and math.isnan(failed[0].rmse)
    ex.write_report(tmp_path, recs, _config(models=("ols",)))
    back = ex.load_report(tmp_path / "report.json")["records"]
    assert back[-1].status == "failed" and math.isnan(back[-1].rmse)


def test_early_stop_path(split):
    recs = ex.run_grid(split, _config(wavelets=("bior1.1",), rates=(0.5,), models=("gbt",), early_stop=True))
    assert all(r.ok for r in recs)


def test_no_test_frames(split):
    with pytest.raises(ConfigurationError):
        ex.run_grid(DatasetSplit(split.train, split.validation, [], 0), _config())


@pytest.mark.parametrize(
    "kw",
    [
        {"wavelets": ("db4",)},
        {"rates": (0.0, 0.5)},
        {"rates": (0.9, 0.5)},
        {"rates": (0.5, 1.0)},
        {"models": ("ols", "ols")},
        {"models": ("rf",)},
        {"past_fill": "zeros"},
        {"test_stride": 0},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigurationError):
        _config(**kw)


def test_config_round_trip():
    cfg = _config(gbt_lag_spec=LagSpec.thinned(2, horizon=4, input_window=12, rollout_horizon=12))
    assert ex.GridConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_report_files(records, tmp_path):
    cfg = _config()
    paths = ex.write_report(tmp_path, records, cfg, {"note": "x"})
    assert sorted(p.rsplit("/", 1)[1] for p in paths) == sorted(ex.REPORT_FILES)
    report = ex.load_report(tmp_path / "report.json")
    assert report["records"] == records
    assert report["config"]["note"] == "x"
    assert {b["wavelet"] for b in report["beta_fits"]} == {"bior1.1", "bior2.8"}
    assert len(report["elbows"]) == 4

    table = list(csv.DictReader(io.StringIO((tmp_path / "table.csv").read_text())))
    assert len(table) == 5
    assert list(table[0]) == ["Wavelet", "r_lossy", "OLS_MAE", "OLS_RMSE", "GBT_MAE", "GBT_RMSE"]

    nmi = {(p["wavelet"], p["rate"]): p["nmi"] for p in report["nmi"]}
    joined = list(csv.DictReader(io.StringIO((tmp_path / "rmse_vs_nmi.csv").read_text())))
    assert len(joined) == len(records)
    for row in joined:
        assert float(row["nmi"]) == nmi[(row["wavelet"], float(row["r_lossy"]))]

    long = list(csv.DictReader(io.StringIO((tmp_path / "rmse_vs_rate.csv").read_text())))
    assert len(long) == 2 * len(records)


def test_csv_floats_round_trip(records):
    rows = list(csv.DictReader(io.StringIO(ex.results_csv(records))))
    assert [float(r["rmse"]) for r in rows] == [r.rmse for r in records]


def test_empty_report(tmp_path):
    ex.write_report(tmp_path, [])
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["records"] == [] and report["beta_fits"] == [] and report["elbows"] == []
    assert (tmp_path / "results.csv").read_text().startswith("wavelet,r_lossy,model")


def test_partial_snapshot(records, tmp_path):
    path = ex.write_partial(tmp_path, records[:3])
    assert path.endswith("results.csv.partial")
    assert len((tmp_path / "results.csv.partial").read_text().splitlines()) == 4
    ex.clear_partial(tmp_path)
    ex.clear_partial(tmp_path)
    assert not (tmp_path / "results.csv.partial").exists()
