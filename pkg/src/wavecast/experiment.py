"""The compression grid: fit on lossy training data, test on untouched data.

For every (wavelet, rate) cell the training and validation frames are
compressed and reconstructed, each forecaster is fitted on the
reconstructions, and the fitted model is rolled out over the uncompressed
test frames. One extra baseline row per model (wavelet ``"none"``, rate 0)
fits on the uncompressed data.

Report files written by :func:`write_report`:

``results.csv``
    One row per record: wavelet, rate, model, errors, NMI and status.
``table.csv``
    One row per (wavelet, rate) with ``<MODEL>_MAE``/``<MODEL>_RMSE`` columns.
``rmse_vs_rate.csv``
    Long format, one row per test segment, for per-segment box plots.
``rmse_vs_nmi.csv``
    Long format, each record joined with the NMI of its cell.
``report.json``
    ``{"config", "records", "nmi", "beta_fits", "elbows"}``.

Errors are in the target's original units when normalization parameters are
passed to :func:`run_grid`.
"""
import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import elbow, fit_beta_curve
from .compression import check_rate, compress_frame, decompress_frame
from .exceptions import ConfigurationError
from .fileio import atomic_write
from .forecasting import GbtModel, LagSpec, LinearModel, build_design, evaluate
from .forecasting.rollout import PAST_FILLS
from .infometrics import nmi_curve, pooled_nmi
from .wavelet import MODES, WAVELETS

BASELINE = "none"
DEFAULT_RATES = (0.4, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999)
MODELS = ("ols", "gbt")
REPORT_FILES = ("results.csv", "table.csv", "rmse_vs_rate.csv", "rmse_vs_nmi.csv", "report.json")
PARTIAL_SUFFIX = ".partial"


@dataclass(frozen=True)
class GridConfig:
    """Everything that determines a grid run.

    ``gbt_lag_spec`` lets the tree model use a thinner lag set than OLS;
    ``None`` means both share ``lag_spec``. ``gbt_params`` are passed to
    :class:`~wavecast.forecasting.GbtModel`.
    """

    wavelets: tuple = WAVELETS
    rates: tuple = DEFAULT_RATES
    models: tuple = MODELS
    seed: int = 0
    lag_spec: LagSpec = field(default_factory=LagSpec)
    gbt_lag_spec: LagSpec = None
    train_stride: int = 1
    test_stride: int = 60
    ridge: float = 0.0
    gbt_params: dict = field(default_factory=dict)
    past_fill: str = "persistence"
    early_stop: bool = False
    early_stopping_rounds: int = 10
    nmi_k: int = 10
    levels: object = "auto"
    boundary_mode: str = "symmetric"
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "wavelets", tuple(self.wavelets))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "gbt_params", dict(self.gbt_params))
        self.validate()

    def validate(self):
        for w in self.wavelets:
            if w not in WAVELETS:
                raise ConfigurationError(f"unsupported wavelet {w!r}")
        for m in self.models:
            if m not in MODELS:
                raise ConfigurationError(f"unknown model {m!r}; expected one of {MODELS}")
        if len(set(self.models)) != len(self.models) or len(set(self.wavelets)) != len(self.wavelets):
            raise ConfigurationError("wavelets and models must not repeat")
        for r in self.rates:
            check_rate(r)
            if r == 0.0:
                raise ConfigurationError("rate 0 is the implicit baseline; sweep rates must lie in (0, 1)")
        if list(self.rates) != sorted(set(self.rates)):
            raise ConfigurationError("rates must be strictly increasing")
        if self.past_fill not in PAST_FILLS:
            raise ConfigurationError(f"past_fill must be one of {PAST_FILLS}")
        if self.boundary_mode not in MODES:
            raise ConfigurationError(f"boundary mode must be one of {MODES}")
        if min(self.train_stride, self.test_stride, self.jobs, self.nmi_k) < 1:
            raise ConfigurationError("strides, jobs and k must be positive")
        return self

    def spec_for(self, model):
        if model == "gbt" and self.gbt_lag_spec is not None:
            return self.gbt_lag_spec
        return self.lag_spec

    def to_dict(self):
        out = asdict(self)
        out["lag_spec"] = self.lag_spec.to_dict()
        out["gbt_lag_spec"] = None if self.gbt_lag_spec is None else self.gbt_lag_spec.to_dict()
        for key in ("wavelets", "rates", "models"):
            out[key] = list(out[key])
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["lag_spec"] = LagSpec.from_dict(data["lag_spec"])
        if data.get("gbt_lag_spec") is not None:
            data["gbt_lag_spec"] = LagSpec.from_dict(data["gbt_lag_spec"])
        return cls(**data)


@dataclass(frozen=True)
class EvaluationRecord:
    """Test errors of one model fitted at one (wavelet, rate) cell.

    ``nmi`` is the mean over training segments of the per-segment NMI of the
    target; ``nmi_pooled`` treats all training segments as one sample.
    ``achieved_rate`` is the mean achieved zero fraction of the target.
    Failed records carry ``status="failed"``, the cause in ``error`` and NaN
    metrics.
    """

    wavelet: str
    rate: float
    model: str
    mae: float
    rmse: float
    segment_rmse: tuple = ()
    nmi: float = math.nan
    nmi_pooled: float = math.nan
    achieved_rate: float = math.nan
    n_windows: int = 0
    status: str = "ok"
    error: str = ""

    @property
    def ok(self):
        return self.status == "ok"

    @property
    def is_baseline(self):
        return self.wavelet == BASELINE

    def sort_key(self):
        return _sort_key(self.wavelet, self.rate, self.model)

    def to_dict(self):
        out = asdict(self)
        out["segment_rmse"] = list(self.segment_rmse)
        return {k: _json_number(v) for k, v in out.items()}

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        for key in ("mae", "rmse", "nmi", "nmi_pooled", "achieved_rate"):
            data[key] = math.nan if data[key] is None else float(data[key])
        data["segment_rmse"] = tuple(float(v) for v in data["segment_rmse"])
        return cls(**data)


def _sort_key(wavelet, rate, model):
    w = -1 if wavelet == BASELINE else (WAVELETS.index(wavelet) if wavelet in WAVELETS else len(WAVELETS))
    m = MODELS.index(model) if model in MODELS else len(MODELS)
    return (w, wavelet, float(rate), m, model)


def _json_number(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, list):
        return [_json_number(x) for x in v]
    return v


def _cause(exc):
    return f"{type(exc).__name__}: {exc}"


def _fit_model(name, train, validation, config):
    spec = config.spec_for(name)
    design = build_design(train, spec, config.train_stride)
    if name == "ols":
        return LinearModel(ridge=config.ridge).fit(design.X, design.Y)
    params = dict(config.gbt_params)
    eval_set = None
    if config.early_stop:
        params["early_stopping_rounds"] = config.early_stopping_rounds
        val = build_design(validation, spec, config.train_stride)
        eval_set = (val.X, val.Y)
    return GbtModel(**params).fit(design.X, design.Y, eval_set=eval_set)


def _failed(wavelet, rate, model, cause, **extra):
    return EvaluationRecord(wavelet, rate, model, math.nan, math.nan, status="failed", error=cause, **extra)


def run_cell(split, config, wavelet, rate, scale=1.0):
    """Records for every model of one cell; never raises for data problems."""
    base = {}
    try:
        if wavelet == BASELINE:
            train, validation = list(split.train), list(split.validation)
            base.update(nmi=1.0, nmi_pooled=1.0, achieved_rate=0.0)
        else:
            bundles = [compress_frame(f, wavelet, rate, config.levels, config.boundary_mode) for f in split.train]
            train = [decompress_frame(b) for b in bundles]
            validation = [
                decompress_frame(compress_frame(f, wavelet, rate, config.levels, config.boundary_mode))
                for f in split.validation
            ]
            originals = [f.target for f in split.train]
            per_segment = [
                nmi_curve(y, wavelet, [rate], config.nmi_k, config.seed, levels=config.levels, mode=config.boundary_mode)[0].nmi
                for y in originals
            ]
            base.update(
                nmi=float(np.mean(per_segment)),
                nmi_pooled=pooled_nmi(originals, wavelet, rate, config.nmi_k, config.seed,
                                      levels=config.levels, mode=config.boundary_mode),
                achieved_rate=float(np.mean([b.signals[b.target_name].achieved_rate for b in bundles])),
            )
    except Exception as exc:  # noqa: BLE001 - a failed cell must not stop the grid
        return [_failed(wavelet, rate, m, _cause(exc), **base) for m in config.models]

    records = []
    for name in config.models:
        try:
            model = _fit_model(name, train, validation, config)
            result = evaluate(model, split.test, config.spec_for(name), config.test_stride, config.past_fill, scale)
            records.append(
                EvaluationRecord(
                    wavelet, float(rate), name, result.mae, result.rmse,
                    tuple(result.segment_rmse()), n_windows=len(result.origins), **base,
                )
            )
        except Exception as exc:  # noqa: BLE001
            records.append(_failed(wavelet, float(rate), name, _cause(exc), **base))
    return records


def grid_cells(config):
    """``(wavelet, rate)`` pairs in report order, baseline first."""
    return [(BASELINE, 0.0)] + [(w, r) for w in config.wavelets for r in config.rates]


def _cell_job(args):
    return run_cell(*args)


def target_scale(normalization, target_name):
    if normalization is None:
        return 1.0
    i = list(normalization.names).index(target_name)
    return float(normalization.maxs[i] - normalization.mins[i])


def run_grid(split, config, normalization=None, on_record=None):
    """Run every cell of ``config`` and return the records in report order.

    Parameters
    ----------
    split : DatasetSplit
        Normalized frames. Only ``train`` and ``validation`` are ever
        compressed; ``test`` is passed to evaluation unchanged.
    config : GridConfig
    normalization : NormalizationParams, optional
        Used only to convert errors back to original units.
    on_record : callable, optional
        Called with each finished record, in report order.
    """
    if not split.test:
        raise ConfigurationError("the split has no test frames")
    scale = target_scale(normalization, split.test[0].target_name)
    jobs = [(split, config, w, r, scale) for w, r in grid_cells(config)]
    records = []

    def collect(cell_records):
        for rec in cell_records:
            records.append(rec)
            if on_record is not None:
                on_record(rec)

    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for cell_records in pool.map(_cell_job, jobs):
                collect(cell_records)
    else:
        for job in jobs:
            collect(run_cell(*job))
    return sorted(records, key=EvaluationRecord.sort_key)


# ---------------------------------------------------------------- summaries


def nmi_points(records):
    """One NMI entry per cell, in report order."""
    seen = {}
    for rec in sorted(records, key=EvaluationRecord.sort_key):
        key = (rec.wavelet, rec.rate)
        if key not in seen and math.isfinite(rec.nmi):
            seen[key] = {"wavelet": rec.wavelet, "rate": rec.rate, "nmi": rec.nmi, "nmi_pooled": _json_number(rec.nmi_pooled)}
    return list(seen.values())


def beta_fits(records):
    """Beta-curve fit of the grid NMI values of each wavelet."""
    out = []
    points = nmi_points(records)
    for w in dict.fromkeys(p["wavelet"] for p in points if p["wavelet"] != BASELINE):
        pts = [(p["rate"], p["nmi"]) for p in points if p["wavelet"] == w]
        try:
            fit = fit_beta_curve(pts)
        except ConfigurationError as exc:
            out.append({"wavelet": w, "status": "skipped", "error": str(exc)})
            continue
        entry = {"wavelet": w, "status": "ok", **asdict(fit)}
        entry["steepness"] = fit.steepness_report()
        out.append(entry)
    return out


def elbows(records):
    """Elbow-recommended rate per (wavelet, model) on the RMSE-vs-rate curve."""
    out = []
    groups = {}
    for rec in sorted(records, key=EvaluationRecord.sort_key):
        if rec.ok and not rec.is_baseline:
            groups.setdefault((rec.wavelet, rec.model), []).append(rec)
    for (w, m), recs in groups.items():
        rates = [r.rate for r in recs]
        rmse = [r.rmse for r in recs]
        try:
            res = elbow(rates, rmse)
        except ConfigurationError as exc:
            out.append({"wavelet": w, "model": m, "status": "skipped", "error": str(exc)})
            continue
        out.append({
            "wavelet": w, "model": m, "status": "ok", "recommended_rate": res.recommended_rate,
            "flat": res.flat, "rates": rates, "chord_distances": res.chord_distances,
        })
    return out


# ---------------------------------------------------------------- files


def _fmt(v):
    if isinstance(v, float):
        return "" if not math.isfinite(v) else repr(v)
    return str(v)


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


RESULT_COLUMNS = (
    "wavelet", "r_lossy", "model", "mae", "rmse", "nmi", "nmi_pooled",
    "achieved_rate", "n_windows", "segment_rmse", "status", "error",
)


def results_csv(records):
    rows = [
        (
            r.wavelet, r.rate, r.model, r.mae, r.rmse, r.nmi, r.nmi_pooled, r.achieved_rate,
            r.n_windows, ";".join(_fmt(v) for v in r.segment_rmse), r.status, r.error,
        )
        for r in records
    ]
    return _csv(RESULT_COLUMNS, rows)


def table_csv(records, models=None):
    models = list(models or dict.fromkeys(r.model for r in records))
    header = ["Wavelet", "r_lossy"] + [f"{m.upper()}_{k}" for m in models for k in ("MAE", "RMSE")]
    cells = {}
    for r in records:
        cells.setdefault((r.wavelet, r.rate), {})[r.model] = r
    rows = []
    for (w, rate), by_model in cells.items():
        row = [w, rate]
        for m in models:
            rec = by_model.get(m)
            row += [math.nan, math.nan] if rec is None else [rec.mae, rec.rmse]
        rows.append(row)
    return _csv(header, rows)


def rmse_vs_rate_csv(records):
    rows = [
        (r.wavelet, r.model, r.rate, i, v)
        for r in records if r.ok
        for i, v in enumerate(r.segment_rmse)
    ]
    return _csv(("wavelet", "model", "r_lossy", "segment", "rmse"), rows)


def rmse_vs_nmi_csv(records):
    nmi = {(p["wavelet"], p["rate"]): p for p in nmi_points(records)}
    rows = []
    for r in records:
        p = nmi.get((r.wavelet, r.rate))
        if r.ok and p is not None:
            rows.append((r.wavelet, r.rate, r.model, p["nmi"], r.nmi_pooled, r.rmse, r.mae))
    return _csv(("wavelet", "r_lossy", "model", "nmi", "nmi_pooled", "rmse", "mae"), rows)


def report_dict(records, config=None, extra=None):
    records = sorted(records, key=EvaluationRecord.sort_key)
    out = {
        "config": None if config is None else config.to_dict(),
        "records": [r.to_dict() for r in records],
        "nmi": nmi_points(records),
        "beta_fits": beta_fits(records),
        "elbows": elbows(records),
    }
    if extra:
        out["config"] = {**(out["config"] or {}), **extra}
    return out


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_report(path):
    """Read ``report.json`` back; records become :class:`EvaluationRecord`."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    data["records"] = [EvaluationRecord.from_dict(r) for r in data["records"]]
    return data


def write_report(out_dir, records, config=None, extra=None):
    """Write all report files atomically; returns their paths."""
    records = sorted(records, key=EvaluationRecord.sort_key)
    models = None if config is None else config.models
    contents = {
        "results.csv": results_csv(records),
        "table.csv": table_csv(records, models),
        "rmse_vs_rate.csv": rmse_vs_rate_csv(records),
        "rmse_vs_nmi.csv": rmse_vs_nmi_csv(records),
        "report.json": dumps_json(report_dict(records, config, extra)),
    }
    paths = []
    for name, text in contents.items():
        path = os.path.join(out_dir, name)
        atomic_write(path, text)
        paths.append(path)
    return paths


def write_partial(out_dir, records):
    """Snapshot of an unfinished run as ``results.csv.partial``."""
    path = os.path.join(out_dir, "results.csv" + PARTIAL_SUFFIX)
    atomic_write(path, results_csv(records))
    return path


def clear_partial(out_dir):
    path = os.path.join(out_dir, "results.csv" + PARTIAL_SUFFIX)
    if os.path.exists(path):
        os.unlink(path)


__all__ = [
    "BASELINE",
    "DEFAULT_RATES",
    "EvaluationRecord",
    "GridConfig",
    "MODELS",
    "REPORT_FILES",
    "beta_fits",
    "clear_partial",
    "elbows",
    "grid_cells",
    "load_report",
    "nmi_points",
    "report_dict",
    "run_cell",
    "run_grid",
    "write_partial",
    "write_report",
]
