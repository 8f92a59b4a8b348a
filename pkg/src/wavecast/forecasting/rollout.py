"""Direct prediction, autoregressive rollout and windowed evaluation."""
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigurationError, ContractError, EmptyEvaluationError, ShapeError
from .design import gather_features, valid_origins

PAST_FILLS = ("persistence", "oracle")


def predict_direct(model, features):
    """``H`` simultaneous predictions for one feature vector."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected a single feature vector, got shape {x.shape}")
    width = getattr(model, "n_features_in_", None)
    if width is not None and len(x) != width:
        raise ShapeError(f"model expects {width} features, got {len(x)}")
    return np.asarray(model.predict(x[None, :]))[0]


def _rollout_block(model, frame, starts, spec, past_fill):
    """Roll out ``spec.rollout_horizon`` steps from each origin index in ``starts``."""
    if past_fill not in PAST_FILLS:
        raise ConfigurationError(f"past_fill must be one of {PAST_FILLS}, got {past_fill!r}")
    P, H, R = spec.input_window, spec.horizon, spec.rollout_horizon
    starts = np.asarray(starts, dtype=np.int64)
    n = len(frame)
    if starts.min() < P:
        raise ContractError(f"origin index {starts.min()} has less than {P} samples of history")
    if starts.max() + R > n:
        raise ContractError(f"future covariates end before the {R}-step rollout horizon")
    for name, values in frame.future_covariates.items():
        if not np.all(np.isfinite(values[starts.min():starts.max() + R])):
            raise ContractError(f"future covariate {name!r} is missing inside the rollout horizon")
    m = len(starts)
    window = starts[:, None] + np.arange(-P, R)
    history = np.arange(P + R) < P
    target = np.where(history, frame.target[window], 0.0)
    past = []
    for values in frame.past_covariates.values():
        buf = values[window]
        if past_fill == "persistence":
            buf = np.where(history, buf, values[starts - 1][:, None])
        past.append(buf)
    future = [values[window] for values in frame.future_covariates.values()]
    for i in range(spec.n_chunks):
        rows = np.full(m, P + i * H)
        X = gather_features(target, past, future, rows, spec)
        target[:, P + i * H:P + (i + 1) * H] = model.predict(X)
    return target[:, P:]


@dataclass
class ForecastResult:
    """Rolled-out predictions against actuals, one row per window."""

    predictions: np.ndarray
    actuals: np.ndarray
    origins: np.ndarray
    segments: np.ndarray
    scale: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def errors(self):
        return (self.predictions - self.actuals) * self.scale

    def window_rmse(self):
        return np.sqrt(np.mean(self.errors**2, axis=1))

    def window_mae(self):
        return np.mean(np.abs(self.errors), axis=1)

    @property
    def rmse(self):
        return float(np.sqrt(np.mean(self.errors**2)))

    @property
    def mae(self):
        return float(np.mean(np.abs(self.errors)))

    def segment_rmse(self):
        """RMSE over all windows of each segment, in segment order."""
        err = self.errors
        return [float(np.sqrt(np.mean(err[self.segments == s] ** 2))) for s in np.unique(self.segments)]

    def segment_mae(self):
        err = self.errors
        return [float(np.mean(np.abs(err[self.segments == s]))) for s in np.unique(self.segments)]


def rollout(model, frame, origin, spec, past_fill="persistence"):
    """Forecast ``spec.rollout_horizon`` steps from the sample stamped ``origin``.

    The first chunk is a direct prediction. Each further chunk reads target
    lags after the origin from earlier predictions, past-covariate lags after
    the origin from the last observed value (``past_fill="persistence"``) or
    from the truth (``"oracle"``, for sensitivity checks), and future
    covariates from the truth.
    """
    hits = np.flatnonzero(frame.timestamps == int(origin))
    if not len(hits):
        raise ContractError(f"origin {origin} is not a timestamp of the frame")
    t = int(hits[0])
    pred = _rollout_block(model, frame, [t], spec, past_fill)
    actual = frame.target[t:t + spec.rollout_horizon][None, :]
    return ForecastResult(pred, actual.copy(), frame.timestamps[[t]], np.zeros(1, int))


def evaluate(model, test, spec, stride=60, past_fill="persistence", scale=1.0):
    """Roll out from every ``stride``-th origin of every test frame.

    Actuals always come from the frames passed in. ``scale`` multiplies
    errors, e.g. to report in original units after min-max scaling.
    """
    preds, actuals, origins, segs = [], [], [], []
    for idx, frame in enumerate(test):
        starts = valid_origins(len(frame), spec, stride, span=spec.rollout_horizon)
        if not len(starts):
            continue
        preds.append(_rollout_block(model, frame, starts, spec, past_fill))
        actuals.append(frame.target[starts[:, None] + np.arange(spec.rollout_horizon)])
        origins.append(frame.timestamps[starts])
        segs.append(np.full(len(starts), idx))
    if not preds:
        raise EmptyEvaluationError(
            f"no test frame holds a full window of {spec.input_window + spec.rollout_horizon} samples"
        )
    return ForecastResult(
        np.concatenate(preds), np.concatenate(actuals), np.concatenate(origins), np.concatenate(segs), float(scale)
    )
