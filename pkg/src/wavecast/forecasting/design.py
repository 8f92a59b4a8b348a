"""Lag specification and design-matrix construction.

An origin ``t`` is the index of the first sample to forecast. The row for
``t`` holds the target at ``t - lag`` for each target lag, each past
covariate at ``t - lag``, and each future covariate at ``t + lead``; its
targets are ``y[t], ..., y[t + H - 1]``.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigurationError, DataError


def _as_lags(values, name):
    arr = tuple(int(v) for v in values)
    if not arr:
        raise ConfigurationError(f"{name} must not be empty")
    if len(set(arr)) != len(arr):
        raise ConfigurationError(f"{name} contains duplicates")
    return arr


@dataclass(frozen=True)
class LagSpec:
    """Context window, direct chunk and rollout length, all in samples.

    Lag lists default to every lag ``1..input_window`` and every lead
    ``0..horizon-1``.
    """

    input_window: int = 360
    horizon: int = 60
    rollout_horizon: int = 360
    target_lags: tuple = None
    past_cov_lags: tuple = None
    future_cov_leads: tuple = None

    def __post_init__(self):
        p, h, r = int(self.input_window), int(self.horizon), int(self.rollout_horizon)
        if p < 1 or h < 1:
            raise ConfigurationError("input_window and horizon must be positive")
        if r < h or r % h:
            raise ConfigurationError(f"rollout_horizon {r} must be a positive multiple of horizon {h}")
        full = tuple(range(1, p + 1))
        object.__setattr__(self, "input_window", p)
        object.__setattr__(self, "horizon", h)
        object.__setattr__(self, "rollout_horizon", r)
        for name, default in (("target_lags", full), ("past_cov_lags", full)):
            lags = _as_lags(default if getattr(self, name) is None else getattr(self, name), name)
            if min(lags) < 1 or max(lags) > p:
                raise ConfigurationError(f"{name} must lie in 1..{p}")
            object.__setattr__(self, name, lags)
        leads = self.future_cov_leads
        leads = _as_lags(range(h) if leads is None else leads, "future_cov_leads")
        if min(leads) < 0 or max(leads) >= h:
            raise ConfigurationError(f"future_cov_leads must lie in 0..{h - 1}")
        object.__setattr__(self, "future_cov_leads", leads)

    @classmethod
    def thinned(cls, every, input_window=360, horizon=60, rollout_horizon=360, lead_every=1):
        """Spec keeping every ``every``-th lag (lag 1 always included)."""
        every, lead_every = int(every), int(lead_every)
        if every < 1 or lead_every < 1:
            raise ConfigurationError("thinning factors must be positive")
        lags = tuple(range(1, input_window + 1, every))
        return cls(input_window, horizon, rollout_horizon, lags, lags, tuple(range(0, horizon, lead_every)))

    @property
    def n_chunks(self):
        return self.rollout_horizon // self.horizon

    def feature_width(self, n_past, n_future):
        return len(self.target_lags) + n_past * len(self.past_cov_lags) + n_future * len(self.future_cov_leads)

    def to_dict(self):
        return {
            "input_window": self.input_window,
            "horizon": self.horizon,
            "rollout_horizon": self.rollout_horizon,
            "target_lags": list(self.target_lags),
            "past_cov_lags": list(self.past_cov_lags),
            "future_cov_leads": list(self.future_cov_leads),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})


@dataclass
class DesignMatrix:
    X: np.ndarray
    Y: np.ndarray
    origins: np.ndarray
    segments: np.ndarray
    feature_names: list

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]


def feature_names(spec, past_names, future_names, target_name="y"):
    names = [f"{target_name}[t-{lag}]" for lag in spec.target_lags]
    for var in past_names:
        names += [f"{var}[t-{lag}]" for lag in spec.past_cov_lags]
    for var in future_names:
        names += [f"{var}[t+{lead}]" for lead in spec.future_cov_leads]
    return names


def gather_features(target, past, future, rows, spec, future_rows=None):
    """Feature rows read out of per-origin buffers.

    ``target`` and each entry of ``past`` are 2-D ``(m, length)`` buffers and
    ``rows`` gives, per origin, the buffer position playing the role of ``t``.
    ``future`` buffers are indexed with ``future_rows`` (default ``rows``).
    """
    rows = np.asarray(rows)[:, None]
    frows = rows if future_rows is None else np.asarray(future_rows)[:, None]
    lag_t = np.asarray(spec.target_lags)
    lag_p = np.asarray(spec.past_cov_lags)
    lead_f = np.asarray(spec.future_cov_leads)
    sel = np.arange(target.shape[0])[:, None]
    blocks = [target[sel, rows - lag_t]]
    blocks += [buf[sel, rows - lag_p] for buf in past]
    blocks += [buf[sel, frows + lead_f] for buf in future]
    return np.concatenate(blocks, axis=1)


def valid_origins(n, spec, stride=1, span=None):
    """Origins ``P, P + stride, ...`` whose ``span`` samples (default ``H``) fit."""
    span = spec.horizon if span is None else span
    if stride < 1:
        raise ConfigurationError("stride must be positive")
    return np.arange(spec.input_window, n - span + 1, stride)


def build_design(frames, spec, stride=1):
    """Stack lagged feature rows and direct targets from every frame.

    Rows never span two frames. Frames shorter than ``P + H`` contribute no
    rows and trigger a warning.
    """
    frames = list(frames)
    if not frames:
        raise DataError("no frames to build a design matrix from")
    past_names = list(frames[0].past_covariates)
    future_names = list(frames[0].future_covariates)
    Xs, Ys, origins, segs = [], [], [], []
    for idx, frame in enumerate(frames):
        if list(frame.past_covariates) != past_names or list(frame.future_covariates) != future_names:
            raise DataError(f"frame {idx} has different covariates than frame 0")
        starts = valid_origins(len(frame), spec, stride)
        if not len(starts):
            warnings.warn(
                f"frame {idx} has {len(frame)} samples, fewer than {spec.input_window + spec.horizon}; skipped",
                stacklevel=2,
            )
            continue
        m = len(starts)

        def tile(v):
            return np.broadcast_to(v, (m, len(v)))

        X = gather_features(
            tile(frame.target),
            [tile(v) for v in frame.past_covariates.values()],
            [tile(v) for v in frame.future_covariates.values()],
            starts,
            spec,
        )
        Xs.append(X)
        Ys.append(frame.target[starts[:, None] + np.arange(spec.horizon)])
        origins.append(frame.timestamps[starts])
        segs.append(np.full(m, idx))
    width = spec.feature_width(len(past_names), len(future_names))
    if not Xs:
        return DesignMatrix(
            np.empty((0, width)), np.empty((0, spec.horizon)), np.empty(0, np.int64), np.empty(0, int),
            feature_names(spec, past_names, future_names, frames[0].target_name),
        )
    return DesignMatrix(
        np.concatenate(Xs),
        np.concatenate(Ys),
        np.concatenate(origins),
        np.concatenate(segs),
        feature_names(spec, past_names, future_names, frames[0].target_name),
    )
