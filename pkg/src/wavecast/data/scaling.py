"""Min-max scaling to the unit interval.

:class:`UnitScaler` is the array-level estimator; :func:`fit_normalization`
and :func:`apply_normalization` lift it to frames keyed by variable name.
"""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import DataError, DegenerateRangeError


class UnitScaler(TransformerMixin, BaseEstimator):
    """Scale each column to ``[0, 1]`` using the training min and max.

    Unlike :class:`sklearn.preprocessing.MinMaxScaler`, constant columns are
    rejected and out-of-range values are clamped at transform time. The
    number of clamped entries is accumulated in ``n_clamped_``.

    Attributes
    ----------
    data_min_, data_max_ : ndarray of shape (n_features,)
    n_clamped_ : ndarray of shape (n_features,)
    """

    def __init__(self, clip=True):
        self.clip = clip

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        flat = np.flatnonzero(self.data_max_ <= self.data_min_)
        if flat.size:
            raise DegenerateRangeError(f"columns {flat.tolist()} are constant; min-max scaling is undefined")
        self.n_features_in_ = X.shape[1]
        self.n_clamped_ = np.zeros(X.shape[1], dtype=np.int64)
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64, copy=True)
        out = (X - self.data_min_) / (self.data_max_ - self.data_min_)
        if self.clip:
            outside = (out < 0.0) | (out > 1.0)
            self.n_clamped_ += outside.sum(axis=0)
            np.clip(out, 0.0, 1.0, out=out)
        return out

    def inverse_transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        return X * (self.data_max_ - self.data_min_) + self.data_min_


@dataclass(frozen=True)
class NormalizationParams:
    names: tuple
    mins: tuple
    maxs: tuple

    def __post_init__(self):
        for name, lo, hi in zip(self.names, self.mins, self.maxs):
            if not hi > lo:
                raise DegenerateRangeError(f"variable {name!r} has degenerate range [{lo}, {hi}]")

    def as_dict(self):
        return {n: {"min": lo, "max": hi} for n, lo, hi in zip(self.names, self.mins, self.maxs)}

    @classmethod
    def from_dict(cls, data):
        names = tuple(data)
        return cls(names, tuple(float(data[n]["min"]) for n in names), tuple(float(data[n]["max"]) for n in names))


def fit_normalization(train):
    """Per-variable min and max over all training frames."""
    train = list(train)
    if not train:
        raise DataError("cannot fit normalization on an empty frame list")
    names = tuple(train[0].names)
    for frame in train[1:]:
        if tuple(frame.names) != names:
            raise DataError(f"frames disagree on variables: {frame.names} vs {list(names)}")
    stacked = np.vstack([f.to_array() for f in train])
    mins, maxs = stacked.min(axis=0), stacked.max(axis=0)
    return NormalizationParams(names, tuple(mins.tolist()), tuple(maxs.tolist()))


def _check_names(frame, params):
    if tuple(frame.names) != tuple(params.names):
        raise DataError(f"frame variables {frame.names} do not match parameters {list(params.names)}")


def apply_normalization(frame, params, counter=None):
    """Map each variable to ``(v - min) / (max - min)``, clamped to ``[0, 1]``.

    If ``counter`` (a :class:`collections.Counter`) is given, it is
    incremented per variable by the number of clamped values.
    """
    _check_names(frame, params)
    lo, hi = np.asarray(params.mins), np.asarray(params.maxs)
    scaled = (frame.to_array() - lo) / (hi - lo)
    outside = (scaled < 0.0) | (scaled > 1.0)
    if counter is not None:
        for name, n in zip(params.names, outside.sum(axis=0)):
            if n:
                counter[name] += int(n)
    return frame.replace_values(np.clip(scaled, 0.0, 1.0))


def invert_normalization(frame, params):
    _check_names(frame, params)
    lo, hi = np.asarray(params.mins), np.asarray(params.maxs)
    return frame.replace_values(frame.to_array() * (hi - lo) + lo)


__all__ = ["NormalizationParams", "UnitScaler", "apply_normalization", "fit_normalization", "invert_normalization"]
