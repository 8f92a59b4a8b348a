import warnings

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ConfigurationError, ShapeError


class RankDeficiencyWarning(UserWarning):
    """The least-squares problem had fewer independent columns than features."""


def _as_2d(X, name="X"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ShapeError(f"{name} contains non-finite values")
    return X


class LinearModel(RegressorMixin, BaseEstimator):
    """Multi-output least squares with an unpenalized intercept.

    Column ``h`` of ``coef_`` is the direct model for horizon step ``h``;
    solving all columns at once gives the same weights as separate fits.

    The centered problem is solved with an SVD-based least-squares routine,
    which returns the minimum-norm solution when columns are dependent.
    ``ridge > 0`` adds ``ridge * ||w||^2`` to the loss, implemented by row
    augmentation so that the normal equations are never formed.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features, n_outputs)
    intercept_ : ndarray of shape (n_outputs,)
    rank_ : int
    """

    def __init__(self, ridge=0.0):
        self.ridge = ridge

    def fit(self, X, Y):
        X = _as_2d(X)
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.shape[0] != X.shape[0]:
            raise ShapeError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
        if self.ridge < 0:
            raise ConfigurationError(f"ridge must be non-negative, got {self.ridge}")
        x_mean, y_mean = X.mean(axis=0), Y.mean(axis=0)
        Xc, Yc = X - x_mean, Y - y_mean
        n_features = X.shape[1]
        if self.ridge > 0:
            Xc = np.vstack([Xc, np.sqrt(self.ridge) * np.eye(n_features)])
            Yc = np.vstack([Yc, np.zeros((n_features, Y.shape[1]))])
        coef, _, rank, _ = linalg.lstsq(Xc, Yc, lapack_driver="gelsd")
        if rank < n_features:
            warnings.warn(
                f"design has rank {rank} < {n_features} features; returning the minimum-norm solution",
                RankDeficiencyWarning,
                stacklevel=2,
            )
        self.coef_ = np.ascontiguousarray(coef)
        self.intercept_ = y_mean - x_mean @ coef
        self.rank_ = int(rank)
        self.n_features_in_ = n_features
        self.n_outputs_ = Y.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = _as_2d(X)
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X @ self.coef_ + self.intercept_

    def get_state(self):
        return {"coef": self.coef_, "intercept": self.intercept_, "rank": np.array([self.rank_])}

    @classmethod
    def from_state(cls, params, arrays):
        model = cls(**params)
        model.coef_ = arrays["coef"]
        model.intercept_ = arrays["intercept"]
        model.rank_ = int(arrays["rank"][0])
        model.n_features_in_, model.n_outputs_ = model.coef_.shape
        return model


def fit_ols(design, ridge=0.0):
    """Fit a :class:`LinearModel` on a design matrix."""
    return LinearModel(ridge=ridge).fit(design.X, design.Y)
