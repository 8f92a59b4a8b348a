from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from ..exceptions import DataError, ShapeError


def _frozen(values):
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeriesFrame:
    """A contiguous, fixed-step multivariate record set.

    Parameters
    ----------
    timestamps : array of int
        Epoch seconds, strictly increasing, on the grid ``t0 + k * step``.
        Missing rows are allowed (they show up as holes in the grid).
    target : array of float
        The forecast target.
    past_covariates, future_covariates : mapping of str to array
        Covariates known only up to the forecast origin, and covariates whose
        future values are known at forecast time.
    step : int
        Nominal sampling step in seconds.
    target_name : str
    """

    timestamps: np.ndarray
    target: np.ndarray
    past_covariates: dict = field(default_factory=dict)
    future_covariates: dict = field(default_factory=dict)
    step: int = 60
    target_name: str = "target"

    def __post_init__(self):
        ts = np.array(self.timestamps, dtype=np.int64)
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "target", _frozen(self.target))
        object.__setattr__(
            self, "past_covariates", MappingProxyType({k: _frozen(v) for k, v in self.past_covariates.items()})
        )
        object.__setattr__(
            self, "future_covariates", MappingProxyType({k: _frozen(v) for k, v in self.future_covariates.items()})
        )
        n = len(ts)
        if n < 1:
            raise ShapeError("a frame needs at least one sample")
        for name, values in self.variables().items():
            if values.ndim != 1 or len(values) != n:
                raise ShapeError(f"variable {name!r} has shape {values.shape}, expected ({n},)")
        if len(set(self.variables())) != len(self.past_covariates) + len(self.future_covariates) + 1:
            raise DataError("variable names must be unique")
        if self.step <= 0:
            raise DataError(f"step must be positive, got {self.step}")
        diffs = np.diff(ts)
        if np.any(diffs <= 0):
            raise DataError("timestamps must be strictly increasing")
        if np.any(diffs % self.step):
            raise DataError(f"timestamps are not on a {self.step}s grid")

    def __len__(self):
        return len(self.timestamps)

    def __reduce__(self):
        # mapping proxies do not pickle; needed for process pools
        return type(self), (
            self.timestamps, self.target, dict(self.past_covariates),
            dict(self.future_covariates), self.step, self.target_name,
        )

    @property
    def duration(self):
        """Covered time span in seconds, counting one step per sample."""
        return len(self) * self.step

    @property
    def is_regular(self):
        return bool(np.all(np.diff(self.timestamps) == self.step))

    @property
    def names(self):
        return [self.target_name, *self.past_covariates, *self.future_covariates]

    def variables(self):
        """All variables in canonical order: target, past, future."""
        out = {self.target_name: self.target}
        out.update(self.past_covariates)
        out.update(self.future_covariates)
        return out

    def to_array(self):
        """Values as an ``(n_samples, n_variables)`` array in :attr:`names` order."""
        return np.column_stack(list(self.variables().values()))

    def replace_values(self, values, timestamps=None):
        """New frame with the same roles and names but different data.

        ``values`` maps variable names to arrays, or is a 2-D array in
        :attr:`names` column order.
        """
        if not isinstance(values, dict):
            arr = np.asarray(values, dtype=np.float64)
            values = {name: arr[:, i] for i, name in enumerate(self.names)}
        return TimeSeriesFrame(
            self.timestamps if timestamps is None else timestamps,
            values[self.target_name],
            {k: values[k] for k in self.past_covariates},
            {k: values[k] for k in self.future_covariates},
            self.step,
            self.target_name,
        )

    def slice(self, start, stop=None):
        """Rows ``start:stop`` as a new frame."""
        sl = slice(start, stop)
        return self.replace_values({k: v[sl] for k, v in self.variables().items()}, self.timestamps[sl])

    def equals(self, other):
        """Exact equality of timestamps, roles and values."""
        if not isinstance(other, TimeSeriesFrame):
            return False
        if (self.step, self.target_name, self.names) != (other.step, other.target_name, other.names):
            return False
        if not np.array_equal(self.timestamps, other.timestamps):
            return False
        mine, theirs = self.variables(), other.variables()
        return all(np.array_equal(mine[k], theirs[k], equal_nan=True) for k in mine)
