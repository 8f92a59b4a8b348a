"""Rate-targeted thresholding of wavelet coefficients.

The lossy compression rate is the number of zeroed coefficients divided by
the number of *samples* ``N``. To hit a requested rate exactly, the
``K = total - round(rate * N)`` largest-magnitude coefficients are kept,
across all bands including the approximation; equal magnitudes are broken in
favour of the lower flat index. Because the ordering is total, the kept set
at a higher rate is always a subset of the kept set at a lower one.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..data.frame import TimeSeriesFrame
from ..exceptions import CorruptionError, DataError, InputTooShortError, InvalidRateError
from ..wavelet import MODES, WaveletCoefficients, filter_bank, level_lengths, wavedec, waverec


class MaxCompressionWarning(UserWarning):
    """The requested rate leaves fewer than one coefficient; one is kept."""


@dataclass(eq=False)
class CompressedSignal:
    """Sparse thresholded coefficients plus what is needed to invert them.

    ``indices`` address the flat layout ``[a_L, d_L, ..., d_1]``.
    """

    wavelet: str
    boundary_mode: str
    levels: int
    original_length: int
    indices: np.ndarray
    values: np.ndarray
    rate: float = 0.0

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)

    @property
    def kept(self):
        """``(flat_index, value)`` pairs."""
        return list(zip(self.indices.tolist(), self.values.tolist()))

    @property
    def total_count(self):
        bank = filter_bank(self.wavelet)
        lengths = level_lengths(self.original_length, bank.filter_length, self.levels, self.boundary_mode)
        return lengths[-1] + sum(lengths[1:])

    @property
    def zero_count(self):
        return self.total_count - len(self.indices)

    @property
    def achieved_rate(self):
        """Zeroed coefficients over sample count, floored at 0."""
        return max(0.0, self.zero_count / self.original_length)

    def validate(self):
        if self.boundary_mode not in MODES:
            raise CorruptionError(f"unknown boundary mode {self.boundary_mode!r}")
        if self.indices.shape != self.values.shape:
            raise CorruptionError(f"{len(self.indices)} indices but {len(self.values)} values")
        if self.indices.size:
            if self.indices[0] < 0 or np.any(np.diff(self.indices) <= 0):
                raise CorruptionError("kept indices must be non-negative and strictly increasing")
            if self.indices[-1] >= self.total_count:
                raise CorruptionError(
                    f"kept index {int(self.indices[-1])} is out of range for {self.total_count} coefficients"
                )
        return self

    def __eq__(self, other):
        if not isinstance(other, CompressedSignal):
            return NotImplemented
        return (
            (self.wavelet, self.boundary_mode, self.levels, self.original_length)
            == (other.wavelet, other.boundary_mode, other.levels, other.original_length)
            and np.float64(self.rate).tobytes() == np.float64(other.rate).tobytes()
            and np.array_equal(self.indices, other.indices)
            and self.values.tobytes() == other.values.tobytes()
        )


def check_rate(rate):
    rate = float(rate)
    if not (0.0 <= rate < 1.0) or math.isnan(rate):
        raise InvalidRateError(f"compression rate must satisfy 0 <= rate < 1, got {rate}")
    return rate


def keep_count(total, n_samples, rate):
    """Number of coefficients kept for ``rate``, before clamping."""
    return total - int(math.floor(rate * n_samples + 0.5))


def top_k(flat, k):
    """Sorted indices of the ``k`` largest magnitudes, lower index on ties."""
    order = np.argsort(-np.abs(flat), kind="stable")
    return np.sort(order[:k])


def compress(signal, wavelet, rate, levels="auto", mode="symmetric"):
    """Decompose ``signal`` and keep only enough coefficients to reach ``rate``.

    Raises
    ------
    InvalidRateError
        If ``rate`` is outside ``[0, 1)``.
    """
    rate = check_rate(rate)
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or len(x) < 2:
        raise InputTooShortError(f"need a 1-D signal of at least 2 samples, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DataError("signal contains non-finite values")
    coeffs = wavedec(x, wavelet, levels, mode)
    flat = coeffs.flatten()
    total = len(flat)
    k = keep_count(total, len(x), rate)
    if k < 1:
        warnings.warn(
            f"rate {rate} would zero every coefficient of a {len(x)}-sample signal; keeping one",
            MaxCompressionWarning,
            stacklevel=2,
        )
    k = min(max(k, 1), total)
    idx = top_k(flat, k)
    return CompressedSignal(coeffs.wavelet, mode, coeffs.levels, len(x), idx, flat[idx], rate)


def decompress(cs):
    """Scatter the kept coefficients into zeros and invert the transform."""
    cs.validate()
    flat = np.zeros(cs.total_count)
    flat[cs.indices] = cs.values
    coeffs = WaveletCoefficients.from_flat(flat, cs.wavelet, cs.levels, cs.original_length, cs.boundary_mode)
    return waverec(coeffs)


@dataclass(eq=False)
class FrameBundle:
    """One :class:`CompressedSignal` per variable of a regular frame."""

    signals: dict
    roles: dict
    target_name: str
    start: int
    step: int
    order: list = field(default_factory=list)

    def __post_init__(self):
        if not self.order:
            self.order = list(self.signals)

    def __eq__(self, other):
        if not isinstance(other, FrameBundle):
            return NotImplemented
        return (
            (self.roles, self.target_name, self.start, self.step, self.order)
            == (other.roles, other.target_name, other.start, other.step, other.order)
            and all(self.signals[k] == other.signals[k] for k in self.order)
        )

    def achieved_rates(self):
        return {name: cs.achieved_rate for name, cs in self.signals.items()}


def compress_frame(frame, wavelet, rate, levels="auto", mode="symmetric"):
    """Compress every variable of ``frame`` independently."""
    if not frame.is_regular:
        raise DataError("frame has missing rows; repair gaps before compressing")
    signals = {name: compress(values, wavelet, rate, levels, mode) for name, values in frame.variables().items()}
    roles = {frame.target_name: "target"}
    roles.update({k: "past" for k in frame.past_covariates})
    roles.update({k: "future" for k in frame.future_covariates})
    return FrameBundle(signals, roles, frame.target_name, int(frame.timestamps[0]), frame.step, frame.names)


def decompress_frame(bundle):
    """Rebuild a frame of the original shape from a bundle."""
    values = {name: decompress(cs) for name, cs in bundle.signals.items()}
    n = bundle.signals[bundle.target_name].original_length
    stamps = bundle.start + bundle.step * np.arange(n, dtype=np.int64)
    past = {k: values[k] for k in bundle.order if bundle.roles[k] == "past"}
    future = {k: values[k] for k in bundle.order if bundle.roles[k] == "future"}
    return TimeSeriesFrame(stamps, values[bundle.target_name], past, future, bundle.step, bundle.target_name)


def lossy_frame(frame, wavelet, rate, levels="auto", mode="symmetric"):
    """Shorthand for ``decompress_frame(compress_frame(...))``."""
    return decompress_frame(compress_frame(frame, wavelet, rate, levels, mode))


class WaveletCompressor(TransformerMixin, BaseEstimator):
    """Lossy wavelet round trip as a scikit-learn transformer.

    Each column of ``X`` is treated as a signal sampled along axis 0; it is
    compressed to ``rate`` and reconstructed. The transformer is stateless,
    so ``fit`` only validates parameters.

    Parameters
    ----------
    wavelet : str, default="bior1.1"
    rate : float, default=0.9
    levels : int or "auto", default="auto"
    mode : {"symmetric", "periodization"}, default="symmetric"

    Examples
    --------
    >>> import numpy as np
    >>> X = np.column_stack([np.linspace(0, 1, 64), np.ones(64)])
    >>> Xt = WaveletCompressor(rate=0.0).fit_transform(X)
    >>> bool(np.allclose(Xt, X))
    True
    """

    def __init__(self, wavelet="bior1.1", rate=0.9, levels="auto", mode="symmetric"):
        self.wavelet = wavelet
        self.rate = rate
        self.levels = levels
        self.mode = mode

    def fit(self, X, y=None):
        filter_bank(self.wavelet)
        check_rate(self.rate)
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        self.n_features_in_ = X.shape[1]
        return self

    def encode(self, X):
        """Per-column :class:`CompressedSignal` list."""
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        return [compress(X[:, j], self.wavelet, self.rate, self.levels, self.mode) for j in range(X.shape[1])]

    def transform(self, X):
        encoded = self.encode(X)
        self.achieved_rates_ = np.array([cs.achieved_rate for cs in encoded])
        return np.column_stack([decompress(cs) for cs in encoded])
