"""Single-level and multilevel 1-D discrete wavelet transform.

Two boundary extensions are supported:

``"symmetric"`` (default)
    Half-sample symmetric extension (``x[-1] = x[0]``). A level of length
    ``n`` yields ``floor((n + L - 1) / 2)`` coefficients per band, where ``L``
    is the padded filter length. Coefficient ``k`` is the full convolution of
    the extended signal with the analysis filter sampled at ``2k + 1``.

``"periodization"``
    Periodic extension; odd-length levels are first extended by repeating
    their last sample. A level of length ``n`` yields ``ceil(n / 2)``
    coefficients per band and the transform is non-redundant.

These conventions coincide with PyWavelets' ``symmetric`` and
``periodization`` modes, so coefficient arrays are interchangeable.
"""
import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigurationError, ExcessLevelError, InputTooShortError, ShapeError
from .filters import FilterBank, filter_bank

MODES = ("symmetric", "periodization")


def _check_mode(mode):
    if mode not in MODES:
        raise ConfigurationError(f"unknown boundary mode {mode!r}; expected one of {MODES}")
    return mode


def coeff_len(n, filter_length, mode="symmetric"):
    """Per-band coefficient count produced by one analysis step on ``n`` samples."""
    _check_mode(mode)
    if mode == "symmetric":
        return (n + filter_length - 1) // 2
    return (n + 1) // 2


def max_level(n, filter_length):
    """Deepest useful decomposition level, never less than 1."""
    if filter_length < 2:
        raise ConfigurationError("filter_length must be at least 2")
    if n < filter_length - 1:
        return 1
    return max(1, int(math.floor(math.log2(n / (filter_length - 1)))))


def level_lengths(n, filter_length, levels, mode="symmetric"):
    """Signal lengths ``[n_0, n_1, ..., n_L]`` along the approximation branch."""
    lengths = [n]
    for _ in range(levels):
        lengths.append(coeff_len(lengths[-1], filter_length, mode))
    return lengths


def _as_signal(signal, min_len=2):
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected a 1-D signal, got shape {x.shape}")
    if len(x) < min_len:
        raise InputTooShortError(f"signal length {len(x)} is shorter than {min_len}")
    return x


def _wrap_convolve(x, filt):
    # circular convolution: out[i] = sum_j filt[j] * x[(i - j) mod n]
    padded = np.pad(x, (len(filt) - 1, 0), mode="wrap")
    return np.convolve(padded, filt, mode="valid")


def dwt_single(signal, bank, mode="symmetric"):
    """One analysis step: returns ``(approx, detail)``.

    >>> a, d = dwt_single([1.0, 1.0, 1.0, 1.0], "bior1.1")
    >>> np.round(a, 12).tolist(), np.round(d, 12).tolist()
    ([1.414213562373, 1.414213562373], [0.0, 0.0])
    """
    bank = filter_bank(bank)
    _check_mode(mode)
    x = _as_signal(signal)
    flen = bank.filter_length
    if mode == "symmetric":
        n_out = coeff_len(len(x), flen, mode)
        padded = np.pad(x, (flen - 1, flen - 1), mode="symmetric")
        approx = np.convolve(padded, bank.dec_lo)[flen::2][:n_out]
        detail = np.convolve(padded, bank.dec_hi)[flen::2][:n_out]
        return approx, detail
    if len(x) % 2:
        x = np.append(x, x[-1])
    shift = flen // 2
    approx = np.roll(_wrap_convolve(x, bank.dec_lo), -shift)[::2]
    detail = np.roll(_wrap_convolve(x, bank.dec_hi), -shift)[::2]
    return approx, detail


def idwt_single(approx, detail, bank, mode="symmetric", out_len=None):
    """One synthesis step, trimmed to ``out_len`` samples.

    ``approx`` and ``detail`` must both have ``coeff_len(out_len)`` entries.
    When ``out_len`` is omitted the longest consistent length is returned.
    """
    bank = filter_bank(bank)
    _check_mode(mode)
    a = np.asarray(approx, dtype=np.float64)
    d = np.asarray(detail, dtype=np.float64)
    if a.ndim != 1 or a.shape != d.shape:
        raise ShapeError(f"approx {a.shape} and detail {d.shape} must be equal-length 1-D arrays")
    m = len(a)
    if m == 0:
        raise ShapeError("cannot reconstruct from empty coefficient arrays")
    flen = bank.filter_length
    full_len = 2 * m - flen + 2 if mode == "symmetric" else 2 * m
    if out_len is None:
        out_len = full_len
    if out_len < 1 or coeff_len(out_len, flen, mode) != m:
        raise ShapeError(
            f"{m} coefficients per band are inconsistent with an output of {out_len} samples"
        )
    up_a = np.zeros(2 * m)
    up_a[::2] = a
    up_d = np.zeros(2 * m)
    up_d[::2] = d
    if mode == "symmetric":
        full = np.convolve(up_a, bank.rec_lo) + np.convolve(up_d, bank.rec_hi)
        out = full[flen - 2:flen - 2 + full_len]
    else:
        full = _wrap_convolve(up_a, bank.rec_lo) + _wrap_convolve(up_d, bank.rec_hi)
        out = np.roll(full, -(flen // 2 - 1))
    return out[:out_len].copy()


@dataclass
class WaveletCoefficients:
    """Multilevel decomposition of one signal.

    ``details[0]`` is the finest band ``d_1`` and ``details[-1]`` the coarsest
    ``d_L``. The flat layout used for thresholding and storage is
    ``[a_L, d_L, d_{L-1}, ..., d_1]``.
    """

    approx: np.ndarray
    details: list
    levels: int
    original_length: int
    wavelet: str
    boundary_mode: str = "symmetric"

    def band_lengths(self):
        """Lengths of the bands in flat order."""
        return [len(self.approx)] + [len(d) for d in reversed(self.details)]

    @property
    def total_count(self):
        return sum(self.band_lengths())

    def flatten(self):
        return np.concatenate([self.approx] + [np.asarray(d) for d in reversed(self.details)])

    @classmethod
    def from_flat(cls, flat, wavelet, levels, original_length, boundary_mode="symmetric"):
        """Split a flat vector back into bands using the length formula."""
        bank = filter_bank(wavelet)
        lengths = level_lengths(original_length, bank.filter_length, levels, boundary_mode)[1:]
        flat = np.asarray(flat, dtype=np.float64)
        expected = lengths[-1] + sum(lengths)
        if flat.shape != (expected,):
            raise ShapeError(f"flat coefficient vector has {flat.size} entries, expected {expected}")
        approx = flat[:lengths[-1]].copy()
        details = []
        pos = lengths[-1]
        for n in reversed(lengths):
            details.append(flat[pos:pos + n].copy())
            pos += n
        details.reverse()
        return cls(approx, details, levels, original_length, bank.name, boundary_mode)


def wavedec(signal, bank, levels="auto", mode="symmetric"):
    """Multilevel decomposition along the approximation branch."""
    bank = filter_bank(bank)
    _check_mode(mode)
    x = _as_signal(signal)
    limit = max_level(len(x), bank.filter_length)
    if levels in (None, "auto"):
        levels = limit
    levels = int(levels)
    if levels < 1:
        raise ConfigurationError(f"levels must be >= 1, got {levels}")
    if levels > limit:
        raise ExcessLevelError(f"{levels} levels requested but at most {limit} fit a signal of length {len(x)}")
    details = []
    approx = x
    for _ in range(levels):
        approx, detail = dwt_single(approx, bank, mode)
        details.append(detail)
    return WaveletCoefficients(approx, details, levels, len(x), bank.name, mode)


def waverec(coeffs):
    """Inverse of :func:`wavedec`; returns exactly ``original_length`` samples."""
    bank = filter_bank(coeffs.wavelet)
    mode = _check_mode(coeffs.boundary_mode)
    if len(coeffs.details) != coeffs.levels:
        raise ShapeError(f"{len(coeffs.details)} detail bands stored for {coeffs.levels} levels")
    lengths = level_lengths(coeffs.original_length, bank.filter_length, coeffs.levels, mode)
    if len(coeffs.approx) != lengths[-1]:
        raise ShapeError(f"approximation has {len(coeffs.approx)} entries, expected {lengths[-1]}")
    approx = np.asarray(coeffs.approx, dtype=np.float64)
    for j in range(coeffs.levels, 0, -1):
        detail = np.asarray(coeffs.details[j - 1], dtype=np.float64)
        if len(detail) != lengths[j]:
            raise ShapeError(f"detail band d_{j} has {len(detail)} entries, expected {lengths[j]}")
        approx = idwt_single(approx, detail, bank, mode, out_len=lengths[j - 1])
    return approx


__all__ = [
    "FilterBank",
    "MODES",
    "WaveletCoefficients",
    "coeff_len",
    "dwt_single",
    "idwt_single",
    "level_lengths",
    "max_level",
    "wavedec",
    "waverec",
]
