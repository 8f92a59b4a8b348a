"""Lossless baseline measured with an external codec.

The codec is a black box: any callable ``bytes -> bytes`` works. The default
is the Brotli reference implementation when the ``brotli`` package is
importable.
"""
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .serialize import serialize_bundle
from .threshold import compress_frame

logger = logging.getLogger(__name__)

# Brotli rate on the original (unpublished) intake dataset; a reference value only.
REFERENCE_LOSSLESS_RATE = 0.36


def brotli_codec(quality=11):
    """Return a Brotli compressor, or ``None`` if the package is missing."""
    try:
        import brotli
    except ImportError:
        return None
    return lambda data: brotli.compress(bytes(data), quality=quality)


def _resolve(codec):
    if codec is None or codec == "brotli":
        return "brotli", brotli_codec()
    if callable(codec):
        return getattr(codec, "__name__", "custom"), codec
    raise ValueError(f"unknown codec {codec!r}")


@dataclass
class LosslessMeasurement:
    codec: str
    bytes_raw: int
    bytes_compressed: int = None
    available: bool = True

    @property
    def rate(self):
        """``1 - compressed / raw``, or ``None`` when the codec was missing."""
        if not self.available or not self.bytes_raw:
            return None
        return 1.0 - self.bytes_compressed / self.bytes_raw


def measure_lossless(data, codec="brotli"):
    """Compress ``data`` with ``codec`` and record the byte counts.

    A missing codec yields an entry with ``available=False`` instead of an
    exception so that reporting can carry on.
    """
    data = bytes(data)
    name, fn = _resolve(codec)
    if fn is None:
        logger.warning("codec %s is unavailable; lossless baseline skipped", name)
        return LosslessMeasurement(name, len(data), None, available=False)
    out = LosslessMeasurement(name, len(data), len(fn(data)))
    if out.bytes_compressed > out.bytes_raw:
        warnings.warn(f"{name} expanded {out.bytes_raw} bytes to {out.bytes_compressed}", stacklevel=2)
    return out


def frame_bytes(frames):
    """Raw float64 little-endian bytes of every variable, column by column."""
    return b"".join(np.ascontiguousarray(f.to_array().T, dtype="<f8").tobytes() for f in frames)


@dataclass
class CompressionReport:
    """Lossless baseline plus lossy byte counts per (wavelet, rate)."""

    lossless_rate: float
    lossy_rates: list
    bytes_raw: int
    bytes_lossless: int
    bytes_lossy: dict = field(default_factory=dict)
    codec: str = "brotli"
    available: bool = True

    def to_dict(self):
        return {
            "codec": self.codec,
            "available": self.available,
            "lossless_rate": self.lossless_rate,
            "reference_lossless_rate": REFERENCE_LOSSLESS_RATE,
            "lossy_rates": list(self.lossy_rates),
            "bytes_raw": self.bytes_raw,
            "bytes_lossless": self.bytes_lossless,
            "bytes_lossy": [
                {"wavelet": w, "rate": r, "bytes": b, "bytes_after_codec": c}
                for (w, r), (b, c) in sorted(self.bytes_lossy.items())
            ],
        }


def compression_report(frames, wavelets, rates, codec="brotli"):
    """Measure the lossless baseline and the size of every lossy container."""
    frames = list(frames)
    raw = frame_bytes(frames)
    base = measure_lossless(raw, codec)
    _, fn = _resolve(codec)
    lossy = {}
    for wavelet in wavelets:
        for rate in rates:
            blob = b"".join(serialize_bundle(compress_frame(f, wavelet, rate)) for f in frames)
            lossy[(wavelet, float(rate))] = (len(blob), len(fn(blob)) if fn else None)
    return CompressionReport(base.rate, list(rates), base.bytes_raw, base.bytes_compressed, lossy, base.codec, base.available)
