"""Rate-targeted wavelet thresholding, binary containers and the lossless baseline."""
from .lossless import (
    REFERENCE_LOSSLESS_RATE,
    CompressionReport,
    LosslessMeasurement,
    brotli_codec,
    compression_report,
    frame_bytes,
    measure_lossless,
)
from .serialize import (
    decode_varint,
    deserialize,
    deserialize_bundle,
    encode_varint,
    serialize,
    serialize_bundle,
)
from .threshold import (
    CompressedSignal,
    FrameBundle,
    MaxCompressionWarning,
    WaveletCompressor,
    check_rate,
    compress,
    compress_frame,
    decompress,
    decompress_frame,
    keep_count,
    lossy_frame,
    top_k,
)

__all__ = [
    "REFERENCE_LOSSLESS_RATE",
    "CompressedSignal",
    "CompressionReport",
    "FrameBundle",
    "LosslessMeasurement",
    "MaxCompressionWarning",
    "WaveletCompressor",
    "brotli_codec",
    "check_rate",
    "compress",
    "compress_frame",
    "compression_report",
    "decode_varint",
    "decompress",
    "decompress_frame",
    "deserialize",
    "deserialize_bundle",
    "encode_varint",
    "frame_bytes",
    "keep_count",
    "lossy_frame",
    "measure_lossless",
    "serialize",
    "serialize_bundle",
    "top_k",
]
