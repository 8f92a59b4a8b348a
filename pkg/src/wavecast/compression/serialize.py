"""Binary containers for compressed signals and frame bundles.

All integers are little-endian.

Signal (``WVC1``)::

    magic        4s   b"WVC1"
    version      u8   1
    wavelet id   u8   1..5 in the order bior1.1, bior1.5, bior2.8, bior3.9, bior6.8
    mode         u8   0 symmetric, 1 periodization
    levels       u8
    length       u64  original sample count
    kept         u64  number of stored coefficients
    rate         f64  requested rate
    indices      kept unsigned LEB128 varints; the first is the flat index,
                 the rest are differences to the previous index
    values       kept f64

Frame bundle (``WVB1``)::

    magic        4s   b"WVB1"
    version      u8   1
    count        u8   number of variables
    step         u32  seconds
    start        i64  epoch seconds of the first sample
    then per variable, in frame order:
    role         u8   0 target, 1 past, 2 future
    name length  u16
    name         utf-8
    block length u64
    block        a WVC1 signal
"""
import struct

import numpy as np

from ..exceptions import FormatError
from ..wavelet import MODES, WAVELETS, filter_bank
from .threshold import CompressedSignal, FrameBundle

SIGNAL_MAGIC = b"WVC1"
BUNDLE_MAGIC = b"WVB1"
VERSION = 1
_SIGNAL_HEADER = struct.Struct("<4sBBBBQQd")
_BUNDLE_HEADER = struct.Struct("<4sBBIq")
_ROLES = ("target", "past", "future")


def encode_varint(value):
    """Unsigned LEB128 encoding.

    >>> encode_varint(300).hex()
    'ac02'
    """
    if value < 0:
        raise ValueError("varints encode non-negative integers only")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varint(buf, pos):
    """Decode one varint at ``pos``; returns ``(value, next_pos)``."""
    result = shift = 0
    start = pos
    while True:
        if pos >= len(buf):
            raise FormatError("truncated varint", offset=start)
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 63:
            raise FormatError("varint longer than 64 bits", offset=start)


def serialize(cs):
    """Encode a :class:`CompressedSignal` as ``WVC1`` bytes."""
    cs.validate()
    bank = filter_bank(cs.wavelet)
    if cs.levels > 255:
        raise FormatError(f"{cs.levels} levels do not fit the header")
    header = _SIGNAL_HEADER.pack(
        SIGNAL_MAGIC,
        VERSION,
        bank.wavelet_id,
        MODES.index(cs.boundary_mode),
        cs.levels,
        cs.original_length,
        len(cs.indices),
        cs.rate,
    )
    deltas = np.diff(cs.indices, prepend=0) if cs.indices.size else cs.indices
    index_stream = b"".join(encode_varint(int(d)) for d in deltas)
    return header + index_stream + cs.values.astype("<f8").tobytes()


def _read_signal(buf, pos, end):
    if end - pos < _SIGNAL_HEADER.size:
        raise FormatError("truncated signal header", offset=pos)
    magic, version, wid, mode, levels, length, kept, rate = _SIGNAL_HEADER.unpack_from(buf, pos)
    if magic != SIGNAL_MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=pos)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=pos + 4)
    if not 1 <= wid <= len(WAVELETS):
        raise FormatError(f"unknown wavelet id {wid}", offset=pos + 5)
    if mode >= len(MODES):
        raise FormatError(f"unknown boundary mode id {mode}", offset=pos + 6)
    pos += _SIGNAL_HEADER.size
    if kept > end - pos:
        raise FormatError(f"header claims {kept} coefficients, more than the remaining bytes", offset=pos)
    indices = np.empty(kept, dtype=np.int64)
    acc = 0
    for i in range(kept):
        delta, pos = decode_varint(buf, pos)
        acc += delta
        indices[i] = acc
    if pos > end:
        raise FormatError("index stream overruns its block", offset=end)
    n_bytes = 8 * kept
    if end - pos < n_bytes:
        raise FormatError("truncated value stream", offset=pos)
    values = np.frombuffer(bytes(buf[pos:pos + n_bytes]), dtype="<f8").astype(np.float64)
    pos += n_bytes
    cs = CompressedSignal(WAVELETS[wid - 1], MODES[mode], levels, length, indices, values, rate)
    return cs, pos


def deserialize(data):
    """Decode ``WVC1`` bytes; trailing bytes are an error."""
    buf = memoryview(bytes(data))
    cs, pos = _read_signal(buf, 0, len(buf))
    if pos != len(buf):
        raise FormatError(f"{len(buf) - pos} trailing bytes", offset=pos)
    return cs


def serialize_bundle(bundle):
    """Encode a :class:`FrameBundle` as ``WVB1`` bytes."""
    if len(bundle.order) > 255:
        raise FormatError("too many variables for one bundle")
    parts = [_BUNDLE_HEADER.pack(BUNDLE_MAGIC, VERSION, len(bundle.order), bundle.step, bundle.start)]
    for name in bundle.order:
        block = serialize(bundle.signals[name])
        raw = name.encode("utf-8")
        parts.append(struct.pack("<BH", _ROLES.index(bundle.roles[name]), len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<Q", len(block)))
        parts.append(block)
    return b"".join(parts)


def deserialize_bundle(data):
    """Decode ``WVB1`` bytes."""
    buf = memoryview(bytes(data))
    if len(buf) < _BUNDLE_HEADER.size:
        raise FormatError("truncated bundle header", offset=0)
    magic, version, count, step, start = _BUNDLE_HEADER.unpack_from(buf, 0)
    if magic != BUNDLE_MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    pos = _BUNDLE_HEADER.size
    signals, roles, order = {}, {}, []
    target = None
    for _ in range(count):
        if len(buf) - pos < 3:
            raise FormatError("truncated variable header", offset=pos)
        role, name_len = struct.unpack_from("<BH", buf, pos)
        if role >= len(_ROLES):
            raise FormatError(f"unknown role id {role}", offset=pos)
        pos += 3
        if len(buf) - pos < name_len + 8:
            raise FormatError("truncated variable name", offset=pos)
        name = bytes(buf[pos:pos + name_len]).decode("utf-8")
        pos += name_len
        (block_len,) = struct.unpack_from("<Q", buf, pos)
        pos += 8
        end = pos + block_len
        if end > len(buf):
            raise FormatError("truncated variable block", offset=pos)
        cs, stop = _read_signal(buf, pos, end)
        if stop != end:
            raise FormatError("variable block length mismatch", offset=stop)
        pos = end
        signals[name], roles[name] = cs, _ROLES[role]
        order.append(name)
        if role == 0:
            target = name
    if pos != len(buf):
        raise FormatError(f"{len(buf) - pos} trailing bytes", offset=pos)
    if target is None:
        raise FormatError("bundle has no target variable", offset=pos)
    return FrameBundle(signals, roles, target, start, step, order)
