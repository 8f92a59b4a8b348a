"""``WFM1`` model files.

Layout (little-endian)::

    magic        4s   b"WFM1"
    version      u8   1
    kind         u8   1 linear, 2 gradient-boosted trees
    header len   u32
    header       utf-8 JSON, sorted keys: {"params", "lag_spec", "normalization"}
                 normalization is {"names", "mins", "maxs"} lists or null
    array count  u16
    per array:
      name len   u8
      name       ascii
      dtype      u8   0 float64, 1 int32, 2 int64
      ndim       u8
      shape      ndim x u64
      data       C-order values

The output is a pure function of the model, so identical fits give identical
files.
"""
import json
import struct

import numpy as np

from ..data.scaling import NormalizationParams
from ..exceptions import FormatError
from ..fileio import atomic_write
from .design import LagSpec
from .gbt import GbtModel
from .linear import LinearModel

MAGIC = b"WFM1"
VERSION = 1
_KINDS = {1: LinearModel, 2: GbtModel}
_DTYPES = ("<f8", "<i4", "<i8")
_HEAD = struct.Struct("<4sBBI")


def _kind_of(model):
    for kind, cls in _KINDS.items():
        if type(model) is cls:
            return kind
    raise TypeError(f"cannot serialize a {type(model).__name__}")


def _norm_state(norm):
    # lists keep the variable order, which sorted JSON keys would lose
    return {"names": list(norm.names), "mins": list(norm.mins), "maxs": list(norm.maxs)}


def dumps(model, spec, normalization=None):
    kind = _kind_of(model)
    header = json.dumps(
        {
            "params": model.get_params(),
            "lag_spec": spec.to_dict(),
            "normalization": None if normalization is None else _norm_state(normalization),
        },
        sort_keys=True,
    ).encode("utf-8")
    parts = [_HEAD.pack(MAGIC, VERSION, kind, len(header)), header]
    arrays = model.get_state()
    parts.append(struct.pack("<H", len(arrays)))
    for name in sorted(arrays):
        arr = np.asarray(arrays[name])
        code = {"f": 0, "i": 1 if arr.itemsize == 4 else 2}[arr.dtype.kind]
        raw = name.encode("ascii")
        parts.append(struct.pack("<B", len(raw)) + raw + struct.pack("<BB", code, arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes())
    return b"".join(parts)


def loads(data):
    """Inverse of :func:`dumps`; returns ``(model, spec, normalization)``."""
    buf = memoryview(bytes(data))
    if len(buf) < _HEAD.size:
        raise FormatError("truncated model header", offset=0)
    magic, version, kind, hlen = _HEAD.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if kind not in _KINDS:
        raise FormatError(f"unknown model kind {kind}", offset=5)
    pos = _HEAD.size
    if len(buf) < pos + hlen + 2:
        raise FormatError("truncated model header", offset=pos)
    try:
        header = json.loads(bytes(buf[pos:pos + hlen]).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable header: {exc}", offset=pos) from exc
    pos += hlen
    (count,) = struct.unpack_from("<H", buf, pos)
    pos += 2
    arrays = {}
    for _ in range(count):
        try:
            (nlen,) = struct.unpack_from("<B", buf, pos)
            name = bytes(buf[pos + 1:pos + 1 + nlen]).decode("ascii")
            pos += 1 + nlen
            code, ndim = struct.unpack_from("<BB", buf, pos)
            pos += 2
            shape = struct.unpack_from(f"<{ndim}Q", buf, pos)
            pos += 8 * ndim
        except struct.error as exc:
            raise FormatError("truncated array header", offset=pos) from exc
        if code >= len(_DTYPES):
            raise FormatError(f"unknown dtype code {code}", offset=pos - 2 - 8 * ndim)
        dtype = np.dtype(_DTYPES[code])
        size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if len(buf) - pos < size:
            raise FormatError(f"truncated data for array {name!r}", offset=pos)
        arrays[name] = np.frombuffer(bytes(buf[pos:pos + size]), dtype=dtype).reshape(shape).astype(dtype.newbyteorder("="))
        pos += size
    if pos != len(buf):
        raise FormatError(f"{len(buf) - pos} trailing bytes", offset=pos)
    model = _KINDS[kind].from_state(header["params"], arrays)
    norm = header["normalization"]
    return model, LagSpec.from_dict(header["lag_spec"]), None if norm is None else NormalizationParams(
        tuple(norm["names"]), tuple(norm["mins"]), tuple(norm["maxs"])
    )


def save_model(path, model, spec, normalization=None):
    atomic_write(path, dumps(model, spec, normalization))


def load_model(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
