"""CSV ingestion and export for :class:`TimeSeriesFrame`."""
import csv
import logging
import math
from collections import Counter
from datetime import datetime, timezone

import numpy as np

from ..exceptions import ConfigurationError, DataError, OrderingError, ParseError
from .frame import TimeSeriesFrame

logger = logging.getLogger(__name__)

ROLES = ("target", "past", "future")


def parse_schema(items):
    """Turn ``role=column`` strings into a schema mapping.

    ``target`` takes exactly one column; ``past`` and ``future`` may repeat.

    >>> parse_schema(["target=level", "past=sea", "past=temp", "future=pump"])
    {'target': 'level', 'past': ['sea', 'temp'], 'future': ['pump']}
    """
    schema = {"target": None, "past": [], "future": []}
    for item in items:
        role, sep, column = str(item).partition("=")
        role, column = role.strip(), column.strip()
        if not sep or not column or role not in ROLES:
            raise ConfigurationError(f"bad schema entry {item!r}; expected role=column with role in {ROLES}")
        if role == "target":
            if schema["target"] is not None:
                raise ConfigurationError("schema names more than one target column")
            schema["target"] = column
        else:
            schema[role].append(column)
    if schema["target"] is None:
        raise ConfigurationError("schema must name a target column")
    return schema


def normalize_schema(schema):
    if isinstance(schema, (list, tuple)):
        return parse_schema(schema)
    out = {"target": schema["target"], "past": [], "future": []}
    for role in ("past", "future"):
        cols = schema.get(role) or []
        out[role] = [cols] if isinstance(cols, str) else list(cols)
    return out


def parse_timestamp(text):
    """RFC 3339 or epoch seconds to integer epoch seconds (UTC)."""
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        pass
    else:
        if not math.isfinite(value):
            raise ValueError(f"non-finite timestamp {text!r}")
        return int(round(value))
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return int(round(stamp.timestamp()))


def format_timestamp(epoch):
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_value(text):
    text = text.strip()
    if text == "" or text.lower() in ("nan", "na", "null"):
        return math.nan
    if "," in text:
        raise ValueError(f"unexpected separator in number {text!r}")
    value = float(text)
    if math.isinf(value):
        raise ValueError(f"infinite value {text!r}")
    return value


def _split_runs(timestamps, step, max_gap_seconds):
    """Indices where a new run starts because the hole is too long to repair."""
    missing = np.diff(timestamps) // step - 1
    return np.flatnonzero(missing * step >= max_gap_seconds) + 1


def ingest_csv(path, schema, max_gap_minutes=60, step=None):
    """Read a CSV file into a list of frames.

    Rows with a missing or empty value in any mapped column are dropped and
    count as gaps. Runs are broken wherever a hole is too long for
    :func:`~wavecast.data.prep.interpolate_gaps` to fill (``max_gap_minutes``);
    shorter holes stay in the frame as missing grid points.

    Parameters
    ----------
    path : path-like
    schema : mapping or list of ``role=column`` strings
    max_gap_minutes : int
    step : int, optional
        Sampling step in seconds. Inferred as the most common timestamp
        difference when omitted.
    """
    schema = normalize_schema(schema)
    columns = [schema["target"], *schema["past"], *schema["future"]]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if "timestamp" not in header:
            raise ParseError("header has no 'timestamp' column", line=1)
        missing = [c for c in columns if c not in header]
        if missing:
            raise ParseError(f"header lacks columns {missing}", line=1)
        ts_idx = header.index("timestamp")
        idx = [header.index(c) for c in columns]
        stamps, rows = [], []
        previous = None
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(row)}", line=line)
            try:
                stamp = parse_timestamp(row[ts_idx])
                values = [_parse_value(row[i]) for i in idx]
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from None
            if previous is not None and stamp <= previous:
                raise OrderingError(f"timestamp {row[ts_idx].strip()} does not increase", line=line)
            previous = stamp
            if any(math.isnan(v) for v in values):
                continue
            stamps.append(stamp)
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no complete rows")
    stamps = np.asarray(stamps, dtype=np.int64)
    data = np.asarray(rows, dtype=np.float64)
    if step is None:
        diffs = np.diff(stamps)
        step = Counter(diffs.tolist()).most_common(1)[0][0] if len(diffs) else 60
    step = int(step)
    off_grid = np.flatnonzero((stamps - stamps[0]) % step)
    if off_grid.size:
        raise DataError(f"{path}: timestamp {format_timestamp(stamps[off_grid[0]])} is off the {step}s grid")
    frames = []
    bounds = [0, *_split_runs(stamps, step, max_gap_minutes * 60), len(stamps)]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        block = data[lo:hi]
        frames.append(
            TimeSeriesFrame(
                stamps[lo:hi],
                block[:, 0],
                {c: block[:, 1 + i] for i, c in enumerate(schema["past"])},
                {c: block[:, 1 + len(schema["past"]) + i] for i, c in enumerate(schema["future"])},
                step,
                schema["target"],
            )
        )
    logger.info("read %d rows from %s into %d frame(s)", len(stamps), path, len(frames))
    return frames


def write_csv(path_or_file, frames, float_format="%.17g"):
    """Write frames (same schema) as one CSV with a ``timestamp`` column."""
    if isinstance(frames, TimeSeriesFrame):
        frames = [frames]
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp", *frames[0].names])
        for frame in frames:
            arr = frame.to_array()
            for stamp, row in zip(frame.timestamps, arr):
                writer.writerow([format_timestamp(stamp), *(float_format % v for v in row)])
    finally:
        if own:
            fh.close()


def frame_schema(frame):
    """Schema mapping describing a frame's roles."""
    return {"target": frame.target_name, "past": list(frame.past_covariates), "future": list(frame.future_covariates)}
