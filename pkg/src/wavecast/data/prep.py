"""Gap repair, segmentation and dataset splitting."""
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigurationError
from .frame import TimeSeriesFrame

logger = logging.getLogger(__name__)

DAY = 86400


def interpolate_gaps(frame, max_gap_minutes=60):
    """Fill short holes by linear interpolation and split at long ones.

    A hole is a run of missing grid points, either absent timestamps or rows
    where any variable is NaN. Holes spanning fewer than ``max_gap_minutes``
    are filled per variable between the bounding observations; longer holes
    split the frame. Observed values are copied through untouched.

    Returns
    -------
    list of TimeSeriesFrame
        Regular (hole-free) frames. Empty if nothing was observed.
    """
    values = frame.to_array()
    observed = ~np.isnan(values).any(axis=1)
    if not observed.any():
        warnings.warn("frame has no fully observed rows; dropping it", stacklevel=2)
        return []
    if not (observed[0] and observed[-1]):
        # no bounding value on one side, so the gap cannot be interpolated
        warnings.warn(
            f"frame starting {frame.timestamps[0]} has unobserved rows at its boundary; truncating",
            stacklevel=2,
        )
    stamps = frame.timestamps[observed]
    values = values[observed]
    step = frame.step
    offsets = (stamps - stamps[0]) // step
    grid = np.arange(offsets[-1] + 1)
    full = np.full((len(grid), values.shape[1]), np.nan)
    full[offsets] = values
    missing_run = np.diff(offsets) - 1
    cuts = np.flatnonzero(missing_run * step >= max_gap_minutes * 60)
    fill = np.isnan(full[:, 0])
    if fill.any():
        for j in range(values.shape[1]):
            full[fill, j] = np.interp(grid[fill], offsets, values[:, j])
    pieces = []
    starts = [0, *(offsets[cuts + 1])]
    stops = [*(offsets[cuts] + 1), len(grid)]
    for lo, hi in zip(starts, stops):
        block = full[lo:hi]
        pieces.append(frame.replace_values(block, stamps[0] + step * grid[lo:hi]))
    if len(pieces) > 1:
        logger.debug("split frame into %d pieces at long gaps", len(pieces))
    return pieces


def segment(frame, min_days=5, max_days=10):
    """Cut long frames into ``ceil(duration / max_days)`` near-equal segments.

    Frames no longer than ``max_days`` pass through unchanged. Segment
    lengths differ by at most one sample.
    """
    if not min_days < max_days:
        raise ConfigurationError(f"min_days ({min_days}) must be below max_days ({max_days})")
    max_samples = int(math.floor(max_days * DAY / frame.step + 1e-9))
    n = len(frame)
    if n <= max_samples:
        return [frame]
    k = -(-n // max_samples)
    edges = np.linspace(0, n, k + 1).round().astype(int)
    return [frame.slice(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]


@dataclass
class DatasetSplit:
    train: list
    validation: list
    test: list
    seed: int
    order: list = field(default_factory=list)

    def counts(self):
        return len(self.train), len(self.validation), len(self.test)


def split_datasets(frames, fractions=(0.6, 0.2, 0.2), seed=0):
    """Randomly assign whole frames to train/validation/test.

    Frames are shuffled with ``numpy.random.default_rng(seed)`` and cut at the
    rounded cumulative fractions of the frame count. Each part gets at least
    one frame.
    """
    frames = list(frames)
    if len(frames) < 3:
        raise ConfigurationError(f"need at least 3 frames to split, got {len(frames)}")
    fractions = np.asarray(fractions, dtype=np.float64)
    if fractions.shape != (3,) or np.any(fractions <= 0) or not np.isclose(fractions.sum(), 1.0):
        raise ConfigurationError(f"fractions must be three positive numbers summing to 1, got {fractions.tolist()}")
    n = len(frames)
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round((fractions[0] + fractions[1]) * n)) - n_train
    n_train = min(max(n_train, 1), n - 2)
    n_val = min(max(n_val, 1), n - n_train - 1)
    parts = np.split(order, [n_train, n_train + n_val])
    return DatasetSplit(*([frames[i] for i in part] for part in parts), seed=seed, order=order.tolist())


def decimate(frame, factor):
    """Keep every ``factor``-th sample, starting with the first."""
    factor = int(factor)
    if factor < 1:
        raise ConfigurationError(f"decimation factor must be positive, got {factor}")
    if factor == 1:
        return frame
    return TimeSeriesFrame(
        frame.timestamps[::factor],
        frame.target[::factor],
        {k: v[::factor] for k, v in frame.past_covariates.items()},
        {k: v[::factor] for k, v in frame.future_covariates.items()},
        frame.step * factor,
        frame.target_name,
    )


def prepare_frames(frames, max_gap_minutes=60, min_days=5, max_days=10):
    """Gap repair followed by segmentation for a list of raw frames."""
    out = []
    for frame in frames:
        for piece in interpolate_gaps(frame, max_gap_minutes):
            out.extend(segment(piece, min_days, max_days))
    return out


__all__ = ["DatasetSplit", "decimate", "interpolate_gaps", "prepare_frames", "segment", "split_datasets", "TimeSeriesFrame"]
