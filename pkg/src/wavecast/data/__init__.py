"""Frames, ingestion, gap repair, segmentation, splitting and scaling."""
from .frame import TimeSeriesFrame
from .io import format_timestamp, frame_schema, ingest_csv, parse_schema, parse_timestamp, write_csv
from .prep import DatasetSplit, decimate, interpolate_gaps, prepare_frames, segment, split_datasets
from .scaling import NormalizationParams, UnitScaler, apply_normalization, fit_normalization, invert_normalization
from .synthetic import SyntheticConfig, generate_synthetic

__all__ = [
    "DatasetSplit",
    "NormalizationParams",
    "SyntheticConfig",
    "TimeSeriesFrame",
    "UnitScaler",
    "apply_normalization",
    "decimate",
    "fit_normalization",
    "format_timestamp",
    "frame_schema",
    "generate_synthetic",
    "ingest_csv",
    "interpolate_gaps",
    "invert_normalization",
    "parse_schema",
    "parse_timestamp",
    "prepare_frames",
    "segment",
    "split_datasets",
    "write_csv",
]
