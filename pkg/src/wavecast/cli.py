"""``wavecast`` command-line interface.

Subcommands: ``prepare``, ``compress``, ``decompress``, ``run`` and ``nmi``.

Exit codes: 0 success, 2 data error, 64 usage error, 70 internal error,
130 interrupted.

The seed comes from ``--seed``, else the ``WAVECAST_SEED`` environment
variable, else :data:`DEFAULT_SEED`.
"""
import argparse
import hashlib
import io
import json
import logging
import os
import sys
import traceback
from collections import Counter

import numpy as np

from . import __version__
from .analysis import elbow, fit_beta_curve
from .compression import (
    compress_frame,
    decompress_frame,
    deserialize_bundle,
    frame_bytes,
    measure_lossless,
    serialize_bundle,
)
from .data import (
    DatasetSplit,
    SyntheticConfig,
    apply_normalization,
    fit_normalization,
    generate_synthetic,
    ingest_csv,
    interpolate_gaps,
    prepare_frames,
    split_datasets,
    write_csv,
)
from .data.io import frame_schema
from .data.scaling import NormalizationParams
from .exceptions import ConfigurationError, DataError, FormatError, WavecastError
from .experiment import DEFAULT_RATES, MODELS, GridConfig, clear_partial, run_grid, write_partial, write_report
from .fileio import atomic_write
from .forecasting import LagSpec
from .infometrics import logit_rates, nmi_curve
from .wavelet import WAVELETS

EXIT_OK, EXIT_DATA, EXIT_USAGE, EXIT_INTERNAL, EXIT_INTERRUPTED = 0, 2, 64, 70, 130
DEFAULT_SEED = 0
SPLITS = ("train", "validation", "test")
MANIFEST = "manifest.json"

logger = logging.getLogger("wavecast")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems with exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_strings(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _csv_floats(text):
    try:
        return [float(t) for t in _csv_strings(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _rate(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"rate must satisfy 0 <= rate < 1, got {value}")
    return value


def resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get("WAVECAST_SEED")
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"WAVECAST_SEED must be an integer, got {env!r}") from None


def _sha256(data):
    return hashlib.sha256(data if isinstance(data, bytes) else data.encode("utf-8")).hexdigest()


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


# ------------------------------------------------------------------ prepare


def _load_raw(args, seed):
    if args.synthetic_days is not None:
        if args.input:
            raise UsageError("--input and --synthetic-days are mutually exclusive")
        cfg = SyntheticConfig(days=args.synthetic_days)
        return generate_synthetic(cfg, seed), {"synthetic": cfg.to_dict(), "seed": seed}
    if not args.input:
        raise UsageError("give --input files or --synthetic-days")
    if not args.schema:
        raise UsageError("--schema is required with --input")
    frames = []
    for path in args.input:
        frames.extend(ingest_csv(path, args.schema, args.max_gap_minutes))
    return frames, {"inputs": [os.path.basename(p) for p in args.input]}


def cmd_prepare(args):
    seed = resolve_seed(args.seed)
    raw, source = _load_raw(args, seed)
    segments = prepare_frames(raw, args.max_gap_minutes, args.min_days, args.max_days)
    if not segments:
        raise DataError("no usable segments after gap repair")
    split = split_datasets(segments, tuple(args.fractions), seed)
    params = fit_normalization(split.train)
    clamped = Counter()
    manifest = {
        "version": 1,
        "seed": seed,
        "source": source,
        "schema": frame_schema(segments[0]),
        "step": int(segments[0].step),
        "max_gap_minutes": args.max_gap_minutes,
        "min_days": args.min_days,
        "max_days": args.max_days,
        "fractions": list(args.fractions),
        "normalization": params.as_dict(),
        "counts": dict(zip(SPLITS, split.counts())),
        "splits": {},
    }
    for name, frames in zip(SPLITS, (split.train, split.validation, split.test)):
        entries = []
        for i, frame in enumerate(frames):
            scaled = apply_normalization(frame, params, clamped)
            rel = f"{name}/segment_{i:03d}.csv"
            with_text = _frame_csv(scaled)
            atomic_write(os.path.join(args.out, rel), with_text)
            entries.append({
                "file": rel,
                "samples": len(frame),
                "start": int(frame.timestamps[0]),
                "end": int(frame.timestamps[-1]),
                "sha256": _sha256(with_text),
            })
        manifest["splits"][name] = entries
    manifest["clamped"] = dict(sorted(clamped.items()))
    text = _dump(manifest)
    atomic_write(os.path.join(args.out, MANIFEST), text)
    counts = manifest["counts"]
    print(f"segments: {len(segments)} (train {counts['train']}, validation {counts['validation']}, test {counts['test']})")
    print(f"manifest sha256: {_sha256(text)}")
    return EXIT_OK


def _frame_csv(frame):
    buf = io.StringIO()
    write_csv(buf, [frame])
    return buf.getvalue()


def load_prepared(directory):
    """Read a ``prepare`` output directory back.

    Returns ``(split, normalization, manifest, manifest_sha256)``.
    """
    path = os.path.join(directory, MANIFEST)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise DataError(f"{path} not found; run 'wavecast prepare' first") from None
    manifest = json.loads(text)
    schema = manifest["schema"]
    parts = []
    for name in SPLITS:
        frames = []
        for entry in manifest["splits"][name]:
            got = ingest_csv(os.path.join(directory, entry["file"]), schema, manifest["max_gap_minutes"], manifest["step"])
            if len(got) != 1 or not got[0].is_regular:
                raise DataError(f"{entry['file']} is not one regular segment")
            frames.append(got[0])
        parts.append(frames)
    split = DatasetSplit(*parts, seed=manifest["seed"])
    return split, NormalizationParams.from_dict(manifest["normalization"]), manifest, _sha256(text)


# ----------------------------------------------------------- compress / decompress


def _single_frame(path, schema, max_gap_minutes):
    pieces = []
    for frame in ingest_csv(path, schema, max_gap_minutes):
        pieces.extend(interpolate_gaps(frame, max_gap_minutes))
    if len(pieces) != 1:
        raise DataError(f"{path} splits into {len(pieces)} runs at gaps over {max_gap_minutes} minutes; compress them separately")
    return pieces[0]


def cmd_compress(args):
    frame = _single_frame(args.input, args.schema, args.max_gap_minutes)
    bundle = compress_frame(frame, args.wavelet, args.rate, args.levels, args.mode)
    blob = serialize_bundle(bundle)
    atomic_write(args.out, blob)
    raw = frame_bytes([frame])
    print(f"samples: {len(frame)}")
    for name, rate in bundle.achieved_rates().items():
        print(f"{name}: achieved rate {rate:.6f}")
    print(f"raw float64 bytes: {len(raw)}")
    print(f"container bytes: {len(blob)}")
    if args.codec:
        print(f"container bytes after brotli: {measure_lossless(blob).bytes_compressed}")
        print(f"lossless brotli rate of raw data: {measure_lossless(raw).rate:.4f}")
    return EXIT_OK


def cmd_decompress(args):
    with open(args.input, "rb") as fh:
        bundle = deserialize_bundle(fh.read())
    frame = decompress_frame(bundle)
    atomic_write(args.out, _frame_csv(frame))
    print(f"wrote {len(frame)} samples of {len(frame.names)} variables to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------- run


def _lag_specs(args):
    past_thin = args.past_lag_thin or args.lag_thin
    P, H = args.input_window, args.horizon

    def spec(target_thin):
        return LagSpec(
            P, H, args.rollout_horizon,
            tuple(range(1, P + 1, target_thin)),
            tuple(range(1, P + 1, past_thin)),
            tuple(range(0, H, args.lead_thin)),
        )

    ols = spec(args.lag_thin)
    gbt = spec(args.gbt_lag_thin) if args.gbt_lag_thin else None
    return ols, gbt


def grid_config_from_args(args, seed):
    ols_spec, gbt_spec = _lag_specs(args)
    return GridConfig(
        wavelets=args.wavelets,
        rates=args.rates,
        models=args.models,
        seed=seed,
        lag_spec=ols_spec,
        gbt_lag_spec=gbt_spec,
        train_stride=args.train_stride,
        test_stride=args.test_stride,
        ridge=args.ridge,
        gbt_params={
            "n_rounds": args.gbt_rounds,
            "max_depth": args.gbt_depth,
            "learning_rate": args.gbt_learning_rate,
            "min_samples_leaf": args.gbt_min_leaf,
            "split_method": args.gbt_split,
            "max_bins": args.gbt_bins,
        },
        past_fill=args.past_fill,
        early_stop=args.early_stop,
        early_stopping_rounds=args.patience,
        nmi_k=args.k,
        jobs=args.jobs,
    )


def cmd_run(args):
    seed = resolve_seed(args.seed)
    config = grid_config_from_args(args, seed)
    split, params, _, manifest_hash = load_prepared(args.data)
    os.makedirs(args.out, exist_ok=True)
    done = []

    def progress(record):
        done.append(record)
        write_partial(args.out, done)
        status = f"rmse {record.rmse:.4f}" if record.ok else f"FAILED ({record.error})"
        logger.info("%s r=%s %s: %s", record.wavelet, record.rate, record.model, status)

    records = run_grid(split, config, params, progress)
    write_report(args.out, records, config, {"data_manifest_sha256": manifest_hash})
    clear_partial(args.out)
    failed = sum(not r.ok for r in records)
    print(f"{len(records)} records ({failed} failed) written to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------- nmi


def _nmi_signals(args, seed):
    if args.data:
        split, _, _, _ = load_prepared(args.data)
        return [f.target for f in split.train]
    raw, _ = _load_raw(args, seed)
    pieces = []
    for frame in raw:
        pieces.extend(interpolate_gaps(frame, args.max_gap_minutes))
    return [f.target for f in pieces]


def cmd_nmi(args):
    seed = resolve_seed(args.seed)
    signals = _nmi_signals(args, seed)
    rates = [0.0] + logit_rates(args.points, args.min_rate, args.max_rate)
    curves, fits, elbows, rows = [], [], [], []
    for wavelet in args.wavelets:
        per_signal = [[p.nmi for p in nmi_curve(y, wavelet, rates, args.k, seed)] for y in signals]
        mean = np.mean(per_signal, axis=0).tolist()
        curves.append({"wavelet": wavelet, "rates": rates, "nmi": mean, "per_signal": per_signal})
        rows += [f"{wavelet},{r!r},{v!r}" for r, v in zip(rates, mean)]
        fit = fit_beta_curve(list(zip(rates, mean)))
        fits.append({"wavelet": wavelet, "alpha": fit.alpha, "beta": fit.beta, "sse": fit.sse,
                     "converged": fit.converged, "n_iter": fit.n_iter, "steepness": fit.steepness_report()})
        knee = elbow(rates, [1.0 - v for v in mean])
        elbows.append({"wavelet": wavelet, "recommended_rate": knee.recommended_rate, "flat": knee.flat})
        print(f"{wavelet}: alpha {fit.alpha:.4g} beta {fit.beta:.4g} sse {fit.sse:.3g} elbow {knee.recommended_rate:.4g}")
    report = {
        "config": {"k": args.k, "seed": seed, "points": args.points, "min_rate": args.min_rate,
                   "max_rate": args.max_rate, "signals": len(signals)},
        "curves": curves,
        "beta_fits": fits,
        "elbows": elbows,
    }
    atomic_write(os.path.join(args.out, "nmi.json"), _dump(report))
    atomic_write(os.path.join(args.out, "nmi_curve.csv"), "wavelet,rate,nmi\n" + "".join(r + "\n" for r in rows))
    return EXIT_OK


# ------------------------------------------------------------------- parser


def _add_source(p, required_schema=False):
    p.add_argument("--input", nargs="+", metavar="CSV", help="input CSV file(s) with a 'timestamp' column")
    p.add_argument("--schema", nargs="+", metavar="ROLE=COLUMN", required=required_schema,
                   help="column roles, e.g. target=level past=sea future=pump")
    p.add_argument("--max-gap-minutes", type=_positive_int, default=60)


def build_parser():
    parser = _Parser(prog="wavecast", description="Compression-aware time-series forecasting toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="repeat for more detail")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("prepare", help="ingest, repair, segment, split and normalize")
    _add_source(p)
    p.add_argument("--synthetic-days", type=float, help="generate this many days of synthetic data instead")
    p.add_argument("--min-days", type=float, default=5.0)
    p.add_argument("--max-days", type=float, default=10.0)
    p.add_argument("--fractions", type=float, nargs=3, default=[0.6, 0.2, 0.2], metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("compress", help="compress one CSV into a WVB1 bundle")
    p.add_argument("--input", required=True, metavar="CSV")
    p.add_argument("--schema", nargs="+", required=True, metavar="ROLE=COLUMN")
    p.add_argument("--max-gap-minutes", type=_positive_int, default=60)
    p.add_argument("--wavelet", choices=WAVELETS, default="bior1.1")
    p.add_argument("--rate", type=_rate, required=True)
    p.add_argument("--levels", default="auto", type=lambda s: s if s == "auto" else _positive_int(s))
    p.add_argument("--mode", choices=("symmetric", "periodization"), default="symmetric")
    p.add_argument("--no-codec", dest="codec", action="store_false", help="skip the brotli byte counts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="reconstruct a CSV from a WVB1 bundle")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("run", help="run the wavelet x rate x model grid")
    p.add_argument("--data", required=True, help="directory written by 'prepare'")
    p.add_argument("--out", required=True)
    p.add_argument("--wavelets", type=_csv_strings, default=list(WAVELETS))
    p.add_argument("--rates", type=_csv_floats, default=list(DEFAULT_RATES))
    p.add_argument("--models", type=_csv_strings, default=list(MODELS))
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--input-window", type=_positive_int, default=360)
    p.add_argument("--horizon", type=_positive_int, default=60)
    p.add_argument("--rollout-horizon", type=_positive_int, default=360)
    p.add_argument("--lag-thin", type=_positive_int, default=1, help="keep every N-th target lag")
    p.add_argument("--past-lag-thin", type=_positive_int, help="keep every N-th past-covariate lag (default: --lag-thin)")
    p.add_argument("--lead-thin", type=_positive_int, default=1, help="keep every N-th future-covariate lead")
    p.add_argument("--gbt-lag-thin", type=_positive_int, help="target-lag thinning for GBT only (default: --lag-thin)")
    p.add_argument("--train-stride", type=_positive_int, default=1)
    p.add_argument("--test-stride", type=_positive_int, default=60)
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--gbt-rounds", type=int, default=200)
    p.add_argument("--gbt-depth", type=_positive_int, default=6)
    p.add_argument("--gbt-learning-rate", type=float, default=0.1)
    p.add_argument("--gbt-min-leaf", type=_positive_int, default=5)
    p.add_argument("--gbt-split", choices=("exact", "hist"), default="exact")
    p.add_argument("--gbt-bins", type=_positive_int, default=256)
    p.add_argument("--early-stop", action="store_true", help="use the validation split for GBT early stopping")
    p.add_argument("--patience", type=_positive_int, default=10)
    p.add_argument("--past-fill", choices=("persistence", "oracle"), default="persistence")
    p.add_argument("--k", type=_positive_int, default=10, help="KSG neighbour count")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("nmi", help="NMI curves, beta fits and elbows per wavelet")
    _add_source(p)
    p.add_argument("--data", help="use the training targets of a 'prepare' directory")
    p.add_argument("--synthetic-days", type=float)
    p.add_argument("--wavelets", type=_csv_strings, default=list(WAVELETS))
    p.add_argument("--points", type=_positive_int, default=20)
    p.add_argument("--min-rate", type=_rate, default=0.01)
    p.add_argument("--max-rate", type=_rate, default=0.9999)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_nmi)
    return parser


def _validate(args, parser):
    for name in ("wavelets", "models"):
        allowed = WAVELETS if name == "wavelets" else MODELS
        for item in getattr(args, name, None) or []:
            if item not in allowed:
                parser.error(f"unknown {name[:-1]} {item!r}; choose from {', '.join(allowed)}")
    if getattr(args, "command", None) == "nmi" and args.min_rate >= args.max_rate:
        parser.error("--min-rate must be below --max-rate")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"wavecast: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"wavecast: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FormatError, WavecastError, OSError) as exc:
        print(f"wavecast: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        print("wavecast: interrupted; unfinished results are in *.partial files", file=sys.stderr)
        return EXIT_INTERRUPTED
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
