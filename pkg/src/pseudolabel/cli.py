"""Command line front-end.

Subcommands: ``run`` (batch pipeline), ``simulate`` (synthetic corpus),
``snr`` (segment SNR of two WAVs), ``align`` (offset diagnostics),
``mca`` (loss report on two grid dumps), ``iam`` (mask target
generation). ``run`` also accepts a ``key=value`` config file; explicit
flags override file values.

Exit codes: 0 success, 1 batch-level failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import gridio
from .audio_io import ManifestError, read_wav, parse_segments
from .dsp import StftConfig, magnitude, stft
from .level_align import MflfConfig
from .losses import iam_target, mca_loss
from .pipeline import PipelineConfig, default_worker_count, run_tls, write_results
from .snr_filter import estimate_snr
from .synth import simulate_corpus
from .time_align import gcc_phat

_CONFIG_TYPES = {
    "manifest": str,
    "out": str,
    "workers": int,
    "sample_rate": int,
    "n_fft": int,
    "hop": int,
    "window": str,
    "taps": int,
    "xi": float,
    "diag_load": float,
    "max_lag_s": float,
    "snr_threshold_db": float,
}


class ConfigError(ValueError):
    pass


def parse_config_file(path) -> dict:
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_TYPES:
                raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_TYPES[key](value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{line_no}: bad value for {key}: {exc}") from exc
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudolabel",
        description="Generate time- and level-aligned, SNR-filtered pseudo labels "
                    "from paired close-talk and far-field recordings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process a segment manifest end to end")
    run.add_argument("--manifest", help="input JSONL segment manifest")
    run.add_argument("--out", help="output directory (results.jsonl + kept WAVs)")
    run.add_argument("--config", help="key=value config file; flags override it")
    run.add_argument("--workers", type=int, help="parallel worker processes")
    run.add_argument("--sample-rate", type=int, dest="sample_rate")
    run.add_argument("--n-fft", type=int, dest="n_fft")
    run.add_argument("--hop", type=int)
    run.add_argument("--window", choices=("hann", "sqrt_hann"))
    run.add_argument("--taps", type=int, help="filter taps per frequency bin")
    run.add_argument("--xi", type=float, help="weight floor coefficient")
    run.add_argument("--diag-load", type=float, dest="diag_load")
    run.add_argument("--max-lag-s", type=float, dest="max_lag_s")
    run.add_argument("--snr-threshold-db", type=float, dest="snr_threshold_db")

    sim = sub.add_parser("simulate", help="write a synthetic corpus with ground truth")
    sim.add_argument("--out", required=True)
    sim.add_argument("--count", type=int, default=50)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--sample-rate", type=int, default=16000, dest="sample_rate")
    sim.add_argument("--min-duration-s", type=float, default=4.0, dest="min_duration_s")
    sim.add_argument("--max-duration-s", type=float, default=8.0, dest="max_duration_s")
    sim.add_argument("--snr-min-db", type=float, default=0.0, dest="snr_min_db")
    sim.add_argument("--snr-max-db", type=float, default=20.0, dest="snr_max_db")
    sim.add_argument("--max-delay", type=int, default=4000, dest="max_delay")
    sim.add_argument("--max-decay-ms", type=float, default=50.0, dest="max_decay_ms")

    snr = sub.add_parser("snr", help="estimated SNR of an estimate against a reference WAV")
    snr.add_argument("estimate")
    snr.add_argument("reference")

    align = sub.add_parser("align", help="time-offset diagnostics for two WAVs")
    align.add_argument("close")
    align.add_argument("reference")
    align.add_argument("--max-lag-s", type=float, default=0.5, dest="max_lag_s")

    mca = sub.add_parser("mca", help="loss report for two magnitude grid dumps")
    mca.add_argument("target")
    mca.add_argument("estimate")
    mca.add_argument("--alpha", type=float, default=1.0)

    iam = sub.add_parser("iam", help="ideal amplitude mask target from clean + mixture WAVs")
    iam.add_argument("clean")
    iam.add_argument("mixture")
    iam.add_argument("-o", "--out", required=True, help="output grid file")
    iam.add_argument("--clip-max", type=float, default=2.0, dest="clip_max")
    iam.add_argument("--n-fft", type=int, default=512, dest="n_fft")
    iam.add_argument("--hop", type=int, default=256)
    iam.add_argument("--window", choices=("hann", "sqrt_hann"), default="sqrt_hann")

    return parser


def _merged(args, config: dict, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _cmd_run(args) -> int:
    config_values = parse_config_file(args.config) if args.config else {}
    manifest_path = _merged(args, config_values, "manifest", None)
    out_dir = _merged(args, config_values, "out", None)
    if not manifest_path or not out_dir:
        print("run: --manifest and --out are required (flag or config file)", file=sys.stderr)
        return 2
    stft_cfg = StftConfig(
        n_fft=_merged(args, config_values, "n_fft", 512),
        hop=_merged(args, config_values, "hop", 256),
        window_kind=_merged(args, config_values, "window", "sqrt_hann"),
        sample_rate=_merged(args, config_values, "sample_rate", 16000),
    )
    mflf_cfg = MflfConfig(
        L=_merged(args, config_values, "taps", MflfConfig.L),
        xi=_merged(args, config_values, "xi", MflfConfig.xi),
        diag_load=_merged(args, config_values, "diag_load", MflfConfig.diag_load),
    )
    pipe_cfg = PipelineConfig(
        stft=stft_cfg,
        mflf=mflf_cfg,
        max_lag_s=_merged(args, config_values, "max_lag_s", 0.5),
        snr_threshold_db=_merged(args, config_values, "snr_threshold_db", -10.0),
        worker_count=_merged(args, config_values, "workers", default_worker_count()),
        output_dir=str(out_dir),
    )
    try:
        manifest = parse_segments(manifest_path)
    except ManifestError as exc:
        print(f"run: bad manifest: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"run: cannot read manifest: {exc}", file=sys.stderr)
        return 1
    records = run_tls(manifest, pipe_cfg)
    results_path = Path(out_dir) / "results.jsonl"
    write_results(records, results_path)
    kept = sum(1 for r in records if r.kept)
    failed = sum(1 for r in records if r.status != "ok")
    discarded = len(records) - kept - failed
    print(f"{len(records)} segments: {kept} kept, {discarded} discarded, {failed} failed "
          f"-> {results_path}")
    return 0


def _cmd_simulate(args) -> int:
    manifest_path, truth_path = simulate_corpus(
        args.out, count=args.count, seed=args.seed, sample_rate=args.sample_rate,
        duration_range=(args.min_duration_s, args.max_duration_s),
        delay_range=(0, args.max_delay),
        max_decay_ms=args.max_decay_ms,
        snr_range_db=(args.snr_min_db, args.snr_max_db),
    )
    print(f"wrote {args.count} segments: {manifest_path} (truth: {truth_path})")
    return 0


def _cmd_snr(args) -> int:
    estimate = read_wav(args.estimate).channels[0]
    reference = read_wav(args.reference).channels[0]
    print(f"{estimate_snr(estimate, reference):.6g}")
    return 0


def _cmd_align(args) -> int:
    close = read_wav(args.close)
    reference = read_wav(args.reference)
    if close.sample_rate != reference.sample_rate:
        print("align: sample rates differ", file=sys.stderr)
        return 1
    max_lag = int(round(args.max_lag_s * close.sample_rate))
    result = gcc_phat(close.channels[0], reference.channels[0], max_lag=max_lag, refine=True)
    offset_s = result.offset_samples / close.sample_rate
    refined = "" if result.refined_offset is None else f" refined_offset={result.refined_offset:.3f}"
    print(f"offset_samples={result.offset_samples} offset_s={offset_s:.6f} "
          f"peak_value={result.peak_value:.6g} peak_ratio={result.peak_ratio:.6g}{refined}")
    return 0


def _cmd_mca(args) -> int:
    target = gridio.load_grid(args.target)
    estimate = gridio.load_grid(args.estimate)
    report = mca_loss(target, estimate, alpha=args.alpha)
    print(f"mse={report.mse:.12g} cossim={report.cossim_loss:.12g} "
          f"mca={report.mca:.12g} alpha={report.alpha:g}")
    return 0


def _cmd_iam(args) -> int:
    clean = read_wav(args.clean)
    mixture = read_wav(args.mixture)
    if clean.sample_rate != mixture.sample_rate:
        print("iam: sample rates differ", file=sys.stderr)
        return 1
    cfg = StftConfig(n_fft=args.n_fft, hop=args.hop, window_kind=args.window,
                     sample_rate=clean.sample_rate)
    mag_clean = magnitude(stft(clean.channels[0], cfg))
    mag_mix = magnitude(stft(mixture.channels[0], cfg))
    n = min(mag_clean.n_frames, mag_mix.n_frames)
    mask = iam_target(mag_clean.data[:n], mag_mix.data[:n], clip_max=args.clip_max)
    gridio.save_grid(args.out, mask)
    print(f"wrote {mask.shape[0]}x{mask.shape[1]} mask to {args.out}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "simulate": _cmd_simulate,
    "snr": _cmd_snr,
    "align": _cmd_align,
    "mca": _cmd_mca,
    "iam": _cmd_iam,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"pseudolabel {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pseudolabel {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
