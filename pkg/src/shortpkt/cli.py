"""Command-line entry point: ``shortpkt {run,sweep,calibrate,plot,export-waveform}``.

Outputs go to ``--out`` or, by default, to ``$SHORTPKT_OUTDIR`` (else the
current directory). When ``--seed`` is omitted a random seed is drawn and
echoed to stderr so the run can be repeated.
"""
from __future__ import annotations

import argparse
import logging
import os
import secrets
import sys
from pathlib import Path

import numpy as np

OUTDIR_ENV = "SHORTPKT_OUTDIR"


def default_outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "."))


def _seed(args, fallback=None) -> int:
    if args.seed is not None:
        return args.seed
    if fallback is not None:
        return fallback
    seed = secrets.randbits(32)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _opt_float(text: str):
    return None if text.lower() in ("none", "off") else float(text)


def _out_path(arg, name: str) -> Path:
    path = Path(arg) if arg else default_outdir() / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _add_cell_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--L", type=int, default=100, help="message bits per packet")
    p.add_argument("--code", default="CC(1/2)", help='e.g. "CC(2/3)", "RS(31,21)", "RS(31,21)+CC(1/2)"')
    p.add_argument("--interleaver", default="none",
                   choices=["none", "packet_block", "symbol_block", "qpp", "srandom"])
    p.add_argument("--gamma", type=_opt_float, default=None, help="impulse power ratio in dB, or none")
    p.add_argument("--freq", type=float, default=50e3, help="impulse frequency in Hz")
    p.add_argument("--duration", type=float, default=100e-9, help="impulse duration in s")
    p.add_argument("--seed", type=int, default=None)


def cmd_run(args) -> int:
    from .channel import ImpulseProfile
    from .harness import ExperimentConfig, run_sweep

    config = ExperimentConfig(
        L=args.L, codes=[args.code], interleavers=[args.interleaver], gamma_db=[args.gamma],
        impulse_freq_hz=[args.freq], awgn_snr_db=[args.snr],
        channel=ImpulseProfile(impulse_duration_s=args.duration),
        min_error_packets=args.min_errors or None, max_packets=args.max_packets, seed=_seed(args))
    records = run_sweep(config, csv_path=_out_path(args.out, "run.csv") if args.out or args.save else None)
    r = records[0]
    if r.error:
        print(f"error: {r.error}", file=sys.stderr)
        return 1
    lo, hi = r.interval
    print(f"{args.code} {args.interleaver}: {r.errors}/{r.packets} PER={r.per:.4g} "
          f"95% CI [{lo:.4g}, {hi:.4g}] ({r.wall_time:.1f} s)")
    return 0


def cmd_sweep(args) -> int:
    import yaml

    from .harness import ExperimentConfig, run_sweep

    data = yaml.safe_load(Path(args.config).read_text()) or {}
    data["seed"] = _seed(args, data.get("seed"))
    config = ExperimentConfig.from_dict(data)
    out = _out_path(args.out, Path(args.config).with_suffix(".csv").name)
    records = run_sweep(config, workers=args.workers, csv_path=out)
    failed = [r for r in records if r.error]
    for r in failed:
        print(f"cell {r.cell.cell_id} failed: {r.error}", file=sys.stderr)
    print(f"wrote {len(records)} rows to {out}")
    if args.plot:
        from .harness import emit_plot

        print(f"wrote {emit_plot(out, x=args.x, message_bits=config.L)[0]}")
    return 0


def cmd_calibrate(args) -> int:
    from .channel import impulse_count, impulse_train
    from .link import LinkConfig, get_link

    link = get_link(LinkConfig(args.L, args.code, args.interleaver))
    rng = np.random.default_rng(_seed(args))
    msg = rng.integers(0, 2, size=(args.frames, args.L), dtype=np.uint8)
    frame = link.transmit(msg)
    gamma = 0.0 if args.gamma is None else args.gamma
    wave = impulse_train(frame.samples.shape, gamma, args.freq, rng, frame_power=frame.power,
                         duration_s=args.duration)
    peak = np.max(np.abs(wave) ** 2, axis=-1)
    measured = 10 * np.log10(peak / frame.power)
    counts = impulse_count(wave)
    expected = frame.duration * args.freq
    print(f"frame: {link.n_symbols} symbols, {frame.duration * 1e6:.1f} us")
    print(f"gamma: target {gamma:.4f} dB, measured {measured.min():.6f}..{measured.max():.6f} dB")
    print(f"impulses per frame: expected {expected:.3f}, observed "
          + ", ".join(f"{k}: {v}" for k, v in zip(*np.unique(counts, return_counts=True))))
    return 0


def cmd_plot(args) -> int:
    from .harness import emit_plot

    out = Path(args.out) if args.out else None
    path, series = emit_plot(args.csv, out, x=args.x, message_bits=args.L, title=args.title)
    print(f"wrote {path} ({len(series)} series)")
    return 0


def cmd_export_waveform(args) -> int:
    from .channel import apply_awgn, impulse_train
    from .framing import export_iq
    from .link import LinkConfig, get_link

    link = get_link(LinkConfig(args.L, args.code, args.interleaver))
    rng = np.random.default_rng(_seed(args))
    frame = link.transmit(rng.integers(0, 2, size=args.L, dtype=np.uint8))
    gamma = 0.0 if args.gamma is None else args.gamma
    wave = impulse_train(frame.samples.shape, gamma, args.freq, rng, frame_power=frame.power,
                         duration_s=args.duration)
    rx = apply_awgn(frame.with_samples(frame.samples + wave), args.snr, rng)
    outdir = Path(args.out) if args.out else default_outdir()
    outdir.mkdir(parents=True, exist_ok=True)
    for name, samples in (("frame", frame.samples), ("impulses", wave), ("received", rx.samples)):
        path, _ = export_iq(outdir / f"{name}.iq", samples, frame.n_symbols)
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shortpkt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one cell and print its PER")
    _add_cell_args(p)
    p.add_argument("--snr", type=_opt_float, default=None, help="background SNR in dB, or none")
    p.add_argument("--max-packets", type=int, default=10**5)
    p.add_argument("--min-errors", type=int, default=100, help="stop after this many errors (0: never)")
    p.add_argument("--out", help="CSV path (implies --save)")
    p.add_argument("--save", action="store_true", help="write run.csv to the output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a YAML-configured sweep to CSV")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--out", help="CSV path")
    p.add_argument("--plot", action="store_true", help="also write an SVG next to the CSV")
    p.add_argument("--x", default="auto")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate", help="measure Γ and impulse counts for a profile")
    _add_cell_args(p)
    p.add_argument("--frames", type=int, default=1000)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("plot", help="CSV to SVG")
    p.add_argument("csv")
    p.add_argument("--out")
    p.add_argument("--x", default="auto",
                   help="auto, gamma_db, impulse_freq_hz, awgn_snr_db or impulses")
    p.add_argument("--L", type=int, default=100, help="message bits (for --x impulses)")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("export-waveform", help="dump frame, impulse and received I/Q")
    _add_cell_args(p)
    p.add_argument("--snr", type=_opt_float, default=None)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_export_waveform)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
