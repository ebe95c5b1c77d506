"""Run the sweeps in scripts/configs and plot each one.

    python scripts/run_sweeps.py                 # every config
    python scripts/run_sweeps.py gamma_freq_cc12 --max-packets 10000 --workers 4

CSV and SVG files land in --out (default: $SHORTPKT_OUTDIR or ./results).
"""
import argparse
import os
import time
from pathlib import Path

from shortpkt.harness import ExperimentConfig, emit_plot, run_sweep

CONFIGS = Path(__file__).parent / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("names", nargs="*", help="config stems (default: all)")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--max-packets", type=int, help="override the per-cell packet cap")
    parser.add_argument("--out", default=os.environ.get("SHORTPKT_OUTDIR", "results"))
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = args.names or sorted(p.stem for p in CONFIGS.glob("*.yaml"))
    for name in names:
        config = ExperimentConfig.load(CONFIGS / f"{name}.yaml")
        if args.max_packets:
            config.max_packets = args.max_packets
        start = time.perf_counter()
        records = run_sweep(config, workers=args.workers, csv_path=out / f"{name}.csv")
        x = "impulses" if name.startswith("impulse_count") else "auto"
        svg, _ = emit_plot(out / f"{name}.csv", out / f"{name}.svg", x=x, message_bits=config.L,
                           title=name)
        failed = sum(r.error is not None for r in records)
        print(f"{name}: {len(records)} cells ({failed} failed) in {time.perf_counter() - start:.0f} s -> {svg}")


if __name__ == "__main__":
    main()
