"""Find a background SNR at which interleaving helps at low impulse rate.

Sweeps the AWGN level for CC(1/2) at 9.54 dB / 50 kHz impulses and prints
PER per interleaver, flagging SNRs where any interleaver is worse than none.
"""
import argparse

from shortpkt.harness import ExperimentConfig, run_sweep

KINDS = ["none", "packet_block", "symbol_block", "qpp", "srandom"]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--snr", type=float, nargs="+", default=[5.0, 6.0, 7.0, 8.0])
    parser.add_argument("--packets", type=int, default=20_000)
    parser.add_argument("--code", default="CC(1/2)")
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()

    config = ExperimentConfig(codes=[args.code], interleavers=KINDS, gamma_db=[9.54],
                              impulse_freq_hz=[50e3], awgn_snr_db=args.snr,
                              min_error_packets=None, max_packets=args.packets, seed=args.seed)
    records = run_sweep(config)
    for snr in args.snr:
        per = {r.cell.interleaver: r.per for r in records if r.cell.awgn_snr_db == snr}
        worse = [k for k in KINDS[1:] if per[k] > per["none"]]
        cols = "  ".join(f"{k}={per[k]:.4f}" for k in KINDS)
        print(f"SNR {snr:4.1f} dB  {cols}" + (f"  worse than none: {', '.join(worse)}" if worse else ""))


if __name__ == "__main__":
    main()
