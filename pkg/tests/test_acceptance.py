"""Acceptance criteria, each checked at its stated tolerance and runtime budget."""
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import kurtosis

from shortpkt.channel import GAMMA_LEVELS_DB, apply_bernoulli_gauss, apply_middleton_a, impulse_train
from shortpkt.fec import CodecChain, cc_encode, rs_decode, viterbi_decode
from shortpkt.fec.reed_solomon import encode_symbols, symbols_to_bits
from shortpkt.framing import ComplexFrame
from shortpkt.harness import ExperimentConfig, read_csv, run_sweep, to_csv
from shortpkt.interleave import QPP_TABLE, QppParams, build_packet_block, spread
from shortpkt.link import Link, LinkConfig
from shortpkt.receiver import packet_error, receive_packet
from shortpkt.bitstream import plan_padding

INTERLEAVERS = ["packet_block", "symbol_block", "qpp", "srandom"]
CODES = ["CC(1/2)", "CC(2/3)", "CC(5/6)", "RS(31,17)", "RS(31,21)", "RS(31,25)", "RS(31,29)",
         "RS(31,21)+CC(1/2)", "RS(31,21)+CC(2/3)", "RS(31,21)+CC(5/6)"]
# background noise for the trend cells; every interleaver sits at or below "none" here
TREND_SNR_DB = 6.0
TREND_PACKETS = 10**5
SWEEP_PACKETS = 10**4


def _outdir(tmp_path):
    d = os.environ.get("SHORTPKT_OUTDIR")
    return Path(d) if d else tmp_path


def test_criterion_1_padding_ledger(report):
    t = time.perf_counter()
    p = plan_padding(100, CodecChain.parse("CC(2/3)"), "packet_block")
    perm = build_packet_block(p.L2)
    got = (p.L1, p.L2, perm.params["M"], perm.params["N"], p.L3, p.n_data_symbols, p.L4)
    dt = time.perf_counter() - t
    ok = got == (2, 153, 13, 12, 3, 8, 12) and dt < 1
    assert report(1, "padding ledger L=100 CC(2/3)", ok, f"(L1,L2,M,N,L3,n_sym,L4)={got}, {dt:.3f} s")


def test_criterion_2_packet_block_vector(report):
    t = time.perf_counter()
    x = np.array(["X1", "X2", "X3", "X4", "X5", "X6", "X7", "X8", "0"])
    out = list(build_packet_block(8).apply(x))
    dt = time.perf_counter() - t
    ok = out == ["X3", "X6", "0", "X2", "X5", "X8", "X1", "X4", "X7"] and dt < 1
    assert report(2, "packet block golden vector", ok, " ".join(out))


def test_criterion_3_frame_timing(report):
    a = Link(LinkConfig(100, "CC(1/2)", "packet_block"))
    b = Link(LinkConfig(100, "RS(31,21)+CC(1/2)", "srandom"))
    ok = (a.n_symbols, b.n_symbols) == (11, 16) and round(a.frame_duration * 1e7) == 748 \
        and round(b.frame_duration * 1e7) == 1088
    assert report(3, "frame timing", ok, f"{a.n_symbols} sym {a.frame_duration * 1e6:.1f} us, "
                  f"{b.n_symbols} sym {b.frame_duration * 1e6:.1f} us")


def test_criterion_4_permutation_properties(report):
    t = time.perf_counter()
    checked = 0
    bad = []
    for code in CODES:
        for kind in INTERLEAVERS:
            link = Link(LinkConfig(100, code, kind))
            pi = link.permutation.pi
            checked += 1
            if not np.array_equal(np.sort(pi), np.arange(len(pi))):
                bad.append((code, kind, "not bijective"))
            if kind == "srandom":
                S = spread(len(pi))
                if any(np.any(np.abs(pi[d:] - pi[:-d]) <= S) for d in range(1, S + 1)):
                    bad.append((code, kind, "spread"))
    for K, f1, f2 in QPP_TABLE:
        pi = QppParams(K, f1, f2).indices()
        checked += 1
        if not np.array_equal(np.sort(pi), np.arange(K)):
            bad.append((K, f1, f2))
    dt = time.perf_counter() - t
    ok = not bad and dt < 10
    assert report(4, "permutation properties", ok, f"{checked} permutations, {len(bad)} bad, {dt:.1f} s")


def test_criterion_5_fec_oracles(report):
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    # every single flip in a 200-bit CC(1/2) codeword
    u = rng.integers(0, 2, 100, dtype=np.uint8)
    c = cc_encode(u)
    rx = np.tile(c, (200, 1))
    rx[np.arange(200), np.arange(200)] ^= 1
    flips_ok = int(np.all(viterbi_decode(rx) == u, axis=1).sum())
    # 500 RS(31,21) patterns of at most 5 symbol errors
    msg = rng.integers(0, 32, (500, 21))
    cw = encode_symbols(msg, 21)
    noisy = cw.copy()
    for row in noisy:
        w = rng.integers(1, 6)
        row[rng.choice(31, w, replace=False)] ^= rng.integers(1, 32, w)
    out, failed = rs_decode(symbols_to_bits(noisy), 21)
    rs_ok = int(np.sum(np.all(out == symbols_to_bits(msg), axis=1) & ~failed))
    # noiseless round trip for 4 interleavers x 10 codes
    combos_ok = 0
    for code in CODES:
        for kind in INTERLEAVERS:
            link = Link(LinkConfig(100, code, kind))
            m = rng.integers(0, 2, (1000, 100), dtype=np.uint8)
            dec, _ = receive_packet(link.transmit(m), link)
            combos_ok += not packet_error(dec, m).any()
    dt = time.perf_counter() - t
    ok = flips_ok == 200 and rs_ok == 500 and combos_ok == 40 and dt < 120
    assert report(5, "FEC oracles", ok, f"flips {flips_ok}/200, RS {rs_ok}/500, "
                  f"round trips {combos_ok}/40, {dt:.1f} s")


def test_criterion_6_gamma_calibration(report):
    rng = np.random.default_rng(6)
    link = Link(LinkConfig(100, "CC(1/2)", "packet_block"))
    frame = link.transmit(rng.integers(0, 2, (100, 100), dtype=np.uint8))
    worst = 0.0
    ratio_20 = None
    for gamma in GAMMA_LEVELS_DB:
        wave = impulse_train(frame.samples.shape, gamma, 400e3, rng, frame_power=frame.power)
        ratio = np.max(np.abs(wave) ** 2, axis=-1) / frame.power
        worst = max(worst, float(np.max(np.abs(ratio / 10 ** (gamma / 10) - 1))))
        if gamma == 20.0:
            ratio_20 = ratio
    ok = worst < 1e-9 and np.allclose(ratio_20, 100.0, rtol=1e-9)
    assert report(6, "impulse power ratio", ok, f"max relative error {worst:.1e}, "
                  f"ratio at 20 dB = {ratio_20.mean():.12g}")


@pytest.mark.slow
def test_criterion_7_trends(report, tmp_path):
    t = time.perf_counter()
    outdir = _outdir(tmp_path)
    outdir.mkdir(parents=True, exist_ok=True)
    common = dict(codes=["CC(1/2)"], awgn_snr_db=[TREND_SNR_DB], min_error_packets=None, seed=7)
    low = ExperimentConfig(interleavers=["none"] + INTERLEAVERS, gamma_db=[9.54],
                           impulse_freq_hz=[50e3], max_packets=TREND_PACKETS, **common)
    freq = ExperimentConfig(interleavers=["none"] + INTERLEAVERS, gamma_db=[17.5, 20.0],
                            impulse_freq_hz=[50e3, 200e3, 400e3, 700e3], max_packets=SWEEP_PACKETS,
                            **common)
    run_sweep(low, csv_path=outdir / "trend_low_gamma.csv")
    run_sweep(freq, csv_path=outdir / "trend_frequency.csv")
    rows = read_csv(outdir / "trend_low_gamma.csv") + read_csv(outdir / "trend_frequency.csv")

    def cell(kind, gamma, f):
        (r,) = [r for r in rows if r["interleaver"] == kind and float(r["gamma_db"]) == gamma
                and float(r["impulse_freq_hz"]) == f]
        return float(r["per"]), float(r["ci_lo"]), float(r["ci_hi"])

    def at_most(a, b):
        # point estimates ordered and no significant reversal
        return a[0] <= b[0] and not a[1] > b[2]

    none = cell("none", 9.54, 50e3)
    a = {k: at_most(cell(k, 9.54, 50e3), none) for k in ("packet_block", "qpp", "srandom")}
    b = {}
    for kind in ["none"] + INTERLEAVERS:
        pts = [cell(kind, 17.5, f) for f in (50e3, 200e3, 400e3, 700e3)]
        b[kind] = all(not p[1] > q[2] for p, q in zip(pts, pts[1:]))
    c = {kind: cell(kind, 20.0, 700e3)[1] > 1e-2 for kind in ["none"] + INTERLEAVERS}
    d = at_most(cell("packet_block", 9.54, 50e3), cell("symbol_block", 9.54, 50e3))
    dt = time.perf_counter() - t
    ok = all(a.values()) and all(b.values()) and all(c.values()) and d and dt < 1800
    pers = " ".join(f"{k}={cell(k, 9.54, 50e3)[0]:.4f}" for k in ["none"] + INTERLEAVERS)
    assert report(7, "trend reproduction", ok,
                  f"a={all(a.values())} b={all(b.values())} c={all(c.values())} d={d}; "
                  f"9.54 dB/50 kHz PER {pers}; {dt:.0f} s")


def test_criterion_8_noise_models(report):
    rng = np.random.default_rng(8)
    zeros = ComplexFrame(np.zeros((1, 10**6), dtype=complex), 1, samples_per_symbol=10**6)
    p, si, sw = 0.02, 10.0, 1.0
    var = float(np.var(apply_bernoulli_gauss(zeros, p, si, sw, rng).samples))
    bg_err = abs(var / (sw + p * si) - 1)
    ks = [kurtosis(apply_middleton_a(zeros, A, 1.0, 1.0, rng, max_terms=None).samples.real.ravel(),
                   fisher=False) for A in (0.01, 0.1, 1.0, 10.0)]
    trend = all(x > y for x, y in zip(ks, ks[1:])) and abs(ks[-1] - 3) < 0.15
    ok = bg_err < 0.02 and trend
    assert report(8, "noise-model statistics", ok, f"BG variance error {bg_err:.2%}, class-A kurtosis "
                  + " ".join(f"{k:.2f}" for k in ks))


def test_criterion_9_determinism(report, tmp_path):
    cfg = ExperimentConfig(codes=["CC(1/2)", "RS(31,21)+CC(1/2)"], interleavers=["none", "srandom"],
                           gamma_db=[9.54, 17.5], impulse_freq_hz=[50e3, 400e3], awgn_snr_db=[6.0],
                           max_packets=2000, min_error_packets=50, seed=99)
    run_sweep(cfg, workers=1, csv_path=tmp_path / "w1.csv")
    run_sweep(cfg, workers=4, csv_path=tmp_path / "w4.csv")
    a, b = (tmp_path / "w1.csv").read_bytes(), (tmp_path / "w4.csv").read_bytes()
    ok = a == b and len(a.splitlines()) == 17
    assert report(9, "determinism across worker counts", ok, f"{len(a)} bytes, identical={a == b}")
