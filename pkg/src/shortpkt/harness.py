"""Monte Carlo packet-error-rate experiments: cells, sweeps, CSV and plots.

Randomness is derived per block of ``batch_size`` consecutive trials from
``SeedSequence(seed, spawn_key=(cell_id, block))``, so results depend only on
the configuration, never on how cells are scheduled across workers.
"""
from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .channel import ImpulseModel, ImpulseProfile, apply_profile
from .fec import CodecChain
from .interleave import InterleaverKind
from .link import LinkConfig, get_link
from .receiver import packet_error, receive_packet

log = logging.getLogger(__name__)

CSV_HEADER = ("cell_id,interleaver,scheme,cc_rate,rs_k,gamma_db,impulse_freq_hz,"
              "awgn_snr_db,packets,errors,per,ci_lo,ci_hi,seed")
CSV_FIELDS = tuple(CSV_HEADER.split(","))


@dataclass
class ExperimentConfig:
    """A sweep: the Cartesian product of the list-valued axes.

    ``None`` in ``gamma_db`` means no impulses; in ``awgn_snr_db`` no
    background noise. ``channel`` carries the non-swept interference
    settings (model, impulse duration, phase, BG/class-A parameters).
    """

    L: int = 100
    codes: list[str] = field(default_factory=lambda: ["CC(1/2)"])
    interleavers: list[str] = field(default_factory=lambda: ["none"])
    gamma_db: list[float | None] = field(default_factory=lambda: [None])
    impulse_freq_hz: list[float] = field(default_factory=lambda: [50e3])
    awgn_snr_db: list[float | None] = field(default_factory=lambda: [None])
    channel: ImpulseProfile = field(default_factory=ImpulseProfile)
    min_error_packets: int | None = 100
    max_packets: int = 10**6
    batch_size: int = 1000
    seed: int = 0
    interleaver_seed: int = 0

    def __post_init__(self):
        if isinstance(self.channel, dict):
            self.channel = ImpulseProfile(**self.channel)
        for axis in ("codes", "interleavers", "gamma_db", "impulse_freq_hz", "awgn_snr_db"):
            value = getattr(self, axis)
            if not isinstance(value, (list, tuple)):
                value = [value]
            if not value:
                raise ValueError(f"sweep axis {axis!r} is empty")
            setattr(self, axis, list(value))
        if self.max_packets < 1 or self.batch_size < 1:
            raise ValueError("max_packets and batch_size must be positive")
        if self.min_error_packets is not None and self.min_error_packets < 1:
            raise ValueError("min_error_packets must be positive (or None)")

    def cells(self) -> list["Cell"]:
        combos = itertools.product(self.codes, self.interleavers, self.gamma_db,
                                   self.impulse_freq_hz, self.awgn_snr_db)
        return [Cell(i, *c) for i, c in enumerate(combos)]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        import yaml

        return cls.from_dict(yaml.safe_load(Path(path).read_text()) or {})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channel"] = {k: (v.value if hasattr(v, "value") else v) for k, v in d["channel"].items()}
        d["channel"]["freq_range"] = list(d["channel"]["freq_range"])
        return d


@dataclass(frozen=True)
class Cell:
    cell_id: int
    code: str
    interleaver: str
    gamma_db: float | None
    impulse_freq_hz: float
    awgn_snr_db: float | None

    @property
    def chain(self) -> CodecChain:
        return CodecChain.parse(self.code)

    def link_config(self, config: ExperimentConfig) -> LinkConfig:
        return LinkConfig(config.L, self.chain, InterleaverKind(self.interleaver),
                          interleaver_seed=config.interleaver_seed)

    def profile(self, config: ExperimentConfig) -> ImpulseProfile:
        return replace(config.channel, gamma_db=self.gamma_db,
                       impulse_freq_hz=self.impulse_freq_hz, awgn_snr_db=self.awgn_snr_db)


@dataclass
class PerRecord:
    cell: Cell
    packets: int
    errors: int
    decoder_failures: int = 0
    seed: int = 0
    wall_time: float = 0.0
    error: str | None = None

    @property
    def per(self) -> float:
        return self.errors / self.packets if self.packets else math.nan

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.packets)

    def csv_row(self) -> list[str]:
        c = self.cell
        chain = c.chain
        lo, hi = self.interval
        rate = chain.cc_rate
        return [
            str(c.cell_id), c.interleaver, chain.scheme,
            f"{rate.numerator}/{rate.denominator}" if rate is not None else "",
            str(chain.rs_k) if chain.rs_k is not None else "",
            _fmt(c.gamma_db), _fmt(c.impulse_freq_hz), _fmt(c.awgn_snr_db),
            str(self.packets), str(self.errors), _fmt(self.per), _fmt(lo), _fmt(hi), str(self.seed),
        ]


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".10g")


def wilson_interval(errors: int, packets: int, confidence: float = 0.95) -> tuple[float, float]:
    if packets == 0:
        return math.nan, math.nan
    ci = binomtest(errors, packets).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def block_rng(seed: int, cell_id: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(cell_id, block)))


def run_block(link, profile: ImpulseProfile, rng: np.random.Generator, size: int):
    """One batch of trials; returns per-packet (error, decoder_failure) flags."""
    msg = rng.integers(0, 2, size=(size, link.plan.L), dtype=np.uint8)
    frame = apply_profile(link.transmit(msg), profile, rng)
    decoded, failed = receive_packet(frame, link)
    return packet_error(decoded, msg), failed


def run_cell(cell: Cell, config: ExperimentConfig) -> PerRecord:
    """Run trials until ``min_error_packets`` errors or ``max_packets`` packets."""
    link = get_link(cell.link_config(config))
    link.permutation  # build (and validate) before any trial
    profile = cell.profile(config)
    start = time.perf_counter()
    packets = errors = failures = 0
    block = 0
    while packets < config.max_packets:
        err, fail = run_block(link, profile, block_rng(config.seed, cell.cell_id, block),
                              config.batch_size)
        take = min(config.batch_size, config.max_packets - packets)
        if config.min_error_packets is not None:
            cum = np.cumsum(err[:take])
            hit = np.flatnonzero(cum >= config.min_error_packets - errors)
            if hit.size:
                take = int(hit[0]) + 1
        packets += take
        errors += int(err[:take].sum())
        failures += int(fail[:take].sum())
        block += 1
        if config.min_error_packets is not None and errors >= config.min_error_packets:
            break
    return PerRecord(cell, packets, errors, failures, config.seed, time.perf_counter() - start)


def _run_cell_safe(args) -> PerRecord:
    cell, config = args
    try:
        return run_cell(cell, config)
    except Exception as exc:  # recorded in the row; the sweep carries on
        log.warning("cell %d failed: %s", cell.cell_id, exc)
        return PerRecord(cell, 0, 0, seed=config.seed, error=f"{type(exc).__name__}: {exc}")


def validate(config: ExperimentConfig) -> None:
    """Surface configuration errors before any trial runs."""
    for code in config.codes:
        CodecChain.parse(code)
    for kind in config.interleavers:
        InterleaverKind(kind)
    for cell in config.cells():
        cell.profile(config)


def run_sweep(config: ExperimentConfig, workers: int = 1, csv_path=None) -> list[PerRecord]:
    validate(config)
    jobs = [(cell, config) for cell in config.cells()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell_safe, jobs))
    else:
        records = [_run_cell_safe(j) for j in jobs]
    records.sort(key=lambda r: r.cell.cell_id)
    if csv_path is not None:
        Path(csv_path).write_text(to_csv(records))
    return records


def to_csv(records: list[PerRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(f"{path}: not a PER sweep CSV (header mismatch)")
    rows = list(csv.DictReader(io.StringIO(text)))
    for i, row in enumerate(rows):
        if None in row or any(v is None for v in row.values()):
            raise ValueError(f"{path}: row {i + 1} has the wrong number of fields")
        try:
            int(row["packets"]), int(row["errors"])
        except ValueError:
            raise ValueError(f"{path}: row {i + 1} has non-integer counts") from None
    return rows


NUMERIC_AXES = ("gamma_db", "impulse_freq_hz", "awgn_snr_db")
AXIS_LABELS = {
    "gamma_db": "power ratio Γ (dB)",
    "impulse_freq_hz": "impulse frequency (kHz)",
    "awgn_snr_db": "background SNR (dB)",
    "impulses": "impulses per frame",
}


def _code_label(row: dict) -> str:
    parts = []
    if row["rs_k"]:
        parts.append(f"RS(31,{row['rs_k']})")
    if row["cc_rate"]:
        parts.append(f"CC({row['cc_rate']})")
    return "+".join(parts)


def impulses_per_frame(row: dict, message_bits: int = 100) -> float:
    """Mean impulse count per frame: frame duration times impulse frequency."""
    link = get_link(LinkConfig(message_bits, CodecChain.parse(_code_label(row)),
                               InterleaverKind(row["interleaver"])))
    return link.frame_duration * float(row["impulse_freq_hz"])


def plot_series(rows: list[dict], x: str = "auto", message_bits: int = 100):
    """Group CSV rows into plot series.

    Returns ``(x_axis, series)`` where ``series`` maps a label to a list of
    ``(x, per, floored)`` points. PER = 0 points are placed at half the
    smallest resolvable rate, ``0.5 / packets``, and flagged.
    """
    varying = [a for a in NUMERIC_AXES if len({r[a] for r in rows}) > 1]
    if x == "auto":
        x = varying[0] if len(varying) == 1 else ("combo" if varying else "gamma_db")
    series: dict[str, list] = {}
    for r in rows:
        label = f"{_code_label(r)} {r['interleaver']}"
        if x not in ("combo",):
            extra = [a for a in varying if a != x and not (x == "impulses" and a == "impulse_freq_hz")]
            if extra:
                label += " " + " ".join(f"{a}={r[a] or 'off'}" for a in extra)
        if x == "combo":
            xv = " ".join(f"{a}={r[a] or 'off'}" for a in varying)
        elif x == "impulses":
            xv = impulses_per_frame(r, message_bits)
        elif x == "impulse_freq_hz":
            xv = float(r[x]) / 1e3
        else:
            xv = float(r[x]) if r[x] else math.nan
        packets, errors = int(r["packets"]), int(r["errors"])
        if packets == 0:
            continue
        floored = errors == 0
        per = 0.5 / packets if floored else errors / packets
        series.setdefault(label, []).append((xv, per, floored))
    return x, series


def emit_plot(csv_path, out_path=None, x: str = "auto", message_bits: int = 100, title: str | None = None):
    """Log-scale PER plot of a sweep CSV, written as SVG (or PDF by suffix)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(csv_path)
    x_axis, series = plot_series(rows, x, message_bits)
    out_path = Path(out_path) if out_path else Path(csv_path).with_suffix(".svg")

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    categorical = x_axis == "combo"
    ticks: list[str] = []
    for label, pts in series.items():
        if categorical:
            for p in pts:
                if p[0] not in ticks:
                    ticks.append(p[0])
            xs = [ticks.index(p[0]) for p in pts]
        else:
            xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        line, = ax.semilogy(xs, ys, marker="o", label=label)
        fx = [xv for xv, p in zip(xs, pts) if p[2]]
        fy = [yv for yv, p in zip(ys, pts) if p[2]]
        if fx:
            ax.semilogy(fx, fy, linestyle="none", marker="v", markerfacecolor="white",
                        color=line.get_color())
    if categorical:
        ax.set_xticks(range(len(ticks)), ticks, rotation=30, ha="right", fontsize=7)
    ax.set_xlabel(AXIS_LABELS.get(x_axis, "cell"))
    ax.set_ylabel("PER")
    if any(p[2] for pts in series.values() for p in pts):
        ax.text(0.01, 0.01, "open markers: no errors, plotted at 0.5/packets",
                transform=ax.transAxes, fontsize=7)
    if series:
        ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path, series
