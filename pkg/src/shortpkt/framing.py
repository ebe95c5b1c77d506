"""OFDM framing: 32-bin symbols with 2-sample cyclic prefix and one preamble.

Bins are named by signed index in [-16, 15]; ``np.fft`` order is obtained
with ``index % 32``. Arrays are batched over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

FFT_SIZE = 32
CP_LEN = 2
SAMPLES_PER_SYMBOL = FFT_SIZE + CP_LEN
SAMPLE_RATE = 5e6
SYMBOL_DURATION = SAMPLES_PER_SYMBOL / SAMPLE_RATE
PREAMBLE_SEED = 0x5EED


@dataclass(frozen=True)
class SubcarrierMap:
    data_idx: tuple[int, ...]
    pilot_idx: tuple[int, ...]
    dc_idx: tuple[int, ...]
    guard_idx: tuple[int, ...]
    fft_size: int = FFT_SIZE

    def __post_init__(self):
        everything = sorted(self.data_idx + self.pilot_idx + self.dc_idx + self.guard_idx)
        if everything != list(range(-self.fft_size // 2, self.fft_size // 2)):
            raise ValueError("subcarrier sets must partition the FFT bins")

    @property
    def active_idx(self) -> tuple[int, ...]:
        return tuple(sorted(self.data_idx + self.pilot_idx))

    @staticmethod
    def bins(idx) -> np.ndarray:
        return np.asarray(idx) % FFT_SIZE


def default_map() -> SubcarrierMap:
    guard = (-16, -15, -14, 13, 14, 15)
    pilot = (-11, -4, 4, 11)
    data = tuple(k for k in range(-13, 13) if k != 0 and k not in pilot)
    return SubcarrierMap(data, pilot, (0,), guard)


SUBCARRIERS = default_map()
PILOT_VALUES = np.ones(len(SUBCARRIERS.pilot_idx), dtype=complex)


def preamble_values(seed: int = PREAMBLE_SEED) -> np.ndarray:
    """Known BPSK values on the 25 active bins, in ``active_idx`` order."""
    rng = np.random.default_rng(seed)
    return 1.0 - 2.0 * rng.integers(0, 2, len(SUBCARRIERS.active_idx))


PREAMBLE = preamble_values()
PREAMBLE.flags.writeable = False


@dataclass
class ComplexFrame:
    """Baseband samples at 5 MS/s; ``samples`` may carry leading batch axes."""

    samples: np.ndarray
    n_symbols: int
    samples_per_symbol: int = SAMPLES_PER_SYMBOL
    sample_rate: float = SAMPLE_RATE

    def __post_init__(self):
        if self.samples.shape[-1] != self.n_symbols * self.samples_per_symbol:
            raise ValueError(f"{self.samples.shape[-1]} samples for {self.n_symbols} symbols")

    @property
    def duration(self) -> float:
        return self.samples.shape[-1] / self.sample_rate

    @property
    def power(self) -> np.ndarray:
        return np.mean(np.abs(self.samples) ** 2, axis=-1)

    def with_samples(self, samples: np.ndarray) -> "ComplexFrame":
        return ComplexFrame(samples, self.n_symbols, self.samples_per_symbol, self.sample_rate)

    def symbols(self) -> np.ndarray:
        """View as (..., n_symbols, samples_per_symbol)."""
        return self.samples.reshape(self.samples.shape[:-1] + (self.n_symbols, self.samples_per_symbol))


def _ofdm_symbols(freq: np.ndarray) -> np.ndarray:
    # freq: (..., n_sym, 32) in FFT order -> (..., n_sym, 34) time samples with CP
    time = np.fft.ifft(freq, axis=-1)
    return np.concatenate([time[..., -CP_LEN:], time], axis=-1)


def modulate_frame(bits: np.ndarray, plan=None) -> ComplexFrame:
    """BPSK-map (..., 21 * n) bits onto n data symbols behind the preamble.

    ``plan`` (a PaddingPlan or a symbol count) pins the expected n. Each frame
    is scaled to unit average power.
    """
    n_data_symbols = getattr(plan, "n_data_symbols", plan)
    bits = np.asarray(bits, dtype=np.uint8)
    n_data = len(SUBCARRIERS.data_idx)
    if bits.shape[-1] % n_data:
        raise ValueError(f"frame needs a multiple of {n_data} bits, got {bits.shape[-1]}")
    n_sym = bits.shape[-1] // n_data
    if n_data_symbols is not None and n_sym != n_data_symbols:
        raise ValueError(f"expected {n_data_symbols} data symbols, got bits for {n_sym}")
    lead = bits.shape[:-1]

    freq = np.zeros(lead + (n_sym + 1, FFT_SIZE), dtype=complex)
    freq[..., 0, SUBCARRIERS.bins(SUBCARRIERS.active_idx)] = PREAMBLE
    freq[..., 1:, SUBCARRIERS.bins(SUBCARRIERS.data_idx)] = (
        1.0 - 2.0 * bits.reshape(lead + (n_sym, n_data)))
    freq[..., 1:, SUBCARRIERS.bins(SUBCARRIERS.pilot_idx)] = PILOT_VALUES

    samples = _ofdm_symbols(freq).reshape(lead + (-1,))
    samples /= np.sqrt(np.mean(np.abs(samples) ** 2, axis=-1, keepdims=True))
    return ComplexFrame(samples, n_sym + 1)


def frame_bins(frame: ComplexFrame) -> np.ndarray:
    """Strip CP and FFT: (..., n_symbols, 32) bins in FFT order."""
    return np.fft.fft(frame.symbols()[..., CP_LEN:], axis=-1)


def demodulate_frame(frame: ComplexFrame, channel_est) -> np.ndarray:
    """Equalise, remove the common pilot phase per symbol, slice BPSK.

    ``channel_est`` is a :class:`shortpkt.receiver.ChannelEstimate` or any
    array of gains over the 32 bins in FFT order. Returns hard bits
    (..., 21 * n_data_symbols).
    """
    gains = getattr(channel_est, "full", channel_est)
    gains = np.asarray(gains)
    y = frame_bins(frame)[..., 1:, :] / gains[..., None, :]
    pilots = y[..., SUBCARRIERS.bins(SUBCARRIERS.pilot_idx)] * np.conj(PILOT_VALUES)
    cpe = np.exp(-1j * np.angle(pilots.sum(axis=-1, keepdims=True)))
    data = y[..., SUBCARRIERS.bins(SUBCARRIERS.data_idx)] * cpe
    bits = (data.real < 0).astype(np.uint8)
    return bits.reshape(bits.shape[:-2] + (-1,))


def export_iq(path, samples: np.ndarray, n_symbols: int | None = None,
              sample_rate: float = SAMPLE_RATE) -> tuple[Path, Path]:
    """Write interleaved little-endian float32 I/Q plus a ``.txt`` sidecar."""
    path = Path(path)
    samples = np.asarray(samples, dtype=complex).ravel()
    iq = np.empty(2 * len(samples), dtype="<f4")
    iq[0::2], iq[1::2] = samples.real, samples.imag
    iq.tofile(path)
    sidecar = path.with_suffix(path.suffix + ".txt")
    lines = [f"sample_rate {sample_rate:g}", f"n_samples {len(samples)}"]
    if n_symbols is not None:
        lines.append(f"n_symbols {n_symbols}")
    sidecar.write_text("\n".join(lines) + "\n")
    return path, sidecar


def read_iq(path) -> np.ndarray:
    iq = np.fromfile(path, dtype="<f4")
    return iq[0::2].astype(float) + 1j * iq[1::2]
