"""Receiver chain: preamble channel estimate, demodulate, deinterleave, decode, descramble."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bitstream
from .fec import chain_decode
from .framing import CP_LEN, FFT_SIZE, PREAMBLE, SUBCARRIERS, ComplexFrame, demodulate_frame
from .link import Link, LinkConfig, get_link

GAIN_FLOOR = 1e-3


@dataclass
class ChannelEstimate:
    """Least-squares gains on the 25 active bins (``SUBCARRIERS.active_idx`` order)."""

    gains: np.ndarray

    @property
    def full(self) -> np.ndarray:
        """Gains over all 32 bins in FFT order; inactive bins are 1."""
        out = np.ones(self.gains.shape[:-1] + (FFT_SIZE,), dtype=complex)
        out[..., SUBCARRIERS.bins(SUBCARRIERS.active_idx)] = self.gains
        return out


def estimate_channel(preamble_symbol: np.ndarray, floor: float = GAIN_FLOOR) -> ChannelEstimate:
    """Received preamble bins divided by the known ones, magnitude clamped at ``floor``."""
    sym = np.asarray(preamble_symbol)
    if sym.shape[-1] != FFT_SIZE + CP_LEN:
        raise ValueError(f"preamble symbol must have {FFT_SIZE + CP_LEN} samples")
    bins = np.fft.fft(sym[..., CP_LEN:], axis=-1)[..., SUBCARRIERS.bins(SUBCARRIERS.active_idx)]
    h = bins / PREAMBLE
    mag = np.abs(h)
    small = mag < floor
    if small.any():
        phase = np.where(mag > 0, h / np.where(mag > 0, mag, 1), 1)
        h = np.where(small, floor * phase, h)
    return ChannelEstimate(h)


def packet_error(decoded: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """True where any bit of a packet differs (reduces over the last axis)."""
    decoded, reference = np.asarray(decoded), np.asarray(reference)
    if decoded.shape[-1] != reference.shape[-1]:
        raise ValueError(f"packet lengths differ: {decoded.shape[-1]} vs {reference.shape[-1]}")
    return np.any(decoded != reference, axis=-1)


def receive_packet(frame: ComplexFrame, config: LinkConfig | Link) -> tuple[np.ndarray, np.ndarray]:
    """Recover (..., L) message bits and per-packet decoder-failure flags."""
    link = config if isinstance(config, Link) else get_link(config)
    p = link.plan
    if frame.n_symbols != link.n_symbols:
        raise ValueError(f"frame has {frame.n_symbols} symbols, config expects {link.n_symbols}")
    est = estimate_channel(frame.symbols()[..., 0, :])
    bits = demodulate_frame(frame, est)
    x = bitstream.unpad(link.permutation.invert(bitstream.unpad(bits, p.L4)), p.L3)
    x, failed = chain_decode(x, link.config.chain)
    msg = bitstream.descramble(bitstream.unpad(x, p.L1), link.config.scrambler_seed)
    return msg, failed
