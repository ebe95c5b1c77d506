"""Padding ledger, zero padding, and the additive scrambler."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fec.chain import CodecChain
from .interleave import BITS_PER_SYMBOL, InterleaverKind, interleaver_length

SCRAMBLER_TAPS = (7, 4)  # x^7 + x^4 + 1
DEFAULT_SCRAMBLER_SEED = 0x7F


@dataclass(frozen=True)
class PaddingPlan:
    """Bit counts at every stage of the transmit chain.

    L message bits, L1 pre-encoding pad, L2 coded bits, L3 interleaver pad,
    L4 pad up to a whole number of 21-bit data symbols.
    """

    L: int
    L1: int
    L2: int
    L3: int
    L4: int
    n_data_symbols: int

    def __post_init__(self):
        if min(self.L1, self.L2, self.L3, self.L4) < 0:
            raise ValueError(f"negative pad count in {self}")
        if self.n_data_symbols != -(-(self.L2 + self.L3) // BITS_PER_SYMBOL):
            raise ValueError("n_data_symbols inconsistent with L2 + L3")
        if self.L4 != self.n_data_symbols * BITS_PER_SYMBOL - (self.L2 + self.L3):
            raise ValueError("L4 inconsistent with n_data_symbols")

    @property
    def interleaved_length(self) -> int:
        return self.L2 + self.L3

    @property
    def frame_bits(self) -> int:
        return self.L2 + self.L3 + self.L4


def plan_padding(L: int, chain: CodecChain, interleaver_kind=InterleaverKind.NONE) -> PaddingPlan:
    if L < 1:
        raise ValueError("message must have at least one bit")
    R_o = chain.R_o
    if R_o % chain.base_granularity:
        raise ValueError(f"granularity {R_o} cannot give an integral coded length for "
                         f"{chain.label} (needs a multiple of {chain.base_granularity})")
    L1 = -(-L // R_o) * R_o - L
    L2 = chain.coded_length(L + L1)
    L3 = interleaver_length(interleaver_kind, L2) - L2
    n_sym = -(-(L2 + L3) // BITS_PER_SYMBOL)
    L4 = n_sym * BITS_PER_SYMBOL - (L2 + L3)
    return PaddingPlan(L, L1, L2, L3, L4, n_sym)


@dataclass
class BitPacket:
    """Bits at one stage of the chain together with the ledger they follow."""

    bits: np.ndarray
    plan: PaddingPlan

    def __post_init__(self):
        p = self.plan
        stages = {p.L, p.L + p.L1, p.L2, p.L2 + p.L3, p.frame_bits}
        if np.shape(self.bits)[-1] not in stages:
            raise ValueError(f"{np.shape(self.bits)[-1]} bits matches no stage of {p}")


def pad(bits: np.ndarray, count: int) -> np.ndarray:
    if count < 0:
        raise ValueError("pad count must be non-negative")
    bits = np.asarray(bits, dtype=np.uint8)
    zeros = np.zeros(bits.shape[:-1] + (count,), dtype=np.uint8)
    return np.concatenate([bits, zeros], axis=-1)


def unpad(bits: np.ndarray, count: int) -> np.ndarray:
    bits = np.asarray(bits)
    if count < 0 or count > bits.shape[-1]:
        raise ValueError(f"cannot strip {count} bits from {bits.shape[-1]}")
    return bits[..., : bits.shape[-1] - count]


def keystream(n: int, seed: int = DEFAULT_SCRAMBLER_SEED) -> np.ndarray:
    """First ``n`` output bits of the x^7 + x^4 + 1 register; bit i of seed is x^(i+1)."""
    if not 0 < seed < 1 << 7:
        raise ValueError("scrambler seed must be a nonzero 7-bit value")
    state = [(seed >> i) & 1 for i in range(7)]
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        fb = state[6] ^ state[3]
        out[i] = fb
        state = [fb] + state[:6]
    return out


def scramble(bits: np.ndarray, seed: int = DEFAULT_SCRAMBLER_SEED) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    return bits ^ keystream(bits.shape[-1], seed)


descramble = scramble
