"""Transmit chain: scramble, pad, encode, interleave, pad, modulate."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import bitstream
from .bitstream import PaddingPlan, plan_padding
from .fec import CodecChain, chain_encode
from .framing import SYMBOL_DURATION, ComplexFrame, modulate_frame
from .interleave import InterleaverKind, Permutation, build


@dataclass(frozen=True)
class LinkConfig:
    L: int = 100
    chain: CodecChain = field(default_factory=lambda: CodecChain.parse("CC(1/2)"))
    interleaver: InterleaverKind = InterleaverKind.NONE
    interleaver_seed: int = 0
    scrambler_seed: int = bitstream.DEFAULT_SCRAMBLER_SEED

    def __post_init__(self):
        if isinstance(self.chain, str):
            object.__setattr__(self, "chain", CodecChain.parse(self.chain))
        object.__setattr__(self, "interleaver", InterleaverKind(self.interleaver))


class Link:
    """A configured transmitter; the receiver side lives in :mod:`shortpkt.receiver`."""

    def __init__(self, config: LinkConfig):
        self.config = config
        self.plan: PaddingPlan = plan_padding(config.L, config.chain, config.interleaver)

    @cached_property
    def permutation(self) -> Permutation:
        return build(self.config.interleaver, self.plan.L2, self.config.interleaver_seed)

    @property
    def n_symbols(self) -> int:
        return self.plan.n_data_symbols + 1

    @property
    def frame_duration(self) -> float:
        return self.n_symbols * SYMBOL_DURATION

    def frame_bits(self, messages: np.ndarray) -> np.ndarray:
        """Message bits (..., L) -> bits on the data subcarriers (..., 21 * n)."""
        p = self.plan
        msg = np.asarray(messages, dtype=np.uint8)
        if msg.shape[-1] != p.L:
            raise ValueError(f"expected {p.L} message bits, got {msg.shape[-1]}")
        x = bitstream.pad(bitstream.scramble(msg, self.config.scrambler_seed), p.L1)
        x = bitstream.pad(chain_encode(x, self.config.chain), p.L3)
        return bitstream.pad(self.permutation.apply(x), p.L4)

    def transmit(self, messages: np.ndarray) -> ComplexFrame:
        return modulate_frame(self.frame_bits(messages), self.plan)


@lru_cache(maxsize=64)
def get_link(config: LinkConfig) -> Link:
    return Link(config)
