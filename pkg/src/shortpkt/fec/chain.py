"""Coding-scheme descriptor and the concatenated encode/decode chain."""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from . import convolutional as cc
from . import reed_solomon as rs

SCHEMES = ("CC", "RS", "RS_CC")
CC_RATES = (Fraction(1, 2), Fraction(2, 3), Fraction(5, 6))
RS_KS = (17, 21, 25, 29)

# Default pre-encoding granularity R_o for the CC-only schemes.
_CC_GRANULARITY = {Fraction(1, 2): 2, Fraction(2, 3): 6, Fraction(5, 6): 5}

_LABEL_RE = re.compile(
    r"^\s*(?:RS\(31,\s*(?P<k>\d+)\))?\s*\+?\s*(?:CC\((?P<num>\d+)/(?P<den>\d+)\))?\s*$"
)


@dataclass(frozen=True)
class CodecChain:
    """Which code(s) protect a packet, and at what input granularity.

    ``granularity`` is the R_o used when padding the message (L1 zero bits
    make the message a multiple of it). ``None`` selects the default for the
    scheme, which is the smallest value making every stage length integral.
    """

    scheme: str
    cc_rate: Fraction | None = None
    rs_k: int | None = None
    granularity: int | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.scheme in ("CC", "RS_CC"):
            if self.cc_rate is None:
                raise ValueError(f"{self.scheme} needs a cc_rate")
            object.__setattr__(self, "cc_rate", Fraction(self.cc_rate))
            if self.cc_rate not in CC_RATES:
                raise ValueError(f"unsupported CC rate {self.cc_rate}")
        elif self.cc_rate is not None:
            raise ValueError("RS scheme takes no cc_rate")
        if self.scheme in ("RS", "RS_CC"):
            if self.rs_k is None:
                raise ValueError(f"{self.scheme} needs rs_k")
            if not (0 < self.rs_k < rs.N and (rs.N - self.rs_k) % 2 == 0):
                raise ValueError(f"RS(31,{self.rs_k}) needs odd k < 31")
        elif self.rs_k is not None:
            raise ValueError("CC scheme takes no rs_k")
        if self.granularity is not None and self.granularity < 1:
            raise ValueError("granularity must be positive")

    @classmethod
    def parse(cls, label: str) -> "CodecChain":
        """Build from labels like ``CC(1/2)``, ``RS(31,21)``, ``RS(31,21)+CC(5/6)``."""
        m = _LABEL_RE.match(label)
        if not m or not (m["k"] or m["num"]):
            raise ValueError(f"cannot parse coding scheme {label!r}")
        k = int(m["k"]) if m["k"] else None
        rate = Fraction(int(m["num"]), int(m["den"])) if m["num"] else None
        if k is not None and rate is not None:
            return cls("RS_CC", rate, k)
        if k is not None:
            return cls("RS", rs_k=k)
        return cls("CC", cc_rate=rate)

    @property
    def label(self) -> str:
        parts = []
        if self.rs_k is not None:
            parts.append(f"RS(31,{self.rs_k})")
        if self.cc_rate is not None:
            parts.append(f"CC({self.cc_rate.numerator}/{self.cc_rate.denominator})")
        return "+".join(parts)

    @property
    def rate(self) -> Fraction:
        r = Fraction(1)
        if self.rs_k is not None:
            r *= Fraction(self.rs_k, rs.N)
        if self.cc_rate is not None:
            r *= self.cc_rate
        return r

    @property
    def base_granularity(self) -> int:
        """Smallest input block for which every stage length is an integer."""
        if self.scheme == "CC":
            return cc.puncture_period(self.cc_rate)
        rs_bits = rs.M * self.rs_k
        if self.scheme == "RS":
            return rs_bits
        period = cc.puncture_period(self.cc_rate)
        codewords = lcm(rs.N * rs.M, period) // (rs.N * rs.M)
        return rs_bits * codewords

    @property
    def R_o(self) -> int:
        if self.granularity is not None:
            return self.granularity
        if self.scheme == "CC":
            return _CC_GRANULARITY[self.cc_rate]
        return self.base_granularity

    def coded_length(self, n_in: int) -> int:
        """Coded length for an ``n_in``-bit input; raises if not integral."""
        base = self.base_granularity
        if n_in % base:
            raise ValueError(f"{self.label}: input of {n_in} bits is not a multiple of {base}")
        out = Fraction(n_in) / self.rate
        assert out.denominator == 1
        return int(out)


def chain_encode(bits: np.ndarray, chain: CodecChain) -> np.ndarray:
    """Encode (..., L + L1) bits into (..., L2) bits: RS first, then CC."""
    x = np.asarray(bits, dtype=np.uint8)
    chain.coded_length(x.shape[-1])
    if chain.rs_k is not None:
        x = rs.rs_encode(x, chain.rs_k)
    if chain.cc_rate is not None:
        x = cc.cc_encode(x, chain.cc_rate)
    return x


def chain_decode(bits: np.ndarray, chain: CodecChain) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`chain_encode`: Viterbi, then RS.

    Returns ``(bits, failed)`` where ``failed`` is a boolean per packet, set
    when any RS codeword in the packet was uncorrectable.
    """
    y = np.asarray(bits, dtype=np.uint8)
    failed = np.zeros(y.shape[:-1], dtype=bool)
    if chain.cc_rate is not None:
        y = cc.viterbi_decode(y, chain.cc_rate)
    if chain.rs_k is not None:
        y, failed = rs.rs_decode(y, chain.rs_k)
    return y, failed
