"""Bit interleavers: packet block, per-OFDM-symbol block, QPP and S-random.

A :class:`Permutation` stores ``pi`` with the convention that output position
``i`` carries input bit ``pi[i]``, i.e. ``apply(perm, x) == x[..., pi]``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BITS_PER_SYMBOL = 21
SYMBOL_ROWS, SYMBOL_COLS = 3, 7


class InterleaverKind(str, enum.Enum):
    NONE = "none"
    PACKET_BLOCK = "packet_block"
    SYMBOL_BLOCK = "symbol_block"
    QPP = "qpp"
    SRANDOM = "srandom"


# (K, f1, f2) rows of the LTE turbo-interleaver table up to K = 512.
QPP_TABLE: tuple[tuple[int, int, int], ...] = (
    (40, 3, 10), (48, 7, 12), (56, 19, 42), (64, 7, 16), (72, 7, 18),
    (80, 11, 20), (88, 5, 22), (96, 11, 24), (104, 7, 26), (112, 41, 84),
    (120, 103, 90), (128, 15, 32), (136, 9, 34), (144, 17, 108), (152, 9, 38),
    (160, 21, 120), (168, 101, 84), (176, 21, 44), (184, 57, 46), (192, 23, 48),
    (200, 13, 50), (208, 27, 52), (216, 11, 36), (224, 27, 56), (232, 85, 58),
    (240, 29, 60), (248, 33, 62), (256, 15, 32), (264, 17, 198), (272, 33, 68),
    (280, 103, 210), (288, 19, 36), (296, 19, 74), (304, 37, 76), (312, 19, 78),
    (320, 21, 120), (328, 21, 82), (336, 115, 84), (344, 193, 86), (352, 21, 44),
    (360, 133, 90), (368, 81, 46), (376, 45, 94), (384, 23, 48), (392, 243, 98),
    (400, 151, 40), (408, 155, 102), (416, 25, 52), (424, 51, 106), (432, 47, 72),
    (440, 91, 110), (448, 29, 168), (456, 29, 114), (464, 247, 58), (472, 29, 118),
    (480, 89, 180), (488, 91, 122), (496, 157, 62), (504, 55, 84), (512, 31, 64),
)


class UnsupportedLengthError(ValueError):
    pass


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class QppParams:
    K: int
    f1: int
    f2: int

    def __post_init__(self):
        if math.gcd(self.f1, self.K) != 1:
            raise ValueError(f"gcd(f1={self.f1}, K={self.K}) != 1")

    def indices(self) -> np.ndarray:
        i = np.arange(self.K, dtype=np.int64)
        return (self.f1 * i + self.f2 * i * i) % self.K


@dataclass(frozen=True, eq=False)
class Permutation:
    pi: np.ndarray
    kind: InterleaverKind
    params: dict = field(default_factory=dict)
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.int64)
        if not np.array_equal(np.sort(pi), np.arange(len(pi))):
            raise ValueError("pi is not a bijection on [0, n)")
        inv = np.empty_like(pi)
        inv[pi] = np.arange(len(pi))
        pi.flags.writeable = False
        inv.flags.writeable = False
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "inverse", inv)

    @property
    def n(self) -> int:
        return len(self.pi)

    def __eq__(self, other):
        return (isinstance(other, Permutation) and self.kind == other.kind
                and np.array_equal(self.pi, other.pi))

    def __hash__(self):
        return hash((self.kind, self.pi.tobytes()))

    def _check(self, bits: np.ndarray) -> int:
        n_bits = bits.shape[-1]
        if self.kind is InterleaverKind.SYMBOL_BLOCK:
            if n_bits % self.n:
                raise ValueError(f"symbol block interleaver needs a multiple of {self.n} bits, got {n_bits}")
            return n_bits // self.n
        if n_bits != self.n:
            raise ValueError(f"permutation of length {self.n} applied to {n_bits} bits")
        return 1

    def _index(self, table: np.ndarray, chunks: int) -> np.ndarray:
        if chunks == 1:
            return table
        return (table[None, :] + self.n * np.arange(chunks)[:, None]).ravel()

    def apply(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits)
        return bits[..., self._index(self.pi, self._check(bits))]

    def invert(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits)
        return bits[..., self._index(self.inverse, self._check(bits))]

    def save(self, path) -> None:
        """Text export: a ``kind n`` header then one index per line."""
        lines = [f"{self.kind.value} {self.n}", *map(str, self.pi.tolist())]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "Permutation":
        header, *rest = Path(path).read_text().split("\n")
        kind, n = header.split()
        pi = np.array([int(x) for x in rest if x.strip()], dtype=np.int64)
        if len(pi) != int(n):
            raise ValueError(f"header says {n} indices, file has {len(pi)}")
        return cls(pi, InterleaverKind(kind))


def apply(perm: Permutation, bits: np.ndarray) -> np.ndarray:
    return perm.apply(bits)


def invert(perm: Permutation, bits: np.ndarray) -> np.ndarray:
    return perm.invert(bits)


def identity(n: int) -> Permutation:
    return Permutation(np.arange(n), InterleaverKind.NONE)


def block_dims(n_bits: int) -> tuple[int, int]:
    """Rows and columns of the packet block matrix for ``n_bits`` bits."""
    rows = math.isqrt(n_bits) + 1
    cols = rows - 1 if rows * (rows - 1) >= n_bits else rows
    return rows, cols


def _matrix_readout(rows: int, cols: int) -> np.ndarray:
    # written row by row, read column by column from the rightmost, top to bottom
    grid = np.arange(rows * cols).reshape(rows, cols)
    return grid[:, ::-1].T.ravel()


def build_packet_block(n_bits: int) -> Permutation:
    if n_bits < 1:
        raise ValueError("need at least one bit")
    rows, cols = block_dims(n_bits)
    return Permutation(_matrix_readout(rows, cols), InterleaverKind.PACKET_BLOCK,
                       {"M": rows, "N": cols, "L3": rows * cols - n_bits})


def build_symbol_block() -> Permutation:
    return Permutation(_matrix_readout(SYMBOL_ROWS, SYMBOL_COLS), InterleaverKind.SYMBOL_BLOCK,
                       {"M": SYMBOL_ROWS, "N": SYMBOL_COLS})


def qpp_params(n_bits: int) -> QppParams:
    """Smallest tabulated K >= n_bits."""
    for K, f1, f2 in QPP_TABLE:
        if K >= n_bits:
            return QppParams(K, f1, f2)
    raise UnsupportedLengthError(f"no QPP interleaver with K >= {n_bits} (table stops at {QPP_TABLE[-1][0]})")


def build_qpp(n_bits: int) -> Permutation:
    p = qpp_params(n_bits)
    return Permutation(p.indices(), InterleaverKind.QPP,
                       {"K": p.K, "f1": p.f1, "f2": p.f2, "L3": p.K - n_bits})


def spread(n_bits: int) -> int:
    """floor(sqrt(n_bits / 2)); isqrt of the floor is exact for odd n_bits too."""
    return math.isqrt(n_bits // 2)


def _conflicts(seq: list[int], i: int, S: int) -> int:
    v = seq[i]
    return sum(1 for j in range(max(0, i - S), min(len(seq), i + S + 1))
               if j != i and abs(seq[j] - v) <= S)


def _swap_repair(seq: list[int], S: int, rng: np.random.Generator, max_swaps: int) -> bool:
    """Swap entries until no pair within S positions is within S in value."""
    n = len(seq)
    bad = {i for i in range(n) if _conflicts(seq, i, S)}
    for _ in range(max_swaps):
        if not bad:
            return True
        i = sorted(bad)[int(rng.integers(len(bad)))]
        k = int(rng.integers(n))
        before = _conflicts(seq, i, S) + _conflicts(seq, k, S)
        seq[i], seq[k] = seq[k], seq[i]
        if _conflicts(seq, i, S) + _conflicts(seq, k, S) > before:
            seq[i], seq[k] = seq[k], seq[i]
            continue
        for c in (i, k):
            for j in range(max(0, c - S), min(n, c + S + 1)):
                if _conflicts(seq, j, S):
                    bad.add(j)
                else:
                    bad.discard(j)
    return not bad


def build_srandom(n_bits: int, seed=0, *, spread_factor: int | None = None,
                  draws_per_position: int = 1000, restarts: int = 100,
                  swaps_per_bit: int = 200) -> Permutation:
    """Random permutation whose entries within ``S`` positions differ by more than ``S``.

    Each position draws candidates from the unused indices until one is more
    than ``S`` away from the previous ``S`` entries. At S = floor(sqrt(n/2))
    this often stalls near the end; a stalled attempt is completed with the
    leftover indices and its remaining conflicts removed by local swaps. An
    attempt that still has conflicts is discarded and the construction
    restarts.
    """
    if n_bits < 2:
        raise ValueError("S-random needs at least two bits")
    S = spread(n_bits) if spread_factor is None else spread_factor
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        pool = list(range(n_bits))
        out: list[int] = []
        while pool:
            recent = out[-S:] if S else []
            for _ in range(draws_per_position):
                j = int(rng.integers(len(pool)))
                if all(abs(pool[j] - p) > S for p in recent):
                    break
            else:
                break
            out.append(pool[j])
            pool[j] = pool[-1]
            pool.pop()
        if pool:
            out.extend(pool[i] for i in rng.permutation(len(pool)))
            if not _swap_repair(out, S, rng, swaps_per_bit * n_bits):
                continue
        return Permutation(np.array(out), InterleaverKind.SRANDOM, {"S": S, "seed": seed})
    raise ConstructionError(f"S-random construction failed for n={n_bits}, S={S} after {restarts} restarts")


def interleaver_length(kind: InterleaverKind, n_bits: int) -> int:
    """Length the coded packet is zero-padded to before interleaving."""
    kind = InterleaverKind(kind)
    if kind is InterleaverKind.PACKET_BLOCK:
        rows, cols = block_dims(n_bits)
        return rows * cols
    if kind is InterleaverKind.SYMBOL_BLOCK:
        return -(-n_bits // BITS_PER_SYMBOL) * BITS_PER_SYMBOL
    if kind is InterleaverKind.QPP:
        return qpp_params(n_bits).K
    return n_bits


def build(kind: InterleaverKind, n_bits: int, seed=0) -> Permutation:
    """Interleaver for an ``n_bits``-bit coded packet (before L3 padding)."""
    kind = InterleaverKind(kind)
    if kind is InterleaverKind.PACKET_BLOCK:
        return build_packet_block(n_bits)
    if kind is InterleaverKind.SYMBOL_BLOCK:
        return build_symbol_block()
    if kind is InterleaverKind.QPP:
        return build_qpp(n_bits)
    if kind is InterleaverKind.SRANDOM:
        return build_srandom(n_bits, seed)
    return identity(n_bits)
