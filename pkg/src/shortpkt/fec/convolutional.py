"""K=7 (171, 133) convolutional code with puncturing and hard-decision Viterbi.

The encoder is tail-biting: the shift register is preloaded with the last six
input bits, so the coded length is exactly ``n / rate`` with no tail and the
trellis has no weak final branch. Decoding runs the Viterbi recursion over a
circularly extended copy of the received block and keeps the middle.

Everything is vectorised over leading (batch) axes.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

CONSTRAINT_LENGTH = 7
MEMORY = CONSTRAINT_LENGTH - 1
N_STATES = 1 << MEMORY
GENERATORS = (0o171, 0o133)

# Keep-masks per input bit: rows are time steps within one period, columns the
# two mother-code outputs (g0, g1).
PUNCTURE = {
    Fraction(1, 2): np.array([[1, 1]], dtype=bool),
    Fraction(2, 3): np.array([[1, 1], [1, 0]], dtype=bool),
    Fraction(5, 6): np.array([[1, 1], [1, 0], [0, 1], [1, 0], [0, 1]], dtype=bool),
}

# Traceback warm-up on each side of the circular extension, in trellis steps.
WRAP = 8 * CONSTRAINT_LENGTH


def _taps(poly: int) -> list[int]:
    # bit (6 - i) of the octal generator multiplies u[t - i]
    return [i for i in range(CONSTRAINT_LENGTH) if (poly >> (MEMORY - i)) & 1]


def _parity(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> 4)
    x = x ^ (x >> 2)
    x = x ^ (x >> 1)
    return x & 1


def _build_trellis():
    # state = (u[t-1] .. u[t-6]) with u[t-1] in bit 5
    nxt = np.arange(N_STATES)
    u = nxt >> (MEMORY - 1)
    pred = [((nxt & (N_STATES // 2 - 1)) << 1) | b for b in (0, 1)]
    codes = []
    for p in pred:
        reg = (u << MEMORY) | p
        o0, o1 = (_parity(reg & g) for g in GENERATORS)
        codes.append(2 * o0 + o1)
    return pred[0], pred[1], codes[0], codes[1]


_PRED0, _PRED1, _CODE0, _CODE1 = _build_trellis()
# all four (o0, o1) output pairs, indexed by 2*o0 + o1
_PAIRS = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.int32)


def puncture_period(rate) -> int:
    try:
        return len(PUNCTURE[Fraction(rate)])
    except KeyError:
        raise ValueError(f"unsupported code rate {rate}") from None


def _keep_mask(rate, n_in: int) -> np.ndarray:
    period = puncture_period(rate)
    if n_in % period:
        raise ValueError(f"rate {rate} needs input length divisible by {period}, got {n_in}")
    return np.tile(PUNCTURE[Fraction(rate)], (n_in // period, 1))


def cc_encode(bits: np.ndarray, rate=Fraction(1, 2)) -> np.ndarray:
    u = np.asarray(bits, dtype=np.uint8)
    keep = _keep_mask(rate, u.shape[-1])
    out = np.zeros(u.shape + (2,), dtype=np.uint8)
    for j, g in enumerate(GENERATORS):
        for i in _taps(g):
            out[..., j] ^= np.roll(u, i, axis=-1)
    return out[..., keep]


def coded_length(n_in: int, rate) -> int:
    return int(_keep_mask(rate, n_in).sum())


def _input_length(n_coded: int, rate) -> int:
    rate = Fraction(rate)
    period = puncture_period(rate)
    kept = int(PUNCTURE[rate].sum())
    if n_coded % kept:
        raise ValueError(f"{n_coded} coded bits is inconsistent with rate {rate}")
    return n_coded // kept * period


def viterbi_decode(bits: np.ndarray, rate=Fraction(1, 2)) -> np.ndarray:
    """Hard-decision ML decode; punctured positions carry no metric."""
    r = np.asarray(bits, dtype=np.uint8)
    n = _input_length(r.shape[-1], rate)
    keep = _keep_mask(rate, n)
    lead = r.shape[:-1]
    r = r.reshape(-1, r.shape[-1])
    batch = r.shape[0]

    rx = np.zeros((batch, n, 2), dtype=np.int32)
    rx[:, keep] = r
    mask = np.broadcast_to(keep, (batch, n, 2)).astype(np.int32)

    # circular extension: WRAP steps before and after the block
    idx = np.arange(-WRAP, n + WRAP) % n
    rx, mask = rx[:, idx], mask[:, idx]
    # bm[b, t, c] = Hamming distance from received pair to output pair c
    bm = np.einsum("btj,btcj->btc", mask, (rx[:, :, None, :] != _PAIRS).astype(np.int32))

    steps = len(idx)
    pm = np.zeros((batch, N_STATES), dtype=np.int32)
    decisions = np.empty((steps, batch, N_STATES), dtype=bool)
    for t in range(steps):
        m0 = pm[:, _PRED0] + bm[:, t, _CODE0]
        m1 = pm[:, _PRED1] + bm[:, t, _CODE1]
        d = m1 < m0
        decisions[t] = d
        pm = np.where(d, m1, m0)
        pm -= pm.min(axis=1, keepdims=True)

    rows = np.arange(batch)
    state = pm.argmin(axis=1)
    decoded = np.empty((batch, steps), dtype=np.uint8)
    for t in range(steps - 1, -1, -1):
        decoded[:, t] = state >> (MEMORY - 1)
        state = ((state & (N_STATES // 2 - 1)) << 1) | decisions[t, rows, state]
    return decoded[:, WRAP:WRAP + n].reshape(lead + (n,))
