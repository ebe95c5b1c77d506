"""Systematic RS(31, k) over GF(2^5) with Berlekamp-Massey decoding.

Symbols are 5-bit, MSB first. Codewords are message symbols followed by
parity symbols; the generator has roots alpha^1 .. alpha^(31-k).
"""
from __future__ import annotations

import numpy as np

M = 5
N = (1 << M) - 1
PRIMITIVE_POLY = 0b100101  # x^5 + x^2 + 1
FCR = 1


def _build_tables():
    exp = np.zeros(2 * N, dtype=np.int64)
    log = np.full(N + 1, -1, dtype=np.int64)
    x = 1
    for i in range(N):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & (1 << M):
            x ^= PRIMITIVE_POLY
    exp[N:] = exp[:N]
    return exp, log


EXP, LOG = _build_tables()
EXP.flags.writeable = False
LOG.flags.writeable = False


def gf_mul(a, b):
    """Elementwise product; works on ints and integer arrays."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    prod = EXP[(LOG[a] + LOG[b]) % N]
    return np.where((a == 0) | (b == 0), 0, prod)


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(32)")
    return int(EXP[(N - LOG[a]) % N])


def gf_pow(a: int, e: int) -> int:
    if a == 0:
        return 0 if e else 1
    return int(EXP[(LOG[a] * e) % N])


def _mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(EXP[LOG[a] + LOG[b]])


def _poly_eval(p: list[int], x: int) -> int:
    # p[0] is the highest-degree coefficient
    y = 0
    for c in p:
        y = _mul(y, x) ^ c
    return y


def generator_poly(k: int) -> list[int]:
    g = [1]
    for j in range(FCR, FCR + N - k):
        root = int(EXP[j])
        nxt = g + [0]
        for i, c in enumerate(g):
            nxt[i + 1] ^= _mul(c, root)
        g = nxt
    return g


def bits_to_symbols(bits: np.ndarray) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64)
    b = b.reshape(b.shape[:-1] + (-1, M))
    return b @ (1 << np.arange(M - 1, -1, -1))


def symbols_to_bits(symbols: np.ndarray) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.int64)
    bits = (s[..., None] >> np.arange(M - 1, -1, -1)) & 1
    return bits.reshape(s.shape[:-1] + (-1,)).astype(np.uint8)


def _check_k(k: int) -> int:
    if not (0 < k < N and (N - k) % 2 == 0):
        raise ValueError(f"RS(31,{k}) is not supported")
    return (N - k) // 2


def encode_symbols(msg: np.ndarray, k: int) -> np.ndarray:
    """(..., k) symbols -> (..., 31) systematic codewords."""
    _check_k(k)
    msg = np.asarray(msg, dtype=np.int64)
    if msg.shape[-1] != k:
        raise ValueError(f"expected {k} message symbols, got {msg.shape[-1]}")
    g = np.array(generator_poly(k)[1:], dtype=np.int64)
    reg = np.zeros(msg.shape[:-1] + (N - k,), dtype=np.int64)
    for i in range(k):
        fb = msg[..., i] ^ reg[..., 0]
        reg = np.concatenate([reg[..., 1:], np.zeros_like(reg[..., :1])], axis=-1)
        reg ^= gf_mul(fb[..., None], g)
    return np.concatenate([msg, reg], axis=-1)


def syndromes(codewords: np.ndarray, k: int) -> np.ndarray:
    """S_j = c(alpha^j) for j = FCR .. FCR + 30 - k, vectorised over rows."""
    c = np.asarray(codewords, dtype=np.int64)
    j = np.arange(FCR, FCR + N - k)
    power = np.arange(N - 1, -1, -1)
    expo = (LOG[c][..., None, :] + (j[:, None] * power)) % N
    terms = np.where(c[..., None, :] == 0, 0, EXP[expo])
    return np.bitwise_xor.reduce(terms, axis=-1)


def _berlekamp_massey(synd: list[int]) -> list[int]:
    # returns Lambda with Lambda[0] = 1 (ascending powers)
    lam, prev = [1], [1]
    L, m, b = 0, 1, 1
    for n, s in enumerate(synd):
        d = s
        for i in range(1, L + 1):
            if i < len(lam):
                d ^= _mul(lam[i], synd[n - i])
        if d == 0:
            m += 1
            continue
        coef = _mul(d, gf_inv(b))
        shifted = [0] * m + [_mul(coef, c) for c in prev]
        new = [a ^ c for a, c in zip(lam + [0] * (len(shifted) - len(lam)),
                                     shifted + [0] * (len(lam) - len(shifted)))]
        if 2 * L <= n:
            prev, L, b, m = lam, n + 1 - L, d, 1
        else:
            m += 1
        lam = new
    while len(lam) > 1 and lam[-1] == 0:
        lam.pop()
    return lam


def _ascending_eval(p: list[int], x: int) -> int:
    return _poly_eval(p[::-1], x)


def decode_codeword(received: list[int], k: int) -> tuple[list[int], bool]:
    """Correct one codeword. Returns ``(codeword, ok)``; unchanged if not ok."""
    t2 = N - k
    synd = [_poly_eval(received, int(EXP[j])) for j in range(FCR, FCR + t2)]
    if not any(synd):
        return list(received), True
    lam = _berlekamp_massey(synd)
    nu = len(lam) - 1
    if nu > t2 // 2:
        return list(received), False
    # Chien search: error at power i if Lambda(alpha^-i) = 0
    powers = [i for i in range(N) if _ascending_eval(lam, gf_pow(int(EXP[i]), N - 1)) == 0]
    if len(powers) != nu:
        return list(received), False
    omega = [0] * t2
    for i, li in enumerate(lam):
        for j, sj in enumerate(synd):
            if i + j < t2:
                omega[i + j] ^= _mul(li, sj)
    # formal derivative keeps odd-degree terms
    dlam = [lam[i] if i % 2 else 0 for i in range(1, len(lam))]
    fixed = list(received)
    for i in powers:
        x_inv = gf_pow(int(EXP[i]), N - 1)
        denom = _ascending_eval(dlam, x_inv)
        if denom == 0:
            return list(received), False
        mag = _mul(_ascending_eval(omega, x_inv), gf_inv(denom))
        mag = _mul(mag, gf_pow(int(EXP[i]), 1 - FCR))
        fixed[N - 1 - i] ^= mag
    if any(_poly_eval(fixed, int(EXP[j])) for j in range(FCR, FCR + t2)):
        return list(received), False
    return fixed, True


def rs_encode(bits: np.ndarray, k: int) -> np.ndarray:
    """Encode each 5k-bit block of (..., m*5k) bits to a 155-bit codeword."""
    b = np.asarray(bits, dtype=np.uint8)
    if b.shape[-1] % (M * k):
        raise ValueError(f"RS(31,{k}) input must be a multiple of {M * k} bits, got {b.shape[-1]}")
    sym = bits_to_symbols(b).reshape(b.shape[:-1] + (-1, k))
    cw = encode_symbols(sym, k)
    return symbols_to_bits(cw.reshape(b.shape[:-1] + (-1,)))


def rs_decode(bits: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode (..., m*155) bits; returns message bits and a per-row failure flag.

    Uncorrectable codewords contribute their systematic part unchanged.
    """
    _check_k(k)
    b = np.asarray(bits, dtype=np.uint8)
    if b.shape[-1] % (M * N):
        raise ValueError(f"RS(31,{k}) decoder input must be a multiple of {M * N} bits")
    lead = b.shape[:-1]
    cw = bits_to_symbols(b).reshape(-1, N)
    failed = np.zeros(len(cw), dtype=bool)
    bad = np.flatnonzero(syndromes(cw, k).any(axis=-1))
    for row in bad:
        fixed, ok = decode_codeword(cw[row].tolist(), k)
        cw[row] = fixed
        failed[row] = not ok
    msg = cw[:, :k].reshape(lead + (-1,))
    per_row = failed.reshape(lead + (-1,)).any(axis=-1) if lead else failed.any()
    return symbols_to_bits(msg), np.asarray(per_row)
