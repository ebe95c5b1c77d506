"""Additive noise: AWGN, periodic bipolar impulse trains, Bernoulli-Gauss, Middleton class A.

All functions take a :class:`ComplexFrame` (optionally batched) and an
explicit ``numpy.random.Generator`` and return a new frame.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .framing import SAMPLE_RATE, ComplexFrame

TRAIN_FREQ_RANGE = (50e3, 700e3)
DEFAULT_IMPULSE_DURATION = 100e-9
GAMMA_LEVELS_DB = (0.0, 6.02, 9.54, 17.5, 20.0)


def _check_freq(freq_hz: float, freq_range) -> None:
    lo, hi = freq_range
    if not lo <= freq_hz <= hi:
        raise ValueError(f"impulse frequency {freq_hz:g} Hz outside supported range [{lo:g}, {hi:g}]")


class ImpulseModel(str, enum.Enum):
    TRAIN = "train"
    BERNOULLI_GAUSS = "bernoulli_gauss"
    MIDDLETON_A = "middleton_a"


@dataclass(frozen=True)
class ImpulseProfile:
    """Interference settings for one experiment cell.

    ``gamma_db=None`` disables impulses; ``awgn_snr_db=None`` (or inf)
    disables background noise.
    """

    model: ImpulseModel = ImpulseModel.TRAIN
    gamma_db: float | None = None
    impulse_freq_hz: float = 50e3
    impulse_duration_s: float = DEFAULT_IMPULSE_DURATION
    awgn_snr_db: float | None = None
    random_phase: bool = False
    freq_range: tuple[float, float] = TRAIN_FREQ_RANGE
    p: float = 0.01
    A: float = 0.1
    sigma_i2: float = 1.0
    sigma_w2: float | None = None
    max_terms: int | None = 10

    def __post_init__(self):
        object.__setattr__(self, "model", ImpulseModel(self.model))
        object.__setattr__(self, "freq_range", tuple(float(f) for f in self.freq_range))
        if self.gamma_db is not None and not math.isfinite(self.gamma_db):
            raise ValueError("gamma_db must be finite (use None to disable impulses)")
        if self.model is ImpulseModel.TRAIN and self.gamma_db is not None:
            _check_freq(self.impulse_freq_hz, self.freq_range)
        if not 0 <= self.p <= 1:
            raise ValueError("p must be in [0, 1]")
        if self.A <= 0:
            raise ValueError("A must be positive")
        if self.sigma_i2 < 0 or (self.sigma_w2 is not None and self.sigma_w2 < 0):
            raise ValueError("noise powers must be non-negative")


# IEEE 1613 surge-withstand waveform: 2.5 kHz (+-20%) bipolar 50 ns impulses.
SWC_PRESET = ImpulseProfile(impulse_freq_hz=2.5e3, impulse_duration_s=50e-9,
                            freq_range=(2.0e3, 3.0e3), gamma_db=0.0)


def _complex_gaussian(rng: np.random.Generator, shape, var) -> np.ndarray:
    scale = np.sqrt(np.asarray(var, dtype=float) / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def apply_awgn(frame: ComplexFrame, snr_db: float | None, rng: np.random.Generator) -> ComplexFrame:
    """Circular Gaussian noise at ``snr_db`` below each frame's average power."""
    if snr_db is None or snr_db == math.inf:
        return frame
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite or +inf")
    var = frame.power[..., None] / 10 ** (snr_db / 10)
    return frame.with_samples(frame.samples + _complex_gaussian(rng, frame.samples.shape, var))


def impulse_samples(duration_s: float, sample_rate: float = SAMPLE_RATE) -> int:
    return max(1, round(duration_s * sample_rate))


def impulse_train(shape, gamma_db: float, freq_hz: float, rng: np.random.Generator, *,
                  frame_power=1.0, duration_s: float = DEFAULT_IMPULSE_DURATION,
                  sample_rate: float = SAMPLE_RATE, random_phase: bool = False,
                  freq_range=TRAIN_FREQ_RANGE) -> np.ndarray:
    """The interference waveform alone, shape ``shape`` (..., n_samples).

    Impulses start at a uniform random offset within one period and
    alternate in sign; each is ``impulse_samples(duration_s)`` samples of
    constant amplitude with peak power ``10**(gamma_db/10) * frame_power``.
    """
    _check_freq(freq_hz, freq_range)
    shape = tuple(shape)
    lead, n = shape[:-1], shape[-1]
    period = sample_rate / freq_hz
    width = impulse_samples(duration_s, sample_rate)
    count = math.ceil(n / period) + 1

    offset = rng.uniform(0, period, size=lead + (1,))
    starts = np.floor(offset + period * np.arange(count)).astype(np.int64)
    sign = np.where(np.arange(count) % 2 == 0, 1.0, -1.0)
    amp = np.broadcast_to(np.sqrt(10 ** (gamma_db / 10) * np.asarray(frame_power, dtype=float)), lead)
    value = (amp[..., None] * sign).astype(complex)
    if random_phase:
        value = value * np.exp(2j * np.pi * rng.uniform(size=starts.shape))

    wave = np.zeros(lead + (n,), dtype=complex)
    flat_wave = wave.reshape(-1, n)
    flat_starts = starts.reshape(-1, count)
    flat_value = value.reshape(-1, count)
    rows = np.arange(flat_wave.shape[0])[:, None]
    for k in range(width):
        pos = flat_starts + k
        ok = pos < n
        flat_wave[np.broadcast_to(rows, pos.shape)[ok], pos[ok]] = flat_value[ok]
    return wave


def impulse_count(wave: np.ndarray) -> np.ndarray:
    """Number of impulses (runs of nonzero samples) in each row of a waveform."""
    hit = np.abs(wave) > 0
    onsets = hit & ~np.concatenate([np.zeros_like(hit[..., :1]), hit[..., :-1]], axis=-1)
    return onsets.sum(axis=-1)


def apply_impulse_train(frame: ComplexFrame, gamma_db: float | None, freq_hz: float,
                        duration_s: float = DEFAULT_IMPULSE_DURATION,
                        rng: np.random.Generator | None = None, *, random_phase: bool = False,
                        freq_range=TRAIN_FREQ_RANGE) -> ComplexFrame:
    if gamma_db is None:
        return frame
    if rng is None:
        raise ValueError("an explicit rng is required")
    wave = impulse_train(frame.samples.shape, gamma_db, freq_hz, rng, frame_power=frame.power,
                         duration_s=duration_s, sample_rate=frame.sample_rate,
                         random_phase=random_phase, freq_range=freq_range)
    return frame.with_samples(frame.samples + wave)


def apply_bernoulli_gauss(frame: ComplexFrame, p: float, sigma_i2: float, sigma_w2: float,
                          rng: np.random.Generator) -> ComplexFrame:
    """m_k = w_k + b_k g_k with b_k ~ Bernoulli(p)."""
    shape = frame.samples.shape
    w = _complex_gaussian(rng, shape, sigma_w2)
    b = rng.random(shape) < p
    g = _complex_gaussian(rng, shape, sigma_i2)
    return frame.with_samples(frame.samples + w + b * g)


def _poisson_counts(rng: np.random.Generator, A: float, shape, max_terms: int | None) -> np.ndarray:
    if max_terms is None:
        return rng.poisson(A, size=shape)
    # Poisson restricted to its first max_terms terms, renormalised
    m = np.arange(max_terms)
    logp = m * math.log(A) - A - np.array([math.lgamma(i + 1) for i in m])
    probs = np.exp(logp - logp.max())
    return rng.choice(max_terms, size=shape, p=probs / probs.sum())


def apply_middleton_a(frame: ComplexFrame, A: float, sigma_i2: float, sigma_w2: float,
                      rng: np.random.Generator, max_terms: int | None = 10) -> ComplexFrame:
    """Per sample: n ~ Poisson(A), then Gaussian with variance sigma_w2 + n*sigma_i2/A."""
    if A <= 0:
        raise ValueError("A must be positive")
    shape = frame.samples.shape
    n = _poisson_counts(rng, A, shape, max_terms)
    noise = _complex_gaussian(rng, shape, sigma_w2 + n * sigma_i2 / A)
    return frame.with_samples(frame.samples + noise)


def apply_profile(frame: ComplexFrame, profile: ImpulseProfile, rng: np.random.Generator) -> ComplexFrame:
    """Background noise plus the profile's interference."""
    if profile.model is ImpulseModel.TRAIN:
        out = apply_impulse_train(frame, profile.gamma_db, profile.impulse_freq_hz,
                                  profile.impulse_duration_s, rng,
                                  random_phase=profile.random_phase, freq_range=profile.freq_range)
        # noise power is referenced to the clean frame
        if profile.awgn_snr_db is None or profile.awgn_snr_db == math.inf:
            return out
        var = frame.power[..., None] / 10 ** (profile.awgn_snr_db / 10)
        return out.with_samples(out.samples + _complex_gaussian(rng, out.samples.shape, var))

    sigma_w2 = profile.sigma_w2
    if sigma_w2 is None:
        snr = profile.awgn_snr_db
        sigma_w2 = 0.0 if snr is None or snr == math.inf else float(np.mean(frame.power)) / 10 ** (snr / 10)
    if profile.model is ImpulseModel.BERNOULLI_GAUSS:
        return apply_bernoulli_gauss(frame, profile.p, profile.sigma_i2, sigma_w2, rng)
    return apply_middleton_a(frame, profile.A, profile.sigma_i2, sigma_w2, rng, profile.max_terms)
