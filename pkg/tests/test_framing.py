import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shortpkt.framing import (CP_LEN, FFT_SIZE, PREAMBLE, SUBCARRIERS, SYMBOL_DURATION,
                              ComplexFrame, SubcarrierMap, demodulate_frame, export_iq,
                              frame_bins, modulate_frame, read_iq)
from shortpkt.receiver import estimate_channel


def random_frame(n_sym=4, batch=(), seed=0):
    bits = np.random.default_rng(seed).integers(0, 2, batch + (21 * n_sym,), dtype=np.uint8)
    return bits, modulate_frame(bits, n_sym)


def through(frame, taps):
    # linear convolution; the cyclic prefix absorbs a 2-tap channel
    y = np.stack([np.convolve(s, taps)[:len(s)] for s in frame.samples.reshape(-1, frame.samples.shape[-1])])
    return frame.with_samples(y.reshape(frame.samples.shape))


def test_subcarrier_layout():
    assert len(SUBCARRIERS.data_idx) == 21 and len(SUBCARRIERS.active_idx) == 25
    assert SUBCARRIERS.pilot_idx == (-11, -4, 4, 11)
    with pytest.raises(ValueError):
        SubcarrierMap((1, 2), (3,), (0,), ())


def test_symbol_timing():
    assert SYMBOL_DURATION == pytest.approx(6.8e-6)
    _, frame = random_frame(10)
    assert frame.n_symbols == 11 and frame.duration == pytest.approx(74.8e-6)


@settings(deadline=None, max_examples=25)
@given(st.integers(1, 16), st.integers(0, 10**6))
def test_unit_power_and_guards(n_sym, seed):
    bits, frame = random_frame(n_sym, seed=seed)
    assert frame.power == pytest.approx(1.0)
    bins = frame_bins(frame)
    quiet = SUBCARRIERS.bins(SUBCARRIERS.guard_idx + SUBCARRIERS.dc_idx)
    assert np.max(np.abs(bins[..., quiet])) < 1e-12
    assert np.array_equal(demodulate_frame(frame, np.ones(FFT_SIZE)), bits)


def test_cyclic_prefix():
    _, frame = random_frame(3)
    sym = frame.symbols()
    assert np.allclose(sym[:, :CP_LEN], sym[:, -CP_LEN:])


def test_preamble_estimate_on_ideal_and_scaled_channels():
    _, frame = random_frame()
    est = estimate_channel(frame.symbols()[0])
    scale = est.gains[0]  # the unit-power normalization is a common real gain
    assert np.allclose(est.gains, scale) and abs(scale.imag) < 1e-12
    half = estimate_channel(0.5 * frame.symbols()[0])
    assert np.allclose(half.gains, 0.5 * scale)


def test_phase_rotation_is_removed():
    bits, frame = random_frame(6, batch=(8,))
    rotated = frame.with_samples(frame.samples * np.exp(1j * np.pi / 6))
    est = estimate_channel(rotated.symbols()[..., 0, :])
    assert np.allclose(np.angle(est.gains), np.pi / 6)
    assert np.array_equal(demodulate_frame(rotated, est), bits)


def test_two_tap_channel_estimate():
    taps = np.array([1.0, 0.4 - 0.3j])
    bits, frame = random_frame(5)
    rx = through(frame, taps)
    est = estimate_channel(rx.symbols()[0])
    ref = estimate_channel(frame.symbols()[0]).gains
    response = np.fft.fft(taps, FFT_SIZE)[SUBCARRIERS.bins(SUBCARRIERS.active_idx)]
    assert np.max(np.abs(est.gains / ref - response)) < 1e-6
    assert np.array_equal(demodulate_frame(rx, est), bits)


def test_gain_floor_keeps_phase():
    sym = np.zeros(FFT_SIZE + CP_LEN, dtype=complex)
    est = estimate_channel(sym)
    assert np.allclose(np.abs(est.gains), 1e-3)
    assert np.all(np.isfinite(est.full))


def test_bad_lengths():
    with pytest.raises(ValueError):
        modulate_frame(np.zeros(20, dtype=np.uint8))
    with pytest.raises(ValueError):
        modulate_frame(np.zeros(42, dtype=np.uint8), 3)
    with pytest.raises(ValueError):
        ComplexFrame(np.zeros(33, dtype=complex), 1)


def test_iq_export_roundtrip(tmp_path):
    _, frame = random_frame(2)
    path, sidecar = export_iq(tmp_path / "f.iq", frame.samples, frame.n_symbols)
    assert path.stat().st_size == 8 * len(frame.samples)
    assert np.allclose(read_iq(path), frame.samples, atol=1e-6)
    meta = dict(line.split() for line in sidecar.read_text().splitlines())
    assert meta == {"sample_rate": "5e+06", "n_samples": "102", "n_symbols": "3"}
    assert len(PREAMBLE) == 25
