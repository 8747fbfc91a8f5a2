import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochastic_rir import (AudioBuffer, PressureImpulseResponse, RirParams, bandpass, convolve,
                            generate_rir, normalize_peak, octave_bands)
from stochastic_rir.dsp import band_mask, fft_convolve, reverberate
from stochastic_rir.errors import InvalidBandEdges, SampleRateMismatch, SilentInput

SR = 16000


def naive_convolve(x, h):
    """O(n*m) direct-form convolution, independent of any FFT."""
    out = np.zeros(len(x) + len(h) - 1)
    for j, hj in enumerate(h):
        out[j:j + len(x)] += hj * x
    return out


def rel_rms(a, b):
    return np.sqrt(np.mean((a - b) ** 2)) / np.sqrt(np.mean(b ** 2))


def test_audio_buffer_rejects_non_finite():
    with pytest.raises(ValueError):
        AudioBuffer(np.array([0.0, np.nan]), SR)
    with pytest.raises(ValueError):
        AudioBuffer(np.zeros((2, 2)), SR)
    with pytest.raises(ValueError):
        AudioBuffer(np.zeros(2), 0)


def test_convolve_with_unit_impulse():
    x = np.random.default_rng(0).standard_normal(500)
    out = convolve(AudioBuffer(x, SR), PressureImpulseResponse([1.0, 0.0, 0.0], SR))
    assert len(out) == 502
    np.testing.assert_allclose(out.samples[:500], x, atol=1e-12)
    np.testing.assert_allclose(out.samples[500:], 0, atol=1e-12)


def test_hand_convolution():
    out = fft_convolve([1, 2], [1, 0, 1])
    np.testing.assert_allclose(out, [1, 2, 1, 2], atol=1e-12)


def test_long_random_pair_matches_naive():
    rng = np.random.default_rng(1)
    x, h = rng.standard_normal(SR), rng.standard_normal(int(0.3 * SR))
    assert rel_rms(fft_convolve(x, h), naive_convolve(x, h)) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10_000), st.integers(1, 1000), st.integers(0, 2**32 - 1),
       st.sampled_from([None, 64, 333, 4096]))
def test_fft_path_equals_direct_path(n, m, seed, block):
    rng = np.random.default_rng(seed)
    x, h = rng.standard_normal(n), rng.standard_normal(m)
    assert rel_rms(fft_convolve(x, h, block), np.convolve(x, h)) <= 1e-6


def test_linearity_and_scaling():
    rng = np.random.default_rng(2)
    a, b, h = rng.standard_normal(3000), rng.standard_normal(3000), rng.standard_normal(700)
    lhs = fft_convolve(a + b, h)
    rhs = fft_convolve(a, h) + fft_convolve(b, h)
    assert rel_rms(lhs, rhs) <= 1e-6
    np.testing.assert_allclose(fft_convolve(2.5 * a, h), 2.5 * fft_convolve(a, h),
                               rtol=1e-12, atol=1e-12)


def test_convolve_energetic_rir_directly():
    eir = generate_rir(RirParams(rt60=0.2, edt=0.05, itdg=0.003, drr_target=-2.0))
    x = np.random.default_rng(3).standard_normal(2000)
    out = convolve(AudioBuffer(x, SR), eir)
    assert rel_rms(out.samples, np.convolve(x, eir.energies)) <= 1e-6


def test_sample_rate_mismatch():
    with pytest.raises(SampleRateMismatch):
        convolve(AudioBuffer(np.ones(10), SR), PressureImpulseResponse([1.0], 8000))


def test_normalize_peak():
    out = normalize_peak(AudioBuffer(np.array([0.1, -0.5, 0.25]), SR), 0.0)
    assert np.max(np.abs(out.samples)) == pytest.approx(1.0)
    again = normalize_peak(out, 0.0)
    np.testing.assert_allclose(again.samples, out.samples, rtol=1e-12)
    default = normalize_peak(out)
    assert np.max(np.abs(default.samples)) == pytest.approx(10 ** (-1 / 20))
    with pytest.raises(SilentInput):
        normalize_peak(AudioBuffer(np.zeros(5), SR))


def test_reverberate_only_rescales_when_clipping():
    x = AudioBuffer(np.array([0.5, 0.0, 0.0]), SR)
    quiet, gain = reverberate(x, PressureImpulseResponse([1.0], SR))
    assert gain == 0.0
    np.testing.assert_allclose(quiet.samples, x.samples)
    loud, gain = reverberate(x, PressureImpulseResponse([4.0, 4.0], SR))
    assert gain == pytest.approx(-1 - 20 * np.log10(2.0))
    assert np.max(np.abs(loud.samples)) == pytest.approx(10 ** (-1 / 20))


def sine(f, seconds=1.0):
    t = np.arange(int(seconds * SR)) / SR
    return AudioBuffer(np.sin(2 * np.pi * f * t), SR)


def mid_rms(x):
    n = len(x)
    return np.sqrt(np.mean(x[n // 4: 3 * n // 4] ** 2))


@pytest.mark.parametrize("low,high,f", [(707.1, 1414.2, 1000.3), (88.4, 176.8, 125.7),
                                        (2828.4, 5656.9, 4000.9), (100, 7000, 3333.3)])
def test_in_band_sinusoid_preserved(low, high, f):
    x = sine(f)
    y = bandpass(x, low, high)
    assert mid_rms(y.samples) / mid_rms(x.samples) == pytest.approx(1.0, abs=0.01)


@pytest.mark.parametrize("low,high,f", [(707.1, 1414.2, 353.1), (707.1, 1414.2, 2829.7),
                                        (88.4, 176.8, 44.1), (88.4, 176.8, 353.9),
                                        (2828.4, 5656.9, 1414.1), (2828.4, 5656.9, 7900.0)])
def test_stopband_sinusoid_rejected(low, high, f):
    x = sine(f)
    y = bandpass(x, low, high)
    assert 20 * np.log10(mid_rms(y.samples) / mid_rms(x.samples)) <= -60


@pytest.mark.parametrize("low,high", [(1000, 1000), (2000, 1000), (0, 100), (100, 8000)])
def test_invalid_band_edges(low, high):
    with pytest.raises(InvalidBandEdges):
        bandpass(sine(100), low, high)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(50, 3000), st.floats(1.2, 2.5))
def test_bandpass_is_passive(seed, low, ratio):
    x = np.random.default_rng(seed).standard_normal(2048)
    y = bandpass(AudioBuffer(x, SR), low, min(low * ratio, 7000)).samples
    assert np.sum(y ** 2) <= np.sum(x ** 2) * (1 + 1e-12)


def test_adjacent_masks_are_complementary():
    bands = octave_bands(SR, 3)
    f = np.linspace(bands[0].center, bands[-1].center, 5000)
    total = sum(band_mask(f, b.low, b.high) for b in bands)
    np.testing.assert_allclose(total, 1.0, atol=1e-9)


def test_octave_layouts():
    octaves = octave_bands(SR)
    assert [b.center for b in octaves] == [125, 250, 500, 1000, 2000, 4000]
    for b in octaves:
        assert b.high / b.low == pytest.approx(2.0)
    thirds = octave_bands(SR, 3)
    assert thirds[0].center == pytest.approx(125.0)
    for a, b in zip(thirds, thirds[1:]):
        assert b.center / a.center == pytest.approx(2 ** (1 / 3))
        assert a.high == pytest.approx(b.low)
    with pytest.raises(ValueError):
        octave_bands(SR, 2)
