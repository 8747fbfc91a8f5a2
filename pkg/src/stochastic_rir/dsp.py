"""Convolution, level normalization and band-pass filtering of mono audio."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft, rfftfreq

from .errors import InvalidBandEdges, SampleRateMismatch, SilentInput

logger = logging.getLogger(__name__)

# Width of each raised-cosine band edge, as a fraction of the edge frequency.
TRANSITION_FRACTION = 0.1


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono audio as float64 samples."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("only mono (1-D) audio is supported")
        if not np.all(np.isfinite(samples)):
            raise ValueError("audio contains NaN or Inf samples")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _rir_samples(rir):
    # Energetic responses convolve with their energies directly.
    for attr in ("amplitudes", "energies", "samples"):
        if hasattr(rir, attr):
            return np.asarray(getattr(rir, attr), dtype=np.float64), rir.sample_rate
    raise TypeError(f"cannot convolve with {type(rir).__name__}")


def fft_convolve(x: np.ndarray, h: np.ndarray, block_size: int | None = None) -> np.ndarray:
    """Full linear convolution of two 1-D arrays by block FFT overlap-add.

    The longer input is split into blocks; each block is convolved with the
    shorter one through a single FFT of length ``block_size + len(h) - 1``
    rounded up to a fast size.
    """
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if x.size == 0 or h.size == 0:
        return np.zeros(0)
    if h.size > x.size:
        x, h = h, x
    nx, nh = x.size, h.size
    if block_size is None:
        block_size = max(nh, 1024)
    block_size = min(block_size, nx)
    nfft = next_fast_len(block_size + nh - 1, real=True)
    block_size = nfft - nh + 1
    H = rfft(h, nfft)
    out = np.zeros(nx + nh - 1)
    for start in range(0, nx, block_size):
        seg = x[start:start + block_size]
        y = irfft(rfft(seg, nfft) * H, nfft)
        stop = min(start + nfft, out.size)
        out[start:stop] += y[:stop - start]
    return out


def convolve(audio: AudioBuffer, rir) -> AudioBuffer:
    """Convolve ``audio`` with an impulse response of matching sample rate.

    ``rir`` may be an energetic or pressure impulse response, or another
    ``AudioBuffer``.  The output has ``len(audio) + len(rir) - 1`` samples.
    """
    h, rir_rate = _rir_samples(rir)
    if not math.isclose(audio.sample_rate, rir_rate):
        raise SampleRateMismatch(
            f"audio at {audio.sample_rate} Hz, impulse response at {rir_rate} Hz")
    return AudioBuffer(fft_convolve(audio.samples, h), audio.sample_rate)


def peak_dbfs(audio: AudioBuffer) -> float:
    peak = float(np.max(np.abs(audio.samples))) if len(audio) else 0.0
    if peak == 0.0:
        raise SilentInput("audio is silent")
    return 20.0 * math.log10(peak)


def normalize_peak(audio: AudioBuffer, target_dbfs: float = -1.0) -> AudioBuffer:
    """Scale ``audio`` so that its largest absolute sample sits at ``target_dbfs``."""
    gain_db = target_dbfs - peak_dbfs(audio)
    return AudioBuffer(audio.samples * 10.0 ** (gain_db / 20.0), audio.sample_rate)


def reverberate(audio: AudioBuffer, rir, target_dbfs: float = -1.0,
                always_normalize: bool = False) -> tuple[AudioBuffer, float]:
    """Convolve and keep the result inside full scale.

    The output is peak-normalized to ``target_dbfs`` when it would otherwise
    exceed +/-1.0, or unconditionally with ``always_normalize``.  Returns the
    buffer and the applied gain in dB (0.0 when untouched).
    """
    wet = convolve(audio, rir)
    peak = float(np.max(np.abs(wet.samples))) if len(wet) else 0.0
    if peak == 0.0 or not (always_normalize or peak > 1.0):
        return wet, 0.0
    gain_db = target_dbfs - 20.0 * math.log10(peak)
    if peak > 1.0:
        logger.info("convolution output peaks at %.2f dBFS, applying %.2f dB gain",
                    20.0 * math.log10(peak), gain_db)
    return AudioBuffer(wet.samples * 10.0 ** (gain_db / 20.0), wet.sample_rate), gain_db


def band_mask(freqs: np.ndarray, low: float, high: float,
              transition: float = TRANSITION_FRACTION) -> np.ndarray:
    """Magnitude response of the band-pass mask at ``freqs``.

    Unity inside the band, zero outside, joined at each edge by a raised
    cosine centred on the edge and ``transition * edge`` Hz wide.  Masks of
    adjacent bands sharing an edge sum to exactly one.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    half = transition / 2.0
    a, b = low * (1 - half), low * (1 + half)
    c, d = high * (1 - half), high * (1 + half)
    mask = np.zeros_like(freqs)
    mask[(freqs >= b) & (freqs <= c)] = 1.0
    rise = (freqs > a) & (freqs < b)
    mask[rise] = 0.5 - 0.5 * np.cos(np.pi * (freqs[rise] - a) / (b - a))
    fall = (freqs > c) & (freqs < d)
    mask[fall] = 0.5 + 0.5 * np.cos(np.pi * (freqs[fall] - c) / (d - c))
    return mask


def bandpass_array(x: np.ndarray, sample_rate: float, low: float, high: float) -> np.ndarray:
    """Zero-phase band-pass of a 1-D array by frequency-domain masking.

    The signal is zero-padded before the FFT so that the mask acts as a
    linear (not circular) filter; the output is cropped to the input length.
    """
    if not (0 < low < high < sample_rate / 2):
        raise InvalidBandEdges(
            f"need 0 < low < high < {sample_rate / 2:g} Hz, got [{low:g}, {high:g}]")
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n == 0:
        return x.copy()
    # A few time constants of the slowest transition keep wrap-around negligible.
    margin = int(math.ceil(4 * sample_rate / (TRANSITION_FRACTION * low)))
    nfft = next_fast_len(2 * n + margin, real=True)
    spectrum = rfft(x, nfft) * band_mask(rfftfreq(nfft, 1.0 / sample_rate), low, high)
    return irfft(spectrum, nfft)[:n]


def bandpass(audio: AudioBuffer, low: float, high: float) -> AudioBuffer:
    return AudioBuffer(bandpass_array(audio.samples, audio.sample_rate, low, high),
                       audio.sample_rate)


class Band(NamedTuple):
    center: float
    low: float
    high: float


def octave_bands(sample_rate: float, fraction: int = 1, f_min: float = 125.0,
                 f_max: float | None = None) -> list[Band]:
    """Base-two 1/1 or 1/3 octave bands referenced to 1 kHz.

    Includes every band whose center is at least ``f_min`` and whose upper
    edge (including its transition) stays below Nyquist and ``f_max``.
    """
    if fraction not in (1, 3):
        raise ValueError("fraction must be 1 (octave) or 3 (third octave)")
    nyquist = sample_rate / 2
    limit = nyquist if f_max is None else min(f_max, nyquist)
    edge = 2.0 ** (1.0 / (2 * fraction))
    bands = []
    n = math.floor(fraction * math.log2(f_min / 1000.0))
    while True:
        fc = 1000.0 * 2.0 ** (n / fraction)
        n += 1
        if fc < f_min * (1 - 1e-9):
            continue
        high = fc * edge
        if high * (1 + TRANSITION_FRACTION / 2) >= limit:
            break
        bands.append(Band(fc, fc / edge, high))
    return bands
