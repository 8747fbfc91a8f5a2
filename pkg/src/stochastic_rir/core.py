"""Stochastic room impulse response generation.

A response is built from its acoustic parameters alone, in four steps:
uniform dB noise, a two-slope energy decay imposed on it, conversion to
linear energy, and sparsification (an initial time gap followed by random
ray deletion until the direct-to-reverberant ratio reaches its target).

Storage convention: index 0 holds the direct ray, fixed at 0 dB.  The decay
formulas are written for reflection indices ``i = 1..l`` where ``l`` is RT60
in samples, so every response stores ``l + 1`` values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from . import seeding
from .dsp import Band, bandpass_array
from .errors import (ExhaustedRays, InfeasibleDrr, InvalidBandLayout,
                     InvalidParams, RirError)

# Initial DRR may exceed the target by this much before it is an error.
DRR_HEADROOM_DB = 1.0
# Filter ringing kept ahead of the direct sound in multiband responses.
PRE_ROLL = 0.005


def to_samples(seconds: float, sample_rate: float) -> int:
    """Duration to sample count, rounding half up."""
    return int(math.floor(seconds * sample_rate + 0.5))


@dataclass(frozen=True)
class RirParams:
    """Acoustic parameters of one response.

    Durations are in seconds, levels in dB.  ``deviation_db`` is the
    half-width of the uniform noise distribution and
    ``early_deletion_prob`` the chance that a deletion targets the early
    region ``(itdg, edt]`` rather than the tail.
    """

    rt60: float
    edt: float
    itdg: float
    drr_target: float
    deviation_db: float = 6.0
    sample_rate: float = 16000
    seed: int = 0
    early_deletion_prob: float = 0.75

    def __post_init__(self):
        self.validate()

    def validate(self):
        problems = []
        if not self.sample_rate > 0:
            problems.append("sample_rate must be positive")
        if not self.rt60 > 0:
            problems.append("rt60 must be positive")
        if not 0 < self.edt < self.rt60:
            problems.append("edt must satisfy 0 < edt < rt60")
        if not self.itdg >= 0:
            problems.append("itdg must be nonnegative")
        if not self.deviation_db >= 0:
            problems.append("deviation_db must be nonnegative")
        if not math.isfinite(self.drr_target):
            problems.append("drr_target must be finite")
        if not 0 <= self.early_deletion_prob <= 1:
            problems.append("early_deletion_prob must lie in [0, 1]")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed <= seeding.MASK64):
            problems.append("seed must be a 64-bit unsigned integer")
        if not problems:
            l, k, g = self.n_rt60, self.n_edt, self.n_itdg
            if l < 2:
                problems.append(f"rt60 is only {l} samples (need at least 2)")
            if not 0 < k < l:
                problems.append(f"edt of {k} samples must lie strictly between 0 and {l}")
            if g >= l - 1:
                problems.append(f"itdg of {g} samples leaves no deletable ray (l = {l})")
        if problems:
            raise InvalidParams("; ".join(problems))

    @property
    def n_rt60(self) -> int:
        return to_samples(self.rt60, self.sample_rate)

    @property
    def n_edt(self) -> int:
        return to_samples(self.edt, self.sample_rate)

    @property
    def n_itdg(self) -> int:
        return to_samples(self.itdg, self.sample_rate)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seed"] = int(self.seed)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RirParams":
        names = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass(frozen=True, eq=False)
class EnergyDecayCurve:
    """Levels in dB; ``samples[0]`` is the direct ray at 0 dB."""

    samples: np.ndarray
    k: int
    params: RirParams


@dataclass(frozen=True)
class SparsifyReport:
    initial_drr_db: float
    final_drr_db: float
    deletions: int
    # DRR jump caused by the last deletion (0 when nothing was deleted).
    quantum_db: float


@dataclass(frozen=True, eq=False)
class EnergeticImpulseResponse:
    """Nonnegative linear energies, peak-normalized with the direct ray at 1."""

    energies: np.ndarray
    sample_rate: float
    params: RirParams
    report: SparsifyReport | None = field(default=None)

    def __len__(self):
        return len(self.energies)


@dataclass(frozen=True, eq=False)
class PressureImpulseResponse:
    """Signed amplitudes whose squares are energies."""

    amplitudes: np.ndarray
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=np.float64))

    def __len__(self):
        return len(self.amplitudes)


def energy_drr(energies: np.ndarray) -> float:
    """DRR in dB with the direct sound as the single sample at index 0."""
    reverberant = float(np.sum(energies[1:]))
    if reverberant == 0.0:
        return math.inf
    return 10.0 * math.log10(float(energies[0]) / reverberant)


def generate_noise_vector(params: RirParams, rng: np.random.Generator | None = None) -> EnergyDecayCurve:
    """Zero-mean uniform dB noise on ``[-deviation_db, +deviation_db]``."""
    params.validate()
    if rng is None:
        rng = seeding.stream(params.seed, seeding.NOISE)
    l = params.n_rt60
    v = np.zeros(l + 1)
    v[1:] = rng.uniform(-params.deviation_db, params.deviation_db, size=l)
    return EnergyDecayCurve(v, params.n_edt, params)


def decay_slope_db(l: int, k: int) -> np.ndarray:
    """Attenuation in dB applied at storage indices ``0..l``.

    Falls by 10 dB over the first ``k`` reflections, then by a further
    ``50 * (i - k) / l`` dB up to ``i = l``.  The direct ray is not attenuated.
    """
    i = np.arange(l + 1, dtype=np.float64)
    slope = np.where(i <= k, 10.0 * i / k, 10.0 + 50.0 * (i - k) / l)
    slope[0] = 0.0
    return slope


def shape_energy_decay_curve(noise: EnergyDecayCurve, params: RirParams) -> EnergyDecayCurve:
    l, k = params.n_rt60, params.n_edt
    if not 0 < k < l:
        raise InvalidParams(f"edt of {k} samples must be shorter than rt60 ({l} samples)")
    if len(noise.samples) != l + 1:
        raise InvalidParams(f"noise vector has {len(noise.samples)} samples, expected {l + 1}")
    edc = noise.samples - decay_slope_db(l, k)
    edc[0] = 0.0
    # Positive noise right after the direct ray could otherwise outrank it.
    np.minimum(edc[1:], 0.0, out=edc[1:])
    return EnergyDecayCurve(edc, k, params)


def edc_to_linear(edc: EnergyDecayCurve) -> EnergeticImpulseResponse:
    energies = 10.0 ** (edc.samples / 10.0)
    energies /= energies.max()
    return EnergeticImpulseResponse(energies, edc.params.sample_rate, edc.params)


def apply_itdg_gap(eir: EnergeticImpulseResponse, params: RirParams) -> EnergeticImpulseResponse:
    g = params.n_itdg
    if g >= len(eir.energies) - 2:
        raise InvalidParams(f"itdg of {g} samples leaves no deletable ray")
    energies = eir.energies.copy()
    energies[1:g + 1] = 0.0
    return replace(eir, energies=energies)


def _deletion_order(early: np.ndarray, late: np.ndarray, p_early: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Order in which candidate rays would be deleted if deletion never stopped.

    Each step picks the early region with probability ``p_early`` (falling
    back to the other region once one is empty), then a uniformly chosen
    surviving ray within it.  Drawing a random permutation per region plus
    one region coin per step gives the same distribution as drawing ray by
    ray, without a Python-level loop.
    """
    early = rng.permutation(early)
    late = rng.permutation(late)
    n_e, n_l = early.size, late.size
    n = n_e + n_l
    picks_early = rng.random(n) < p_early
    # Rays already taken from each region before every step.
    before_e = np.concatenate(([0], np.cumsum(picks_early)[:-1]))
    before_l = np.arange(n) - before_e
    exhausted = np.flatnonzero((before_e >= n_e) | (before_l >= n_l))
    if exhausted.size:
        s = exhausted[0]
        picks_early[s:] = before_e[s] < n_e
    order = np.empty(n, dtype=np.intp)
    order[picks_early] = early
    order[~picks_early] = late
    return order


def sparsify_to_drr(eir: EnergeticImpulseResponse, params: RirParams,
                    rng: np.random.Generator | None = None) -> EnergeticImpulseResponse:
    """Delete reflections until the DRR first reaches ``params.drr_target``.

    Only rays after the time gap are candidates and the direct ray is never
    touched.  The reverberant energy is tracked as a running sum decremented
    per deletion.
    """
    if rng is None:
        rng = seeding.stream(params.seed, seeding.DELETION)
    energies = eir.energies.copy()
    direct = float(energies[0])
    initial = energy_drr(energies)
    target = params.drr_target
    if initial >= target + DRR_HEADROOM_DB:
        raise InfeasibleDrr(
            f"initial DRR {initial:.2f} dB already exceeds target {target:.2f} dB "
            f"by {DRR_HEADROOM_DB:g} dB or more")
    if initial >= target:
        return replace(eir, energies=energies,
                       report=SparsifyReport(initial, initial, 0, 0.0))

    g, k = params.n_itdg, params.n_edt
    idx = np.arange(g + 1, len(energies))
    idx = idx[energies[idx] > 0]
    if idx.size == 0:
        raise ExhaustedRays("no reflections left to delete")
    order = _deletion_order(idx[idx <= k], idx[idx > k], params.early_deletion_prob, rng)

    # Reverberant energy that may remain for the DRR to reach the target.
    allowed = direct * 10.0 ** (-target / 10.0)
    remaining = float(np.sum(energies[1:])) - np.cumsum(energies[order])
    hits = np.flatnonzero(remaining[:-1] <= allowed)
    if hits.size == 0:
        raise ExhaustedRays(
            f"DRR target {target:.2f} dB unreachable with a single reflection left")
    n_del = int(hits[0]) + 1
    energies[order[:n_del]] = 0.0
    final = energy_drr(energies)
    # The running sum may land a rounding error short of the exact sum.
    while final < target and n_del < order.size - 1:
        energies[order[n_del]] = 0.0
        n_del += 1
        final = energy_drr(energies)
    if final < target:
        raise ExhaustedRays(
            f"DRR target {target:.2f} dB unreachable with a single reflection left")
    before = energies.copy()
    before[order[n_del - 1]] = eir.energies[order[n_del - 1]]
    quantum = final - energy_drr(before)
    return replace(eir, energies=energies,
                   report=SparsifyReport(initial, final, n_del, quantum))


def generate_rir(params: RirParams) -> EnergeticImpulseResponse:
    """Run all four generation steps; a pure function of ``params``."""
    params.validate()
    noise = generate_noise_vector(params, seeding.stream(params.seed, seeding.NOISE))
    edc = shape_energy_decay_curve(noise, params)
    eir = apply_itdg_gap(edc_to_linear(edc), params)
    return sparsify_to_drr(eir, params, seeding.stream(params.seed, seeding.DELETION))


def to_pressure(eir: EnergeticImpulseResponse,
                polarity_rng: np.random.Generator | None = None) -> PressureImpulseResponse:
    """Square-root energies and give every reflection a random sign."""
    if polarity_rng is None:
        polarity_rng = seeding.stream(eir.params.seed, seeding.POLARITY)
    signs = 1.0 - 2.0 * polarity_rng.integers(0, 2, size=len(eir.energies))
    signs[0] = 1.0
    return PressureImpulseResponse(signs * np.sqrt(eir.energies), eir.sample_rate)


def check_band_layout(bands: Sequence[Band], sample_rate: float):
    if len(bands) == 0:
        raise InvalidBandLayout("band layout is empty")
    centers = [b.center for b in bands]
    if any(b >= a for a, b in zip(centers[1:], centers[:-1])):
        raise InvalidBandLayout("band centers must be strictly increasing")
    for b in bands:
        if not 0 < b.low < b.center < b.high < sample_rate / 2:
            raise InvalidBandLayout(
                f"band {b.center:g} Hz has edges [{b.low:g}, {b.high:g}] outside (0, {sample_rate / 2:g})")


def generate_multiband_rir(band_params: Sequence[RirParams], bands: Sequence[Band],
                           pre_roll: float = PRE_ROLL) -> PressureImpulseResponse:
    """Sum of independently generated, band-limited pressure responses.

    Band ``b`` is generated from ``band_params[b]`` with its seed replaced by
    ``band_params[0].seed + b``.  The zero-phase band filters ring before the
    direct sound; ``pre_roll`` seconds of that ringing are kept in front, so
    the direct sound sits at sample ``round(pre_roll * sample_rate)``.
    """
    if len(band_params) == 0:
        raise InvalidBandLayout("no bands given")
    if len(band_params) != len(bands):
        raise InvalidBandLayout(
            f"{len(band_params)} parameter sets for {len(bands)} bands")
    sample_rate = band_params[0].sample_rate
    if any(p.sample_rate != sample_rate for p in band_params):
        raise InvalidBandLayout("all bands must share one sample rate")
    check_band_layout(bands, sample_rate)
    rt60s = [p.rt60 for p in band_params]
    if any(b > a for a, b in zip(rt60s[:-1], rt60s[1:])):
        warnings.warn("per-band RT60 increases with frequency", stacklevel=2)

    base = int(band_params[0].seed)
    responses = []
    for b, params in enumerate(band_params):
        params = replace(params, seed=(base + b) & seeding.MASK64)
        try:
            responses.append(to_pressure(generate_rir(params)).amplitudes)
        except RirError as exc:
            raise type(exc)(f"band {b} ({bands[b].center:g} Hz): {exc}") from exc
    lead = to_samples(pre_roll, sample_rate)
    n = lead + max(r.size for r in responses)
    out = np.zeros(n)
    for r, band in zip(responses, bands):
        padded = np.zeros(n)
        padded[lead:lead + r.size] = r
        out += bandpass_array(padded, sample_rate, band.low, band.high)
    return PressureImpulseResponse(out, sample_rate)
