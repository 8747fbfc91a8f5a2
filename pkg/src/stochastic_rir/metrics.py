"""Acoustic parameters estimated from a pressure impulse response.

All estimators square the signal internally.  Energetic responses must go
through :func:`stochastic_rir.core.to_pressure` first: integrating energies
as if they were pressures doubles every decay slope in dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import EnergeticImpulseResponse, PressureImpulseResponse
from .errors import (InsufficientDecay, NoReflectionFound, NoReverberantEnergy,
                     RirError, SilentInput)

T30 = (-5.0, -35.0)
T20 = (-5.0, -25.0)
EDT_RANGE = (0.0, -10.0)
ITDG_THRESHOLD_DB = -40.0


@dataclass(frozen=True, eq=False)
class SchroederCurve:
    """Backward-integrated energy in dB, 0 dB at the first sample.

    Samples after the last nonzero sample hold ``-inf``.
    """

    levels: np.ndarray
    sample_rate: float

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.levels)) / self.sample_rate


@dataclass
class MeasuredParams:
    rt60: float | None = None
    edt: float | None = None
    drr: float | None = None
    itdg: float | None = None
    fit_quality: float | None = None
    # Field name -> "ErrorClass: message" for estimators that failed.
    errors: dict = field(default_factory=dict)
    rt60_range: str = "T30"

    def to_dict(self) -> dict:
        d = {}
        for name in ("rt60", "edt", "drr", "itdg", "fit_quality"):
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        d["rt60_range"] = self.rt60_range
        if self.errors:
            d["errors"] = dict(sorted(self.errors.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MeasuredParams":
        return cls(rt60=d.get("rt60"), edt=d.get("edt"), drr=d.get("drr"),
                   itdg=d.get("itdg"), fit_quality=d.get("fit_quality"),
                   errors=dict(d.get("errors", {})),
                   rt60_range=d.get("rt60_range", "T30"))


def _squared(rir) -> np.ndarray:
    if isinstance(rir, EnergeticImpulseResponse):
        raise TypeError("metrics need a pressure response; convert with to_pressure() first")
    h = np.asarray(rir.amplitudes, dtype=np.float64)
    return h * h


def schroeder_curve(rir: PressureImpulseResponse) -> SchroederCurve:
    energy = _squared(rir)
    remaining = np.cumsum(energy[::-1])[::-1]
    if energy.size == 0 or remaining[0] == 0.0:
        raise SilentInput("impulse response is all zeros")
    # Clip rounding residue from the reversed cumulative sum.
    last = np.flatnonzero(energy)[-1]
    remaining[last + 1:] = 0.0
    with np.errstate(divide="ignore"):
        levels = 10.0 * np.log10(remaining / remaining[0])
    levels[0] = 0.0
    # Enforce monotonicity against floating-point noise in the cumulative sum.
    levels = np.minimum.accumulate(levels)
    return SchroederCurve(levels, rir.sample_rate)


def _fit_decay(curve: SchroederCurve, upper: float, lower: float):
    levels = curve.levels
    if not np.any(levels <= lower):
        raise InsufficientDecay(f"decay curve never reaches {lower:g} dB")
    sel = np.flatnonzero((levels <= upper) & (levels >= lower))
    if sel.size < 2:
        raise InsufficientDecay(
            f"fewer than two samples between {upper:g} and {lower:g} dB")
    t = sel / curve.sample_rate
    y = levels[sel]
    if np.ptp(t) == 0:
        raise InsufficientDecay("degenerate fit interval")
    slope, _ = np.polyfit(t, y, 1)
    r = np.corrcoef(t, y)[0, 1] if np.ptp(y) > 0 else 0.0
    if not slope < 0:
        raise InsufficientDecay("fitted decay slope is not negative")
    return slope, float(r)


def estimate_rt60(curve: SchroederCurve, decay_range: tuple = T30) -> tuple[float, float]:
    """Reverberation time from a line fit over ``decay_range`` (T30 by default).

    Returns ``(rt60, r)`` where ``r`` is the correlation coefficient of the
    regression; it is negative for a decaying curve.
    """
    slope, r = _fit_decay(curve, *decay_range)
    return -60.0 / slope, r


def estimate_edt(curve: SchroederCurve) -> float:
    """Early decay time: the 0 to -10 dB slope extrapolated to 60 dB."""
    slope, _ = _fit_decay(curve, *EDT_RANGE)
    return -60.0 / slope


def measure_drr(rir: PressureImpulseResponse, direct_window: float = 0.0) -> float:
    """Direct-to-reverberant ratio in dB.

    The direct sound is the energy peak plus the following ``direct_window``
    seconds; everything after that is reverberant.
    """
    if direct_window < 0:
        raise ValueError("direct_window must be nonnegative")
    energy = _squared(rir)
    if energy.size == 0 or not np.any(energy):
        raise SilentInput("impulse response is all zeros")
    peak = int(np.argmax(energy))
    end = peak + 1 + int(math.floor(direct_window * rir.sample_rate + 0.5))
    direct = float(np.sum(energy[peak:end]))
    reverberant = float(np.sum(energy[end:]))
    if reverberant == 0.0:
        raise NoReverberantEnergy("no energy after the direct sound")
    return 10.0 * math.log10(direct / reverberant)


def measure_itdg(rir: PressureImpulseResponse, threshold_db: float = ITDG_THRESHOLD_DB) -> float:
    """Seconds from the energy peak to the first later sample above threshold.

    ``threshold_db`` is relative to the peak energy.  A response whose very
    next sample already clears the threshold has no gap to measure and
    raises ``NoReflectionFound``.
    """
    if not threshold_db < 0:
        raise ValueError("threshold_db must be negative")
    energy = _squared(rir)
    if energy.size == 0 or not np.any(energy):
        raise SilentInput("impulse response is all zeros")
    peak = int(np.argmax(energy))
    level = energy[peak] * 10.0 ** (threshold_db / 10.0)
    later = np.flatnonzero(energy[peak + 1:] > level)
    if later.size == 0:
        raise NoReflectionFound(f"no reflection within {-threshold_db:g} dB of the direct sound")
    if later[0] == 0:
        raise NoReflectionFound("reflections start right after the direct sound (no gap)")
    return (later[0] + 1) / rir.sample_rate


def _error(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def measure_all(rir: PressureImpulseResponse) -> MeasuredParams:
    """All four parameters with default settings.

    RT60 falls back to the T20 range when T30 is out of reach.  Failures are
    recorded per field; only an all-zero input raises.
    """
    curve = schroeder_curve(rir)
    out = MeasuredParams()
    try:
        out.rt60, out.fit_quality = estimate_rt60(curve, T30)
    except InsufficientDecay:
        try:
            out.rt60, out.fit_quality = estimate_rt60(curve, T20)
            out.rt60_range = "T20"
        except RirError as exc:
            out.errors["rt60"] = _error(exc)
    try:
        out.edt = estimate_edt(curve)
    except RirError as exc:
        out.errors["edt"] = _error(exc)
    try:
        out.drr = measure_drr(rir)
    except RirError as exc:
        out.errors["drr"] = _error(exc)
    try:
        out.itdg = measure_itdg(rir)
    except RirError as exc:
        out.errors["itdg"] = _error(exc)
    return out
