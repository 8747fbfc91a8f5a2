"""WAV reading/writing and JSON metadata sidecars."""

from __future__ import annotations

import json
import logging
import math
import os
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from . import __version__
from .core import EnergeticImpulseResponse, PressureImpulseResponse, RirParams, SparsifyReport
from .dsp import AudioBuffer
from .errors import ClippingError, CorruptFile, UnsupportedFormat
from .metrics import MeasuredParams

logger = logging.getLogger(__name__)

SIDECAR_SCHEMA_VERSION = 1
PCM16_SCALE = 32768.0


def _samples_and_rate(obj, sample_rate):
    if isinstance(obj, EnergeticImpulseResponse):
        return obj.energies, obj.sample_rate
    if isinstance(obj, PressureImpulseResponse):
        return obj.amplitudes, obj.sample_rate
    if isinstance(obj, AudioBuffer):
        return obj.samples, obj.sample_rate
    if sample_rate is None:
        raise TypeError("sample_rate is required when writing a bare array")
    return np.asarray(obj, dtype=np.float64), sample_rate


def write_wav(obj, path, format: str = "float32", sample_rate: float | None = None):
    """Write mono samples as a RIFF/WAVE file.

    ``obj`` is an ``AudioBuffer``, an impulse response, or an array together
    with ``sample_rate``.  ``format`` is ``"float32"`` (IEEE float) or
    ``"pcm16"``; pcm16 refuses samples outside [-1, 1].
    """
    samples, rate = _samples_and_rate(obj, sample_rate)
    if samples.ndim != 1:
        raise ValueError("only mono audio can be written")
    if float(rate) != int(rate):
        raise ValueError(f"WAV needs an integer sample rate, got {rate}")
    if format == "float32":
        data = samples.astype(np.float32)
    elif format == "pcm16":
        if samples.size and np.max(np.abs(samples)) > 1.0:
            raise ClippingError(
                f"peak {np.max(np.abs(samples)):.4f} exceeds full scale for pcm16")
        data = np.clip(np.round(samples * PCM16_SCALE), -32768, 32767).astype("<i2")
    else:
        raise ValueError(f"unknown WAV format {format!r}")
    wavfile.write(os.fspath(path), int(rate), data)


def read_wav(path) -> AudioBuffer:
    """Read a pcm16, pcm24, pcm32 or float WAV as float64 in [-1, 1].

    Stereo files are averaged down to mono.
    """
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            rate, data = wavfile.read(os.fspath(path))
    except (ValueError, EOFError, struct.error) as exc:
        msg = str(exc)
        if "not understood" in msg or "Unknown wave file format" in msg or "Unsupported" in msg:
            raise UnsupportedFormat(f"{path}: {msg}") from exc
        raise CorruptFile(f"{path}: {msg or type(exc).__name__}") from exc
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.int32:
        # scipy left-aligns 24-bit samples in int32, so one scale covers both.
        samples = data.astype(np.float64) / 2.0 ** 31
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise UnsupportedFormat(f"{path}: sample type {data.dtype} is not supported")
    if samples.ndim == 2:
        if samples.shape[1] == 1:
            samples = samples[:, 0]
        elif samples.shape[1] == 2:
            logger.info("%s: downmixing stereo to mono", path)
            samples = samples.mean(axis=1)
        else:
            raise UnsupportedFormat(f"{path}: {samples.shape[1]} channels")
    if not np.all(np.isfinite(samples)):
        raise CorruptFile(f"{path}: non-finite samples")
    return AudioBuffer(samples, float(rate))


@dataclass
class RirRecord:
    """Metadata binding a WAV file to the parameters it was generated from."""

    file: str
    requested: RirParams
    measured: MeasuredParams | None = None
    mode: str = "energetic"
    applied_gain_db: float = 0.0
    tool_version: str = __version__
    sparsify: SparsifyReport | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        p = self.requested
        d = {
            "schema_version": SIDECAR_SCHEMA_VERSION,
            "file": self.file,
            "mode": self.mode,
            "applied_gain_db": self.applied_gain_db,
            "tool_version": self.tool_version,
            "requested": p.to_dict(),
            "samples": {"rt60": p.n_rt60, "edt": p.n_edt, "itdg": p.n_itdg,
                        "stored": p.n_rt60 + 1},
        }
        if self.measured is not None:
            d["measured"] = self.measured.to_dict()
        if self.sparsify is not None:
            s = self.sparsify
            d["sparsify"] = {"initial_drr_db": s.initial_drr_db, "final_drr_db": s.final_drr_db,
                             "deletions": s.deletions, "quantum_db": s.quantum_db}
        if self.extra:
            d["extra"] = self.extra
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RirRecord":
        measured = d.get("measured")
        sparsify = d.get("sparsify")
        return cls(
            file=d["file"],
            requested=RirParams.from_dict(d["requested"]),
            measured=MeasuredParams.from_dict(measured) if measured is not None else None,
            mode=d.get("mode", "energetic"),
            applied_gain_db=d.get("applied_gain_db", 0.0),
            tool_version=d.get("tool_version", ""),
            sparsify=SparsifyReport(**sparsify) if sparsify is not None else None,
            extra=d.get("extra", {}),
        )


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def dump_json(obj, path):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def write_sidecar(record: RirRecord, path):
    dump_json(record.to_dict(), path)


def read_sidecar(path) -> RirRecord:
    return RirRecord.from_dict(json.loads(Path(path).read_text()))


def sidecar_path(wav_path) -> Path:
    return Path(wav_path).with_suffix(".json")
