"""Stochastic room impulse response generation and analysis."""

__version__ = "0.1.0"

from .core import (EnergeticImpulseResponse, EnergyDecayCurve,  # noqa: E402
                   PressureImpulseResponse, RirParams, SparsifyReport,
                   apply_itdg_gap, edc_to_linear, generate_multiband_rir,
                   generate_noise_vector, generate_rir, shape_energy_decay_curve,
                   sparsify_to_drr, to_pressure)
from .dsp import AudioBuffer, Band, bandpass, convolve, normalize_peak, octave_bands  # noqa: E402
from .metrics import (MeasuredParams, SchroederCurve, estimate_edt,  # noqa: E402
                      estimate_rt60, measure_all, measure_drr, measure_itdg,
                      schroeder_curve)
from .sampler import ParamRanges, SampledBatch, sample, sample_batch  # noqa: E402

__all__ = [
    "AudioBuffer", "Band", "EnergeticImpulseResponse", "EnergyDecayCurve",
    "MeasuredParams", "ParamRanges", "PressureImpulseResponse", "RirParams",
    "SampledBatch", "SchroederCurve", "SparsifyReport", "apply_itdg_gap",
    "bandpass", "convolve", "edc_to_linear", "estimate_edt", "estimate_rt60",
    "generate_multiband_rir", "generate_noise_vector", "generate_rir",
    "measure_all", "measure_drr", "measure_itdg", "normalize_peak",
    "octave_bands", "sample", "sample_batch", "schroeder_curve",
    "shape_energy_decay_curve", "sparsify_to_drr", "to_pressure",
]
