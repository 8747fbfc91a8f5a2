"""Acceptance criteria, each run at its stated tolerance.

Every test records a PASS/FAIL verdict with the measured figure in
``conftest.ACCEPTANCE_RESULTS``; the lines are printed at the end of the
session.  A failing criterion is reported as such and never relaxed.
"""

import filecmp
import math
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS, SR, exponential_rir
from stochastic_rir import (Band, PressureImpulseResponse, RirParams,
                            generate_multiband_rir, generate_rir, to_pressure)
from stochastic_rir.cli import main
from stochastic_rir.core import (EnergyDecayCurve, edc_to_linear, generate_noise_vector,
                                 shape_energy_decay_curve)
from stochastic_rir.dsp import bandpass_array, fft_convolve
from stochastic_rir.metrics import (estimate_edt, estimate_rt60, measure_drr, measure_itdg,
                                    schroeder_curve)
from stochastic_rir.sampler import ParamRanges, sample

N_DEFAULT = 100
DRR_FLOAT_TOL_DB = 1e-9


def record(name, ok, detail):
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def default_batch():
    """100 seeded generations over the default ranges, with timing."""
    ranges = ParamRanges()
    t0 = time.perf_counter()
    items = []
    for i in range(N_DEFAULT):
        params = sample(ranges, i)
        eir = generate_rir(params)
        pressure = to_pressure(eir)
        rt60, _ = estimate_rt60(schroeder_curve(pressure))
        items.append((params, eir, pressure, rt60))
    return items, time.perf_counter() - t0


def test_decay_curve_closed_form():
    t0 = time.perf_counter()
    params = RirParams(rt60=0.5, edt=0.05, itdg=0.0, drr_target=0.0, deviation_db=0.0)
    l, k = params.n_rt60, params.n_edt
    edc = shape_energy_decay_curve(generate_noise_vector(params), params).samples
    expected = {k // 2: -10.0 * (k // 2) / k, k: -10.0, l: -10.0 - 50.0 * (l - k) / l}
    worst = max(abs(edc[i] - v) for i, v in expected.items())
    lin = edc_to_linear(EnergyDecayCurve(np.array([0.0, -10.0]), 1, params)).energies
    map_err = max(abs(lin[0] - 1.0), abs(lin[1] - 0.1))
    elapsed = time.perf_counter() - t0
    record("closed-form decay curve",
           worst <= 1e-9 and map_err <= 1e-12 and elapsed < 1.0,
           f"max curve error {worst:.2e} dB at i in {{k/2, k, l}} (k={k}, l={l}); "
           f"dB->linear error {map_err:.2e}; {elapsed * 1000:.0f} ms")


def test_rt60_round_trip(default_batch):
    items, elapsed = default_batch
    rel = np.array([abs(m - p.rt60) / p.rt60 for p, _, _, m in items])
    median = float(np.median(rel))
    record("RT60 round trip (T30)", median <= 0.15 and elapsed < 30.0,
           f"median relative error {median:.1%} (limit 15%) over {len(items)} draws, "
           f"mean measured/requested {np.mean([m / p.rt60 for p, _, _, m in items]):.3f}; "
           f"{elapsed:.1f} s")


def test_drr_guarantee(default_batch):
    items, _ = default_batch
    violations = []
    for p, eir, pressure, _ in items:
        drr = measure_drr(pressure, 0.0)
        q = eir.report.quantum_db
        if not p.drr_target - DRR_FLOAT_TOL_DB <= drr <= p.drr_target + q + DRR_FLOAT_TOL_DB:
            violations.append((p.seed, p.drr_target, drr, q))
    record("DRR guarantee", not violations,
           f"{len(violations)} of {len(items)} outside [target, target + quantum]"
           + (f"; first {violations[0]}" if violations else ""))


def test_itdg_guarantee(default_batch):
    items, _ = default_batch
    ok = sum(measure_itdg(pressure) >= p.itdg for p, _, pressure, _ in items)
    record("ITDG guarantee", ok == len(items), f"{ok}/{len(items)} measured >= requested")


def test_determinism_across_jobs(tmp_path, capsys):
    for jobs in (1, 8):
        assert main(["generate", "--count", "100", "--seed", "7", "--jobs", str(jobs),
                     "--out", str(tmp_path / f"j{jobs}")]) == 0
    capsys.readouterr()
    a, b = tmp_path / "j1", tmp_path / "j8"
    cmp = filecmp.dircmp(a, b)
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    ok = not (cmp.left_only or cmp.right_only or mismatch or errors)
    record("determinism --jobs 1 vs 8", ok,
           f"{len(cmp.common_files)} common files, {len(mismatch)} differing, "
           f"{len(cmp.left_only) + len(cmp.right_only)} unmatched")


def test_convolution_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        x = rng.standard_normal(int(rng.integers(1, 20000)))
        h = rng.standard_normal(int(rng.integers(1, 8000))) * rng.random()
        direct = np.convolve(x, h)
        err = np.sqrt(np.mean((fft_convolve(x, h) - direct) ** 2))
        worst = max(worst, err / np.sqrt(np.mean(direct ** 2)))
    record("FFT convolution oracle", worst <= 1e-6,
           f"worst relative RMS error {worst:.2e} over 50 pairs")


def test_metrics_self_test():
    errors = []
    for t in (0.2, 0.5, 0.7):
        curve = schroeder_curve(exponential_rir(t))
        rt60, _ = estimate_rt60(curve)
        errors += [abs(rt60 - t) / t, abs(estimate_edt(curve) - t) / t]
    worst = max(errors)
    record("metrics on ideal exponentials", worst <= 0.01,
           f"worst RT60/EDT relative error {worst:.2e} at T in {{0.2, 0.5, 0.7}} s")


def test_multiband_rt60():
    bands = [Band(500.0, 500 / math.sqrt(2), 500 * math.sqrt(2)),
             Band(2000.0, 2000 / math.sqrt(2), 2000 * math.sqrt(2))]
    requested = (0.6, 0.3)
    params = [RirParams(rt60=t, edt=0.075, itdg=0.005, drr_target=-3.5, seed=7)
              for t in requested]
    rir = generate_multiband_rir(params, bands)
    ratios = []
    for band, t in zip(bands, requested):
        h = bandpass_array(rir.amplitudes, SR, band.low, band.high)
        rt60, _ = estimate_rt60(schroeder_curve(PressureImpulseResponse(h, SR)))
        ratios.append(rt60 / t)
    ok = all(abs(r - 1) <= 0.2 for r in ratios)
    record("multiband RT60", ok,
           "measured/requested " + ", ".join(f"{r:.3f}" for r in ratios)
           + " for bands at 500 and 2000 Hz (limit 0.8-1.2)")


@pytest.mark.slow
def test_scale_10000(tmp_path, capsys):
    jobs = os.cpu_count() or 1
    t0 = time.perf_counter()
    code = main(["generate", "--count", "10000", "--seed", "1", "--jobs", str(jobs),
                 "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    n = len(list(tmp_path.glob("rir_*.wav")))
    record("10,000 RIRs under 5 minutes", code == 0 and n == 10000 and elapsed < 300,
           f"{n} files in {elapsed:.1f} s with {jobs} worker(s)")
