"""Command line front end: ``generate``, ``augment`` and ``measure``.

Exit codes: 0 on success, 1 when some items failed at runtime, 2 for
configuration errors.  Progress goes to stderr; stdout carries only the
machine-readable summary or the measurement table.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, seeding
from .audio_io import (RirRecord, dump_json, read_sidecar, read_wav, sidecar_path,
                       write_sidecar, write_wav)
from .core import PressureImpulseResponse, RirParams, generate_multiband_rir, generate_rir, to_pressure
from .dsp import octave_bands, reverberate
from .errors import InvalidParams, RirError, UnsatisfiableRanges
from .metrics import measure_all, schroeder_curve
from .sampler import ParamRanges, sample

logger = logging.getLogger("stochastic_rir")

CONFIG_ENV = "STOCHASTIC_RIR_CONFIG"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

# Config-file keys that are not ParamRanges fields.
OPTION_KEYS = {"count", "mode", "bands", "band_rt60_ratio", "validate", "jobs"}


class ConfigError(Exception):
    pass


def load_config(path) -> dict:
    """Read a JSON config; ``ParamRanges`` keys plus optional generate options."""
    if path is None:
        path = os.environ.get(CONFIG_ENV)
        if not path:
            return {}
    try:
        config = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return config


def band_params(params: RirParams, n_bands: int, rt60_ratio: float) -> list[RirParams]:
    """Per-band parameters with RT60 and EDT falling geometrically from the
    lowest band (unchanged) to the highest (scaled by ``rt60_ratio``)."""
    out = []
    for b in range(n_bands):
        scale = rt60_ratio ** (b / (n_bands - 1)) if n_bands > 1 else 1.0
        out.append(replace(params, rt60=params.rt60 * scale, edt=params.edt * scale))
    return out


def _generate_item(task):
    index, ranges, out_dir, mode, bands, ratio, validate = task
    name = f"rir_{index:06d}.wav"
    row = {"index": index, "file": name}
    try:
        params = sample(ranges, index)
        row["seed"] = params.seed
        extra, report = {}, None
        if bands:
            layout = octave_bands(ranges.sample_rate, 1 if bands == "octave" else 3)
            per_band = band_params(params, len(layout), ratio)
            pressure = generate_multiband_rir(per_band, layout)
            out, out_mode = pressure, "pressure"
            extra = {"bands": bands, "band_centers": [b.center for b in layout],
                     "band_rt60": [p.rt60 for p in per_band]}
        else:
            eir = generate_rir(params)
            report = eir.report
            pressure = to_pressure(eir)
            out, out_mode = (eir, "energetic") if mode == "energetic" else (pressure, "pressure")
        measured = measure_all(pressure) if validate else None
        wav = Path(out_dir) / name
        write_wav(out, wav, "float32")
        write_sidecar(RirRecord(name, params, measured, out_mode, 0.0, __version__,
                                report, extra), sidecar_path(wav))
    except UnsatisfiableRanges:
        raise
    except (RirError, OSError, ValueError) as exc:
        row["status"] = "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row["status"] = "ok"
    if validate:
        row.update(requested_rt60=params.rt60, requested_drr=params.drr_target,
                   requested_itdg=params.itdg, requested_edt=params.edt,
                   measured_rt60=measured.rt60, measured_drr=measured.drr,
                   measured_itdg=measured.itdg, measured_edt=measured.edt,
                   drr_quantum_db=report.quantum_db if report else None)
    return row


def _map(fn, tasks, jobs):
    if jobs == 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _rel_errors(rows, name):
    return [abs(r[f"measured_{name}"] - r[f"requested_{name}"]) / r[f"requested_{name}"]
            for r in rows if r.get(f"measured_{name}") is not None]


def validation_summary(rows: list[dict]) -> dict:
    """Requested-vs-measured error statistics over validated items."""
    ok = [r for r in rows if r["status"] == "ok"]
    summary = {"validated": len(ok)}
    for name in ("rt60", "edt"):
        errs = _rel_errors(ok, name)
        summary[f"{name}_measured"] = len(errs)
        if errs:
            summary[f"{name}_median_rel_error"] = statistics.median(errs)
            summary[f"{name}_max_rel_error"] = max(errs)
    drr_low = drr_high = drr_missing = 0
    for r in ok:
        if r.get("measured_drr") is None:
            drr_missing += 1
            continue
        if r["measured_drr"] < r["requested_drr"]:
            drr_low += 1
        q = r.get("drr_quantum_db")
        if q is not None and r["measured_drr"] > r["requested_drr"] + q + 1e-9:
            drr_high += 1
    summary.update(drr_below_target=drr_low, drr_above_quantum=drr_high,
                   drr_unmeasured=drr_missing)
    summary["itdg_below_request"] = sum(
        1 for r in ok if r.get("measured_itdg") is None or r["measured_itdg"] < r["requested_itdg"])
    return summary


def cmd_generate(args) -> int:
    config = load_config(args.config)
    options = {k: config.pop(k) for k in list(config) if k in OPTION_KEYS}
    if args.seed is not None:
        config["base_seed"] = args.seed
    try:
        ranges = ParamRanges.from_dict(config)
    except (InvalidParams, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid ranges: {exc}") from exc
    count = args.count if args.count is not None else options.get("count")
    mode = args.mode or options.get("mode", "energetic")
    bands = args.bands or options.get("bands")
    jobs = args.jobs if args.jobs is not None else options.get("jobs", 1)
    validate = args.validate or bool(options.get("validate", False))
    ratio = float(options.get("band_rt60_ratio", 0.5))
    if count is None or count < 1:
        raise ConfigError("--count must be at least 1")
    if jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    if mode not in ("energetic", "pressure"):
        raise ConfigError(f"unknown mode {mode!r}")
    if bands not in (None, "octave", "third-octave"):
        raise ConfigError(f"unknown band layout {bands!r}")
    if not 0 < ratio <= 1:
        raise ConfigError("band_rt60_ratio must lie in (0, 1]")
    try:
        sample(ranges, 0)
    except UnsatisfiableRanges as exc:
        raise ConfigError(f"UnsatisfiableRanges: {exc}") from exc

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create {out_dir}: {exc}") from exc
    logger.info("generating %d RIRs into %s with %d job(s)", count, out_dir, jobs)
    tasks = [(i, ranges, str(out_dir), mode, bands, ratio, validate) for i in range(count)]
    try:
        rows = _map(_generate_item, tasks, jobs)
    except UnsatisfiableRanges as exc:
        raise ConfigError(f"UnsatisfiableRanges: {exc}") from exc

    failed = [r for r in rows if r["status"] != "ok"]
    for r in failed:
        logger.error("item %d (seed %s) failed: %s", r["index"], r.get("seed"), r["error"])
    manifest = {"tool_version": __version__, "ranges": ranges.to_dict(), "mode": mode,
                "bands": bands, "count": count,
                "items": [{k: r.get(k) for k in ("index", "seed", "file", "status", "error")
                           if r.get(k) is not None} for r in rows]}
    dump_json(manifest, out_dir / "manifest.json")
    summary = {"count": count, "succeeded": count - len(failed), "failed": len(failed)}
    if validate:
        summary["validation"] = validation_summary(rows)
        dump_json(summary, out_dir / "summary.json")
        if args.plot:
            from .plotting import plot_validation
            plot_validation([r for r in rows if r["status"] == "ok"], out_dir / "validation.png")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_FAILED if failed else EXIT_OK


def _wav_files(directory) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.suffix.lower() == ".wav")


def pairing_index(seed: int, item: int, n_rirs: int) -> int:
    """RIR assigned to the ``item``-th input file (inputs sorted by name)."""
    return seeding.derive_seed(seed, item) % n_rirs


def cmd_augment(args) -> int:
    for d in (args.input, args.rirs):
        if not Path(d).is_dir():
            raise ConfigError(f"{d} is not a directory")
    inputs, rirs = _wav_files(args.input), _wav_files(args.rirs)
    if not inputs:
        raise ConfigError(f"no WAV files in {args.input}")
    if not rirs:
        raise ConfigError(f"no WAV files in {args.rirs}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rir_cache = {}
    pairs, failures = [], 0
    for j, path in enumerate(inputs):
        k = pairing_index(args.seed, j, len(rirs))
        out_name = f"{path.stem}__rir{k}.wav"
        entry = {"input": path.name, "rir": rirs[k].name, "rir_index": k, "output": out_name}
        try:
            if k not in rir_cache:
                rir_cache[k] = read_wav(rirs[k])
            wet, gain = reverberate(read_wav(path), rir_cache[k], always_normalize=args.normalize)
            write_wav(wet, out_dir / out_name, args.format)
            entry.update(status="ok", applied_gain_db=gain)
        except (RirError, OSError, ValueError) as exc:
            failures += 1
            logger.warning("skipping %s: %s", path.name, exc)
            entry.update(status="skipped", error=f"{type(exc).__name__}: {exc}")
            entry.pop("output")
        pairs.append(entry)
    dump_json({"tool_version": __version__, "seed": args.seed,
               "rule": "rir_index = splitmix64(seed, input_position) mod n_rirs; inputs and RIRs sorted by file name",
               "n_rirs": len(rirs), "pairs": pairs}, out_dir / "pairing.json")
    print(json.dumps({"inputs": len(inputs), "augmented": len(inputs) - failures,
                      "skipped": failures}, sort_keys=True))
    return EXIT_FAILED if failures else EXIT_OK


def _load_rir(path: Path, force_energetic: bool) -> PressureImpulseResponse:
    audio = read_wav(path)
    energetic = force_energetic
    side = sidecar_path(path)
    if not energetic and side.exists():
        try:
            energetic = read_sidecar(side).mode == "energetic"
        except (OSError, KeyError, ValueError, TypeError):
            logger.warning("%s: unreadable sidecar, treating samples as pressure", path)
    if energetic:
        if np.any(audio.samples < 0):
            raise ValueError("energetic response has negative samples")
        return PressureImpulseResponse(np.sqrt(audio.samples), audio.sample_rate)
    return PressureImpulseResponse(audio.samples, audio.sample_rate)


MEASURE_COLUMNS = ("file", "rt60", "edt", "drr", "itdg", "fit_quality", "errors")


def cmd_measure(args) -> int:
    results = []
    if args.plot_dir:
        Path(args.plot_dir).mkdir(parents=True, exist_ok=True)
    for raw in args.paths:
        path = Path(raw)
        row = {"file": str(path)}
        try:
            rir = _load_rir(path, args.energetic)
            measured = measure_all(rir)
            row.update(measured.to_dict())
            if args.plot_dir:
                from .plotting import plot_decay
                plot_decay(rir.amplitudes, schroeder_curve(rir),
                           Path(args.plot_dir) / f"{path.stem}_decay.png", title=path.name,
                           rt60=measured.rt60, edt=measured.edt)
        except (RirError, OSError, ValueError) as exc:
            row["errors"] = {"file": f"{type(exc).__name__}: {exc}"}
            row["failed"] = True
        results.append(row)
    if args.json:
        print(json.dumps(results, indent=2, sort_keys=True))
    else:
        print("\t".join(MEASURE_COLUMNS))
        for row in results:
            cells = []
            for col in MEASURE_COLUMNS:
                value = row.get(col)
                if col == "errors":
                    cells.append("; ".join(f"{k}={v}" for k, v in sorted((value or {}).items())))
                elif isinstance(value, float):
                    cells.append(f"{value:.6g}")
                else:
                    cells.append("" if value is None else str(value))
            print("\t".join(cells))
    if results and all(r.get("failed") for r in results):
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochastic-rir", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a dataset of RIR WAVs with JSON sidecars")
    g.add_argument("--count", type=int, help="number of RIRs")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    g.add_argument("--seed", type=int, help="base seed (overrides the config)")
    g.add_argument("--mode", choices=("energetic", "pressure"))
    g.add_argument("--bands", choices=("octave", "third-octave"))
    g.add_argument("--validate", action="store_true", help="measure every RIR and summarize errors")
    g.add_argument("--plot", action="store_true", help="with --validate, also write validation.png")
    g.add_argument("--jobs", type=int, help="worker processes")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("augment", help="convolve a corpus with generated RIRs")
    a.add_argument("--in", dest="input", required=True, help="directory of input WAVs")
    a.add_argument("--rirs", required=True, help="directory of RIR WAVs")
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--format", choices=("pcm16", "float32"), default="pcm16")
    a.add_argument("--normalize", action="store_true",
                   help="peak-normalize every output to -1 dBFS, not only clipping ones")
    a.set_defaults(func=cmd_augment)

    m = sub.add_parser("measure", help="estimate RT60, EDT, DRR and ITDG of RIR files")
    m.add_argument("paths", nargs="+")
    m.add_argument("--json", action="store_true", help="print JSON instead of a TSV table")
    m.add_argument("--energetic", action="store_true",
                   help="treat samples as energies even without a sidecar")
    m.add_argument("--plot-dir", help="write a decay-curve figure per file here")
    m.set_defaults(func=cmd_measure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
