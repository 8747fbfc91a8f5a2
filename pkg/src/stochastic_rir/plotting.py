"""Report figures rendered straight to image files (no GUI backend)."""

from __future__ import annotations

import numpy as np
from matplotlib.figure import Figure

from .metrics import EDT_RANGE, T30, SchroederCurve

FIGSIZE = (7.0, 4.3)


def _save(fig: Figure, path):
    fig.tight_layout()
    # No timestamps or version strings, so reruns give identical files.
    fig.savefig(path, dpi=110, metadata={"Software": None})


def plot_decay(amplitudes: np.ndarray, curve: SchroederCurve, path, title: str = "",
               rt60: float | None = None, edt: float | None = None):
    """Squared response and its Schroeder curve in dB, with the fitted slopes."""
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    t = curve.times
    energy = np.asarray(amplitudes, dtype=np.float64) ** 2
    peak = energy.max() if energy.size and energy.max() > 0 else 1.0
    nz = np.flatnonzero(energy)
    # Markers, not a line: sparse responses are mostly exact zeros.
    ax.plot(t[nz], 10 * np.log10(energy[nz] / peak), ".", ms=1.5, color="0.6", label="energy")
    ax.plot(t, curve.levels, lw=1.5, color="C0", label="Schroeder curve")
    for value, (upper, lower), color, name in ((rt60, T30, "C3", "T30 fit"),
                                               (edt, EDT_RANGE, "C2", "EDT fit")):
        if value is None:
            continue
        sel = np.flatnonzero((curve.levels <= upper) & (curve.levels >= lower))
        if sel.size:
            t0 = t[sel[0]]
            tt = np.array([t0, t0 + value])
            ax.plot(tt, curve.levels[sel[0]] - 60 * (tt - t0) / value, "--", color=color,
                    lw=1, label=f"{name}: {value * 1000:.0f} ms")
    ax.set_ylim(-80, 5)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("level [dB]")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_validation(rows: list[dict], path):
    """Requested against measured RT60, DRR and ITDG for a generated batch.

    ``rows`` hold ``requested_*`` and ``measured_*`` keys for rt60, drr, itdg.
    """
    fig = Figure(figsize=(11.0, 3.8))
    for i, (name, unit, scale) in enumerate((("rt60", "s", 1.0), ("drr", "dB", 1.0),
                                             ("itdg", "ms", 1000.0))):
        ax = fig.add_subplot(1, 3, i + 1)
        pairs = [(r[f"requested_{name}"], r[f"measured_{name}"]) for r in rows
                 if r.get(f"measured_{name}") is not None]
        if pairs:
            req, meas = (np.array(v) * scale for v in zip(*pairs))
            ax.scatter(req, meas, s=8, alpha=0.7)
            lo, hi = min(req.min(), meas.min()), max(req.max(), meas.max())
            ax.plot([lo, hi], [lo, hi], color="k", lw=0.8)
        ax.set_xlabel(f"requested {name.upper()} [{unit}]")
        ax.set_ylabel(f"measured {name.upper()} [{unit}]")
        ax.grid(alpha=0.3)
    _save(fig, path)
