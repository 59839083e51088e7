"""Minimal SVG figures: Bode plot, correlation curve, scaling fit.

SVG output is made reproducible by fixing matplotlib's hash salt and
dropping the date metadata.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SVG = {"svg.hashsalt": "netsense", "svg.fonttype": "none"}


def _save(fig, path):
    with matplotlib.rc_context(_SVG):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _db(z):
    return 20.0 * np.log10(np.abs(z))


def bode_svg(sweep, path, title=None, reference=None):
    """Magnitude (dB) and phase (deg) of the mean response against log omega.

    The first-mode and residue contributions are overlaid on the magnitude
    panel. ``reference`` is an optional complex array (e.g. ``f/(1-f)``)
    drawn dashed.
    """
    w = sweep.omegas
    fig, (ax_m, ax_p) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
    ax_m.semilogx(w, _db(sweep.mean_response), color="k", label="mean")
    ax_m.semilogx(w, _db(sweep.first_mode), color="tab:blue", label="first mode")
    ax_m.semilogx(w, _db(sweep.residue_part), color="tab:purple", label="residue")
    if reference is not None:
        ax_m.semilogx(w, _db(reference), "--", color="gray", label="reference")
    ax_m.set_ylabel("magnitude [dB]")
    ax_m.legend(fontsize="small")
    ax_p.semilogx(w, np.degrees(np.unwrap(np.angle(sweep.mean_response))), color="k")
    ax_p.set_ylabel("phase [deg]")
    ax_p.set_xlabel("omega [rad/s]")
    if title:
        ax_m.set_title(title)
    _save(fig, path)


def correlation_svg(curve, path, crossover=None):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogx(curve.omegas, curve.spearman, label="Spearman")
    ax.semilogx(curve.omegas, curve.pearson, label="Pearson")
    ax.axhline(0.0, color="gray", lw=0.5)
    if crossover is not None:
        ax.axvline(crossover, color="tab:red", ls="--", lw=0.8)
    ax.set_xlabel("omega [rad/s]")
    ax.set_ylabel("corr(degree, |S_N|)")
    ax.legend(fontsize="small")
    _save(fig, path)


def scaling_svg(result, path):
    n = result.sizes
    y = 1.0 - result.w1 if result.mode == "er" else result.w1
    med = 1.0 - result.medians if result.mode == "er" else result.medians
    fig, ax = plt.subplots(figsize=(5, 4))
    for a, size in enumerate(n):
        ax.loglog(np.full(y.shape[1], size), np.clip(y[a], 1e-300, None), ".", color="0.6")
    ax.loglog(n, med, "o", color="k")
    ax.loglog(n, np.exp(result.intercept) * n.astype(float) ** result.slope, "-",
              label=f"slope {result.slope:.3f}")
    ax.set_xlabel("N")
    ax.set_ylabel("1 - w_1" if result.mode == "er" else "w_1")
    ax.legend(fontsize="small")
    _save(fig, path)
