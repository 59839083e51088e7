"""Experiments built on the sensitivity sweeps.

* degree vs. response-magnitude correlation and its sign crossover,
* finite-size scaling of the first-mode spectral weight ``w_1``,
* peak counting on the mean response,
* the two-way sensitivity-class verdict.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks

from .errors import ScalingError, UndefinedStatisticError
from .netgen import GraphSpec, WeightedGraph, derive_seed, generate, interaction_matrix
from .sensitivity import FrequencySweep
from .spectral import top_weight

TIE_RTOL = 1e-12


def _fmt(x) -> str:
    return format(float(x), ".17g")


# -- correlation ----------------------------------------------------------------

def tied_ranks(x, rtol: float = TIE_RTOL) -> np.ndarray:
    """1-based ranks with ties averaged.

    Values closer than ``rtol * max|x|`` count as tied, so that entries
    equal by symmetry but differing in the last bits share a rank.
    """
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    tol = rtol * np.max(np.abs(xs)) if xs.size else 0.0
    group = np.concatenate(([0], np.cumsum(np.diff(xs) > tol)))
    pos = np.arange(1, x.size + 1, dtype=float)
    mean_rank = np.bincount(group, weights=pos) / np.bincount(group)
    ranks = np.empty_like(pos)
    ranks[order] = mean_rank[group]
    return ranks


def _corr_rows(x, y):
    """Pearson correlation of vector ``x`` with each row of ``y``."""
    xc = x - x.mean()
    yc = y - y.mean(axis=1, keepdims=True)
    den = np.linalg.norm(xc) * np.linalg.norm(yc, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (yc @ xc) / den
    return np.clip(r, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class CorrelationCurve:
    """Per-frequency Spearman and Pearson correlation of degree vs ``|S_N|``."""

    omegas: np.ndarray
    spearman: np.ndarray
    pearson: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["omega", "spearman", "pearson"])
        for row in zip(self.omegas, self.spearman, self.pearson):
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "omegas": self.omegas.tolist(),
            "spearman": self.spearman.tolist(),
            "pearson": self.pearson.tolist(),
        }


def degree_correlation(graph: WeightedGraph, sweep: FrequencySweep) -> CorrelationCurve:
    """Correlate node degree with node-response magnitude at every frequency."""
    deg = graph.degree.astype(float)
    if np.all(deg == deg[0]):
        raise UndefinedStatisticError("degree sequence is constant; correlation undefined")
    if sweep.node_response is None:
        raise ValueError("sweep carries no node responses")
    mag = np.abs(sweep.node_response)
    if mag.shape[1] != graph.n:
        raise ValueError("sweep and graph sizes differ")
    rank_deg = tied_ranks(deg)
    rank_mag = np.array([tied_ranks(row) for row in mag])
    return CorrelationCurve(
        np.array(sweep.omegas),
        _corr_rows(rank_deg, rank_mag),
        _corr_rows(deg, mag),
    )


def find_crossover(curve: CorrelationCurve, persistence: int = 5) -> float | None:
    """Lowest frequency where Spearman turns from positive to negative for good.

    The sign change must be followed by at least ``persistence`` consecutive
    negative grid points. The crossing is located by linear interpolation
    between the bracketing grid points; ``None`` when there is none.
    """
    s = np.asarray(curve.spearman)
    w = np.asarray(curve.omegas)
    for j in range(1, len(s) - persistence + 1):
        if s[j - 1] > 0 and np.all(s[j:j + persistence] < 0):
            t = s[j - 1] / (s[j - 1] - s[j])
            return float(w[j - 1] + t * (w[j] - w[j - 1]))
    return None


# -- scaling --------------------------------------------------------------------

def ols(x, y):
    """Least-squares line; returns ``(slope, intercept, r2)``.

    ``r2`` is NaN when ``y`` is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return slope, intercept, r2


@dataclass(frozen=True, eq=False)
class ScalingResult:
    """Per-size trials of ``w_1`` and the log-log fit over sizes.

    In ``"er"`` mode the fit is ``log(1 - median w_1)`` against ``log N``;
    in ``"sf"`` mode it is ``log(median w_1)``. Medians skip excluded trials.
    """

    mode: str
    sizes: np.ndarray
    w1: np.ndarray
    lambda1: np.ndarray
    medians: np.ndarray
    slope: float
    intercept: float
    r2: float
    excluded: int = 0
    spec: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "sizes": [int(n) for n in self.sizes],
            "w1_medians": self.medians.tolist(),
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": None if np.isnan(self.r2) else self.r2,
            "excluded": self.excluded,
            "w1": self.w1.tolist(),
            "lambda1": self.lambda1.tolist(),
            "spec": self.spec,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["n", "trial", "w1", "one_minus_w1", "lambda1"])
        for a, n in enumerate(self.sizes):
            for t in range(self.w1.shape[1]):
                w1 = self.w1[a, t]
                w.writerow([int(n), t, _fmt(w1), _fmt(1.0 - w1), _fmt(self.lambda1[a, t])])
        return buf.getvalue()


def trial_seed(master: int, n: int, trial: int) -> int:
    return derive_seed(master, n, trial)


def _one_trial(template, n, trial):
    spec = replace(template, n=int(n), seed=trial_seed(template.seed, n, trial))
    return top_weight(interaction_matrix(generate(spec)))


def weight_scaling(
    template: GraphSpec,
    sizes,
    trials: int,
    mode: str,
    workers: int = 1,
) -> ScalingResult:
    """Measure ``w_1`` over a family of graph sizes and fit a power law.

    Parameters
    ----------
    template : GraphSpec
        Family recipe; ``n`` is replaced by each size and the seed of trial
        ``t`` at size ``n`` is ``derive_seed(template.seed, n, t)``.
    sizes : sequence of int
        At least three strictly increasing sizes.
    trials : int
        Trials per size, at least five.
    mode : {"er", "sf"}
        Which quantity to regress, see :class:`ScalingResult`.
    workers : int
        Threads used to run trials; results do not depend on it.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if mode not in ("er", "sf"):
        raise ValueError(f"mode must be 'er' or 'sf', got {mode!r}")
    if sizes.size < 3 or np.any(np.diff(sizes) <= 0):
        raise ScalingError("need at least 3 strictly increasing sizes")
    if trials < 5:
        raise ScalingError("need at least 5 trials per size")

    jobs = [(n, t) for n in sizes for t in range(trials)]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(lambda job: _one_trial(template, *job), jobs))
    else:
        out = [_one_trial(template, *job) for job in jobs]
    lam1 = np.array([o[0] for o in out]).reshape(len(sizes), trials)
    w1 = np.array([o[1] for o in out]).reshape(len(sizes), trials)

    excluded = 0
    medians = np.empty(len(sizes))
    for a, n in enumerate(sizes):
        row = w1[a]
        if mode == "er":
            keep = (1.0 - row) > TIE_RTOL
            excluded += int(np.count_nonzero(~keep))
            if not keep.any():
                raise ScalingError(
                    f"every trial at n={n} has w_1 = 1, so log(1 - w_1) is undefined "
                    f"({excluded} trial(s) excluded so far)"
                )
            row = row[keep]
        medians[a] = np.median(row)
    y = np.log(1.0 - medians) if mode == "er" else np.log(medians)
    slope, intercept, r2 = ols(np.log(sizes), y)
    spec = {k: v for k, v in vars(template).items() if v is not None}
    return ScalingResult(mode, sizes, w1, lam1, medians, slope, intercept, r2, excluded, spec)


# -- peaks and classes ------------------------------------------------------------

def peak_indices(sweep: FrequencySweep, prominence_db: float = 3.0) -> np.ndarray:
    """Grid indices of the prominent maxima of ``|mean response|`` in dB."""
    db = 20.0 * np.log10(np.abs(sweep.mean_response))
    idx, _ = find_peaks(db, prominence=prominence_db)
    return idx


def count_peaks(sweep: FrequencySweep, prominence_db: float = 3.0) -> int:
    """Number of local maxima standing at least ``prominence_db`` above their base."""
    if len(sweep.omegas) < 3:
        raise ValueError("need at least 3 grid points")
    return int(len(peak_indices(sweep, prominence_db)))


def residue_band(sweep: FrequencySweep, prominence_db: float = 3.0) -> int:
    """Longest run of grid points above the first peak where the residue dominates."""
    peaks = peak_indices(sweep, prominence_db)
    start = int(peaks[0]) + 1 if len(peaks) else int(np.argmax(np.abs(sweep.mean_response))) + 1
    dom = np.abs(sweep.residue_part[start:]) > np.abs(sweep.first_mode[start:])
    best = run = 0
    for d in dom:
        run = run + 1 if d else 0
        best = max(best, run)
    return best


DEFAULT_THRESHOLDS = {"slope_max": -0.2, "r2_min": 0.8, "band_min": 10}


@dataclass(frozen=True)
class ClassVerdict:
    """``cls`` is ``"I"``, ``"II"`` or ``"inconclusive"``."""

    cls: str
    evidence: dict

    def to_json(self) -> str:
        return json.dumps({"class": self.cls, "evidence": self.evidence})


def verdict_from_evidence(evidence: dict, thresholds: dict | None = None) -> str:
    """Apply the class rules to stored evidence.

    Class II needs a sf-mode fit with slope at most ``slope_max`` and
    ``r2 >= r2_min``, and a residue-dominated band of ``band_min`` points.
    Class I needs ``w_1`` medians non-decreasing in N and a single peak.
    """
    th = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    r2 = evidence["r2"]
    if (
        evidence["mode"] == "sf"
        and evidence["slope"] <= th["slope_max"]
        and r2 is not None
        and r2 >= th["r2_min"]
        and evidence["residue_band"] >= th["band_min"]
    ):
        return "II"
    med = evidence["w1_medians"]
    increasing = all(b - a >= -TIE_RTOL for a, b in zip(med, med[1:]))
    if increasing and evidence["peak_count"] == 1:
        return "I"
    return "inconclusive"


def classify(
    scaling: ScalingResult,
    sweep: FrequencySweep,
    thresholds: dict | None = None,
    prominence_db: float = 3.0,
) -> ClassVerdict:
    """Sensitivity class of a graph family from its scaling fit and one sweep."""
    evidence = {
        "mode": scaling.mode,
        "slope": scaling.slope,
        "r2": None if np.isnan(scaling.r2) else scaling.r2,
        "w1_medians": scaling.medians.tolist(),
        "peak_count": count_peaks(sweep, prominence_db),
        "residue_band": residue_band(sweep, prominence_db),
        "thresholds": {**DEFAULT_THRESHOLDS, **(thresholds or {})},
    }
    return ClassVerdict(verdict_from_evidence(evidence, thresholds), evidence)
