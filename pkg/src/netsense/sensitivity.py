"""Node and mean sensitivity of the coupled system on the imaginary axis.

With identical initial conditions (or identical forcing) on every node the
per-node response is ``S_N(iw) = (g(iw) I - A)^{-1} 1`` and the network
response is its average. Two independent routes are provided: a dense
complex LU solve, and the spectral sum ``sum_i w_i / (g(iw) - lambda_i)``.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .dynamics import NodalDynamics, is_stable
from .errors import NearPoleError, UnstableSystemError
from .netgen import InteractionMatrix
from .spectral import SpectralDecomposition

COND_MAX = 1e12
POLE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly increasing positive angular frequencies."""

    omegas: np.ndarray

    def __post_init__(self):
        w = np.array(self.omegas, dtype=float).reshape(-1)
        if w.size == 0:
            raise ValueError("frequency grid is empty")
        if np.any(w <= 0) or np.any(np.diff(w) <= 0):
            raise ValueError("grid frequencies must be positive and strictly increasing")
        w.setflags(write=False)
        object.__setattr__(self, "omegas", w)

    def __len__(self):
        return len(self.omegas)


def log_grid(lo: float, hi: float, num: int = 400) -> FrequencyGrid:
    return FrequencyGrid(np.logspace(np.log10(lo), np.log10(hi), num))


def default_grid(dyn: NodalDynamics, num: int = 400) -> FrequencyGrid:
    """``num`` log-spaced points over ``[1e-2, 1e2] * omega_n``."""
    wn = dyn.natural_frequency
    return log_grid(1e-2 * wn, 1e2 * wn, num)


def node_sensitivity(A: InteractionMatrix, dyn: NodalDynamics, omega: float) -> np.ndarray:
    """Solve ``(g(iw) I - A) x = 1`` by complex LU factorization.

    Raises :class:`NearPoleError` when the 1-norm condition estimate exceeds
    ``1e12`` or the solve misses its residual bound.
    """
    n = A.n
    m = -A.entries.astype(complex)
    m[np.diag_indices(n)] += dyn.g(1j * omega)
    anorm = np.linalg.norm(m, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or not rcond * COND_MAX > 1.0:
        raise NearPoleError(omega, f"condition estimate {1.0 / max(rcond, 1e-300):.3g}")
    ones = np.ones(n, dtype=complex)
    x = scipy.linalg.lu_solve((lu, piv), ones, check_finite=False)
    resid = np.linalg.norm(m @ x - ones)
    if not resid <= 1e-9 * np.sqrt(n):
        raise NearPoleError(omega, f"residual {resid:.3g}")
    return x


def mean_sensitivity_direct(A: InteractionMatrix, dyn: NodalDynamics, omega: float) -> complex:
    """Average of :func:`node_sensitivity`."""
    return complex(node_sensitivity(A, dyn, omega).mean())


class MeanResponse(NamedTuple):
    total: complex
    first_mode: complex
    residue_part: complex


def _mode_responses(dec, dyn, s):
    g = np.asarray(dyn.g(s))
    d = g[..., None] - dec.eigenvalues
    near = np.abs(d) <= POLE_RTOL * np.maximum(1.0, np.abs(g))[..., None]
    return d, near.any(axis=-1)


def mean_sensitivity_spectral(
    dec: SpectralDecomposition, dyn: NodalDynamics, omega: float
) -> MeanResponse:
    """Spectral sum ``sum_i w_i / (g(iw) - lambda_i)`` split into first mode and rest.

    The residue part is summed explicitly over ``i >= 2``.
    """
    d, near = _mode_responses(dec, dyn, 1j * omega)
    if near:
        raise NearPoleError(omega, "g(i omega) coincides with an eigenvalue")
    h = 1.0 / d
    w = dec.weights
    first = complex(w[0] * h[0])
    rest = complex(np.dot(w[1:], h[1:]))
    total = complex(np.dot(w, h))
    return MeanResponse(total, first, rest)


@dataclass(frozen=True, eq=False)
class FrequencySweep:
    """Responses on a frequency grid; rows follow ``grid.omegas``.

    ``node_response`` is ``(len(grid), N)`` or ``None`` when node responses
    were not requested. Frequencies dropped as near-poles are listed in
    ``skipped`` and are absent from ``grid``.
    """

    grid: FrequencyGrid
    node_response: np.ndarray | None
    mean_response: np.ndarray
    first_mode: np.ndarray
    residue_part: np.ndarray
    skipped: tuple = ()

    @property
    def omegas(self) -> np.ndarray:
        return self.grid.omegas

    def to_csv(self, fh=None, node_columns: bool = False) -> str | None:
        """Write the sweep as CSV; returns the text when ``fh`` is ``None``."""
        own = fh is None
        if own:
            fh = io.StringIO()
        header = [
            "omega", "re_mean", "im_mean", "mag_mean_db", "phase_mean_deg",
            "re_first", "im_first", "re_residue", "im_residue",
        ]
        if node_columns:
            if self.node_response is None:
                raise ValueError("sweep has no node responses")
            n = self.node_response.shape[1]
            for i in range(n):
                header += [f"mag_db_{i}", f"phase_deg_{i}"]
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        mean = self.mean_response
        mag = 20.0 * np.log10(np.abs(mean))
        phase = np.degrees(np.angle(mean))
        for r, w in enumerate(self.omegas):
            row = [
                w, mean[r].real, mean[r].imag, mag[r], phase[r],
                self.first_mode[r].real, self.first_mode[r].imag,
                self.residue_part[r].real, self.residue_part[r].imag,
            ]
            if node_columns:
                x = self.node_response[r]
                pairs = np.column_stack((20.0 * np.log10(np.abs(x)), np.degrees(np.angle(x))))
                row += list(pairs.ravel())
            writer.writerow([format(float(v), ".17g") for v in row])
        if own:
            return fh.getvalue()
        return None


def check_stability(dec: SpectralDecomposition, dyn: NodalDynamics) -> None:
    """Raise :class:`UnstableSystemError` unless every eigenmode is stable."""
    lam1 = float(dec.eigenvalues[0])
    st = is_stable(dyn, lam1)
    if not st.stable:
        raise UnstableSystemError(lam1, st.margin)
    if dyn.order == "custom":
        lam_n = float(dec.eigenvalues[-1])
        st = is_stable(dyn, lam_n)
        if not st.stable:
            raise UnstableSystemError(lam1, st.margin)


def sweep(
    A: InteractionMatrix,
    dec: SpectralDecomposition,
    dyn: NodalDynamics,
    grid: FrequencyGrid,
    nodes: str | None = "spectral",
) -> FrequencySweep:
    """Evaluate mean and node responses over ``grid``.

    Parameters
    ----------
    A, dec
        Interaction matrix and its decomposition.
    dyn
        Nodal dynamics; the coupled system must be stable.
    grid
        Frequencies to evaluate.
    nodes : {"spectral", "direct", None}
        How to compute per-node responses: through the eigenbasis
        (``V diag(h) V^T 1``), by one LU solve per frequency, or not at all.
    """
    if nodes not in ("spectral", "direct", None):
        raise ValueError(f"unknown node method {nodes!r}")
    check_stability(dec, dyn)
    s = 1j * grid.omegas
    d, near = _mode_responses(dec, dyn, s)
    skipped = tuple(float(w) for w in grid.omegas[near])
    keep = ~near
    omegas = grid.omegas[keep]
    h = 1.0 / d[keep]
    w = dec.weights
    total = h @ w
    first = h[:, 0] * w[0]
    rest = h[:, 1:] @ w[1:]

    node = None
    if nodes == "spectral":
        vecs = dec.eigenvectors
        c = vecs.sum(axis=0)
        node = (h.real * c) @ vecs.T + 1j * ((h.imag * c) @ vecs.T)
    elif nodes == "direct":
        rows, ok = [], []
        for i, om in enumerate(omegas):
            try:
                rows.append(node_sensitivity(A, dyn, om))
                ok.append(i)
            except NearPoleError:
                skipped += (float(om),)
        ok = np.array(ok, dtype=int)
        omegas, total, first, rest = omegas[ok], total[ok], first[ok], rest[ok]
        node = np.array(rows).reshape(len(ok), A.n)
        skipped = tuple(sorted(skipped))
    return FrequencySweep(FrequencyGrid(omegas), node, total, first, rest, skipped)
