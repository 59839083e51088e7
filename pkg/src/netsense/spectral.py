"""Symmetric eigendecomposition of the interaction matrix and spectral weights.

The weight of eigenvector ``phi_i`` is ``<1, phi_i>**2 / N``; the weights sum
to one because the eigenvectors form an orthonormal basis, and the residue is
the total weight of every eigenvector but the first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConvergenceError
from .netgen import InteractionMatrix

# Relative gap below which two eigenvalues are treated as one eigenspace.
TIE_RTOL = 1e-11


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of ``A`` in descending eigenvalue order.

    ``eigenvectors[:, i]`` is the unit eigenvector for ``eigenvalues[i]``,
    signed so that its entry sum is non-negative.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    weights: np.ndarray
    residue: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def to_dict(self, eigenvectors: bool = False) -> dict:
        out = {
            "eigenvalues": self.eigenvalues.tolist(),
            "weights": self.weights.tolist(),
            "residue": float(self.residue),
        }
        if eigenvectors:
            out["eigenvectors"] = self.eigenvectors.T.tolist()
        return out

    def to_json(self, eigenvectors: bool = False) -> str:
        return json.dumps(self.to_dict(eigenvectors), indent=1)


class WeightSummary(NamedTuple):
    w1: float
    residue: float
    lambda_max: float
    lambda_min: float


def _align_eigenspace(vecs):
    """Rotate an eigenspace basis so only its first vector overlaps with 1.

    Uses a Householder reflection mapping ``e_1`` onto the normalized
    projection of the all-ones vector; the remaining columns then have zero
    entry sum. This makes the per-vector weights basis-independent.
    """
    c = vecs.sum(axis=0)
    norm = np.linalg.norm(c)
    if norm == 0.0:
        return vecs
    u = c / norm
    u[0] -= 1.0
    unorm = np.linalg.norm(u)
    if unorm < 1e-15:
        return vecs
    u /= unorm
    return vecs - 2.0 * np.outer(vecs @ u, u)


def decompose(A: InteractionMatrix) -> SpectralDecomposition:
    """Full dense eigendecomposition of ``A``.

    Eigenvalues are returned in descending order. Numerically tied
    eigenvalues (relative gap below ``TIE_RTOL``) share their mean value and
    the eigenspace basis is rotated so that the all-ones projection lies on a
    single vector; within a tie, vectors are ordered by descending weight and
    then by position.
    """
    a = A.entries
    n = a.shape[0]
    try:
        lam, vecs = scipy.linalg.eigh(a, driver="evd")
    except (np.linalg.LinAlgError, ValueError) as exc:
        resid = float("nan")
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}", resid) from exc
    lam = lam[::-1].copy()
    vecs = vecs[:, ::-1].copy()

    tol = TIE_RTOL * max(1.0, float(np.max(np.abs(lam))) if n else 1.0)
    start = 0
    order = []
    for stop in range(1, n + 1):
        if stop < n and lam[start] - lam[stop] <= tol:
            continue
        if stop - start > 1:
            vecs[:, start:stop] = _align_eigenspace(vecs[:, start:stop])
            lam[start:stop] = lam[start:stop].mean()
            w_block = vecs[:, start:stop].sum(axis=0) ** 2
            order.extend(start + np.argsort(-w_block, kind="stable"))
        else:
            order.append(start)
        start = stop
    order = np.asarray(order, dtype=np.int64)
    lam, vecs = lam[order], vecs[:, order]

    sums = vecs.sum(axis=0)
    vecs[:, sums < 0] *= -1.0
    weights = vecs.sum(axis=0) ** 2 / n
    residue = float(weights[1:].sum())

    if not np.all(np.isfinite(lam)):
        raise ConvergenceError("non-finite eigenvalues", float("inf"))
    for arr in (lam, vecs, weights):
        arr.setflags(write=False)
    return SpectralDecomposition(lam, vecs, weights, residue)


def weight_summary(dec: SpectralDecomposition) -> WeightSummary:
    """First-mode weight, residue and the spectrum's extremes."""
    return WeightSummary(
        float(dec.weights[0]),
        float(dec.residue),
        float(dec.eigenvalues[0]),
        float(dec.eigenvalues[-1]),
    )


SPARSE_MIN_N = 256
SPARSE_MAX_DENSITY = 0.1


def _top_two_sparse(a):
    """Two largest eigenpairs by Lanczos, ascending like ``eigh``.

    The start vector is fixed so results are reproducible; it is perturbed
    away from the ones vector, which is an exact eigenvector of regular graphs.
    """
    n = a.shape[0]
    v0 = 1.0 + 0.5 * np.random.default_rng(0).random(n)
    lam, vecs = scipy.sparse.linalg.eigsh(
        scipy.sparse.csr_matrix(a), k=2, which="LA", v0=v0, tol=0.0
    )
    order = np.argsort(lam)
    return lam[order], vecs[:, order]


def top_weight(A: InteractionMatrix) -> tuple[float, float]:
    """``(lambda_1, w_1)`` without computing the whole eigenbasis.

    Large sparse matrices go through Lanczos, the rest through a dense
    subset solve.
    Falls back to :func:`decompose` when the top eigenvalue is degenerate,
    since ``w_1`` then depends on the eigenspace alignment.
    """
    a = A.entries
    n = a.shape[0]
    if n < 3:
        s = weight_summary(decompose(A))
        return s.lambda_max, s.w1
    lam = None
    if n >= SPARSE_MIN_N and np.count_nonzero(a) <= SPARSE_MAX_DENSITY * n * n:
        try:
            lam, vecs = _top_two_sparse(a)
        except scipy.sparse.linalg.ArpackError:
            lam = None
    if lam is None:
        lam, vecs = scipy.linalg.eigh(a, subset_by_index=[n - 2, n - 1], driver="evr")
    tol = TIE_RTOL * max(1.0, abs(float(lam[1])))
    if lam[1] - lam[0] <= tol:
        s = weight_summary(decompose(A))
        return s.lambda_max, s.w1
    return float(lam[1]), float(vecs[:, 1].sum() ** 2 / n)
