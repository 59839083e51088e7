"""Nodal dynamics ``g(s)``, its transfer functions and stability.

Every node obeys ``g(d/dt) x_i = sum_j a_ij x_j + input``, with ``g`` a real
polynomial in ``s``. The isolated node has transfer function ``f = 1/g``; the
``i``-th eigenmode of the coupled network has ``h_i = f / (1 - lambda_i f)``,
which we always evaluate as ``1 / (g - lambda_i)``.

Two canonical, gain-normalized forms are provided::

    first order   g(s) = (s + wn**2) / (k wn**2)
    second order  g(s) = (s**2 + 2 zeta wn s + wn**2) / (k wn**2)

so that ``f(0) = k`` in both cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import PoleError

POLE_ATOL = 1e-300
STABILITY_TOL = 1e-9


@dataclass(frozen=True)
class NodalDynamics:
    """Polynomial ``g`` with coefficients in ascending powers of ``s``.

    ``order`` is ``1`` or ``2`` for the canonical forms (then ``omega_n``,
    ``k`` and, for order 2, ``zeta`` are set) and ``"custom"`` otherwise.
    """

    g_coeffs: tuple
    order: int | str = "custom"
    omega_n: float | None = None
    zeta: float | None = None
    k: float | None = None

    def __post_init__(self):
        c = tuple(float(x) for x in self.g_coeffs)
        if len(c) < 2:
            raise ValueError("g must have degree >= 1")
        if c[-1] == 0.0:
            raise ValueError("leading coefficient of g must be nonzero")
        if not all(math.isfinite(x) for x in c):
            raise ValueError("g coefficients must be finite")
        object.__setattr__(self, "g_coeffs", c)
        if self.order in (1, 2):
            if not (self.omega_n and self.omega_n > 0 and self.k and self.k > 0):
                raise ValueError("canonical forms need omega_n > 0 and k > 0")
            if self.order == 2 and not (self.zeta and self.zeta > 0):
                raise ValueError("second-order form needs zeta > 0")
            ref = _canonical_coeffs(self.order, self.omega_n, self.zeta, self.k)
            if len(ref) != len(c) or any(
                abs(x - y) > 1e-12 * max(1.0, abs(y)) for x, y in zip(c, ref)
            ):
                raise ValueError("g_coeffs disagree with the canonical parameters")
        elif self.order != "custom":
            raise ValueError(f"order must be 1, 2 or 'custom', got {self.order!r}")

    @property
    def degree(self) -> int:
        return len(self.g_coeffs) - 1

    @property
    def natural_frequency(self) -> float:
        """``omega_n`` for canonical forms, 1 otherwise (sets default grids)."""
        return self.omega_n if self.omega_n else 1.0

    def g(self, s):
        """Evaluate ``g`` by Horner's rule; works elementwise on arrays."""
        s = np.asarray(s, dtype=complex)
        acc = np.zeros_like(s)
        for c in reversed(self.g_coeffs):
            acc = acc * s + c
        return acc if acc.ndim else complex(acc)

    def with_gain(self, k: float) -> "NodalDynamics":
        if self.order == 1:
            return first_order(self.omega_n, k)
        if self.order == 2:
            return second_order(self.omega_n, self.zeta, k)
        raise ValueError("with_gain needs a canonical form")

    def to_dict(self) -> dict:
        if self.order == 1:
            return {"order": 1, "omega_n": self.omega_n, "k": self.k}
        if self.order == 2:
            return {"order": 2, "omega_n": self.omega_n, "zeta": self.zeta, "k": self.k}
        return {"order": "custom", "g_coeffs": list(self.g_coeffs)}

    @classmethod
    def from_dict(cls, d: dict) -> "NodalDynamics":
        """Inverse of :meth:`to_dict`; ``{"g_coeffs": [...]}`` alone is custom."""
        order = d.get("order", "custom" if "g_coeffs" in d else None)
        if order in (1, "1"):
            return first_order(float(d["omega_n"]), float(d["k"]))
        if order in (2, "2"):
            return second_order(float(d["omega_n"]), float(d["zeta"]), float(d["k"]))
        if order == "custom":
            return cls(tuple(d["g_coeffs"]))
        raise ValueError(f"cannot build dynamics from {d!r}")


def _canonical_coeffs(order, omega_n, zeta, k):
    if not (omega_n > 0 and k > 0):
        raise ValueError(f"canonical forms need omega_n > 0 and k > 0 (got {omega_n}, {k})")
    if order == 2 and not (zeta is not None and zeta > 0):
        raise ValueError(f"second-order form needs zeta > 0 (got {zeta})")
    scale = k * omega_n**2
    if order == 1:
        return (omega_n**2 / scale, 1.0 / scale)
    return (omega_n**2 / scale, 2.0 * zeta * omega_n / scale, 1.0 / scale)


def first_order(omega_n: float, k: float) -> NodalDynamics:
    """``g(s) = (s + omega_n**2) / (k omega_n**2)``."""
    return NodalDynamics(_canonical_coeffs(1, omega_n, None, k), 1, omega_n, None, k)


def second_order(omega_n: float, zeta: float, k: float) -> NodalDynamics:
    """``g(s) = (s**2 + 2 zeta omega_n s + omega_n**2) / (k omega_n**2)``."""
    return NodalDynamics(_canonical_coeffs(2, omega_n, zeta, k), 2, omega_n, zeta, k)


def custom(g_coeffs) -> NodalDynamics:
    return NodalDynamics(tuple(g_coeffs))


def f_eval(dyn: NodalDynamics, s):
    """Isolated-node transfer function ``1 / g(s)``."""
    gs = dyn.g(s)
    if np.any(np.abs(gs) <= POLE_ATOL):
        raise PoleError(f"g(s) = 0 at s = {s!r}")
    return 1.0 / gs


def h_eval(dyn: NodalDynamics, lam: float, s):
    """Eigenmode transfer function ``f / (1 - lam f)``, computed as ``1/(g - lam)``."""
    d = dyn.g(s) - lam
    if np.any(np.abs(d) <= POLE_ATOL):
        raise PoleError(f"g(s) = lambda = {lam!r} at s = {s!r}")
    return 1.0 / d


def closed_loop_limit_eval(dyn: NodalDynamics, s):
    """``f / (1 - f) = 1 / (g - 1)``: the mean response of an unstructured network."""
    return h_eval(dyn, 1.0, s)


class Stability(NamedTuple):
    stable: bool
    margin: float


def closed_loop_roots(dyn: NodalDynamics, lam: float) -> np.ndarray:
    """Roots of ``g(s) - lam``."""
    c = list(dyn.g_coeffs)
    c[0] -= lam
    if len(c) == 2:
        return np.array([-c[0] / c[1]], dtype=complex)
    if len(c) == 3:
        a, b, c0 = c[2], c[1], c[0]
        disc = np.sqrt(complex(b * b - 4 * a * c0))
        # numerically stable quadratic roots
        q = -0.5 * (b + (disc if b >= 0 else -disc))
        r1 = q / a
        r2 = c0 / q if q != 0 else -b / a - r1
        return np.array([r1, r2], dtype=complex)
    return np.roots(c[::-1]).astype(complex)


def is_stable(dyn: NodalDynamics, lam: float) -> Stability:
    """Whether every root of ``g(s) - lam`` has real part below ``-1e-9``.

    ``margin`` is minus the largest real part. Marginal systems (roots within
    the tolerance of the imaginary axis) count as unstable.
    """
    roots = closed_loop_roots(dyn, lam)
    margin = float(-np.max(roots.real))
    if dyn.degree <= 2:
        # Routh-Hurwitz: all coefficients of g - lam share the leading sign.
        c = np.array(dyn.g_coeffs)
        c[0] -= lam
        hurwitz = bool(np.all(c * np.sign(c[-1]) > 0))
        return Stability(hurwitz and margin > STABILITY_TOL, margin)
    return Stability(margin > STABILITY_TOL, margin)


def max_stable_gain(omega_n: float, zeta: float, lambda_max: float, safety_c: float) -> float:
    """Gain ``k = (1 - c) / lambda_max`` that keeps the coupled system stable.

    Pass ``zeta=None`` for first-order dynamics.
    """
    if not lambda_max > 0:
        raise ValueError(f"lambda_max must be positive, got {lambda_max}")
    if not 0 < safety_c < 1:
        raise ValueError(f"safety_c must be in (0, 1), got {safety_c}")
    k = (1.0 - safety_c) / lambda_max
    dyn = first_order(omega_n, k) if zeta is None else second_order(omega_n, zeta, k)
    if not is_stable(dyn, lambda_max).stable:
        raise ArithmeticError("gain from max_stable_gain failed the stability check")
    return k


def er_limit_model(dyn: NodalDynamics) -> NodalDynamics:
    """Second-order model whose transfer function is ``f / (1 - f)``.

    Parameters map as ``omega_n -> omega_n sqrt(1-k)``,
    ``zeta -> zeta / sqrt(1-k)`` and ``k -> k / (1-k)``.
    """
    if dyn.order != 2:
        raise ValueError("er_limit_model needs canonical second-order dynamics")
    k = dyn.k
    if not k < 1:
        raise ValueError(f"the limit is unstable for k >= 1 (k={k})")
    r = math.sqrt(1.0 - k)
    return second_order(dyn.omega_n * r, dyn.zeta / r, k / (1.0 - k))


def er_limit_inverse(dyn: NodalDynamics) -> NodalDynamics:
    """Undo :func:`er_limit_model`."""
    if dyn.order != 2:
        raise ValueError("er_limit_inverse needs canonical second-order dynamics")
    k = dyn.k / (1.0 + dyn.k)
    r = math.sqrt(1.0 - k)
    return second_order(dyn.omega_n / r, dyn.zeta * r, k)
