"""Time-domain check of the frequency-domain sensitivities.

The coupled system ``g(d/dt) x = A x + u(t) 1`` with ``u = a sin(w t)`` is
integrated with fixed-step classic RK4, and a sinusoid is fitted to the
tail of each trajectory. For the canonical forms the forcing enters with the
``k wn**2`` gain of ``g``, so the fitted gain and phase should reproduce
``S_N(iw)`` node by node.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import NodalDynamics, is_stable
from .errors import DivergenceError, UnstableSystemError
from .netgen import InteractionMatrix

FIT_FRACTION = 0.25
DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class SimConfig:
    """Step size, horizon, sinusoidal forcing and initial state."""

    dt: float
    t_end: float
    omega: float
    amplitude: float = 1.0
    x0: tuple | None = None
    xdot0: tuple | None = None

    def validate(self, dyn: NodalDynamics) -> None:
        period = 2 * math.pi / self.omega
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 20 * period * (1 - 1e-12):
            raise ValueError(f"t_end must cover 20 forcing periods ({20 * period:.6g})")
        if self.dt > period / 50 * (1 + 1e-12):
            raise ValueError(f"dt must resolve the forcing: dt <= {period / 50:.6g}")
        wn = dyn.natural_frequency
        if self.dt > 2 * math.pi / wn / 50 * (1 + 1e-12):
            raise ValueError(f"dt must resolve omega_n: dt <= {2 * math.pi / wn / 50:.6g}")


def auto_config(
    dyn: NodalDynamics,
    omega: float,
    lambda_max: float = 0.0,
    amplitude: float = 1.0,
    steps_per_period: int = 64,
    settle: float = 1e-4,
) -> SimConfig:
    """Pick ``dt`` and a horizon long enough for transients to decay.

    The slowest transient decays like ``exp(-margin t)``, with ``margin`` the
    stability margin at ``lambda_max``; the horizon is chosen so that it has
    shrunk by ``settle`` when the fit window starts.
    """
    wn = dyn.natural_frequency
    dt = 2 * math.pi / max(omega, wn) / steps_per_period
    margin = is_stable(dyn, lambda_max).margin
    if not margin > 0:
        raise UnstableSystemError(lambda_max, margin)
    t_settle = math.log(1.0 / settle) / margin / (1.0 - FIT_FRACTION)
    t_end = max(20 * 2 * math.pi / omega, t_settle)
    t_end = math.ceil(t_end / dt) * dt
    return SimConfig(dt, t_end, omega, amplitude)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples ``x[r, i]`` of node ``i`` at time ``t[r]``."""

    t: np.ndarray
    x: np.ndarray
    omega: float
    amplitude: float = 1.0

    def to_csv(self, decimate: int = 1) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["t"] + [f"x_{i}" for i in range(self.x.shape[1])])
        for r in range(0, len(self.t), max(1, int(decimate))):
            w.writerow([format(float(v), ".17g") for v in (self.t[r], *self.x[r])])
        return buf.getvalue()


def _rhs_matrix(A, dyn):
    """``(M, b)`` with ``dy/dt = M y + b u(t)`` for the stacked state."""
    n = A.n
    wn, k = dyn.omega_n, dyn.k
    gain = k * wn**2
    if dyn.order == 1:
        m = gain * A.entries - wn**2 * np.eye(n)
        return m, np.full(n, gain)
    m = np.zeros((2 * n, 2 * n))
    m[:n, n:] = np.eye(n)
    m[n:, :n] = gain * A.entries - wn**2 * np.eye(n)
    m[n:, n:] = -2.0 * dyn.zeta * wn * np.eye(n)
    b = np.zeros(2 * n)
    b[n:] = gain
    return m, b


def simulate_forced(A: InteractionMatrix, dyn: NodalDynamics, cfg: SimConfig) -> Trajectory:
    """Integrate the forced network with classic fourth-order Runge-Kutta.

    Only the canonical first- and second-order forms are supported.
    """
    if dyn.order not in (1, 2):
        raise ValueError("simulate_forced supports canonical first/second order only")
    cfg.validate(dyn)
    n = A.n
    m, b = _rhs_matrix(A, dyn)
    y = np.zeros(m.shape[0])
    if cfg.x0 is not None:
        y[:n] = cfg.x0
    if cfg.xdot0 is not None:
        if dyn.order == 1:
            raise ValueError("xdot0 is meaningless for first-order dynamics")
        y[n:] = cfg.xdot0

    h, om, amp = cfg.dt, cfg.omega, cfg.amplitude
    steps = int(round(cfg.t_end / h))
    t = np.arange(steps + 1) * h
    u = amp * np.sin(om * t)
    u_half = amp * np.sin(om * (t[:-1] + 0.5 * h))
    out = np.empty((steps + 1, n))
    out[0] = y[:n]
    limit = DIVERGENCE_FACTOR * abs(amp)
    for r in range(steps):
        k1 = m @ y + b * u[r]
        k2 = m @ (y + 0.5 * h * k1) + b * u_half[r]
        k3 = m @ (y + 0.5 * h * k2) + b * u_half[r]
        k4 = m @ (y + h * k3) + b * u[r + 1]
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[r + 1] = y[:n]
        if r % 256 == 0 and not np.max(np.abs(y[:n])) <= limit:
            raise DivergenceError(f"|x| exceeded {limit:.3g} at t={t[r + 1]:.6g}")
    if not np.max(np.abs(out[-1])) <= limit:
        raise DivergenceError(f"|x| exceeded {limit:.3g} at t={t[-1]:.6g}")
    return Trajectory(t, out, om, amp)


class SteadyState(NamedTuple):
    amplitude: np.ndarray
    phase: np.ndarray
    residual: np.ndarray


def steady_state(traj: Trajectory, omega: float | None = None) -> SteadyState:
    """Fit ``a sin(wt) + b cos(wt)`` to the last quarter of each trajectory.

    Returns per-node gain ``sqrt(a**2 + b**2) / forcing amplitude``, phase
    ``atan2(b, a)`` in radians (the argument of the matching transfer
    function) and the RMS fit residual relative to the fitted amplitude.
    """
    omega = traj.omega if omega is None else omega
    t = traj.t
    if t[-1] - t[0] < 20 * 2 * math.pi / omega * (1 - 1e-9):
        raise ValueError("trajectory must cover at least 20 forcing periods")
    start = np.searchsorted(t, t[-1] - FIT_FRACTION * (t[-1] - t[0]))
    tt = t[start:]
    basis = np.column_stack((np.sin(omega * tt), np.cos(omega * tt)))
    coef, *_ = np.linalg.lstsq(basis, traj.x[start:], rcond=None)
    a, b = coef
    fit_amp = np.hypot(a, b)
    resid = traj.x[start:] - basis @ coef
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.sqrt(np.mean(resid**2, axis=0)) / fit_amp
    if np.any(rel > 0.05):
        warnings.warn(
            f"fit residual up to {np.nanmax(rel):.1%} of amplitude; not at steady state",
            RuntimeWarning,
            stacklevel=2,
        )
    return SteadyState(fit_amp / abs(traj.amplitude), np.arctan2(b, a), rel)
