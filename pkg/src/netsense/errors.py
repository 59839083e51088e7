"""Exception types raised across the package."""

from __future__ import annotations


class NetsenseError(Exception):
    """Base class for all package errors."""


class GraphError(NetsenseError, ValueError):
    """Invalid graph specification, edge list or graph content."""


class PoleError(NetsenseError, ArithmeticError):
    """A transfer function was evaluated at (or numerically at) a pole."""


class NearPoleError(PoleError):
    """The linear system at frequency ``omega`` is numerically singular."""

    def __init__(self, omega, detail=""):
        self.omega = omega
        msg = f"near-pole at omega={omega!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class UnstableSystemError(NetsenseError):
    """The coupled system has a root with non-negative real part."""

    def __init__(self, lambda_1, margin):
        self.lambda_1 = lambda_1
        self.margin = margin
        super().__init__(
            f"unstable coupled system: lambda_1={lambda_1:.12g}, margin={margin:.6g}"
        )


class ConvergenceError(NetsenseError):
    """Eigendecomposition did not converge."""

    def __init__(self, message, residual=float("nan")):
        self.residual = residual
        super().__init__(f"{message} (attained residual {residual:.3g})")


class DivergenceError(NetsenseError):
    """Time integration blew up."""


class UndefinedStatisticError(NetsenseError, ValueError):
    """A statistic is undefined for the given data (e.g. constant degrees)."""


class ScalingError(NetsenseError, ValueError):
    """A scaling fit could not be carried out."""
