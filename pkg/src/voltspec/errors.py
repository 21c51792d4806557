"""Exception hierarchy shared by all voltspec modules."""

from __future__ import annotations


class VoltspecError(Exception):
    """Base class for every error raised by this package."""


class KernelValidationError(VoltspecError, ValueError):
    """Kernel terms or power-law parameters violate their invariants."""


class DivergentSeriesError(VoltspecError, ValueError):
    """A formula needs a convergent series (e.g. the sum of amplitudes) but it diverges."""


class PoleProximityError(VoltspecError, ValueError):
    """Evaluation point lies too close to a pole ``-gamma_k`` of the Laplace transform."""

    def __init__(self, lam: complex, k: int, distance: float):
        self.lam = lam
        self.k = k
        self.distance = distance
        super().__init__(
            f"lambda={lam!r} is within {distance:.3e} of the pole -gamma_{k + 1}"
        )


class SectorError(VoltspecError, ValueError):
    """Argument of lambda falls outside the sector |arg lambda| < pi - delta."""


class BracketError(VoltspecError, RuntimeError):
    """No sign change could be established on a root bracket."""

    def __init__(self, message: str, lo: float, hi: float, f_lo: float, f_hi: float):
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi
        super().__init__(
            f"{message}: f({lo!r})={f_lo!r}, f({hi!r})={f_hi!r}"
        )


class ContractionFailed(VoltspecError, RuntimeError):
    """The fixed-point map for the complex pair is not contracting."""

    def __init__(self, message: str, tau: complex, iterations: int, ratio: float):
        self.tau = tau
        self.iterations = iterations
        self.ratio = ratio
        super().__init__(f"{message} (iterations={iterations}, ratio={ratio:.3g})")


class NoConvergence(VoltspecError, RuntimeError):
    """Newton iteration stopped without meeting the residual tolerance."""

    def __init__(self, message: str, last: complex, residual: float):
        self.last = last
        self.residual = residual
        super().__init__(f"{message}: last={last!r}, residual={residual:.3e}")


class NotUnstable(VoltspecError, ValueError):
    """Requested a positive real root for a mode that is not unstable."""


class OracleError(VoltspecError, RuntimeError):
    """Dense eigenvalue solve failed or the problem exceeds the oracle's size cap."""


class StepSizeError(VoltspecError, ValueError):
    """Time step violates the explicit-integrator stability heuristic."""


class InsufficientPeaks(VoltspecError, RuntimeError):
    """Energy envelope has too few local maxima to fit a decay rate."""


class ConfigError(VoltspecError, ValueError):
    """Malformed command-line or JSON configuration."""
