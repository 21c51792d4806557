"""Per-mode symbol ``l(lam) = lam**2 + a**2 - a**(2*theta) * K^(lam)``.

Equivalently ``lam**2 + a**2 * f(lam)`` with ``f = 1 - K^/T`` and mode
threshold ``T = a**(2*(1-theta))``.  The cleared-denominator polynomial
``p(lam) = l(lam) * prod_k (lam + gamma_k)`` is provided for the oracle.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import KernelValidationError, OracleError
from .kernel import POLE_GUARD, ExponentialKernel, laplace, laplace_deriv

DEFAULT_MAX_N = 64
OVERFLOW_LIMIT = 1e300


@dataclass(frozen=True)
class Mode:
    a: float
    theta: float

    def __post_init__(self):
        if not np.isfinite(self.a) or self.a < 1:
            raise KernelValidationError(f"mode eigenvalue a must be >= 1 (got {self.a!r})")
        if not (0.0 <= self.theta <= 1.0):
            raise KernelValidationError(f"theta must lie in [0, 1] (got {self.theta!r})")

    @property
    def threshold(self) -> float:
        """``a**(2(1-theta))``, the value ``sum c_k/gamma_k`` must stay below."""
        return self.a ** (2.0 * (1.0 - self.theta))

    @property
    def coupling(self) -> float:
        """``a**(2 theta)``, the weight of the memory term."""
        return self.a ** (2.0 * self.theta)


@dataclass(frozen=True)
class SymbolPolynomial:
    """Monic coefficients in descending powers, degree ``N + 2``."""

    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, lam: complex) -> complex:
        return complex(np.polyval(self.coeffs, lam))


def max_poly_terms() -> int:
    raw = os.environ.get("VOLTSPEC_MAX_N")
    if raw is None:
        return DEFAULT_MAX_N
    try:
        value = int(raw)
    except ValueError:
        raise OracleError(f"VOLTSPEC_MAX_N={raw!r} is not an integer") from None
    if value < 1:
        raise OracleError("VOLTSPEC_MAX_N must be positive")
    return value


def eval_ell(mode: Mode, kernel: ExponentialKernel, lam: complex,
             pole_guard: float = POLE_GUARD) -> complex:
    lam = complex(lam)
    return lam * lam + mode.a**2 - mode.coupling * laplace(kernel, lam, pole_guard)


def eval_ell_deriv(mode: Mode, kernel: ExponentialKernel, lam: complex,
                   pole_guard: float = POLE_GUARD) -> complex:
    lam = complex(lam)
    return 2.0 * lam - mode.coupling * laplace_deriv(kernel, lam, pole_guard)


def poly_coeffs(mode: Mode, kernel: ExponentialKernel, max_n: int | None = None) -> SymbolPolynomial:
    """Expand ``(lam^2 + a^2) prod (lam + g_k) - a^(2 theta) sum_k c_k prod_{j!=k} (lam + g_j)``.

    Factors are convolved in ascending-gamma order and the memory sum is
    subtracted last.
    """
    max_n = max_poly_terms() if max_n is None else max_n
    N = kernel.N
    if N > max_n:
        raise OracleError(f"polynomial route is capped at N={max_n} terms (got {N})")
    g = kernel.gamma
    # prefix[k] = prod_{j<k} (lam + g_j), suffix[k] = prod_{j>=k} (lam + g_j)
    with np.errstate(over="ignore", invalid="ignore"):
        prefix = [np.array([1.0])]
        for gk in g:
            prefix.append(np.convolve(prefix[-1], [1.0, gk]))
        suffix = [np.array([1.0])] * (N + 1)
        for k in range(N - 1, -1, -1):
            suffix[k] = np.convolve(suffix[k + 1], [1.0, g[k]])
        full = np.convolve([1.0, 0.0, mode.a**2], prefix[N])
        memory = np.zeros(N)
        for k in range(N):
            memory += kernel.c[k] * np.convolve(prefix[k], suffix[k + 1])
        coeffs = full.copy()
        coeffs[3:] -= mode.coupling * memory
    if not np.all(np.isfinite(coeffs)) or np.max(np.abs(coeffs)) > OVERFLOW_LIMIT \
            or np.max(np.abs(full)) > OVERFLOW_LIMIT:
        raise OracleError("polynomial coefficients overflow; kernel rates are too spread")
    coeffs[0] = 1.0
    return SymbolPolynomial(coeffs)
