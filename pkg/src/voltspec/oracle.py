"""Independent reference roots: companion matrix, augmented ODE matrix, Vieta identities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import OracleError
from .kernel import ExponentialKernel, ksum
from .symbol import Mode, SymbolPolynomial, max_poly_terms, poly_coeffs

MATCH_TOL = 1e-8


@dataclass(frozen=True)
class AugmentedMatrix:
    """System matrix for the state ``(u, v, w_1, ..., w_N)``."""

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _sort_roots(z: np.ndarray) -> list[complex]:
    return sorted((complex(x) for x in z), key=lambda w: (w.real, w.imag))


def _dense_eigvals(M: np.ndarray) -> np.ndarray:
    try:
        balanced, _ = scipy.linalg.matrix_balance(M, permute=True, scale=True)
        return np.linalg.eigvals(balanced)
    except np.linalg.LinAlgError as exc:
        raise OracleError(f"eigenvalue iteration failed: {exc}") from None


def _check_dim(dim: int) -> None:
    cap = max_poly_terms() + 2
    if dim > cap:
        raise OracleError(f"dense oracle is capped at dimension {cap} (got {dim})")


def companion_roots(poly: SymbolPolynomial | np.ndarray) -> list[complex]:
    """All roots of a monic polynomial, sorted by (Re, Im)."""
    coeffs = np.asarray(poly.coeffs if isinstance(poly, SymbolPolynomial) else poly, dtype=float)
    if coeffs[0] != 1.0:
        raise OracleError("companion route expects a monic polynomial")
    n = len(coeffs) - 1
    _check_dim(n)
    if n == 0:
        return []
    C = np.zeros((n, n))
    C[0, :] = -coeffs[1:]
    C[np.arange(1, n), np.arange(n - 1)] = 1.0
    return _sort_roots(_dense_eigvals(C))


def augmented_matrix(mode: Mode, kernel: ExponentialKernel) -> AugmentedMatrix:
    N = kernel.N
    M = np.zeros((N + 2, N + 2))
    M[0, 1] = 1.0
    M[1, 0] = -mode.a**2
    M[1, 2:] = mode.coupling * kernel.c
    M[2:, 0] = 1.0
    M[np.arange(2, N + 2), np.arange(2, N + 2)] = -kernel.gamma
    return AugmentedMatrix(M)


def matrix_eigs(M: AugmentedMatrix | np.ndarray) -> list[complex]:
    A = np.asarray(M.entries if isinstance(M, AugmentedMatrix) else M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise OracleError("matrix must be square")
    _check_dim(A.shape[0])
    return _sort_roots(_dense_eigvals(A))


def oracle_roots(mode: Mode, kernel: ExponentialKernel) -> list[complex]:
    return companion_roots(poly_coeffs(mode, kernel))


def vieta_check(poly: SymbolPolynomial, roots) -> tuple[float, float]:
    """Relative residuals of the root sum and product against the coefficients."""
    roots = np.asarray(list(roots), dtype=complex)
    coeffs = poly.coeffs
    n = len(coeffs) - 1
    if roots.size != n:
        raise ValueError(f"expected {n} roots, got {roots.size}")
    s = complex(ksum(roots.real), ksum(roots.imag))
    sum_res = abs(s + coeffs[1]) / max(float(np.sum(np.abs(roots))), abs(coeffs[1]), 1e-300)
    prod = complex(np.prod(roots))
    target = (-1) ** n * coeffs[-1]
    prod_res = abs(prod - target) / max(abs(target), 1e-300)
    return sum_res, prod_res


def vieta_identities(mode: Mode, kernel: ExponentialKernel, roots) -> tuple[float, float]:
    """Same residuals measured against the kernel data directly.

    Sum of all ``N + 2`` zeros is ``-sum gamma_k``; their product is
    ``(-1)^N a^2 prod gamma_k (1 - S/T)``.
    """
    roots = np.asarray(list(roots), dtype=complex)
    N = kernel.N
    if roots.size != N + 2:
        raise ValueError(f"expected {N + 2} roots, got {roots.size}")
    s = complex(ksum(roots.real), ksum(roots.imag))
    g_sum = ksum(kernel.gamma)
    sum_res = abs(s + g_sum) / max(float(np.sum(np.abs(roots))), g_sum)
    target = (-1.0) ** N * mode.a**2 * (1.0 - kernel.partial_S() / mode.threshold)
    if target == 0.0:
        return sum_res, math.inf
    # scale each factor by the geometric mean magnitude to avoid overflow
    logs = np.log(kernel.gamma)
    m = math.exp((ksum(logs) + math.log(abs(target))) / (N + 2))
    ratio = complex(np.prod(roots / m))
    expected = math.copysign(1.0, target) * math.prod(kernel.gamma / m) * abs(target) / m**2
    prod_res = abs(ratio - expected) / abs(expected)
    return sum_res, prod_res


def match_roots(ref, other) -> list[tuple[complex, complex]]:
    """Greedy nearest-neighbour pairing of two root lists."""
    remaining = list(other)
    pairs = []
    for z in sorted(ref, key=lambda w: (w.real, w.imag)):
        if not remaining:
            break
        j = min(range(len(remaining)), key=lambda i: abs(remaining[i] - z))
        pairs.append((z, remaining.pop(j)))
    return pairs


def _max_rel_distance(ref, other) -> float:
    if len(ref) != len(other):
        return math.inf
    pairs = match_roots(ref, other)
    return max((abs(x - y) / (1.0 + abs(x)) for x, y in pairs), default=0.0)


@dataclass
class CrosscheckReport:
    analytic: list[complex]
    companion: list[complex]
    eigen: list[complex]
    dist_companion: float
    dist_eigen: float
    dist_oracles: float
    tol: float = MATCH_TOL
    status: dict = field(default_factory=dict)

    @property
    def max_distance(self) -> float:
        return max(self.dist_companion, self.dist_eigen, self.dist_oracles)

    @property
    def passed(self) -> bool:
        return self.max_distance <= self.tol


def crosscheck(mode: Mode, kernel: ExponentialKernel, perturb: float = 0.0,
               tol: float = MATCH_TOL) -> CrosscheckReport:
    """Compare analytic-route zeros with both dense oracles.

    ``perturb`` scales the constant coefficient of the companion polynomial by
    ``1 + perturb``; it exists as a negative control.
    """
    from .roots import full_slice

    slc = full_slice(mode, kernel)
    analytic = slc.zeros()
    poly = poly_coeffs(mode, kernel)
    if perturb:
        coeffs = poly.coeffs.copy()
        coeffs[-1] *= 1.0 + perturb
        poly = SymbolPolynomial(coeffs)
    comp = companion_roots(poly)
    eig = matrix_eigs(augmented_matrix(mode, kernel))
    return CrosscheckReport(
        analytic=sorted(analytic, key=lambda w: (w.real, w.imag)),
        companion=comp,
        eigen=eig,
        dist_companion=_max_rel_distance(analytic, comp),
        dist_eigen=_max_rel_distance(analytic, eig),
        dist_oracles=_max_rel_distance(comp, eig),
        tol=tol,
        status=dict(slc.status),
    )
