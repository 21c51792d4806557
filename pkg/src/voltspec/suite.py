"""Seeded random kernels and modes for property runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import ExponentialKernel, make_exponential
from .symbol import Mode

THETAS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class Case:
    kernel: ExponentialKernel
    mode: Mode


def random_rates(rng: np.random.Generator, n: int, g_min: float, g_max: float,
                 spread: float = 1e3, min_ratio: float = 1.5) -> np.ndarray:
    """``n`` increasing rates with ``gamma_1`` in ``[g_min, g_max]`` and
    ``gamma_N/gamma_1 <= spread``.

    Consecutive rates differ by at least the factor ``min_ratio`` (capped so
    the spread still fits).  Tightly clustered rates make the monomial
    coefficients of the cleared polynomial ill-conditioned, which limits the
    companion route rather than the symbol itself.
    """
    g1 = np.exp(rng.uniform(np.log(g_min), np.log(g_max)))
    if n == 1:
        return np.array([g1])
    max_span = np.log(spread)
    min_ratio = min(min_ratio, spread ** (1.0 / (n - 1)))
    min_span = (n - 1) * np.log(min_ratio)
    span = max(min_span, rng.uniform(min_span, max(min_span, max_span)))
    steps = rng.dirichlet(np.ones(n - 1)) * (span - min_span) + np.log(min_ratio)
    return g1 * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))


def random_kernel(rng: np.random.Generator, n: int, S_target: float,
                  g_min: float = 0.1, g_max: float = 10.0, spread: float = 1e3,
                  min_ratio: float = 1.5) -> ExponentialKernel:
    """Kernel with ``sum c_k/gamma_k == S_target`` and random weights."""
    g = random_rates(rng, n, g_min, g_max, spread, min_ratio)
    w = rng.dirichlet(np.ones(n))
    c = S_target * w * g
    return make_exponential(zip(c, g))


def stable_suite(seed: int = 0, count: int = 100, max_terms: int = 12) -> list[Case]:
    """Kernels satisfying ``S < 1`` paired with modes ``a`` in ``[1, 1e3]``."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        n = int(rng.integers(1, max_terms + 1))
        S = rng.uniform(0.05, 0.95)
        kernel = random_kernel(rng, n, S)
        a = float(10 ** rng.uniform(0.0, 3.0))
        theta = float(rng.choice(THETAS))
        cases.append(Case(kernel, Mode(a, theta)))
    return cases


def mixed_suite(seed: int = 1, count: int = 100, max_terms: int = 12,
                margin: float = 1e-6) -> list[Case]:
    """Stable and unstable cases, all at least ``margin`` away from the threshold."""
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        n = int(rng.integers(1, max_terms + 1))
        a = float(10 ** rng.uniform(0.0, 1.0))
        theta = float(rng.choice(THETAS))
        T = Mode(a, theta).threshold
        S = T * float(10 ** rng.uniform(-1.0, 1.0))
        if abs(S - T) <= margin * max(1.0, T):
            continue
        kernel = random_kernel(rng, n, S, g_min=0.1, g_max=10.0, spread=1e2)
        cases.append(Case(kernel, Mode(a, theta)))
    return cases


def probe_suite(seed: int = 2, count: int = 20, max_terms: int = 12) -> list[ExponentialKernel]:
    """Kernels with rates in ``[0.1, 10]``.

    ``|lam + gamma|`` grows monotonically along the probe rays only once the
    radius exceeds about ``0.71 gamma``; small rates keep radii from 10 on in
    that range.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_terms + 1))
        out.append(random_kernel(rng, n, rng.uniform(0.05, 0.95), g_min=0.1, g_max=0.5, spread=20.0,
                                 min_ratio=1.2))
    return out
