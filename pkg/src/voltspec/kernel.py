"""Exponential-sum memory kernels ``K(t) = sum_k c_k exp(-gamma_k t)``.

A kernel is stored as two read-only arrays sorted by ascending decay rate,
plus bounds on the part of the series that truncation dropped.  Power-law
families ``c_k = A/k**alpha``, ``gamma_k = B*k**beta`` are realised as finite
kernels whose tails are bounded by the matching integrals.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    ConfigError,
    KernelValidationError,
    PoleProximityError,
    SectorError,
)

POLE_GUARD = 1e-12
DEFAULT_DELTA = 0.1


def ksum(values) -> float:
    """Exactly rounded sum; independent of summation order and platform."""
    return math.fsum(np.asarray(values, dtype=float).tolist())


def csum(values) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(ksum(values.real), ksum(values.imag))


@dataclass(frozen=True)
class PowerLawFamily:
    """Idealised power-law coefficients ``c_k = A/k**alpha``, ``gamma_k = B*k**beta``."""

    A: float
    B: float
    alpha: float
    beta: float
    N: int

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0):
            raise KernelValidationError("A and B must be positive")
        if not (self.alpha > 0 and self.beta > 0):
            raise KernelValidationError("alpha and beta must be positive")
        if self.alpha + self.beta <= 1:
            raise KernelValidationError(
                f"alpha + beta must exceed 1 (got {self.alpha + self.beta:g})"
            )
        if int(self.N) != self.N or self.N < 1:
            raise KernelValidationError("truncation N must be a positive integer")

    @property
    def r(self) -> float:
        return (self.alpha + self.beta - 1.0) / self.beta

    @property
    def amplitudes_summable(self) -> bool:
        """Whether ``sum c_k`` converges (``alpha > 1``)."""
        return self.alpha > 1

    def with_N(self, N: int) -> "PowerLawFamily":
        return PowerLawFamily(self.A, self.B, self.alpha, self.beta, int(N))

    def tail_S(self, N: int | None = None) -> float:
        """Integral bound on ``sum_{k>N} c_k/gamma_k``."""
        N = self.N if N is None else N
        p = self.alpha + self.beta - 1.0
        return (self.A / self.B) * N ** (-p) / p

    def tail_C(self, N: int | None = None) -> float:
        """Integral bound on ``sum_{k>N} c_k``; infinite when ``alpha <= 1``."""
        N = self.N if N is None else N
        if self.alpha <= 1:
            return math.inf
        return self.A * N ** (1.0 - self.alpha) / (self.alpha - 1.0)


@dataclass(frozen=True)
class ExponentialKernel:
    c: np.ndarray
    gamma: np.ndarray
    tail_S: float = 0.0
    tail_C: float = 0.0
    family: PowerLawFamily | None = field(default=None, compare=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        g = np.array(self.gamma, dtype=float)
        if c.ndim != 1 or c.shape != g.shape or c.size == 0:
            raise KernelValidationError("need matching nonempty 1-d amplitude/rate arrays")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(g)):
            raise KernelValidationError("kernel terms must be finite")
        if np.any(c <= 0):
            raise KernelValidationError("amplitudes c_k must be positive")
        if np.any(g <= 0):
            raise KernelValidationError("decay rates gamma_k must be positive")
        if np.any(np.diff(g) <= 0):
            raise KernelValidationError("decay rates must be strictly increasing")
        if self.tail_S < 0 or self.tail_C < 0:
            raise KernelValidationError("tail bounds must be nonnegative")
        c.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", g)

    @property
    def N(self) -> int:
        return int(self.c.size)

    @property
    def terms(self) -> list[tuple[float, float]]:
        return [(float(ck), float(gk)) for ck, gk in zip(self.c, self.gamma)]

    @property
    def is_exact(self) -> bool:
        return self.tail_S == 0.0 and self.tail_C == 0.0

    def partial_S(self) -> float:
        return ksum(self.c / self.gamma)

    def partial_C(self) -> float:
        return ksum(self.c)

    def S_interval(self) -> tuple[float, float]:
        lo = self.partial_S()
        return lo, lo + self.tail_S

    def total_C(self) -> float:
        """Upper bound on ``sum c_k`` including the truncated tail."""
        return self.partial_C() + self.tail_C


@dataclass(frozen=True)
class ConditionReport:
    S: tuple[float, float]
    cond_a: bool
    cond_b: bool | None
    gap_sup: float
    gap_unbounded_plausible: bool


def make_exponential(terms: Iterable[Sequence[float]]) -> ExponentialKernel:
    """Build an exact finite kernel from ``(c_k, gamma_k)`` pairs.

    Terms are sorted by decay rate; duplicates are rejected rather than merged.
    """
    terms = [tuple(map(float, t)) for t in terms]
    if not terms:
        raise KernelValidationError("kernel needs at least one term")
    for t in terms:
        if len(t) != 2:
            raise KernelValidationError(f"term {t!r} is not a (c, gamma) pair")
    terms.sort(key=lambda t: t[1])
    c, g = zip(*terms)
    return ExponentialKernel(np.array(c), np.array(g))


def from_power_law(family: PowerLawFamily) -> ExponentialKernel:
    k = np.arange(1, family.N + 1, dtype=float)
    c = family.A / k**family.alpha
    g = family.B * k**family.beta
    return ExponentialKernel(
        c, g, tail_S=family.tail_S(), tail_C=family.tail_C(), family=family
    )


def truncation_for_tail(family: PowerLawFamily, tol: float, n_min: int = 1) -> int:
    """Smallest N with ``tail_S(N) <= tol`` (and ``N >= n_min``)."""
    p = family.alpha + family.beta - 1.0
    n = math.ceil((family.A / (family.B * p * tol)) ** (1.0 / p))
    n = max(n, n_min, 1)
    while family.tail_S(n) > tol:
        n += 1
    return n


def eval_time(kernel: ExponentialKernel, t: float) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return ksum(kernel.c * np.exp(-kernel.gamma * t))


def _check_poles(kernel: ExponentialKernel, lam: complex, pole_guard: float) -> np.ndarray:
    d = lam + kernel.gamma
    dist = np.abs(d)
    bad = dist < pole_guard * kernel.gamma
    if np.any(bad):
        k = int(np.argmax(bad))
        raise PoleProximityError(lam, k, float(dist[k]))
    return d


def laplace(kernel: ExponentialKernel, lam: complex, pole_guard: float = POLE_GUARD) -> complex:
    """``K^(lam) = sum_k c_k / (lam + gamma_k)`` for the stored terms."""
    lam = complex(lam)
    if lam.imag == 0.0:
        d = _check_poles(kernel, lam.real, pole_guard)
        return complex(ksum(kernel.c / d), 0.0)
    d = _check_poles(kernel, lam, pole_guard)
    return csum(kernel.c / d)


def laplace_deriv(kernel: ExponentialKernel, lam: complex, pole_guard: float = POLE_GUARD) -> complex:
    lam = complex(lam)
    if lam.imag == 0.0:
        d = _check_poles(kernel, lam.real, pole_guard)
        return complex(-ksum(kernel.c / d**2), 0.0)
    d = _check_poles(kernel, lam, pole_guard)
    return -csum(kernel.c / d**2)


def check_conditions(kernel: ExponentialKernel) -> ConditionReport:
    lo, hi = kernel.S_interval()
    if kernel.family is not None:
        cond_b = kernel.family.amplitudes_summable
    else:
        cond_b = True if math.isfinite(kernel.tail_C) else False
    g = kernel.gamma
    if g.size > 1:
        products = g[:-1] * np.diff(g)
        gap_sup = float(products.max())
    else:
        products = np.empty(0)
        gap_sup = 0.0
    if kernel.family is not None:
        # gaps behave like beta*B^2*k^(2*beta-1)
        plausible = kernel.family.beta > 0.5
    else:
        plausible = products.size >= 2 and bool(np.all(np.diff(products[-3:]) > 0))
    return ConditionReport(
        S=(lo, hi),
        cond_a=hi < 1.0,
        cond_b=cond_b,
        gap_sup=gap_sup,
        gap_unbounded_plausible=plausible,
    )


def _check_sector(lam: complex, delta: float) -> float:
    if lam == 0:
        raise SectorError("lambda = 0 has no argument")
    phi = math.atan2(lam.imag, lam.real)
    if abs(phi) >= math.pi - delta:
        raise SectorError(
            f"arg(lambda)={phi:.6f} outside the sector |arg| < pi - {delta:g}"
        )
    return phi


def _quad_complex(func, a: float, b: float, points=None) -> tuple[complex, float]:
    kw = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    if points is not None:
        kw["points"] = points
    re, err_re = integrate.quad(lambda y: func(y).real, a, b, **kw)
    im, err_im = integrate.quad(lambda y: func(y).imag, a, b, **kw)
    return complex(re, im), math.hypot(err_re, err_im)


def integral_approximant_h(
    family: PowerLawFamily, lam: complex, delta: float = DEFAULT_DELTA, lower: float = 1.0
) -> complex:
    """Integral ``int_lower^inf A dx / (x**alpha (lam + B x**beta))``.

    With ``p = alpha + beta - 1`` the substitution ``y = (x/lower)**(-p)``
    maps the half-line onto ``(0, 1]``:

        h(lam) = (A lower^(1-alpha) / p) * int_0^1 dy / (B lower^beta + lam * y**(beta/p)),

    a bounded integrand in the sector.  Panels are split at the point where
    the two terms of the denominator have equal size and at each further
    decade up to 1.
    """
    lam = complex(lam)
    _check_sector(lam, delta)
    if not lower > 0:
        raise ValueError("lower limit must be positive")
    p = family.alpha + family.beta - 1.0
    q = family.beta / p
    A = family.A * lower ** (1.0 - family.alpha)
    B = family.B * lower**family.beta

    def f(y):
        return 1.0 / (B + lam * y**q)

    breaks = [0.0]
    ystar = (B / abs(lam)) ** (1.0 / q)
    if ystar < 1.0:
        y = ystar
        while y < 1.0:
            breaks.append(y)
            y *= 10.0
    breaks.append(1.0)
    total = 0j
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, _ = _quad_complex(f, lo, hi)
        total += val
    return (A / p) * total


def family_tail_laplace(family: PowerLawFamily, lam: complex, delta: float = DEFAULT_DELTA) -> complex:
    """Estimate of ``sum_{k>N} c_k/(lam + gamma_k)``, the part truncation drops.

    Midpoint form of the integral comparison: ``int_{N+1/2}^inf``.
    """
    return integral_approximant_h(family, lam, delta, lower=family.N + 0.5)


@dataclass
class ProbeTable:
    rows: list[dict]
    decay_violations: list[tuple[float, float]]
    h_bounded: bool | None
    h_ratio: float | None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.decay_violations and self.h_bounded is not False

    header = ("radius", "arg", "abs_K", "abs_lam_dK", "abs_lam_K_minus_h")

    def as_rows(self) -> list[tuple]:
        return [tuple(r[k] for k in self.header) for r in self.rows]


def sector_decay_probe(
    kernel: ExponentialKernel,
    family: PowerLawFamily | None,
    delta: float,
    radii: Sequence[float],
    angles: Sequence[float],
) -> ProbeTable:
    """Tabulate ``|K^|``, ``|lam K^'|`` and ``|lam (K^ - h)|`` along rays.

    ``decay_violations`` lists ``(angle, radius)`` where either of the first two
    columns failed to strictly decrease.  ``h_bounded`` compares the last three
    samples of the third column on each ray: bounded means max/min <= 3.

    For a family the third column restores the terms beyond ``kernel.N``
    through their integral estimate, so it measures the sum-versus-integral
    discrepancy rather than the truncation.
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    for phi in angles:
        if abs(phi) >= math.pi - delta:
            raise SectorError(f"ray angle {phi:g} outside |arg| < pi - {delta:g}")
    tail_family = family.with_N(kernel.N) if family is not None else None
    rows: list[dict] = []
    violations: list[tuple[float, float]] = []
    worst_ratio = None
    for phi in angles:
        prev = None
        h_col = []
        for rad in radii:
            lam = rad * complex(math.cos(phi), math.sin(phi))
            K = laplace(kernel, lam)
            dK = laplace_deriv(kernel, lam)
            row = {
                "radius": rad,
                "arg": float(phi),
                "abs_K": abs(K),
                "abs_lam_dK": abs(lam * dK),
                "abs_lam_K_minus_h": math.nan,
            }
            if family is not None:
                h = integral_approximant_h(family, lam, delta)
                K_full = K + family_tail_laplace(tail_family, lam, delta)
                row["abs_lam_K_minus_h"] = abs(lam * (K_full - h))
                h_col.append(row["abs_lam_K_minus_h"])
            if prev is not None and not (
                row["abs_K"] < prev["abs_K"] and row["abs_lam_dK"] < prev["abs_lam_dK"]
            ):
                violations.append((float(phi), rad))
            prev = row
            rows.append(row)
        if family is not None and len(h_col) >= 3:
            tail = h_col[-3:]
            ratio = max(tail) / min(tail)
            worst_ratio = ratio if worst_ratio is None else max(worst_ratio, ratio)
    h_bounded = None if worst_ratio is None else worst_ratio <= 3.0
    notes = []
    if family is not None and kernel.gamma[-1] < 10.0 * radii[-1]:
        notes.append(f"gamma_N={kernel.gamma[-1]:.6g} is below 10x the largest radius; "
                     "the truncated sum cannot follow h there, raise N")
    return ProbeTable(rows, violations, h_bounded, worst_ratio, notes)


def kernel_from_config(doc: dict) -> ExponentialKernel:
    """Build a kernel from the JSON document schema.

    ``{"type": "finite", "terms": [[c, gamma], ...]}`` or
    ``{"type": "power_law", "A":.., "B":.., "alpha":.., "beta":.., "N":..}``.
    """
    if not isinstance(doc, dict):
        raise ConfigError("kernel config must be a JSON object")
    kind = doc.get("type")
    try:
        if kind == "finite":
            terms = doc["terms"]
            if not isinstance(terms, list):
                raise ConfigError("'terms' must be a list of [c, gamma] pairs")
            return make_exponential(terms)
        if kind == "power_law":
            fam = PowerLawFamily(
                float(doc["A"]), float(doc["B"]), float(doc["alpha"]),
                float(doc["beta"]), int(doc["N"]),
            )
            return from_power_law(fam)
    except KeyError as exc:
        raise ConfigError(f"kernel config missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid kernel config: {exc}") from None
    raise ConfigError(f"unknown kernel type {kind!r}")


def load_kernel(source: str) -> ExponentialKernel:
    """Parse ``source`` as inline JSON, or read it as a path to a JSON file."""
    text = source
    if not source.lstrip().startswith("{"):
        if not os.path.exists(source):
            raise ConfigError(f"kernel source {source!r} is neither JSON nor a file")
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed kernel JSON: {exc}") from None
    return kernel_from_config(doc)
