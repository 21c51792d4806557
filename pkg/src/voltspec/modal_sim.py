"""Time-domain check of the spectral abscissa on the augmented modal system.

The scalar modal equation with memory is equivalent to the linear system
``u' = v``, ``v' = -a^2 u + a^(2 theta) sum c_k w_k``, ``w_k' = u - gamma_k w_k``
with ``w_k(0) = 0``.  Classical RK4 applied to a linear system is the
fixed matrix ``P = sum_{j<=4} (dt M)^j / j!``, which is what we step with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientPeaks, StepSizeError
from .kernel import ExponentialKernel
from .oracle import augmented_matrix, matrix_eigs
from .symbol import Mode

MIN_PEAKS = 10
DOMINANCE_GAP = 0.05
RATE_TOL = 0.05
GROWTH_LOG_LIMIT = 600.0


@dataclass(frozen=True)
class ModalSystem:
    mode: Mode
    kernel: ExponentialKernel
    matrix: np.ndarray
    state0: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class SimTrace:
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    energy: np.ndarray
    states: np.ndarray
    fitted_rate: float | None = None

    header = ("t", "u", "v", "E")

    def as_rows(self, stride: int = 1) -> list[tuple[float, float, float, float]]:
        idx = range(0, len(self.times), stride)
        return [(float(self.times[i]), float(self.u[i]), float(self.v[i]), float(self.energy[i])) for i in idx]


def assemble(mode: Mode, kernel: ExponentialKernel, u0: float, v0: float) -> ModalSystem:
    M = augmented_matrix(mode, kernel).entries
    x0 = np.zeros(M.shape[0])
    x0[0], x0[1] = u0, v0
    return ModalSystem(mode, kernel, M, x0)


def max_step(mode: Mode, kernel: ExponentialKernel) -> float:
    return 0.1 / max(mode.a, float(kernel.gamma[-1]))


def rk4_propagator(M: np.ndarray, dt: float) -> np.ndarray:
    hM = dt * M
    P = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for j in range(1, 5):
        term = term @ hM / j
        P = P + term
    return P


def integrate(system: ModalSystem, T: float, dt: float) -> SimTrace:
    if not (T > 0 and dt > 0):
        raise ValueError("T and dt must be positive")
    limit = max_step(system.mode, system.kernel)
    if dt > limit * (1 + 1e-12):
        raise StepSizeError(f"dt={dt:g} exceeds the stability limit {limit:g}")
    n = int(round(T / dt))
    P = rk4_propagator(system.matrix, dt)
    states = np.empty((n + 1, system.dim))
    x = system.state0.astype(float).copy()
    states[0] = x
    for j in range(1, n + 1):
        x = P @ x
        states[j] = x
    u = states[:, 0]
    v = states[:, 1]
    energy = system.mode.a**2 * u * u + v * v
    return SimTrace(np.arange(n + 1) * dt, u, v, energy, states)


def _peaks(E: np.ndarray) -> np.ndarray:
    mid = E[1:-1]
    return np.nonzero((mid > E[:-2]) & (mid >= E[2:]))[0] + 1


def decay_rate(trace: SimTrace, skip: float = 0.25) -> float:
    """Least-squares slope of ``log E`` at its local maxima.

    Peaks before ``skip * T`` are ignored so fast real modes have died out.
    A flat envelope returns 0.  A trace dominated by a real eigenvalue has no
    interior maxima; the slope of ``log E`` over its second half is used when
    that half is strictly monotone.
    """
    E = trace.energy
    t = trace.times
    if not np.all(np.isfinite(E)):
        raise InsufficientPeaks("energy overflowed; shorten the horizon")
    if np.all(E == 0):
        raise InsufficientPeaks("trajectory is identically zero")
    spread = (E.max() - E.min()) / E.max()
    if spread < 1e-12:
        trace.fitted_rate = 0.0
        return 0.0
    start = t[0] + skip * (t[-1] - t[0])
    idx = _peaks(E)
    idx = idx[t[idx] >= start]
    if len(idx) >= MIN_PEAKS:
        slope, _ = np.polyfit(t[idx], np.log(E[idx]), 1)
    else:
        half = len(t) // 2
        tail = E[half:]
        steps = np.diff(tail)
        monotone = np.all(steps > 0) or np.all(steps < 0)
        if len(tail) < 3 or not monotone or not np.all(tail > 0):
            raise InsufficientPeaks(f"only {len(idx)} envelope peaks after t={start:g}")
        slope, _ = np.polyfit(t[half:], np.log(tail), 1)
    trace.fitted_rate = float(slope)
    return float(slope)


@dataclass
class AbscissaReport:
    fitted_rate: float
    abscissa: float
    rel_error: float
    dominant: bool
    eigenvalues: list[complex]
    horizon: float
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.rel_error <= RATE_TOL

    def as_dict(self) -> dict:
        return {
            "fitted_rate": self.fitted_rate,
            "half_rate": self.fitted_rate / 2,
            "abscissa": self.abscissa,
            "rel_error": self.rel_error,
            "dominant": self.dominant,
            "horizon": self.horizon,
            "passed": self.passed,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "notes": self.notes,
        }


def dominance(eigs: list[complex], gap: float = DOMINANCE_GAP) -> bool:
    """Whether the rightmost eigenvalue (or conjugate pair) leads the rest by ``gap``."""
    ordered = sorted(eigs, key=lambda z: -z.real)
    lead = ordered[0]
    rest = [z for z in ordered[1:] if not (lead.imag != 0 and abs(z - lead.conjugate()) <= 1e-9 * (1 + abs(z)))]
    if not rest:
        return True
    return lead.real - max(z.real for z in rest) >= gap


def horizon(T: float, abscissa: float) -> float:
    """``T`` shortened so a growing energy ``exp(2 abscissa t)`` stays finite."""
    if abscissa > 0:
        return min(T, GROWTH_LOG_LIMIT / (2.0 * abscissa))
    return T


def abscissa_consistency(mode: Mode, kernel: ExponentialKernel, T: float, dt: float,
                         u0: float = 1.0, v0: float = 0.0) -> AbscissaReport:
    eigs = matrix_eigs(augmented_matrix(mode, kernel))
    abscissa = max(z.real for z in eigs)
    notes = []
    T_run = horizon(T, abscissa)
    if T_run < T:
        notes.append(f"horizon shortened to {T_run:.6g} to keep the growing energy finite")
    trace = integrate(assemble(mode, kernel, u0, v0), T_run, dt)
    rate = decay_rate(trace)
    rel = abs(rate / 2 - abscissa) / max(abs(abscissa), 1e-6)
    dom = dominance(eigs)
    if not dom:
        notes.append("no single dominant eigenvalue; the envelope mixes modes")
    return AbscissaReport(rate, abscissa, rel, dom, eigs, T_run, notes)


def modal_reconstruction(system: ModalSystem, t: float) -> np.ndarray:
    """State at time ``t`` from the eigendecomposition ``V exp(Lt) V^-1 x0``."""
    w, V = np.linalg.eig(system.matrix)
    coef = np.linalg.solve(V, system.state0.astype(complex))
    return (V @ (np.exp(w * t) * coef)).real
