"""Half-plane stability verdicts and the unstable positive zeros.

A mode is stable exactly when ``S = sum c_k/gamma_k`` stays below its
threshold ``T = a**(2(1-theta))``; otherwise the symbol has a positive real
zero.  Truncated kernels carry ``S`` as an interval, and a verdict is only
issued when the whole interval falls on one side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotUnstable
from .kernel import ExponentialKernel, check_conditions, ksum
from .roots import _f_zero_offset, _real_zero, residual_tol
from .symbol import Mode, eval_ell


@dataclass
class StabilityReport:
    S: tuple[float, float]
    thresholds: list[float]
    verdict: str
    N0: int
    unstable_roots: list[tuple[int, float]]
    mode_status: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "S": list(self.S),
            "thresholds": self.thresholds,
            "verdict": self.verdict,
            "N0": self.N0,
            "unstable_roots": [[i, x] for i, x in self.unstable_roots],
            "mode_status": self.mode_status,
        }


def _mode_status(S: tuple[float, float], T: float) -> str:
    lo, hi = S
    if hi < T:
        return "stable"
    if lo > T:
        return "unstable"
    return "indeterminate"


def unstable_root(mode: Mode, kernel: ExponentialKernel) -> float:
    """Positive real zero of an unstable mode.

    ``l(0) = a^(2 theta) (T - S) < 0`` and ``l(x_1) = x_1^2 > 0`` at the
    rightmost zero ``x_1 > 0`` of ``1 - K^/T``, so ``(0, x_1)`` brackets it.
    """
    lo, _ = kernel.S_interval()
    if not lo > mode.threshold:
        raise NotUnstable(
            f"S={lo:.17g} does not exceed the threshold {mode.threshold:.17g}"
        )
    phi = _f_zero_offset(mode, kernel, 0)
    zero = _real_zero(mode, kernel, 0, phi)
    if not zero.value > 0:
        raise NotUnstable(f"located zero {zero.value!r} is not positive")
    res = abs(eval_ell(mode, kernel, zero.value))
    if res > residual_tol(mode):
        raise NotUnstable(f"positive zero failed the residual check ({res:.3e})")
    return zero.value


def classify(kernel: ExponentialKernel, modes: Sequence[Mode]) -> StabilityReport:
    modes = list(modes)
    if not modes:
        raise ValueError("need at least one mode")
    if any(b.a < a.a for a, b in zip(modes, modes[1:])):
        raise ValueError("mode eigenvalues must be nondecreasing")
    S = check_conditions(kernel).S
    thresholds = [m.threshold for m in modes]
    status = [_mode_status(S, T) for T in thresholds]
    roots = []
    for i, (m, st) in enumerate(zip(modes, status)):
        if st == "unstable":
            roots.append((i, unstable_root(m, kernel)))
    if "unstable" in status:
        verdict = "Unstable"
    elif "indeterminate" in status:
        verdict = "Indeterminate"
    else:
        verdict = "Stable"
    return StabilityReport(
        S=S,
        thresholds=thresholds,
        verdict=verdict,
        N0=status.count("unstable"),
        unstable_roots=roots,
        mode_status=status,
    )


@dataclass
class AxisTable:
    rows: list[tuple[float, float, float, float]]
    re_at_zero: float | None
    re_at_zero_closed: float | None

    header = ("y", "abs_ell", "im_ell", "im_ell_closed")

    @property
    def min_abs(self) -> float:
        return min(r[1] for r in self.rows)

    @property
    def max_rel_mismatch(self) -> float:
        worst = 0.0
        for _, _, direct, closed in self.rows:
            if closed == 0.0:
                worst = max(worst, abs(direct))
            else:
                worst = max(worst, abs(direct - closed) / abs(closed))
        return worst


def imaginary_axis_check(mode: Mode, kernel: ExponentialKernel, y_grid) -> AxisTable:
    """Sample the symbol on the imaginary axis.

    ``Im l(iy) = y a^(2 theta) sum c_k/(y^2 + gamma_k^2)`` never vanishes for
    ``y != 0``; at ``y = 0`` the real part ``a^(2 theta) (T - S)`` is checked.
    """
    rows = []
    re0 = re0_closed = None
    g2 = kernel.gamma**2
    for y in y_grid:
        y = float(y)
        val = eval_ell(mode, kernel, complex(0.0, y))
        closed = y * mode.coupling * ksum(kernel.c / (y * y + g2))
        rows.append((y, abs(val), val.imag, closed))
        if y == 0.0:
            re0 = val.real
            re0_closed = mode.coupling * (mode.threshold - kernel.partial_S())
    return AxisTable(rows, re0, re0_closed)
