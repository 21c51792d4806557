"""Large-mode asymptotics of the non-real pair and the regime they imply.

Finite amplitude sums give ``Re lam+ ~ -C/(2T)``.  Power-law families with
``r = (alpha+beta-1)/beta <= 1`` give ``Re lam+ ~ -A D1 B^(r-1) / (beta a^n1)``
with ``n1 = r + 1 - 2 theta``, where ``D`` is the constant

    D = (i/2) * int_0^inf dt / (t^r (i + t)).
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DivergentSeriesError, KernelValidationError, OracleError
from .kernel import (
    ExponentialKernel,
    PowerLawFamily,
    family_tail_laplace,
    from_power_law,
    laplace_deriv,
)
from .roots import ComplexPair, complex_pair
from .symbol import Mode, max_poly_terms

BOUNDARY_TOL = 1e-12
BOUNDARY_WARN = 1e-6
SLOPE_SLACK = 0.3
MAX_FAMILY_TERMS = 200_000


@dataclass(frozen=True)
class RegimeTag:
    kind: str
    vartheta: float | None = None
    log_case: bool = False
    near_boundary: bool = False

    KINDS = ("FiniteSum", "ApproachAxis", "DivergeLeft", "ConstantAbscissa", "LogCase")

    def as_dict(self) -> dict:
        out = {"regime": self.kind, "log_case": self.log_case}
        if self.vartheta is not None:
            out["vartheta"] = self.vartheta
        if self.near_boundary:
            out["near_boundary"] = True
        return out


@dataclass(frozen=True)
class AsymptoticPrediction:
    re: float
    im: float
    im_offset: float
    order_re: float
    order_im: float
    regime: RegimeTag
    r: float | None = None
    n1: float | None = None
    n2: float | None = None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ResidueConstants:
    r: float
    D: complex
    D_split: complex
    D1: float
    D2: float
    D_printed: complex
    D1_printed: float
    split_error: float
    modulus_error: float

    @property
    def sign_diagnostic(self) -> str:
        """Relation between the quadrature value and the printed closed form."""
        if abs(self.D + self.D_printed) <= 1e-9 * abs(self.D):
            return ("closed form (1/2)(pi/sin(pi r)) exp(-i pi (1+r)/2) equals -D; "
                    "D1 = Re D > 0 is used so that Re lam+ < 0")
        return "closed form does not equal +-D"


# ----------------------------------------------------------------------------
# residue constant D

def _check_r(r: float) -> None:
    if not (0.0 < r < 1.0):
        raise ValueError(f"r must lie in (0, 1) (got {r!r})")


def _d_quadrature(r: float) -> complex:
    """Split at t = 1; ``t -> 1/t`` maps ``[1, inf)`` onto ``(0, 1]``.

    Both halves carry an algebraic endpoint weight handled by QAWS:
    ``int_0^1 t^-r (t - i)/(1 + t^2) dt`` and
    ``int_0^1 s^(r-1) (1 - i s)/(1 + s^2) ds``.
    """
    kw = dict(weight="alg", epsabs=0.0, epsrel=1e-13, limit=200)
    a_re, _ = integrate.quad(lambda t: t / (1 + t * t), 0.0, 1.0, wvar=(-r, 0.0), **kw)
    a_im, _ = integrate.quad(lambda t: -1.0 / (1 + t * t), 0.0, 1.0, wvar=(-r, 0.0), **kw)
    b_re, _ = integrate.quad(lambda s: 1.0 / (1 + s * s), 0.0, 1.0, wvar=(r - 1.0, 0.0), **kw)
    b_im, _ = integrate.quad(lambda s: -s / (1 + s * s), 0.0, 1.0, wvar=(r - 1.0, 0.0), **kw)
    integral = complex(a_re + b_re, a_im + b_im)
    return 0.5j * integral


def _mellin_trapezoid(power: float, h: float = 0.05) -> float:
    """``int_0^inf t^(power-1)/(1 + t^2) dt`` with ``t = e^x`` and the trapezoid rule.

    The transformed integrand is analytic in ``|Im x| < pi/2`` and decays
    exponentially, so the rule converges like ``exp(-pi^2/h)``.
    """
    if not (0.0 < power < 2.0):
        raise ValueError("power must lie in (0, 2)")
    decay = 46.0
    lo = -decay / power
    hi = decay / (2.0 - power)
    x = np.arange(math.floor(lo / h), math.ceil(hi / h) + 1) * h
    # e^(p x)/(1 + e^(2x)) written to avoid overflow on both tails
    neg = x < 0
    vals = np.empty_like(x)
    vals[neg] = np.exp(power * x[neg]) / (1.0 + np.exp(2.0 * x[neg]))
    vals[~neg] = np.exp((power - 2.0) * x[~neg]) / (1.0 + np.exp(-2.0 * x[~neg]))
    return h * math.fsum(vals.tolist())


def _d_split(r: float) -> complex:
    """``D = (1/2) int t^-r/(1+t^2) + (i/2) int t^(1-r)/(1+t^2)``."""
    return complex(0.5 * _mellin_trapezoid(1.0 - r), 0.5 * _mellin_trapezoid(2.0 - r))


def residue_constants(r: float) -> ResidueConstants:
    _check_r(r)
    D = _d_quadrature(r)
    D_split = _d_split(r)
    modulus = math.pi / (2.0 * math.sin(math.pi * r))
    printed = 0.5 * math.pi / math.sin(math.pi * r) * cmath.exp(-0.5j * math.pi * (1.0 + r))
    D1_printed = 0.5 * math.pi * math.cos(0.5 * math.pi * (r + 1.0)) / math.sin(math.pi * r)
    return ResidueConstants(
        r=r,
        D=D,
        D_split=D_split,
        D1=D.real,
        D2=-D.imag,
        D_printed=printed,
        D1_printed=D1_printed,
        split_error=abs(D - D_split),
        modulus_error=abs(abs(D) - modulus),
    )


# ----------------------------------------------------------------------------
# predictions

def finite_sum_prediction(mode: Mode, kernel: ExponentialKernel) -> AsymptoticPrediction:
    """Pair for a kernel with summable amplitudes: ``-C/(2T) + i a``."""
    fam = kernel.family
    if not math.isfinite(kernel.tail_C) or (fam is not None and not fam.amplitudes_summable):
        raise DivergentSeriesError("sum of amplitudes diverges; use the power-law prediction")
    C = kernel.total_C()
    return AsymptoticPrediction(
        re=-0.5 * C / mode.threshold,
        im=mode.a,
        im_offset=0.0,
        order_re=4.0 - 2.0 * mode.theta,
        order_im=3.0 - 2.0 * mode.theta,
        regime=RegimeTag("FiniteSum"),
    )


def _family_r(family: PowerLawFamily) -> float:
    r = family.r
    if not (0.0 < r <= 1.0):
        raise KernelValidationError(f"power-law prediction needs r in (0, 1] (got r={r:g})")
    return r


def n1_exponent(r: float, theta: float) -> float:
    return r + 2.0 * (0.5 - theta)


def n2_exponent(r: float, theta: float) -> float:
    if r < 0.5 and 0.5 <= theta < 1.0:
        return min(2.0 * (1.0 - theta), 2.0 * r + 3.0 - 4.0 * theta)
    return 2.0 * (1.0 - theta)


def power_law_prediction(mode: Mode, family: PowerLawFamily) -> AsymptoticPrediction:
    r = _family_r(family)
    theta, a = mode.theta, mode.a
    A, B, beta = family.A, family.B, family.beta
    regime = regime_classify(family, theta)
    if r == 1.0:
        re = -0.5 * (A / beta) * math.log(a) / mode.threshold
        order = 2.0 * (1.0 - theta)
        return AsymptoticPrediction(re, a, 0.0, order, order, regime, r=r,
                                    n1=n1_exponent(r, theta), n2=order)
    const = residue_constants(r)
    n1 = n1_exponent(r, theta)
    n2 = n2_exponent(r, theta)
    scale = A * B ** (r - 1.0) / (beta * a**n1)
    notes = []
    if n1 <= 0 and regime.kind != "ConstantAbscissa":
        notes.append(f"n1={n1:g} <= 0: the leading term does not decay")
    return AsymptoticPrediction(
        re=-const.D1 * scale,
        im=a + const.D2 * scale,
        im_offset=const.D2 * scale,
        order_re=n2,
        order_im=n2,
        regime=regime,
        r=r,
        n1=n1,
        n2=n2,
        notes=tuple(notes),
    )


def vartheta(family: PowerLawFamily) -> float:
    """Limiting abscissa ``-A D1 / (beta B^(1-r))`` on the critical line."""
    r = _family_r(family)
    if r == 1.0:
        raise ValueError("no finite limiting abscissa when r = 1")
    return -family.A * residue_constants(r).D1 / (family.beta * family.B ** (1.0 - r))


def regime_classify(family: PowerLawFamily | None, theta: float) -> RegimeTag:
    """Long-run behaviour of ``Re lam+`` as the mode grows.

    ``None`` or a family with summable amplitudes (r > 1) gives FiniteSum.
    At ``r = 1, theta = 1`` the abscissa diverges like ``-ln a``.
    """
    if not (0.0 <= theta <= 1.0):
        raise ValueError("theta must lie in [0, 1]")
    if family is None or family.r > 1.0:
        return RegimeTag("FiniteSum")
    r = family.r
    if r == 1.0:
        if theta < 1.0:
            return RegimeTag("ApproachAxis", log_case=True)
        return RegimeTag("DivergeLeft", log_case=True)
    boundary = 0.5 * (r + 1.0)
    gap = theta - boundary
    near = abs(gap) <= BOUNDARY_WARN
    if abs(gap) <= BOUNDARY_TOL:
        return RegimeTag("ConstantAbscissa", vartheta=vartheta(family), near_boundary=True)
    if gap < 0:
        return RegimeTag("ApproachAxis", near_boundary=near)
    return RegimeTag("DivergeLeft", near_boundary=near)


# ----------------------------------------------------------------------------
# convergence studies

def family_truncation(family: PowerLawFamily, a_max: float, rate_factor: float = 10.0,
                      tail_rel: float = 1e-3, n_cap: int = MAX_FAMILY_TERMS) -> int:
    """Truncation for studying the infinite family up to mode ``a_max``.

    Two requirements: the tail of ``sum c_k/gamma_k`` is below
    ``tail_rel * |1 - S|``, and ``gamma_N >= rate_factor * a_max`` so the
    dropped terms are well described by their integral.  Slowly converging
    families would need astronomically many terms; the result is capped at
    ``n_cap`` and callers rely on the tail correction instead.
    """
    n_probe = 1000
    S_est = from_power_law(family.with_N(n_probe)).partial_S()
    p = family.alpha + family.beta - 1.0
    S_est += (family.A / family.B) * (n_probe + 0.5) ** (-p) / p
    tol = tail_rel * max(abs(1.0 - S_est), 1e-9)
    n_tail = math.ceil((family.A / (family.B * p * tol)) ** (1.0 / p))
    n_rate = math.ceil((rate_factor * a_max / family.B) ** (1.0 / family.beta))
    return int(min(max(n_tail, n_rate, 1), n_cap))


@dataclass
class StudyRow:
    a: float
    computed: complex
    predicted: complex
    d_re: float
    d_im: float
    route: str


@dataclass
class StudyResult:
    rows: list[StudyRow]
    slope_re: float
    slope_im: float
    order_re: float
    order_im: float
    regime: RegimeTag
    N: int
    notes: list[str] = field(default_factory=list)

    @property
    def pass_re(self) -> bool:
        return self.slope_re <= -self.order_re + SLOPE_SLACK

    @property
    def pass_im(self) -> bool:
        return self.slope_im <= -self.order_im + SLOPE_SLACK

    @property
    def passed(self) -> bool:
        return self.pass_re and self.pass_im


def loglog_slope(x, y) -> float:
    x = np.log(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        return math.nan
    if np.any(y == 0):
        return -math.inf
    slope, _ = np.polyfit(x, np.log(y), 1)
    return float(slope)


def pair_for(mode: Mode, kernel: ExponentialKernel) -> ComplexPair:
    status: dict = {}
    pair = complex_pair(mode, kernel, use_oracle=kernel.N <= max_poly_terms(), status=status)
    if pair is None:
        raise OracleError(f"no complex pair found at a={mode.a:g}: {status}")
    return pair


def tail_corrected_tau(mode: Mode, kernel: ExponentialKernel, pair: ComplexPair) -> complex:
    """First-order shift of ``tau`` when the dropped family tail is restored.

    Solving ``T tau (tau + 2i) = K^_N + dK`` to first order in the tail
    ``dK`` gives ``d tau = dK / (T (2 tau + 2i) - a K^_N')``.
    """
    family = kernel.family
    if family is None:
        return pair.tau
    lam = pair.value
    dK = family_tail_laplace(family, lam)
    slope = mode.threshold * (2 * pair.tau + 2j) - mode.a * laplace_deriv(kernel, lam)
    return pair.tau + dK / slope


def convergence_study(source: ExponentialKernel | PowerLawFamily, theta: float,
                      a_grid, N: int | None = None) -> StudyResult:
    """Compare computed pairs with the asymptotic prediction along ``a_grid``.

    A finite kernel (or a family with summable amplitudes) is compared with
    the finite-sum formula, a family with ``r <= 1`` with the power-law
    formula on a truncation from :func:`family_truncation`.
    """
    a_grid = [float(a) for a in a_grid]
    if len(a_grid) < 3:
        raise ValueError("a convergence study needs at least three modes")
    notes: list[str] = []
    if isinstance(source, PowerLawFamily):
        family = source
        N = family_truncation(family, max(a_grid)) if N is None else N
        kernel = from_power_law(family.with_N(N))
        if N == MAX_FAMILY_TERMS:
            notes.append("tail rule capped; tail_S exceeds 1e-3 |1 - S|")
        notes.append(f"truncated at N={N}, tail_S={kernel.tail_S:.3e}; "
                     "computed pairs carry a first-order tail correction")
    else:
        family = source.family
        kernel = source
    use_power_law = family is not None and family.r <= 1.0
    rows = []
    preds = []
    for a in a_grid:
        mode = Mode(a, theta)
        pred = power_law_prediction(mode, family) if use_power_law else finite_sum_prediction(mode, kernel)
        preds.append(pred)
        pair = pair_for(mode, kernel)
        tau = tail_corrected_tau(mode, kernel, pair) if use_power_law else pair.tau
        rows.append(StudyRow(
            a=a,
            computed=complex(a * tau.real, a * (tau.imag + 1.0)),
            predicted=complex(pred.re, pred.im),
            d_re=abs(a * tau.real - pred.re),
            d_im=abs(a * tau.imag - pred.im_offset),
            route=pair.route,
        ))
        notes.extend(n for n in pred.notes if n not in notes)
    last = preds[-1]
    return StudyResult(
        rows=rows,
        slope_re=loglog_slope(a_grid, [r.d_re for r in rows]),
        slope_im=loglog_slope(a_grid, [r.d_im for r in rows]),
        order_re=last.order_re,
        order_im=last.order_im,
        regime=last.regime,
        N=kernel.N,
        notes=notes,
    )


def abscissa_series(family: PowerLawFamily, theta: float, a_grid,
                    N: int | None = None) -> tuple[list[float], int]:
    """Tail-corrected ``Re lam+`` along ``a_grid`` for a truncated family."""
    a_grid = [float(a) for a in a_grid]
    N = family_truncation(family, max(a_grid)) if N is None else N
    kernel = from_power_law(family.with_N(N))
    out = []
    for a in a_grid:
        mode = Mode(a, theta)
        tau = tail_corrected_tau(mode, kernel, pair_for(mode, kernel))
        out.append(a * tau.real)
    return out, N
