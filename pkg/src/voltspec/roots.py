"""Zeros of the per-mode symbol for a finite exponential kernel.

Real zeros sit one per pole gap and are located in the offset variable
``psi = lam + gamma_k``, where the singular term ``c_k/psi`` is exact.  The
non-real pair is written ``lam = a (tau + i)``; then
``lam**2 + a**2 = a**2 tau (tau + 2i)`` exactly, so the small quantities
``Re lam`` and ``Im lam - a`` keep full relative precision even when ``a``
is large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import (
    BracketError,
    ContractionFailed,
    NoConvergence,
    OracleError,
    PoleProximityError,
)
from .kernel import ExponentialKernel, ksum, laplace, laplace_deriv
from .symbol import Mode, eval_ell

BRACKET_OFFSET = 1e-9
CONTRACTION_RATIO = 0.9
FIXED_POINT_MAX_ITER = 50
NEWTON_MAX_ITER = 100


def residual_tol(mode: Mode, rel: float = 1e-9) -> float:
    return rel * max(1.0, mode.a**2)


@dataclass(frozen=True)
class RealZero:
    k: int
    value: float
    bracket: tuple[float, float]
    psi: float
    residual: float


@dataclass(frozen=True)
class ComplexPair:
    """Upper member ``a (tau + i)`` of the conjugate pair."""

    tau: complex
    a: float
    route: str
    residual: float
    iterations: int = 0

    @property
    def alpha(self) -> float:
        return self.a * self.tau.real

    @property
    def im_offset(self) -> float:
        """``Im lam - a`` without cancellation."""
        return self.a * self.tau.imag

    @property
    def beta(self) -> float:
        return self.a * (self.tau.imag + 1.0)

    @property
    def value(self) -> complex:
        return complex(self.alpha, self.beta)


@dataclass
class SpectrumSlice:
    mode: Mode
    real_zeros: list[RealZero]
    f_zeros: list[float]
    complex_pair: ComplexPair | None
    unstable_real: list[float]
    extra_real: list[float]
    residual_max: float
    status: dict = field(default_factory=dict)

    @property
    def pair(self) -> tuple[float, float] | None:
        if self.complex_pair is None:
            return None
        return self.complex_pair.alpha, self.complex_pair.beta

    def zeros(self) -> list[complex]:
        """All zeros, conjugate included, in no particular order."""
        out = [complex(z.value) for z in self.real_zeros]
        out += [complex(x) for x in self.unstable_real]
        out += [complex(x) for x in self.extra_real]
        if self.complex_pair is not None:
            lam = self.complex_pair.value
            out += [lam, lam.conjugate()]
        return out

    @property
    def count(self) -> int:
        return len(self.zeros())


# ----------------------------------------------------------------------------
# evaluation in offset coordinates

def _offset_sum(kernel: ExponentialKernel, k: int, s: float) -> float:
    """``K^(-gamma_k + s)`` with 0-based anchor ``k``; the anchor term is exact."""
    d = s + (kernel.gamma - kernel.gamma[k])
    d[k] = s
    return ksum(kernel.c / d)


def _ell_offset(mode: Mode, kernel: ExponentialKernel, k: int, s: float) -> float:
    lam = s - kernel.gamma[k]
    return lam * lam + mode.a**2 - mode.coupling * _offset_sum(kernel, k, s)


def _f_offset(mode: Mode, kernel: ExponentialKernel, k: int, s: float) -> float:
    """``T * f`` at ``-gamma_k + s``; same sign as f."""
    return mode.threshold - _offset_sum(kernel, k, s)


def _gap(kernel: ExponentialKernel, k: int) -> float:
    return kernel.gamma[k] - (kernel.gamma[k - 1] if k > 0 else 0.0)


def _brent(func, lo: float, hi: float, f_lo: float, f_hi: float) -> float:
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo < 0) == (f_hi < 0):
        raise BracketError("no sign change on bracket", lo, hi, f_lo, f_hi)
    return optimize.brentq(func, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                           maxiter=500)


def _lower_offset(func, k: int, gap: float, scale: float) -> tuple[float, float]:
    """Offset from the pole where ``func`` is negative, shrinking toward the pole."""
    s = BRACKET_OFFSET * gap
    for _ in range(40):
        val = func(s)
        if val < 0:
            return s, val
        s *= 1e-3
        if s < 1e-15 * scale:
            break
    raise BracketError(f"no negative value near pole {k + 1}", s, s, val, val)


# ----------------------------------------------------------------------------
# f zeros and real zeros

def _f_zero_offset(mode: Mode, kernel: ExponentialKernel, k: int) -> float:
    """Offset ``x_k + gamma_k`` of the k-th zero of f (0-based k)."""
    g = kernel.gamma[k]
    gap = _gap(kernel, k)

    def func(s):
        return _f_offset(mode, kernel, k, s)

    lo, f_lo = _lower_offset(func, k, min(gap, g), g)
    if k > 0:
        hi = gap * (1.0 - BRACKET_OFFSET)
        f_hi = func(hi)
        shrink = BRACKET_OFFSET
        while f_hi <= 0 and shrink > 1e-15:
            shrink *= 1e-3
            hi = gap * (1.0 - shrink)
            f_hi = func(hi)
    else:
        # rightmost interval is unbounded; walk right until K^ drops below T
        hi = max(g, lo * 2)
        f_hi = func(hi)
        for _ in range(2000):
            if f_hi > 0:
                break
            hi *= 2.0
            f_hi = func(hi)
    return _brent(func, lo, hi, f_lo, f_hi)


def f_zeros(mode: Mode, kernel: ExponentialKernel) -> list[float]:
    """Zeros ``x_k`` of ``1 - K^(x)/T``, one per interval ``(-gamma_k, -gamma_{k-1})``."""
    return [float(_f_zero_offset(mode, kernel, k) - kernel.gamma[k]) for k in range(kernel.N)]


def _real_zero(mode: Mode, kernel: ExponentialKernel, k: int, phi: float) -> RealZero:
    """Real zero anchored at pole ``k`` (0-based), bracketed by ``(-gamma_k, x_k)``.

    ``l(x_k) = x_k**2 >= 0`` and ``l -> -inf`` at the pole, so the bracket
    always holds a sign change.  When ``x_k > 0`` the bracket is narrowed to
    ``(0, x_k)`` because ``l(0) = a^2 f(0) < 0``.
    """
    g = kernel.gamma[k]

    def func(s):
        return _ell_offset(mode, kernel, k, s)

    f_hi = func(phi)
    if k == 0 and phi > g:
        lo, f_lo = g, func(g)
        if f_lo >= 0:
            lo, f_lo = _lower_offset(func, k, g, g)
    else:
        lo, f_lo = _lower_offset(func, k, min(_gap(kernel, k), g), g)
    psi = float(_brent(func, lo, phi, f_lo, f_hi))
    return RealZero(
        k=k + 1,
        value=float(psi - g),
        bracket=(float(lo - g), float(phi - g)),
        psi=psi,
        residual=float(abs(func(psi))),
    )


def real_zeros(mode: Mode, kernel: ExponentialKernel) -> list[RealZero]:
    """One real zero per pole interval, ordered by k (rightmost first).

    In the unstable case the k = 1 entry is the positive root.
    """
    out = []
    for k in range(kernel.N):
        phi = _f_zero_offset(mode, kernel, k)
        out.append(_real_zero(mode, kernel, k, phi))
    return out


# ----------------------------------------------------------------------------
# complex pair

def _tau_to_lam(a: float, tau: complex, sigma: float = 1.0) -> complex:
    return complex(a * tau.real, a * (tau.imag + sigma))


def ell_tau(mode: Mode, kernel: ExponentialKernel, tau: complex, sigma: float = 1.0) -> complex:
    """``l(a (tau + i sigma))`` via ``a^2 tau (tau + 2 i sigma) - a^(2 theta) K^``."""
    lam = _tau_to_lam(mode.a, tau, sigma)
    return mode.a**2 * tau * (tau + 2j * sigma) - mode.coupling * laplace(kernel, lam)


def _ell_tau_deriv(mode: Mode, kernel: ExponentialKernel, tau: complex, sigma: float = 1.0) -> complex:
    lam = _tau_to_lam(mode.a, tau, sigma)
    return mode.a**2 * (2 * tau + 2j * sigma) - mode.a * mode.coupling * laplace_deriv(kernel, lam)


def complex_pair_fixed_point(mode: Mode, kernel: ExponentialKernel,
                             max_iter: int = FIXED_POINT_MAX_ITER,
                             ratio_limit: float = CONTRACTION_RATIO) -> tuple[complex, complex, int]:
    """Iterate ``tau <- K^(a tau + i a) / (T (tau + 2i))`` from ``tau = 0``.

    Returns ``(tau, lambda_plus, iterations)``.  Raises ContractionFailed if a
    successive-difference ratio reaches ``ratio_limit`` or the cap is hit.
    """
    a, T = mode.a, mode.threshold
    tau = 0j
    prev_step = None
    ratio = 0.0
    for it in range(1, max_iter + 1):
        try:
            new = laplace(kernel, _tau_to_lam(a, tau)) / (T * (tau + 2j))
        except PoleProximityError:
            raise ContractionFailed("iterate hit a kernel pole", tau, it, math.inf) from None
        step = abs(new - tau)
        tau = new
        if prev_step is not None and prev_step > 0:
            ratio = step / prev_step
            if ratio >= ratio_limit and step > 1e-13 * abs(tau):
                raise ContractionFailed("fixed-point map is not contracting", tau, it, ratio)
        if step <= 1e-14 * abs(tau) or step == 0.0:
            lam = _tau_to_lam(a, tau)
            if lam.imag <= 0:
                raise ContractionFailed("fixed point left the upper half-plane", tau, it, ratio)
            return tau, lam, it
        prev_step = step
    raise ContractionFailed("iteration cap reached", tau, max_iter, ratio)


def _newton_tau(mode: Mode, kernel: ExponentialKernel, tau: complex, sigma: float,
                tol: float, max_iter: int = NEWTON_MAX_ITER) -> tuple[complex, float, int]:
    res = abs(ell_tau(mode, kernel, tau, sigma))
    settled = 0
    for it in range(1, max_iter + 1):
        d = _ell_tau_deriv(mode, kernel, tau, sigma)
        if d == 0:
            raise NoConvergence("zero derivative", _tau_to_lam(mode.a, tau, sigma), res)
        step = ell_tau(mode, kernel, tau, sigma) / d
        damp = 1.0
        for _ in range(30):
            cand = tau - damp * step
            try:
                cand_res = abs(ell_tau(mode, kernel, cand, sigma))
            except PoleProximityError:
                cand_res = math.inf
            if cand_res <= res or res <= tol:
                break
            damp *= 0.5
        if not math.isfinite(cand_res):
            raise NoConvergence("Newton step landed on a pole", _tau_to_lam(mode.a, tau, sigma), res)
        moved = abs(cand - tau)
        tau, res = cand, cand_res
        if res <= tol:
            settled += 1
            if moved <= 2e-16 * abs(tau) or res == 0.0 or settled > 4:
                return tau, res, it
    if res <= tol:
        return tau, res, max_iter
    raise NoConvergence("Newton iteration did not converge", _tau_to_lam(mode.a, tau, sigma), res)


def _newton_real(mode: Mode, kernel: ExponentialKernel, x: float, tol: float,
                 max_iter: int = NEWTON_MAX_ITER) -> tuple[float, float, int]:
    def ell(v):
        return eval_ell(mode, kernel, v).real

    res = abs(ell(x))
    settled = 0
    for it in range(1, max_iter + 1):
        d = 2 * x - mode.coupling * laplace_deriv(kernel, x).real
        if d == 0:
            raise NoConvergence("zero derivative", complex(x), res)
        step = ell(x) / d
        damp = 1.0
        for _ in range(30):
            cand = x - damp * step
            try:
                cand_res = abs(ell(cand))
            except PoleProximityError:
                cand_res = math.inf
            if cand_res <= res or res <= tol:
                break
            damp *= 0.5
        if not math.isfinite(cand_res):
            raise NoConvergence("Newton step landed on a pole", complex(x), res)
        moved = abs(cand - x)
        x, res = cand, cand_res
        if res <= tol:
            settled += 1
            if moved <= 2e-16 * abs(x) or res == 0.0 or settled > 4:
                return x, res, it
    if res <= tol:
        return x, res, max_iter
    raise NoConvergence("Newton iteration did not converge", complex(x), res)


def newton_polish(mode: Mode, kernel: ExponentialKernel, lam0: complex,
                  tol: float | None = None) -> complex:
    """Damped Newton iteration on the symbol from ``lam0``.

    Non-real starts are iterated in the ``tau`` coordinate around ``+ia`` or
    ``-ia`` (matching the sign of ``Im lam0``), real starts on the real line.
    """
    tol = residual_tol(mode) if tol is None else tol
    lam0 = complex(lam0)
    laplace(kernel, lam0)  # pole check on the start
    if lam0.imag == 0.0:
        x, _, _ = _newton_real(mode, kernel, lam0.real, tol)
        return complex(x)
    sigma = 1.0 if lam0.imag > 0 else -1.0
    tau0 = complex(lam0.real / mode.a, lam0.imag / mode.a - sigma)
    tau, _, _ = _newton_tau(mode, kernel, tau0, sigma, tol)
    return _tau_to_lam(mode.a, tau, sigma)


def asymptotic_tau_guess(mode: Mode, kernel: ExponentialKernel) -> complex:
    """Leading term ``-(i/2) K^(ia) / T`` of the fixed point."""
    return -0.5j * laplace(kernel, 1j * mode.a) / mode.threshold


def deflated_pair(mode: Mode, kernel: ExponentialKernel, zeros: list[RealZero]) -> tuple[complex, complex]:
    """Remaining two zeros from the root sum and product of the full polynomial.

    With every ``psi_k`` known the pair has sum ``-sum psi_k`` and product
    ``a^2 (1 - S/T) prod gamma_k / (gamma_k - psi_k)``.
    """
    psi = np.array([z.psi for z in zeros])
    g = kernel.gamma
    total = -ksum(psi)
    prod = mode.a**2 * (1.0 - kernel.partial_S() / mode.threshold)
    prod *= float(np.prod(g / (g - psi)))
    half = 0.5 * total
    disc = prod - half * half
    if disc >= 0:
        root = math.sqrt(disc)
        return complex(half, root), complex(half, -root)
    root = math.sqrt(-disc)
    return complex(half + root), complex(half - root)


def _pair_from_lam(mode: Mode, lam: complex, route: str, res: float, it: int = 0) -> ComplexPair:
    tau = complex(lam.real / mode.a, lam.imag / mode.a - 1.0)
    return ComplexPair(tau=tau, a=mode.a, route=route, residual=res, iterations=it)


def complex_pair(mode: Mode, kernel: ExponentialKernel, zeros: list[RealZero] | None = None,
                 use_oracle: bool = True, status: dict | None = None) -> ComplexPair | None:
    """Upper zero of the non-real pair via the fallback chain.

    Routes in order: fixed point, Newton from the asymptotic guess, Newton
    from the deflated-pair guess (when real zeros are supplied), companion
    oracle.  Returns None when the deflation shows the remaining pair is real.
    """
    status = {} if status is None else status
    tol = residual_tol(mode)
    try:
        tau, lam, it = complex_pair_fixed_point(mode, kernel)
        res = abs(ell_tau(mode, kernel, tau))
        if res <= tol:
            return ComplexPair(tau, mode.a, "fixed_point", res, it)
        status["fixed_point"] = f"residual {res:.3e} above tolerance"
    except ContractionFailed as exc:
        status["fixed_point"] = str(exc)

    guesses = [("newton_asymptotic", asymptotic_tau_guess(mode, kernel))]
    if zeros is not None and len(zeros) == kernel.N:
        upper, _ = deflated_pair(mode, kernel, zeros)
        if upper.imag > 0:
            guesses.append(("newton_deflation", complex(upper.real / mode.a, upper.imag / mode.a - 1.0)))
        else:
            status["deflation"] = "remaining pair is real"
    for route, tau0 in guesses:
        try:
            tau, res, it = _newton_tau(mode, kernel, tau0, 1.0, tol)
        except (NoConvergence, PoleProximityError) as exc:
            status[route] = str(exc)
            continue
        if mode.a * (tau.imag + 1.0) > 1e-12 * mode.a:
            return ComplexPair(tau, mode.a, route, res, it)
        status[route] = "converged to a real zero"

    if "deflation" in status:
        return None
    if use_oracle:
        from .oracle import oracle_roots

        try:
            roots = oracle_roots(mode, kernel)
        except OracleError as exc:
            status["oracle"] = str(exc)
            return None
        upper = [z for z in roots if z.imag > 0]
        if upper:
            lam = max(upper, key=lambda z: z.imag)
            return _pair_from_lam(mode, lam, "oracle", abs(eval_ell(mode, kernel, lam)))
        status["oracle"] = "no root in the upper half-plane"
    return None


# ----------------------------------------------------------------------------
# assembly

def full_slice(mode: Mode, kernel: ExponentialKernel) -> SpectrumSlice:
    status: dict = {}
    fz = f_zeros(mode, kernel)
    zeros = real_zeros(mode, kernel)
    unstable: list[float] = []
    if zeros and zeros[0].value > 0:
        unstable.append(zeros[0].value)
    pair = complex_pair(mode, kernel, zeros, status=status)
    extra: list[float] = []
    if pair is None and status.get("deflation") == "remaining pair is real":
        tol = residual_tol(mode)
        for guess in deflated_pair(mode, kernel, zeros):
            try:
                x, _, _ = _newton_real(mode, kernel, guess.real, tol)
            except (NoConvergence, PoleProximityError) as exc:
                status["extra_real"] = str(exc)
                continue
            extra.append(x)
        if len(extra) == 2 and abs(extra[0] - extra[1]) <= 1e-10 * max(1.0, abs(extra[0])):
            status["extra_real"] = "deflated real pair collapsed onto one zero"
    residuals = [z.residual for z in zeros]
    if pair is not None:
        residuals.append(pair.residual)
    residuals += [abs(eval_ell(mode, kernel, x)) for x in extra]
    return SpectrumSlice(
        mode=mode,
        real_zeros=[z for z in zeros if z.value <= 0],
        f_zeros=fz,
        complex_pair=pair,
        unstable_real=unstable,
        extra_real=sorted(extra, reverse=True),
        residual_max=max(residuals) if residuals else 0.0,
        status=status,
    )


def interlacing_violations(kernel: ExponentialKernel, slc: SpectrumSlice) -> list[int]:
    """1-based indices k where ``-gamma_k < lam_k < x_k < -gamma_{k-1}`` fails.

    The k = 1 zero is taken from ``unstable_real`` when the mode is unstable.
    """
    by_k = {z.k: z.value for z in slc.real_zeros}
    if slc.unstable_real:
        by_k[1] = slc.unstable_real[0]
    bad = []
    for k in range(1, kernel.N + 1):
        lam = by_k.get(k)
        x = slc.f_zeros[k - 1]
        lower = -kernel.gamma[k - 1]
        upper = -kernel.gamma[k - 2] if k >= 2 else math.inf
        if lam is None or not (lower < lam < x < upper):
            bad.append(k)
    return bad


@dataclass
class PoleLimitRow:
    a: float
    lam: float
    psi: float
    scaled: float


def pole_limit_study(kernel: ExponentialKernel, k: int, theta: float,
                     a_grid) -> list[PoleLimitRow]:
    """Track ``psi_k = lam_k + gamma_k`` as the mode grows; 1-based ``k``.

    The last column ``psi_k T / c_k`` stays bounded near 1 when ``theta < 1``.
    """
    if not 1 <= k <= kernel.N:
        raise IndexError(f"k={k} outside 1..{kernel.N}")
    a_grid = [float(a) for a in a_grid]
    if any(b <= a for a, b in zip(a_grid, a_grid[1:])):
        raise ValueError("a_grid must be increasing")
    rows = []
    for a in a_grid:
        mode = Mode(a, theta)
        phi = _f_zero_offset(mode, kernel, k - 1)
        z = _real_zero(mode, kernel, k - 1, phi)
        rows.append(PoleLimitRow(a, z.value, z.psi, z.psi * mode.threshold / kernel.c[k - 1]))
    return rows

