"""Spectral analysis of wave equations with exponential-sum memory kernels."""

from .errors import (
    BracketError,
    ConfigError,
    ContractionFailed,
    DivergentSeriesError,
    InsufficientPeaks,
    KernelValidationError,
    NoConvergence,
    NotUnstable,
    OracleError,
    PoleProximityError,
    SectorError,
    StepSizeError,
    VoltspecError,
)
from .kernel import (
    ConditionReport,
    ExponentialKernel,
    PowerLawFamily,
    check_conditions,
    eval_time,
    from_power_law,
    integral_approximant_h,
    laplace,
    laplace_deriv,
    load_kernel,
    make_exponential,
    sector_decay_probe,
)
from .symbol import Mode, SymbolPolynomial, eval_ell, eval_ell_deriv, poly_coeffs
from .roots import (
    ComplexPair,
    RealZero,
    SpectrumSlice,
    complex_pair_fixed_point,
    f_zeros,
    full_slice,
    newton_polish,
    pole_limit_study,
    real_zeros,
)
from .oracle import (
    augmented_matrix,
    companion_roots,
    crosscheck,
    matrix_eigs,
    vieta_check,
)

__version__ = "0.1.0"
