"""Fluctuating Beckmann fading: first- and second-order statistics, error rates and simulators."""

from .errors import ConvergenceError, DomainError, NumericalError
from .first_order import (
    EvalGrid,
    cdf_envelope,
    cdf_snr,
    mgf,
    mgf_via_conditional_average,
    pdf_envelope,
    pdf_snr,
    phi2_series_oracle,
)
from .laplace import InversionConfig, invert
from .params import (
    M_LARGE,
    PhysicalParams,
    ShapeParams,
    SpecialCase,
    factorize,
    special_case,
    to_physical,
    to_shape,
    validate,
)
from .second_order import DopplerContext, LcrConfig, afd, lcr
from .sep import SepQuery, sep_dbpsk, sep_mfsk_noncoherent

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "DopplerContext",
    "EvalGrid",
    "InversionConfig",
    "LcrConfig",
    "M_LARGE",
    "NumericalError",
    "PhysicalParams",
    "SepQuery",
    "ShapeParams",
    "SpecialCase",
    "afd",
    "cdf_envelope",
    "cdf_snr",
    "factorize",
    "invert",
    "lcr",
    "mgf",
    "mgf_via_conditional_average",
    "pdf_envelope",
    "pdf_snr",
    "phi2_series_oracle",
    "sep_dbpsk",
    "sep_mfsk_noncoherent",
    "special_case",
    "to_physical",
    "to_shape",
    "validate",
]
