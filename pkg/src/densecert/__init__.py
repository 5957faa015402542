"""Certified Engel expansions, dense-set approximation and irrationality certificates."""

from .certify import (
    EngelCertificate,
    EulerCertificate,
    RootCertificate,
    certify_e,
    certify_engel_number,
    certify_nth_root,
    verify_certificate,
    verify_root_certificate,
)
from .density import approx_additive, make_witness, rational_min_gap, witness_below
from .engel import EngelExpansion, engel_digits, partial_sum
from .errors import BudgetError, DenseCertError, Rejection
from .exactnum import (
    EulerE,
    Interval,
    Linear,
    NaturalLog,
    NthRoot,
    Quotient,
    RationalLit,
    RealSpec,
    Shifted,
    approximate,
)
from .haarcheck import Hyperbola, HyperbolaPlus, SampleTable, invariance_check, two_dilation_audit
from .muldensity import MulProblem, approx_multiplicative, approx_signed

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "DenseCertError",
    "EngelCertificate",
    "EngelExpansion",
    "EulerCertificate",
    "EulerE",
    "Hyperbola",
    "HyperbolaPlus",
    "Interval",
    "Linear",
    "MulProblem",
    "NaturalLog",
    "NthRoot",
    "Quotient",
    "RationalLit",
    "RealSpec",
    "Rejection",
    "RootCertificate",
    "SampleTable",
    "Shifted",
    "approx_additive",
    "approx_multiplicative",
    "approx_signed",
    "approximate",
    "certify_e",
    "certify_engel_number",
    "certify_nth_root",
    "engel_digits",
    "invariance_check",
    "make_witness",
    "partial_sum",
    "rational_min_gap",
    "two_dilation_audit",
    "verify_certificate",
    "verify_root_certificate",
    "witness_below",
]
