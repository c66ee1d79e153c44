"""Entropy estimation on large alphabets via best polynomial approximation."""

from .core import Distribution, DomainError, Fingerprint, Histogram, entr, entropy, falling_factorial, fingerprint
from .estimators import EstimatorConfig, PolyEstimatorTable, build_poly_table, miller_madow, plugin_entropy, poly_entropy
from .polyapprox import ChebApprox, RemezError, remez, rescale, sup_error, zero_constant_term
from .sampling import Seed, SyntheticSpec, make_distribution, sample_multinomial, sample_poissonized, split_histogram

__version__ = "0.1.0"

__all__ = [
    "ChebApprox",
    "Distribution",
    "DomainError",
    "EstimatorConfig",
    "Fingerprint",
    "Histogram",
    "PolyEstimatorTable",
    "RemezError",
    "Seed",
    "SyntheticSpec",
    "build_poly_table",
    "entr",
    "entropy",
    "falling_factorial",
    "fingerprint",
    "make_distribution",
    "miller_madow",
    "plugin_entropy",
    "poly_entropy",
    "remez",
    "rescale",
    "sample_multinomial",
    "sample_poissonized",
    "split_histogram",
    "sup_error",
    "zero_constant_term",
]
