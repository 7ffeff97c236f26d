"""Optimal bond portfolios from maturity-difference return correlations."""

from .laurent import (
    DEFAULT_TRUNCATION,
    LaurentSeries,
    Polynomial,
    RationalFunction,
    expand_rational,
    inner_product,
    multiply,
    project_plus,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TRUNCATION",
    "LaurentSeries",
    "Polynomial",
    "RationalFunction",
    "expand_rational",
    "inner_product",
    "multiply",
    "project_plus",
    "__version__",
]
