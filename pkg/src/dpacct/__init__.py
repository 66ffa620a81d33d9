"""Differential-privacy accounting: conversions, composition, subsampling and oracles."""

from .core import (ApproxDp, Composed, DiscreteDist, DiscretePld, EpsDelta, Gaussian,
                   GuaranteeNotSatisfied, InvalidParameter, AssumptionNotMet, Laplace,
                   Neighbouring, NoCommonOrders, PoissonSubsampled, PureDp, RandomizedResponse,
                   Rdp, RdpCurve, Zcdp, ZcdpBound, dumps_spec, loads_spec, validate)

__all__ = [
    "ApproxDp", "AssumptionNotMet", "Composed", "DiscreteDist", "DiscretePld", "EpsDelta",
    "Gaussian", "GuaranteeNotSatisfied", "InvalidParameter", "Laplace", "Neighbouring",
    "NoCommonOrders", "PoissonSubsampled", "PureDp", "RandomizedResponse", "Rdp", "RdpCurve",
    "Zcdp", "ZcdpBound", "dumps_spec", "loads_spec", "validate",
]

__version__ = "0.1.0"
