"""Accounting for whole mechanism descriptions.

Each function maps a :data:`~dpacct.core.MechanismSpec` to one guarantee
representation, raising :class:`InvalidParameter` when the description does
not carry enough information for it (for example an ``ApproxDp`` part has no
Renyi curve).
"""

from __future__ import annotations

import math
from typing import Sequence

from .accountants import DEFAULT_ORDERS, rdp_compose, rdp_to_adp, zcdp_to_eps
from .composition import advanced_compose, basic_compose
from .core import (ApproxDp, Composed, DiscretePld, EpsDelta, Gaussian, InvalidParameter,
                   Laplace, MechanismSpec, PoissonSubsampled, PureDp, RandomizedResponse, Rdp,
                   RdpCurve, Zcdp, validate)
from .gaussian import gaussian_eps
from .pld import (DEFAULT_GRID_STEP, DEFAULT_TAIL_MASS, GaussianPld, convolve, discretize,
                  eps_from_pld, laplace_pld, rr_pld)
from .subsample import amplify_adp, rdp_at_order, subsampled_rdp_exact


def _checked(spec):
    problems = validate(spec)
    if problems:
        raise InvalidParameter("; ".join(problems))


def to_eps_delta(spec: MechanismSpec, method: str = "basic", delta: float = 1e-6) -> EpsDelta:
    """An (eps, delta) guarantee; ``Composed`` uses ``method`` (basic or advanced).

    ``Gaussian`` and ``Zcdp`` parts are converted at ``delta``.
    """
    _checked(spec)
    if isinstance(spec, PureDp):
        return EpsDelta(spec.eps, 0.0)
    if isinstance(spec, (ApproxDp, RandomizedResponse)):
        return EpsDelta(spec.eps, spec.delta)
    if isinstance(spec, Laplace):
        return EpsDelta(spec.sensitivity / spec.scale, 0.0)
    if isinstance(spec, Gaussian):
        rho = spec.sensitivity ** 2 / (2 * spec.sigma ** 2)
        return EpsDelta(gaussian_eps(rho, delta), delta)
    if isinstance(spec, Zcdp):
        return EpsDelta(zcdp_to_eps(spec.rho, delta), delta)
    if isinstance(spec, Rdp):
        return EpsDelta(rdp_to_adp(spec.curve, delta).eps, delta)
    if isinstance(spec, PoissonSubsampled):
        return amplify_adp(to_eps_delta(spec.inner, method, delta), spec.p)
    if isinstance(spec, Composed):
        parts = [to_eps_delta(s, "basic", delta) for s in spec.parts]
        if method == "basic":
            return basic_compose(parts)
        if method == "advanced":
            return advanced_compose(parts, delta)
        raise InvalidParameter(f"unknown composition method {method!r}")
    raise InvalidParameter(f"cannot account for {type(spec).__name__}")


def to_rdp(spec: MechanismSpec, orders: Sequence[float] = DEFAULT_ORDERS) -> RdpCurve:
    """Renyi curve on ``orders`` (subsampled parts round orders up to integers)."""
    _checked(spec)
    orders = tuple(orders)
    if isinstance(spec, Gaussian):
        return RdpCurve.linear(spec.sensitivity ** 2 / (2 * spec.sigma ** 2), orders)
    if isinstance(spec, Zcdp):
        return RdpCurve.linear(spec.rho, orders)
    if isinstance(spec, (PureDp, Laplace)):
        eps = spec.eps if isinstance(spec, PureDp) else spec.sensitivity / spec.scale
        return RdpCurve(orders, tuple(min(eps * eps * a / 2, eps) for a in orders))
    if isinstance(spec, Rdp):
        return spec.curve
    if isinstance(spec, PoissonSubsampled):
        top = max(2, math.ceil(max(orders) - 1e-12))
        integer_orders = tuple(range(2, top + 1))
        inner = to_rdp(spec.inner, sorted(set(integer_orders) | set(orders)))
        sub = subsampled_rdp_exact(inner, spec.p, top)
        return RdpCurve(orders, tuple(rdp_at_order(sub, a).eps for a in orders))
    if isinstance(spec, Composed):
        return rdp_compose([to_rdp(s, orders) for s in spec.parts])
    raise InvalidParameter(f"{type(spec).__name__} has no Renyi curve")


def to_pld(spec: MechanismSpec, grid_step: float = DEFAULT_GRID_STEP,
           tail_mass: float = DEFAULT_TAIL_MASS) -> DiscretePld:
    """Pessimistic discrete PLD; (eps, delta) parts use the randomized-response PLD."""
    _checked(spec)
    if isinstance(spec, Gaussian):
        return discretize(GaussianPld(spec.sensitivity ** 2 / (2 * spec.sigma ** 2)),
                          grid_step, tail_mass)
    if isinstance(spec, Laplace):
        return laplace_pld(spec.sensitivity, spec.scale, grid_step)
    if isinstance(spec, PureDp):
        return rr_pld(spec.eps, 0.0)
    if isinstance(spec, (ApproxDp, RandomizedResponse)):
        return rr_pld(spec.eps, spec.delta)
    if isinstance(spec, Composed):
        out = to_pld(spec.parts[0], grid_step, tail_mass)
        for s in spec.parts[1:]:
            out = convolve(out, to_pld(s, grid_step, tail_mass), max_atoms=200_000,
                           grid_step=grid_step)
        return out
    raise InvalidParameter(f"{type(spec).__name__} has no PLD representation here")


def compose(spec: MechanismSpec, method: str, delta: float) -> EpsDelta:
    """(eps, delta) for ``spec`` using one of basic, advanced, rdp or pld."""
    if method in ("basic", "advanced"):
        return to_eps_delta(spec, method, delta)
    if method == "rdp":
        return EpsDelta(rdp_to_adp(to_rdp(spec), delta).eps, delta)
    if method == "pld":
        return EpsDelta(eps_from_pld(to_pld(spec), delta), delta)
    raise InvalidParameter(f"unknown method {method!r}")
