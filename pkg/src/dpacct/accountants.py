"""zCDP and Renyi-DP accounting: conversions, composition and the group shift."""

from __future__ import annotations

import math
from typing import Callable, Iterable, NamedTuple, Sequence, Union

from scipy import optimize

from .core import (InvalidParameter, NoCommonOrders, RdpCurve, ZcdpBound, canonical_order)

DEFAULT_ORDERS: tuple[float, ...] = tuple(
    [1 + i / 10 for i in range(1, 10)] + list(range(2, 65)) + [128, 256])

T_BOUNDS = (1e-6, 1e6)
T_TOL = 1e-10

CurveLike = Union[RdpCurve, Callable[[float], float]]


def pure_to_zcdp(eps: float) -> ZcdpBound:
    if not eps >= 0:
        raise InvalidParameter("eps must be >= 0")
    return ZcdpBound(0.5 * eps * eps)


def compose_zcdp(rhos: Iterable[ZcdpBound | float]) -> ZcdpBound:
    return ZcdpBound(math.fsum(r.rho if isinstance(r, ZcdpBound) else r for r in rhos))


def _rho(rho) -> float:
    rho = rho.rho if isinstance(rho, ZcdpBound) else float(rho)
    if not rho >= 0:
        raise InvalidParameter("rho must be >= 0")
    return rho


class ZcdpDelta(NamedTuple):
    optimized: float
    loose: float
    vacuous: bool
    t: float


def _log_sharp_delta(t: float, rho: float, eps: float) -> float:
    """log of ``exp(t(t+1)rho - eps t) / (t+1) * (1 - 1/(t+1))^t``."""
    return t * (t + 1) * rho - eps * t - math.log1p(t) + t * (math.log(t) - math.log1p(t))


def zcdp_to_delta(rho: ZcdpBound | float, eps: float) -> ZcdpDelta:
    """Delta at ``eps`` implied by rho-zCDP, optimised over the moment order ``t``.

    For ``eps < rho`` no nontrivial delta follows and ``(1, 1, vacuous=True)``
    is returned.  The search is a bounded scalar minimisation over ``log t``
    on ``[1e-6, 1e6]``; the objective is convex in ``t``.
    """
    rho = _rho(rho)
    if rho == 0:
        return ZcdpDelta(0.0, 0.0, False, math.inf)
    if eps < rho:
        return ZcdpDelta(1.0, 1.0, True, 0.0)
    gap = eps - rho
    loose = math.exp(-gap * gap / (4 * rho))
    if gap == 0:
        return ZcdpDelta(1.0, 1.0, True, 0.0)
    f = lambda u: _log_sharp_delta(math.exp(u), rho, eps)
    lo, hi = math.log(T_BOUNDS[0]), math.log(T_BOUNDS[1])
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": T_TOL})
    candidates = [(res.fun, math.exp(res.x))]
    t_guess = gap / (2 * rho)
    if T_BOUNDS[0] <= t_guess <= T_BOUNDS[1]:
        candidates.append((_log_sharp_delta(t_guess, rho, eps), t_guess))
    for u in (lo, hi):
        candidates.append((f(u), math.exp(u)))
    best, t = min(candidates)
    return ZcdpDelta(min(1.0, math.exp(best)), min(1.0, loose), False, t)


def zcdp_to_eps(rho: ZcdpBound | float, delta: float, mode: str = "tight",
                tol: float = 1e-12) -> float:
    """``eps`` such that rho-zCDP implies (eps, delta)-DP.

    ``mode="remark"`` gives ``rho + 2 sqrt(rho log(1/delta))``; ``mode="tight"``
    bisects the optimised delta curve down to the smallest sufficient eps.
    """
    rho = _rho(rho)
    if not 0 < delta < 1:
        raise InvalidParameter("delta must be in (0,1)")
    remark = rho + 2 * math.sqrt(rho * math.log(1 / delta))
    if mode == "remark" or rho == 0:
        return remark
    if mode != "tight":
        raise InvalidParameter(f"unknown mode {mode!r}")
    lo, hi = rho, remark
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if zcdp_to_delta(rho, mid).optimized <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def zcdp_rho_for(eps: float, delta: float) -> float:
    """Largest rho whose remark conversion gives (eps, delta): ``(sqrt(L+eps) - sqrt(L))^2``."""
    if not eps >= 0 or not 0 < delta < 1:
        raise InvalidParameter("need eps >= 0 and delta in (0,1)")
    L = math.log(1 / delta)
    # (sqrt(L+eps) - sqrt(L))^2 without cancellation
    return (eps / (math.sqrt(L + eps) + math.sqrt(L))) ** 2


def zcdp_to_rdp(rho: ZcdpBound | float, orders: Sequence[float] = DEFAULT_ORDERS) -> RdpCurve:
    return RdpCurve.linear(_rho(rho), orders)


def rdp_compose(curves: Sequence[RdpCurve]) -> RdpCurve:
    """Pointwise sum over the orders common to every curve."""
    if not curves:
        raise InvalidParameter("need at least one curve")
    common = set(curves[0].orders)
    for c in curves[1:]:
        common &= set(c.orders)
    if not common:
        raise NoCommonOrders("curves share no orders")
    orders = sorted(common)
    maps = [c.as_dict() for c in curves]
    return RdpCurve(tuple(orders), tuple(math.fsum(m[a] for m in maps) for a in orders))


class RdpConversion(NamedTuple):
    eps: float
    alpha: float


def rdp_to_adp(curve: RdpCurve, delta: float, variant: str = "sharp") -> RdpConversion:
    """Best ``eps`` over the curve's orders for the target ``delta``.

    ``variant="simple"`` uses ``eps(a) + log(1/delta)/(a-1)``; ``"sharp"``
    also credits the factor ``(1/a)(1 - 1/a)^(a-1)``.
    """
    if not 0 < delta < 1:
        raise InvalidParameter("delta must be in (0,1)")
    if variant not in ("sharp", "simple"):
        raise InvalidParameter(f"unknown variant {variant!r}")
    best = (math.inf, math.nan)
    for a, e in zip(curve.orders, curve.eps_at):
        log_slack = math.log(1 / delta)
        if variant == "sharp":
            log_slack += -math.log(a) + (a - 1) * math.log1p(-1 / a)
        # zero divergence at any order means P = Q
        cand = 0.0 if e == 0 else max(e, e + log_slack / (a - 1))
        if cand < best[0]:
            best = (cand, a)
    return RdpConversion(*best)


def _evaluate(curve: CurveLike, alpha: float) -> float:
    return curve.at(alpha) if isinstance(curve, RdpCurve) else float(curve(alpha))


def rdp_group_shift(curve1: CurveLike, curve2: CurveLike, alpha: float,
                    alpha_prime: float) -> float:
    """Bound on ``D_a(P||R)`` from bounds on ``D(P||Q)`` and ``D(Q||R)``.

    Returns ``a'/(a'-1) * eps1(a (a'-1)/(a'-a)) + eps2(a')`` for
    ``1 < a < a'``.
    """
    if not 1 < alpha < alpha_prime:
        raise InvalidParameter("need 1 < alpha < alpha_prime")
    if math.isinf(alpha_prime):
        return _evaluate(curve1, alpha) + _evaluate(curve2, alpha_prime)
    inner = alpha * (alpha_prime - 1) / (alpha_prime - alpha)
    return alpha_prime / (alpha_prime - 1) * _evaluate(curve1, inner) + _evaluate(curve2, alpha_prime)


def rdp_group_shift_opt(curve1: Callable[[float], float], curve2: Callable[[float], float],
                        alpha: float, max_log_gap: float = 30.0) -> tuple[float, float]:
    """Minimise the group shift over ``alpha'``; returns ``(bound, alpha')``."""
    if not alpha > 1:
        raise InvalidParameter("alpha must be > 1")
    f = lambda u: rdp_group_shift(curve1, curve2, alpha, alpha + math.exp(u))
    res = optimize.minimize_scalar(f, bounds=(-max_log_gap, max_log_gap), method="bounded",
                                   options={"xatol": 1e-12})
    return float(res.fun), alpha + math.exp(res.x)


def grid(lo: float, hi: float, step: float) -> tuple[float, ...]:
    """Evenly spaced orders ``lo, lo+step, ... <= hi`` (canonicalised)."""
    n = int(math.floor((hi - lo) / step + 1e-9))
    return tuple(canonical_order(lo + i * step) for i in range(n + 1))
