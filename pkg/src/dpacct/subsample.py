"""Privacy amplification by Poisson subsampling, and the DP-SGD accountant.

All bounds here assume add/remove neighbours: ``M^U(x)`` is a mixture
``pP + (1-p)Q`` of the output with and without the differing record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Union

import numpy as np
from scipy import special

from .accountants import rdp_group_shift, rdp_to_adp
from .composition import advanced_compose
from .core import (AssumptionNotMet, EpsDelta, InvalidParameter, Neighbouring, RdpCurve,
                   ZcdpBound, require_add_remove)
from .gaussian import gaussian_eps

EpsFn = Union[Callable[[int], float], Mapping[int, float], RdpCurve]

DPSGD_ALPHA_MAX = 256
DPSGD_ALPHA_CAP = 4096


@dataclass(frozen=True)
class SubsampleParams:
    p: float
    omega: float = math.inf

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise InvalidParameter("p must be in [0,1]")
        if not self.omega > 1:
            raise InvalidParameter("omega must be > 1")


def _check_p(p):
    if not 0 <= p <= 1:
        raise InvalidParameter("p must be in [0,1]")


def amplify_adp(g: EpsDelta, p: float,
                neighbouring: Neighbouring = Neighbouring.ADD_REMOVE) -> EpsDelta:
    """``(log(1 + p(e^eps - 1)), p delta)``."""
    _check_p(p)
    require_add_remove(neighbouring)
    return EpsDelta(math.log1p(p * math.expm1(g.eps)), p * g.delta)


def _lookup(eps_fn: EpsFn, k: int) -> float:
    try:
        if isinstance(eps_fn, RdpCurve):
            return eps_fn.at(k)
        if isinstance(eps_fn, Mapping):
            return float(eps_fn[k])
        return float(eps_fn(k))
    except (KeyError, InvalidParameter):
        raise InvalidParameter(f"eps_fn has no value at order {k}") from None


def _log_binom(n, k):
    return special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)


def subsampled_rdp_exact(eps_fn: EpsFn, p: float, alpha_max: int,
                         neighbouring: Neighbouring = Neighbouring.ADD_REMOVE) -> RdpCurve:
    """RDP curve of the subsampled mechanism on integer orders ``2..alpha_max``.

    For each integer ``a``::

        eps'(a) = log((1-p)^(a-1) (1 + (a-1) p)
                      + sum_{k=2}^a C(a,k) (1-p)^(a-k) p^k e^((k-1) eps(k))) / (a-1)

    evaluated in log space.  Non-integer orders are served by
    :func:`rdp_at_order` via the next integer.
    """
    _check_p(p)
    require_add_remove(neighbouring)
    if int(alpha_max) != alpha_max or alpha_max < 2:
        raise InvalidParameter("alpha_max must be an integer >= 2")
    alpha_max = int(alpha_max)
    orders = np.arange(2, alpha_max + 1)
    if p == 0:
        return RdpCurve(tuple(orders.tolist()), (0.0,) * orders.size)
    eps = np.array([_lookup(eps_fn, int(k)) for k in orders])
    if p == 1:
        return RdpCurve(tuple(orders.tolist()), tuple(eps.tolist()))
    log_p, log_q = math.log(p), math.log1p(-p)
    # (k - 1) eps(k) + k log p for k = 2..alpha_max
    ks = orders.astype(float)
    head = (ks - 1) * eps + ks * log_p
    out = []
    for a in orders:
        kk = ks[: a - 1]
        terms = _log_binom(a, kk) + (a - kk) * log_q + head[: a - 1]
        first = (a - 1) * log_q + math.log1p((a - 1) * p)
        lse = special.logsumexp(np.concatenate(([first], terms)))
        out.append(max(0.0, float(lse) / (a - 1)))
    # the series is nondecreasing in the order; smooth out last-ulp wobble
    out = np.maximum.accumulate(out)
    return RdpCurve(tuple(orders.tolist()), tuple(out.tolist()))


class OrderLookup(NamedTuple):
    eps: float
    order: int
    rounded_up: bool


def rdp_at_order(curve: RdpCurve, alpha: float) -> OrderLookup:
    """Value at ``ceil(alpha)`` on an integer-order curve, flagging the rounding."""
    k = math.ceil(alpha - 1e-12)
    return OrderLookup(curve.at(k), k, k != alpha)


def flip_bound(d_mix_q: float, d_mix_p: float, p: float, alpha: float) -> float:
    """Bound on ``D_a(Q || pP + (1-p)Q)`` from the two forward divergences.

    ``d_mix_q`` is ``D_a(pP + (1-p)Q || Q)`` and ``d_mix_p`` is
    ``D_a(pQ + (1-p)P || P)``; they are mixed with weight
    ``lam = (2a-1)p / ((2a-1)p + 3(1-p))`` in exponential scale.
    """
    _check_p(p)
    if not alpha > 1:
        raise InvalidParameter("alpha must be > 1")
    lam = (2 * alpha - 1) * p / ((2 * alpha - 1) * p + 3 * (1 - p))
    if lam == 0:
        return d_mix_q
    if lam == 1:
        return d_mix_p
    b = (alpha - 1)
    lse = np.logaddexp(math.log1p(-lam) + b * d_mix_q, math.log(lam) + b * d_mix_p)
    return float(lse) / b


def _check_analytic(p, alpha, omega):
    if not 0 <= p <= 1 - math.exp(-1):
        raise InvalidParameter("p must be in [0, 1 - 1/e]")
    if not 1 < alpha <= omega:
        raise InvalidParameter("need 1 < alpha <= omega")


def subsampled_rdp_analytic(d2: float, d_omega: float, p: float, alpha: float, omega: float,
                            form: str = "simple") -> float:
    """Analytic bound on ``D_a(pP + (1-p)Q || Q)`` from ``D_2(P||Q)`` and ``D_omega(P||Q)``.

    ``form="simple"``: ``a e/2 p^2 (e^D2 - 1) + p ((a-1) p e^Dw)^(w-1)``.
    ``form="log"``: ``log(1 + e/2 a(a-1) p^2 (e^D2 - 1) + ((a-1)p)^w e^((w-1)Dw)) / (a-1)``,
    which is never larger.
    """
    _check_analytic(p, alpha, omega)
    if p == 0:
        return 0.0
    c = 0.5 * math.e * p * p * math.expm1(d2)
    x = (alpha - 1) * p
    if form == "simple":
        log_tail = math.log(p) + (omega - 1) * (math.log(x) + d_omega)
        return math.inf if log_tail > 700 else alpha * c + math.exp(log_tail)
    if form != "log":
        raise InvalidParameter(f"unknown form {form!r}")
    log_tail = omega * math.log(x) + (omega - 1) * d_omega
    lse = np.logaddexp(math.log1p(alpha * (alpha - 1) * c), log_tail)
    return float(lse) / (alpha - 1)


def subsampled_rdp_analytic_gaussian(rho: float, p: float, alpha: float) -> float:
    """Log-form analytic bound for a rho-zCDP inner mechanism, best over ``omega >= alpha``.

    With ``D_w = rho w`` the log-tail is quadratic in ``w`` and is minimised at
    ``w* = (rho - log((a-1)p)) / (2 rho)``.
    """
    x = (alpha - 1) * p
    omega = max(alpha, (rho - math.log(x)) / (2 * rho)) if x > 0 else alpha
    return subsampled_rdp_analytic(2 * rho, rho * omega, p, alpha, omega, form="log")


def subsampled_rdp_large_alpha(d_alpha: float, p: float, alpha: float) -> float:
    """``a/(a-1) log(1 - p + p e^((1-1/a) D_a))``."""
    _check_p(p)
    if not alpha > 1:
        raise InvalidParameter("alpha must be > 1")
    if p == 0:
        return 0.0
    if p == 1:
        return d_alpha
    lse = np.logaddexp(math.log1p(-p), math.log(p) + (1 - 1 / alpha) * d_alpha)
    return alpha / (alpha - 1) * float(lse)


def asymptotic_omega(rho: float, p: float) -> float:
    if p == 0:
        return math.inf
    return min(math.log(1 / p) / (4 * rho), 1 + p ** -0.25)


def subsampled_zcdp_asymptotic(rho: ZcdpBound | float, p: float, alpha: float) -> float:
    """``10 p^2 rho alpha`` for ``alpha < omega``, when the side conditions hold."""
    rho = rho.rho if isinstance(rho, ZcdpBound) else float(rho)
    if not 0 <= p <= 0.5:
        raise InvalidParameter("p must be in [0, 1/2]")
    if not 0 < rho <= 1:
        raise InvalidParameter("rho must be in (0, 1]")
    omega = asymptotic_omega(rho, p)
    if p > 0:
        need = 3 + 2 * math.log(1 / rho) / math.log(1 / p)
        if omega < need:
            raise AssumptionNotMet(f"omega = {omega:.6g} < {need:.6g}", omega)
    if not 1 < alpha < omega:
        raise AssumptionNotMet(f"alpha must lie in (1, omega = {omega:.6g})", omega)
    return 10 * p * p * rho * alpha


def fixed_size_via_group_privacy(eps_fn: EpsFn, p: float, alpha: float, alpha_prime: float,
                                 reverse_fn: EpsFn | None = None) -> float:
    """Group-privacy bound for swapping one record inside a subsample.

    The two hops are ``pP + (1-p)Q -> Q`` (bounded by the subsampled forward
    curve of ``eps_fn``) and ``Q -> pP' + (1-p)Q`` (bounded by the subsampled
    curve of ``reverse_fn``, defaulting to ``eps_fn``).  Orders that are not
    integers are rounded up.
    """
    if not 1 < alpha < alpha_prime:
        raise InvalidParameter("need 1 < alpha < alpha_prime")
    inner = alpha * (alpha_prime - 1) / (alpha_prime - alpha)
    top = max(2, math.ceil(inner - 1e-12), math.ceil(alpha_prime - 1e-12))
    fwd = subsampled_rdp_exact(eps_fn, p, top)
    rev = fwd if reverse_fn is None else subsampled_rdp_exact(reverse_fn, p, top)
    one = lambda a: rdp_at_order(fwd, max(a, 2)).eps
    two = lambda a: rdp_at_order(rev, max(a, 2)).eps
    return rdp_group_shift(one, two, alpha, alpha_prime)


class DpsgdResult(NamedTuple):
    eps: float
    alpha: float
    curve: RdpCurve
    naive_eps: float
    naive_split: float


def naive_dpsgd_eps(p: float, rho: float, steps: int, delta: float) -> tuple[float, float]:
    """Amplify an (eps0, delta0) Gaussian guarantee, then use advanced composition.

    The failure budget is split as ``delta = steps p delta0 + delta'``; the
    split fraction ``delta'/delta`` is chosen from a grid.  Returns
    ``(eps, fraction)``.
    """
    best = (math.inf, math.nan)
    for frac in np.linspace(0.05, 0.95, 19):
        d_prime = frac * delta
        d0 = (delta - d_prime) / (steps * p) if p > 0 else 0.5
        d0 = min(d0, 0.5)
        e0 = gaussian_eps(rho, d0)
        step = amplify_adp(EpsDelta(e0, d0), p)
        eps = advanced_compose([step] * steps, d_prime).eps
        if eps < best[0]:
            best = (eps, float(frac))
    return best


def dpsgd_account(p: float, sigma: float, sensitivity: float, steps: int, delta: float,
                  alpha_max: int = DPSGD_ALPHA_MAX, variant: str = "sharp",
                  naive: bool = True) -> DpsgdResult:
    """Epsilon of ``steps`` Poisson-subsampled Gaussian steps at ``delta``.

    Pipeline: exact subsampled RDP of the rho-zCDP step on integer orders,
    multiplied by ``steps``, converted to (eps, delta).  The order range is
    doubled (up to 4096) while the best order sits on the upper end.
    """
    if not sigma > 0:
        raise InvalidParameter("sigma must be > 0")
    if int(steps) != steps or steps < 1:
        raise InvalidParameter("steps must be a positive integer")
    if not 0 < delta < 1:
        raise InvalidParameter("delta must be in (0,1)")
    _check_p(p)
    rho = sensitivity ** 2 / (2 * sigma ** 2)
    while True:
        step = subsampled_rdp_exact(lambda k: k * rho, p, alpha_max)
        curve = step.scaled(steps)
        conv = rdp_to_adp(curve, delta, variant)
        if conv.alpha < alpha_max or alpha_max >= DPSGD_ALPHA_CAP:
            break
        alpha_max = min(2 * alpha_max, DPSGD_ALPHA_CAP)
    naive_eps, split = math.nan, math.nan
    if p == 0:
        naive_eps = 0.0
    elif naive:
        naive_eps, split = naive_dpsgd_eps(p, rho, int(steps), delta)
    return DpsgdResult(conv.eps, conv.alpha, curve, naive_eps, split)
