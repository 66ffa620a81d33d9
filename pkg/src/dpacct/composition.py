"""Composition theorems for approximate DP guarantees."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import special

from .core import EpsDelta, InvalidParameter

OPTIMAL_TOL = 1e-9


def basic_compose(parts: Sequence[EpsDelta]) -> EpsDelta:
    """``(sum eps_j, sum delta_j)``, with delta capped at 1."""
    return EpsDelta(math.fsum(g.eps for g in parts),
                    min(1.0, math.fsum(g.delta for g in parts)))


def advanced_compose_pure(eps: Sequence[float], delta: float) -> float:
    """``sum eps_j^2 / 2 + sqrt(2 log(1/delta) sum eps_j^2)`` for pure-DP parts."""
    if not 0 < delta < 1:
        raise InvalidParameter("delta must be in (0,1)")
    sq = math.fsum(e * e for e in eps)
    return 0.5 * sq + math.sqrt(2 * math.log(1 / delta) * sq)


def advanced_compose(parts: Sequence[EpsDelta], delta_prime: float) -> EpsDelta:
    """Advanced composition for (eps_j, delta_j) parts.

    ``eps = min(sum eps_j, advanced_compose_pure(eps_j, delta'))`` and
    ``delta = delta' + sum delta_j``.
    """
    if not delta_prime > 0:
        raise InvalidParameter("delta_prime must be > 0")
    eps = [g.eps for g in parts]
    total = math.fsum(eps)
    if delta_prime < 1:
        total = min(total, advanced_compose_pure(eps, delta_prime))
    return EpsDelta(total, min(1.0, delta_prime + math.fsum(g.delta for g in parts)))


def _check_homogeneous(eps0, delta0, k):
    if not eps0 >= 0:
        raise InvalidParameter("eps0 must be >= 0")
    if not 0 <= delta0 < 1:
        raise InvalidParameter("delta0 must be in [0,1)")
    if int(k) != k or k < 1:
        raise InvalidParameter("k must be a positive integer")


def _optimal_sum(eps0: float, k: int, eps_prime: float) -> float:
    """``(1+e^eps)^-k sum_l C(k,l) e^(l eps) max(0, 1 - e^(eps' - (2l-k) eps))``."""
    ell = np.arange(k + 1)
    loss = (2 * ell - k) * eps0
    live = loss > eps_prime
    if not live.any():
        return 0.0
    ell, loss = ell[live], loss[live]
    log_binom = special.gammaln(k + 1) - special.gammaln(ell + 1) - special.gammaln(k - ell + 1)
    # C(k,l) e^(l eps) / (1+e^eps)^k = C(k,l) sigmoid(eps)^l sigmoid(-eps)^(k-l)
    log_w = log_binom + ell * special.log_expit(eps0) + (k - ell) * special.log_expit(-eps0)
    terms = np.exp(log_w) * -np.expm1(eps_prime - loss)
    return math.fsum(np.sort(terms))


def optimal_compose_homogeneous(eps0: float, delta0: float, k: int, eps_prime: float) -> float:
    """Exact delta' of k-fold composition of (eps0, delta0)-DP at ``eps'``."""
    _check_homogeneous(eps0, delta0, k)
    k = int(k)
    log_keep = k * math.log1p(-delta0)
    s = _optimal_sum(eps0, k, eps_prime)
    return min(1.0, -math.expm1(log_keep) + math.exp(log_keep) * s)


def optimal_eps(eps0: float, delta0: float, k: int, delta_target: float,
                tol: float = OPTIMAL_TOL) -> float:
    """Smallest ``eps'`` in ``[0, k eps0]`` with composed delta at most the target.

    Bisects until the bracket is below ``tol / 2`` and returns the upper end,
    so the result overshoots the true value by at most ``tol / 2``.  Returns
    ``inf`` when even ``eps' = k eps0`` leaves too much failure mass.
    """
    _check_homogeneous(eps0, delta0, k)
    k = int(k)
    f = lambda e: optimal_compose_homogeneous(eps0, delta0, k, e)
    if f(0.0) <= delta_target:
        return 0.0
    hi = k * eps0
    if f(hi) > delta_target:
        return math.inf
    lo = 0.0
    while hi - lo > tol / 2:
        mid = 0.5 * (lo + hi)
        if f(mid) <= delta_target:
            hi = mid
        else:
            lo = mid
    return hi
