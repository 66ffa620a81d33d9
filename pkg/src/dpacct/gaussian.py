"""Closed-form guarantees for the Gaussian mechanism and noise calibration."""

from __future__ import annotations

import math

from scipy import optimize, special

from .core import EpsDelta, InvalidParameter, ZcdpBound


def _log_sf(x: float) -> float:
    """log of the standard normal upper tail."""
    return float(special.log_ndtr(-x))


def gaussian_delta(rho_star: float, eps: float) -> float:
    """Tight ``delta(eps)`` for a Gaussian pair with ``rho* = Delta^2 / 2 sigma^2``.

    ``delta = Phi_bar((eps - rho)/s) - e^eps Phi_bar((eps + rho)/s)`` with
    ``s = sqrt(2 rho)``, evaluated as ``Phi_bar(a) (1 - exp(log-ratio))`` so
    that neither term is subtracted directly.
    """
    if not rho_star >= 0 or not eps >= 0:
        raise InvalidParameter("need rho_star >= 0 and eps >= 0")
    if rho_star == 0:
        return 0.0
    if math.isinf(eps):
        return 0.0
    s = math.sqrt(2.0 * rho_star)
    la = _log_sf((eps - rho_star) / s)
    lb = eps + _log_sf((eps + rho_star) / s)
    if la == -math.inf:
        return 0.0
    return max(0.0, math.exp(la) * -math.expm1(lb - la))


def gaussian_delta_upper(rho_star: float, eps: float) -> float:
    """``exp(-(eps-rho)^2 / 4 rho) / max(2, sqrt(pi/rho) (eps - rho))`` for ``eps >= rho > 0``."""
    if not rho_star > 0:
        raise InvalidParameter("rho_star must be > 0")
    if eps < rho_star:
        raise InvalidParameter("the bound needs eps >= rho_star")
    gap = eps - rho_star
    return math.exp(-gap * gap / (4.0 * rho_star)) / max(2.0, math.sqrt(math.pi / rho_star) * gap)


def gaussian_zcdp(sensitivity: float, sigma: float) -> ZcdpBound:
    if not sigma > 0:
        raise InvalidParameter("sigma must be > 0")
    return ZcdpBound(sensitivity ** 2 / (2.0 * sigma ** 2))


def gaussian_eps(rho_star: float, delta: float, tol: float = 1e-12) -> float:
    """Smallest ``eps`` with ``gaussian_delta(rho_star, eps) <= delta``."""
    if not 0 < delta < 1:
        raise InvalidParameter("delta must be in (0,1)")
    if gaussian_delta(rho_star, 0.0) <= delta:
        return 0.0
    hi = rho_star + 2.0 * math.sqrt(rho_star * math.log(1 / delta)) + 1.0
    while gaussian_delta(rho_star, hi) > delta:
        hi *= 2.0
    return optimize.brentq(lambda e: gaussian_delta(rho_star, e) - delta, 0.0, hi,
                           xtol=tol, rtol=1e-15)


def remark_sigma(sensitivity: float, target: EpsDelta) -> float:
    """``sigma = Delta * sqrt(2 (log(1/delta) + eps)) / eps``, sufficient for the target."""
    return sensitivity * math.sqrt(2.0 * (math.log(1.0 / target.delta) + target.eps)) / target.eps


def calibrate_sigma(sensitivity: float, target: EpsDelta, mode: str = "tight",
                    rtol: float = 1e-9) -> float:
    """Noise scale for ``target``.

    ``mode="remark"`` returns the closed-form sufficient scale;
    ``mode="tight"`` bisects (in log sigma) for the smallest scale whose exact
    delta is at most ``target.delta``.  The tight search runs well below
    ``rtol`` so that the returned delta matches the target to ~1e-12.
    """
    if not target.eps > 0 or not 0 < target.delta < 1:
        raise InvalidParameter("need eps > 0 and delta in (0,1)")
    if not sensitivity >= 0:
        raise InvalidParameter("sensitivity must be >= 0")
    remark = remark_sigma(sensitivity, target)
    if mode == "remark":
        return remark
    if mode != "tight":
        raise InvalidParameter(f"unknown mode {mode!r}")
    if sensitivity == 0:
        return 0.0

    def excess(log_sigma):
        rho = sensitivity ** 2 / (2.0 * math.exp(2 * log_sigma))
        return gaussian_delta(rho, target.eps) - target.delta

    lo = math.log(sensitivity / (target.eps + math.sqrt(2 * math.log(1 / target.delta)) + 2))
    hi = math.log(remark)
    while excess(lo) <= 0:
        lo -= 1.0
    while excess(hi) > 0:
        hi += 1.0
    tol = min(rtol, 1e-14) * max(1.0, abs(hi))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)
