"""Privacy-loss distributions: construction, convolution and conversions.

A privacy-loss distribution (PLD) is the law of ``Z = log(P(Y)/Q(Y))`` for
``Y ~ P``.  Composition of independent mechanisms corresponds to adding
independent privacy losses, i.e. convolving PLDs, and every hockey-stick,
TV, KL or Renyi quantity of the pair is a functional of ``Z``.

Discretised PLDs live on a lattice ``k * step`` and are always rounded
pessimistically (loss values round up), so every delta read off them is an
upper bound on the true delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import signal, special

from .core import (DiscreteDist, DiscretePld, GuaranteeNotSatisfied, InvalidParameter)

DEFAULT_GRID_STEP = 1e-4
DEFAULT_TAIL_MASS = 1e-12
MERGE_TOL = 1e-12
BISECTION_TOL = 1e-12

# Above this many multiply-adds the lattice convolution switches to FFT.
_DIRECT_LIMIT = 4_000_000


@dataclass(frozen=True)
class GaussianPld:
    """The PLD ``N(rho, 2 rho)`` of two Gaussians at distance ``sqrt(2 rho) sigma``."""

    rho: float

    def __post_init__(self):
        if not self.rho >= 0:
            raise InvalidParameter(f"rho must be >= 0, got {self.rho}")

    @property
    def mean(self) -> float:
        return self.rho

    @property
    def variance(self) -> float:
        return 2.0 * self.rho


def gaussian_pld(sensitivity: float, sigma: float) -> GaussianPld:
    if not sigma > 0:
        raise InvalidParameter("sigma must be > 0")
    return GaussianPld(sensitivity ** 2 / (2.0 * sigma ** 2))


def point_mass(z: float = 0.0) -> DiscretePld:
    return DiscretePld([z], [1.0])


def _merge(zs: np.ndarray, ps: np.ndarray, tol: float = MERGE_TOL):
    """Sort atoms and merge near-equal loss values at the larger value."""
    order = np.argsort(zs, kind="stable")
    zs, ps = zs[order], ps[order]
    if zs.size == 0:
        return zs, ps
    gaps = np.diff(zs) >= tol * np.maximum(1.0, np.abs(zs[1:]))
    starts = np.concatenate(([0], np.flatnonzero(gaps) + 1))
    ends = np.concatenate((starts[1:], [zs.size])) - 1
    return zs[ends], np.add.reduceat(ps, starts)


def _finalize(zs, ps, inf_mass, step=None, offset=0) -> DiscretePld:
    """Build a PLD, absorbing float drift in the total mass."""
    ps = np.clip(ps, 0.0, None)
    finite = 1.0 - inf_mass
    total = ps.sum()
    if total > 0:
        ps = ps * (finite / total)
    return DiscretePld(zs, ps, inf_mass, step, offset)


def pld_from_pair(p_dist: DiscreteDist, q_dist: DiscreteDist) -> DiscretePld:
    """PLD of ``P`` against ``Q``; outcomes with ``Q = 0 < P`` go to ``inf_mass``."""
    p, q = np.asarray(p_dist.probs), np.asarray(q_dist.probs)
    if p.shape != q.shape:
        raise InvalidParameter("P and Q must share an outcome set")
    support = p > 0
    finite = support & (q > 0)
    inf_mass = float(p[support & (q == 0)].sum())
    zs = np.log(p[finite]) - np.log(q[finite])
    zs, ps = _merge(zs, p[finite])
    return _finalize(zs, ps, inf_mass)


def rr_pld(eps: float, delta: float = 0.0) -> DiscretePld:
    """PLD of the worst-case (eps, delta) randomized-response pair."""
    if not eps >= 0 or not 0 <= delta < 1:
        raise InvalidParameter("need eps >= 0 and 0 <= delta < 1")
    if eps == 0:
        return _finalize(np.array([0.0]), np.array([1.0 - delta]), delta)
    hi = (1 - delta) * special.expit(eps)
    lo = (1 - delta) * special.expit(-eps)
    return _finalize(np.array([-eps, eps]), np.array([lo, hi]), delta)


def _same_lattice(a: DiscretePld, b: DiscretePld) -> bool:
    return (a.step is not None and b.step is not None
            and abs(a.step - b.step) <= 1e-15 * a.step)


def convolve(a: DiscretePld, b: DiscretePld, max_atoms: int | None = None,
             grid_step: float = DEFAULT_GRID_STEP) -> DiscretePld:
    """PLD of the sum of independent losses drawn from ``a`` and ``b``.

    Lattice PLDs with a common step are convolved index-wise (by FFT when
    large).  Otherwise the outer sum is formed directly and equal values are
    merged.  If ``max_atoms`` is given and exceeded, values are rounded up to
    multiples of ``grid_step``.
    """
    inf_mass = 1.0 - (1.0 - a.inf_mass) * (1.0 - b.inf_mass)
    if _same_lattice(a, b):
        if a.ps.size * b.ps.size > _DIRECT_LIMIT:
            ps = signal.fftconvolve(a.ps, b.ps)
        else:
            ps = np.convolve(a.ps, b.ps)
        ps = np.clip(ps, 0.0, None)
        nz = np.flatnonzero(ps)
        lo, hi = (nz[0], nz[-1] + 1) if nz.size else (0, 1)
        offset = a.offset + b.offset + int(lo)
        ps = ps[lo:hi]
        zs = (offset + np.arange(ps.size)) * a.step
        return _finalize(zs, ps, inf_mass, a.step, offset)
    zs = np.add.outer(a.zs, b.zs).ravel()
    ps = np.multiply.outer(a.ps, b.ps).ravel()
    zs, ps = _merge(zs, ps)
    if max_atoms is not None and zs.size > max_atoms:
        zs, ps = coarsen(zs, ps, grid_step)
    return _finalize(zs, ps, inf_mass)


def coarsen(zs: np.ndarray, ps: np.ndarray, grid_step: float):
    """Round loss values up to the lattice ``k * grid_step`` and merge."""
    idx = np.ceil(zs / grid_step - 1e-9).astype(np.int64)
    uniq, inv = np.unique(idx, return_inverse=True)
    return uniq * grid_step, np.bincount(inv, weights=ps)


def self_convolve(a: DiscretePld, k: int, **kwargs) -> DiscretePld:
    """``k``-fold convolution by repeated squaring."""
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    result, base = None, a
    while k:
        if k & 1:
            result = base if result is None else convolve(result, base, **kwargs)
        k >>= 1
        if k:
            base = convolve(base, base, **kwargs)
    return result


def discretize(g: GaussianPld, grid_step: float = DEFAULT_GRID_STEP,
               tail_mass: float = DEFAULT_TAIL_MASS) -> DiscretePld:
    """Pessimistic lattice discretisation of a Gaussian PLD.

    The mass of each cell ``(z_{k-1}, z_k]`` is placed at ``z_k``, mass below
    the lower truncation point is placed at the lowest lattice point, and mass
    beyond the upper ``1 - tail_mass`` quantile is treated as infinite loss.
    """
    if not grid_step > 0:
        raise InvalidParameter("grid_step must be > 0")
    if not 0 < tail_mass < 1:
        raise InvalidParameter("tail_mass must be in (0,1)")
    if g.rho == 0:
        return DiscretePld([0.0], [1.0], 0.0, grid_step, 0)
    scale = math.sqrt(2.0 * g.rho)
    width = scale * float(-special.ndtri(tail_mass))
    k_lo = math.floor((g.rho - width) / grid_step)
    k_hi = math.ceil((g.rho + width) / grid_step)
    zs = np.arange(k_lo, k_hi + 1) * grid_step
    x = (zs - g.rho) / scale
    cdf = special.ndtr(x)
    sf = special.ndtr(-x)
    # lower and upper cells use the tail function on their own side
    upper = x[1:] > 0
    cells = np.where(upper, sf[:-1] - sf[1:], cdf[1:] - cdf[:-1])
    ps = np.concatenate(([cdf[0]], cells))
    inf_mass = max(float(sf[-1]), 1.0 - math.fsum(ps))
    return _finalize(zs, ps, inf_mass, grid_step, k_lo)


def laplace_pld(sensitivity: float, scale: float,
                grid_step: float = DEFAULT_GRID_STEP) -> DiscretePld:
    """Pessimistic lattice PLD of ``Lap(0, b)`` against ``Lap(sensitivity, b)``.

    The loss is ``+eps`` with mass 1/2, ``-eps`` with mass ``exp(-eps)/2``, and
    spread over ``(-eps, eps)`` in between, where ``eps = sensitivity / b``.
    """
    if not scale > 0 or not sensitivity >= 0:
        raise InvalidParameter("need scale > 0 and sensitivity >= 0")
    eps = sensitivity / scale
    if eps == 0:
        return DiscretePld([0.0], [1.0], 0.0, grid_step, 0)
    k_lo = math.floor(-eps / grid_step + 1e-9)
    k_hi = math.ceil(eps / grid_step - 1e-9)
    zs = np.arange(k_lo, k_hi + 1) * grid_step
    # P(Z <= z) = exp(-(eps - z)/2)/2 on [-eps, eps), then a jump to 1
    zc = np.clip(zs, -eps, eps)
    cdf = 0.5 * np.exp(-(eps - zc) / 2.0)
    cdf[-1] = 1.0
    ps = np.concatenate(([cdf[0]], np.diff(cdf)))
    return _finalize(zs, ps, 0.0, grid_step, k_lo)


# --------------------------------------------------------------------------
# Conversions


def delta_from_pld(pld: DiscretePld, eps):
    """``delta(eps) = E[max(0, 1 - exp(eps - Z))]`` including the +inf atom."""
    eps_arr = np.atleast_1d(np.asarray(eps, dtype=float))
    out = np.empty_like(eps_arr)
    for i, e in enumerate(eps_arr):
        above = pld.zs > e
        terms = pld.ps[above] * -np.expm1(e - pld.zs[above])
        out[i] = pld.inf_mass + math.fsum(terms)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(eps) == 0 else out


def delta_two_sided(pld_pq: DiscretePld, pld_qp: DiscretePld, eps: float) -> float:
    """``Pr[Z > eps] - e^eps Pr[Z' < -eps]`` with ``Z'`` the reverse-pair loss."""
    p_set = pld_pq.inf_mass + math.fsum(pld_pq.ps[pld_pq.zs > eps])
    q_set = math.fsum(pld_qp.ps[pld_qp.zs < -eps])
    return float(np.clip(p_set - math.exp(eps) * q_set, 0.0, 1.0))


def delta_tail_integral(pld: DiscretePld, eps: float) -> float:
    """``int_eps^inf e^(eps - z) Pr[Z > z] dz``, integrating the survival steps."""
    zs = pld.zs[pld.zs > eps]
    ps = pld.ps[pld.zs > eps]
    # survival on [knots[j], knots[j+1]) is the mass strictly above knots[j]
    surv = pld.inf_mass + np.concatenate((np.cumsum(ps[::-1])[::-1], [0.0]))
    knots = np.concatenate(([eps], zs))
    seg = np.exp(eps - knots[:-1]) - np.exp(eps - knots[1:])
    total = math.fsum(surv[:-1] * seg) + pld.inf_mass * math.exp(eps - knots[-1])
    return float(np.clip(total, 0.0, 1.0))


def eps_from_pld(pld: DiscretePld, delta: float) -> float:
    """Smallest ``eps >= 0`` with ``delta_from_pld(pld, eps) <= delta`` (closed form).

    On each gap between atoms the hockey-stick curve is ``A - e^eps B`` for
    suffix sums ``A`` and ``B``, which inverts exactly.
    """
    if delta < pld.inf_mass:
        return math.inf
    if delta_from_pld(pld, 0.0) <= delta:
        return 0.0
    zs, ps = pld.zs, pld.ps
    a_suffix = pld.inf_mass + np.concatenate((np.cumsum(ps[::-1])[::-1], [0.0]))
    # log of the Q-mass above each gap, log sum_{i >= j} ps_i e^-z_i, kept in
    # log space so that extreme losses neither overflow nor underflow
    with np.errstate(divide="ignore"):
        log_q = np.log(ps) - zs
    log_b = np.concatenate((np.logaddexp.accumulate(log_q[::-1])[::-1], [-np.inf]))
    # delta at each atom, using the atoms strictly above it
    at_atoms = a_suffix[1:] - np.exp(zs + log_b[1:])
    j = int(np.argmax(at_atoms <= delta))
    return max(0.0, math.log(a_suffix[j] - delta) - float(log_b[j]))


class TvKl(NamedTuple):
    tv: float
    kl: float


def tv_kl(pld: DiscretePld) -> TvKl:
    tv = pld.inf_mass + math.fsum(pld.ps * np.clip(-np.expm1(-pld.zs), 0.0, None))
    kl = math.inf if pld.inf_mass > 0 else max(0.0, math.fsum(pld.ps * pld.zs))
    return TvKl(min(tv, 1.0), kl)


def renyi_from_pld(pld: DiscretePld, alpha: float) -> float:
    """``D_alpha(P||Q) = log E_P[e^((alpha-1) Z)] / (alpha - 1)``."""
    if not alpha > 1:
        raise InvalidParameter("alpha must be > 1")
    if pld.inf_mass > 0:
        return math.inf
    keep = pld.ps > 0
    lse = special.logsumexp((alpha - 1) * pld.zs[keep], b=pld.ps[keep])
    return max(0.0, float(lse) / (alpha - 1))


def renyi_divergence(p_dist: DiscreteDist, q_dist: DiscreteDist, alpha: float) -> float:
    """``D_alpha(P||Q)`` by direct summation; +inf unless ``P << Q``."""
    if not alpha > 1:
        raise InvalidParameter("alpha must be > 1")
    p, q = np.asarray(p_dist.probs), np.asarray(q_dist.probs)
    if np.any((p > 0) & (q == 0)):
        return math.inf
    s = p > 0
    lse = special.logsumexp(alpha * np.log(p[s]) - (alpha - 1) * np.log(q[s]))
    if math.isinf(alpha):
        return float(np.max(np.log(p[s]) - np.log(q[s])))
    return max(0.0, float(lse) / (alpha - 1))


def hockey_stick(p_dist: DiscreteDist, q_dist: DiscreteDist, eps: float) -> float:
    """``sup_S P(S) - e^eps Q(S)`` via the threshold set ``{P > e^eps Q}``."""
    p, q = np.asarray(p_dist.probs), np.asarray(q_dist.probs)
    return max(0.0, math.fsum(np.clip(p - math.exp(eps) * q, 0.0, None)))


def change_of_measure_check(p_dist: DiscreteDist, q_dist: DiscreteDist,
                            g: Callable[[np.ndarray], np.ndarray]):
    """Both sides of ``E_Q[g(L(Y))] = E_{Z~PLD}[g(Z) e^-Z]``."""
    p, q = np.asarray(p_dist.probs), np.asarray(q_dist.probs)
    if np.any((p > 0) != (q > 0)):
        raise InvalidParameter("P and Q must be mutually absolutely continuous")
    s = q > 0
    llr = np.log(p[s]) - np.log(q[s])
    lhs = math.fsum(q[s] * g(llr))
    pld = pld_from_pair(p_dist, q_dist)
    rhs = math.fsum(pld.ps * g(pld.zs) * np.exp(-pld.zs))
    return lhs, rhs


# --------------------------------------------------------------------------
# Decomposition into a pure part and a failure part


class Decomposition(NamedTuple):
    p_prime: DiscreteDist
    p_fail: DiscreteDist
    q_prime: DiscreteDist
    q_fail: DiscreteDist
    weight: float
    eps1: float
    eps2: float


class RrReduction(NamedTuple):
    a: DiscreteDist
    b: DiscreteDist
    p_fail: DiscreteDist
    q_fail: DiscreteDist


def _excess(p, q, e):
    return math.fsum(np.clip(p - math.exp(e) * q, 0.0, None))


def _split_eps(p, q, eps, target):
    """Largest-enough ``e`` in ``[0, eps]`` with ``excess(e) <= target``."""
    if _excess(p, q, 0.0) <= target:
        return 0.0
    lo, hi = 0.0, eps
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if _excess(p, q, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def _normalized(w):
    w = np.clip(np.asarray(w, dtype=float), 0.0, None)
    return DiscreteDist.normalized(w)


def decompose_adp(p_dist: DiscreteDist, q_dist: DiscreteDist, eps: float,
                  delta: float, tol: float = 1e-12) -> Decomposition:
    """Write ``P = (1-d)P' + dP''`` and ``Q = (1-d)Q' + dQ''`` with ``P'/Q'`` within ``e^(+-eps)``."""
    p, q = np.asarray(p_dist.probs), np.asarray(q_dist.probs)
    if p.shape != q.shape:
        raise InvalidParameter("P and Q must share an outcome set")
    if not eps >= 0 or not 0 <= delta <= 1:
        raise InvalidParameter("need eps >= 0 and delta in [0,1]")
    if _excess(p, q, eps) > delta + tol or _excess(q, p, eps) > delta + tol:
        raise GuaranteeNotSatisfied(f"pair is not ({eps}, {delta})-indistinguishable")
    tv = 0.5 * math.fsum(np.abs(p - q))
    target = min(delta, tv)
    e1 = _split_eps(p, q, eps, target)
    e2 = _split_eps(q, p, eps, target)
    d1, d2 = _excess(p, q, e1), _excess(q, p, e2)
    weight = min(max(d1, d2), delta)

    def parts(x, y, e, d):
        core = np.minimum(x, math.exp(e) * y)
        x1 = core / (1.0 - d) if d < 1 else x
        if d <= 0 or delta <= 0:
            return x1, x1
        fail = (x - core) / d
        # spread the unused slack over the pure part
        s = min(d, delta)
        return x1, ((delta - s) * x1 + s * fail) / delta

    p1, p2 = parts(p, q, e1, d1)
    q1, q2 = parts(q, p, e2, d2)
    return Decomposition(_normalized(p1), _normalized(p2), _normalized(q1),
                         _normalized(q2), weight, e1, e2)


def rr_reduction(p_dist: DiscreteDist, q_dist: DiscreteDist, eps: float,
                 delta: float) -> RrReduction:
    """Express the pair as post-processed (eps, delta) randomized response."""
    dec = decompose_adp(p_dist, q_dist, eps, delta)
    p1, q1 = dec.p_prime.probs, dec.q_prime.probs
    if eps == 0:
        a = b = dec.p_prime
    else:
        w = math.expm1(eps)
        a = _normalized((math.exp(eps) * p1 - q1) / w)
        b = _normalized((math.exp(eps) * q1 - p1) / w)
    return RrReduction(a, b, dec.p_fail, dec.q_fail)
