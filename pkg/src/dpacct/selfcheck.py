"""Brute-force oracles and randomized property sweeps.

The oracles here are written independently of the library routes they check:
subset enumeration for hockey-stick divergences, plain (non-log-space)
summation for Renyi divergences, explicit matrix post-processing, and so on.
``run_all`` drives every sweep and is what ``dpacct selftest`` executes.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable

import numpy as np

from .accountants import rdp_group_shift
from .core import DiscreteDist
from .pld import (delta_from_pld, delta_tail_integral, delta_two_sided, pld_from_pair,
                  renyi_divergence)
from .subsample import flip_bound, subsampled_rdp_exact

MAX_SUBSET_OUTCOMES = 12


def random_dist(rng: np.random.Generator, n: int, zero_prob: float = 0.0) -> DiscreteDist:
    w = rng.exponential(size=n) ** 2
    if zero_prob > 0:
        w[rng.random(n) < zero_prob] = 0.0
        if w.sum() == 0:
            w[rng.integers(n)] = 1.0
    return DiscreteDist.normalized(w)


def subset_sup(p: np.ndarray, q: np.ndarray, eps: float) -> float:
    """``max_S P(S) - e^eps Q(S)`` by enumerating all ``2^n`` subsets."""
    n = p.size
    if n > MAX_SUBSET_OUTCOMES:
        raise ValueError(f"subset enumeration is capped at {MAX_SUBSET_OUTCOMES} outcomes")
    masks = np.array(list(itertools.product((0.0, 1.0), repeat=n)))
    return float(np.max(masks @ p - math.exp(eps) * (masks @ q)))


def renyi_plain(p: np.ndarray, q: np.ndarray, alpha: float) -> float:
    """``log(sum q (p/q)^alpha) / (alpha - 1)`` summed directly."""
    if np.any((p > 0) & (q == 0)):
        return math.inf
    s = q > 0
    return math.log(np.sum(q[s] * (p[s] / q[s]) ** alpha)) / (alpha - 1)


def check_hockey_expressions(rng, count=1000, tol=1e-10):
    """Three PLD expressions vs the subset supremum."""
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(2, MAX_SUBSET_OUTCOMES + 1))
        zp = 0.2 if rng.random() < 0.3 else 0.0
        P, Q = random_dist(rng, n, zp), random_dist(rng, n, zp)
        fwd, rev = pld_from_pair(P, Q), pld_from_pair(Q, P)
        for eps in (0.0, float(rng.uniform(0, 3))):
            truth = subset_sup(P.probs, Q.probs, eps)
            got = (delta_from_pld(fwd, eps), delta_two_sided(fwd, rev, eps),
                   delta_tail_integral(fwd, eps))
            worst = max(worst, max(abs(g - truth) for g in got))
    return worst <= tol, worst


def check_mixture_identity(rng, count=1000, tol=1e-10, orders=(2, 3, 4)):
    """Exact subsampling series with true ``D_k`` inputs equals the mixture divergence."""
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 9))
        P, Q = random_dist(rng, n), random_dist(rng, n)
        p = float(rng.uniform(0.01, 0.99))
        d = {k: renyi_plain(P.probs, Q.probs, k) for k in range(2, max(orders) + 1)}
        series = subsampled_rdp_exact(d, p, max(orders))
        mix = p * P.probs + (1 - p) * Q.probs
        for a in orders:
            worst = max(worst, abs(series.at(a) - renyi_plain(mix, Q.probs, a)))
    return worst <= tol, worst


def _count_violations(fn: Callable[[], float], count: int):
    worst = -math.inf
    bad = 0
    for _ in range(count):
        gap = fn()
        worst = max(worst, gap)
        bad += gap > 0
    return bad == 0, worst


def check_flip(rng, count=1000, slack=1e-12):
    def one():
        n = int(rng.integers(2, 9))
        P, Q = random_dist(rng, n), random_dist(rng, n)
        p = float(rng.uniform(0, 1))
        a = float(rng.choice([1.5, 2.0, 3.0, 4.0, 7.5]))
        fwd = renyi_plain(p * P.probs + (1 - p) * Q.probs, Q.probs, a)
        other = renyi_plain(p * Q.probs + (1 - p) * P.probs, P.probs, a)
        rev = renyi_plain(Q.probs, p * P.probs + (1 - p) * Q.probs, a)
        return rev - flip_bound(fwd, other, p, a) - slack * max(1.0, rev)
    return _count_violations(one, count)


def check_triangle(rng, count=1000, slack=1e-12):
    def one():
        n = int(rng.integers(2, 9))
        P, Q, R = (random_dist(rng, n) for _ in range(3))
        a = float(rng.uniform(1.1, 4))
        ap = a + float(rng.uniform(0.1, 6))
        lhs = renyi_plain(P.probs, R.probs, a)
        rhs = rdp_group_shift(lambda t: renyi_divergence(P, Q, t),
                              lambda t: renyi_divergence(Q, R, t), a, ap)
        return lhs - rhs - slack * max(1.0, lhs)
    return _count_violations(one, count)


def check_postprocessing(rng, count=1000, slack=1e-12):
    def one():
        n, m = int(rng.integers(2, 9)), int(rng.integers(1, 9))
        P, Q = random_dist(rng, n), random_dist(rng, n)
        kernel = rng.exponential(size=(n, m))
        kernel /= kernel.sum(axis=1, keepdims=True)
        gp, gq = P.probs @ kernel, Q.probs @ kernel
        gaps = []
        for a in (1.5, 2.0, 5.0):
            before = renyi_plain(P.probs, Q.probs, a)
            gaps.append(renyi_plain(gp, gq, a) - before - slack * max(1.0, before))
        return max(gaps)
    return _count_violations(one, count)


def check_monotone(rng, count=1000, slack=1e-12):
    grid = (1.1, 1.5, 2.0, 3.0, 5.0, 8.0, 16.0)

    def one():
        n = int(rng.integers(2, 9))
        P, Q = random_dist(rng, n), random_dist(rng, n)
        vals = [renyi_divergence(P, Q, a) for a in grid]
        return max(x - y - slack * max(1.0, y) for x, y in zip(vals, vals[1:]))
    return _count_violations(one, count)


def check_quasiconvex(rng, count=1000, slack=1e-12):
    def one():
        n = int(rng.integers(2, 9))
        P0, Q0, P1, Q1 = (random_dist(rng, n) for _ in range(4))
        t = float(rng.uniform(0, 1))
        a = float(rng.uniform(1.1, 8))
        mix = renyi_plain(t * P0.probs + (1 - t) * P1.probs, t * Q0.probs + (1 - t) * Q1.probs, a)
        top = max(renyi_plain(P0.probs, Q0.probs, a), renyi_plain(P1.probs, Q1.probs, a))
        return mix - top - slack * max(1.0, top)
    return _count_violations(one, count)


def check_lemma_frac(tol=1e-12):
    p = np.linspace(0, 1, 101)[:, None]
    x = np.logspace(-4, 4, 161)[None, :]
    val = (1 - p + p * x) * (1 - p + p / x)
    worst = float(np.min(val - 1))
    return worst >= -tol, worst


def check_lemma_wtf(tol=1e-12):
    v = np.array([1, 1.01, 1.5, 2, 3, 5, 10, 32, 100])[:, None, None]
    p = np.linspace(0, 1, 51)[None, :, None]
    x = np.logspace(-3, 3, 121)[None, None, :]
    with np.errstate(over="ignore"):
        lhs = 3 * (1 - p) * (1 - p + p * x) ** v + v * p * ((1 - p) / x + p) ** 3
    rhs = 3 * (1 - p) + v * p
    rel = (lhs - rhs) / np.maximum(1.0, rhs)
    worst = float(np.min(rel))
    return worst >= -tol, worst


def run_all(count: int = 1000, seed: int = 0) -> dict[str, tuple[bool, float]]:
    rng = np.random.default_rng(seed)
    return {
        "hockey_stick_expressions": check_hockey_expressions(rng, count),
        "mixture_identity": check_mixture_identity(rng, count),
        "flip_bound": check_flip(rng, count),
        "triangle": check_triangle(rng, count),
        "postprocessing": check_postprocessing(rng, count),
        "alpha_monotone": check_monotone(rng, count),
        "quasi_convexity": check_quasiconvex(rng, count),
        "lemma_frac": check_lemma_frac(),
        "lemma_wtf": check_lemma_wtf(),
    }
