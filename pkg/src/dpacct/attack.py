"""Fingerprinting simulator for the private mean-estimation lower bound.

Data: ``P ~ Uniform[0,1]^k`` and ``n`` rows ``X_i ~ Bernoulli(P)``.  A
mechanism releases an estimate ``M(X)`` of the column means ``X_bar`` and the
attack statistic is ``Z = sum_i <M(X) - P, X_i - P> = <M(X) - P, n(X_bar - P)>``.
Any mechanism satisfies ``E[Z] + E||M(X) - X_bar||^2 >= k/12``; accurate
mechanisms therefore correlate strongly with their input.

Only the column sums enter ``Z`` and the error, so they are sampled directly
as ``Binomial(n, P_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy import stats

from .core import (EpsDelta, Gaussian, GuaranteeNotSatisfied, InvalidParameter, Laplace,
                   DiscreteDist)
from .gaussian import calibrate_sigma
from .pld import hockey_stick

DEFAULT_TRIALS = 10_000
BLOCK = 500


@dataclass(frozen=True)
class EmpiricalMean:
    """Releases ``X_bar`` exactly (not private)."""


@dataclass(frozen=True)
class Constant:
    """Releases the constant vector ``value``."""

    value: float = 0.5


MeanMechanism = Union[Gaussian, Laplace, EmpiricalMean, Constant,
                      Callable[[np.ndarray, np.random.Generator], np.ndarray]]


@dataclass(frozen=True)
class AttackConfig:
    n: int
    k: int
    trials: int = DEFAULT_TRIALS
    mechanism: MeanMechanism = field(default_factory=EmpiricalMean)
    seed: int = 0
    eps: float | None = None
    delta: float | None = None

    def __post_init__(self):
        for name in ("n", "k", "trials"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidParameter(f"{name} must be a positive integer")


@dataclass
class AttackReport:
    mean_z: float
    se_z: float
    alpha_sq: float
    se_alpha_sq: float
    combined: float
    se_combined: float
    xbar_sq_error: float
    bound_rhs: float | None
    diagnostics: dict[str, Any]
    z_samples: np.ndarray = field(repr=False)

    def to_json(self, with_samples: bool = False) -> dict[str, Any]:
        out = {k: v for k, v in vars(self).items() if k != "z_samples"}
        if with_samples:
            out["z_samples"] = self.z_samples.tolist()
        return out


def gaussian_mean_mechanism(n: int, k: int, target: EpsDelta, mode: str = "tight") -> Gaussian:
    """Gaussian noise on the mean, calibrated to the replace-one L2 sensitivity ``sqrt(k)/n``."""
    sens = math.sqrt(k) / n
    return Gaussian(sens, calibrate_sigma(sens, target, mode))


def bound_rhs(n: int, k: int, eps: float) -> float:
    """``min(sqrt(k) / (16 n (e^eps - 1)), 1/10)``."""
    if eps <= 0:
        return 0.1
    return min(math.sqrt(k) / (16 * n * math.expm1(eps)), 0.1)


def _release(mech: MeanMechanism, xbar: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if isinstance(mech, EmpiricalMean):
        out = xbar
    elif isinstance(mech, Constant):
        out = np.full_like(xbar, mech.value)
    elif isinstance(mech, Gaussian):
        out = xbar + mech.sigma * rng.standard_normal(xbar.shape)
    elif isinstance(mech, Laplace):
        out = xbar + rng.laplace(0.0, mech.scale, xbar.shape)
    elif callable(mech):
        out = np.asarray(mech(xbar, rng), dtype=float)
        if out.shape != xbar.shape:
            raise InvalidParameter(f"mechanism returned shape {out.shape}, expected {xbar.shape}")
    else:
        raise InvalidParameter(f"{type(mech).__name__} is not a mean-release mechanism")
    return np.clip(out, 0.0, 1.0)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    mean = math.fsum(x) / x.size
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf
    return mean, se


def run_attack(cfg: AttackConfig) -> AttackReport:
    n, k = int(cfg.n), int(cfg.k)
    blocks = [BLOCK] * (cfg.trials // BLOCK) + ([cfg.trials % BLOCK] if cfg.trials % BLOCK else [])
    streams = np.random.SeedSequence(cfg.seed).spawn(len(blocks))
    z_all, err_all, xbar_all = [], [], []
    for size, ss in zip(blocks, streams):
        rng = np.random.Generator(np.random.Philox(ss))
        p = rng.random((size, k))
        counts = rng.binomial(n, p)
        xbar = counts / n
        out = _release(cfg.mechanism, xbar, rng)
        z_all.append(np.einsum("ij,ij->i", out - p, counts - n * p))
        err_all.append(np.mean((out - xbar) ** 2, axis=1))
        xbar_all.append(np.sum((xbar - p) ** 2, axis=1))
    z = np.concatenate(z_all)
    err = np.concatenate(err_all)
    mz, sz = _mean_se(z)
    ma, sa = _mean_se(err)
    mc, sc = _mean_se(z + k * err)
    mx, _ = _mean_se(np.concatenate(xbar_all))
    diag: dict[str, Any] = {
        "target": k / 12,
        "xbar_sq_error_k_over_6n": k / (6 * n),
        "xbar_sq_error_k_over_3n": k / (3 * n),
        "rmse_per_query": math.sqrt(ma),
    }
    rhs = None
    if cfg.eps is not None:
        rhs = bound_rhs(n, k, cfg.eps)
        diag["k_condition"] = k >= 200 * math.expm1(cfg.eps) ** 2 * n
    if cfg.delta is not None:
        diag["delta_condition"] = cfg.delta <= 1 / (100 * n)
    return AttackReport(mz, sz, ma, sa, mc, sc, mx, rhs, diag, z)


def error_scaling(n: int, ks: Sequence[int], target: EpsDelta, trials: int = 1000,
                  seed: int = 0) -> tuple[list[float], float]:
    """Per-query RMSE of the calibrated Gaussian mean for each ``k`` and the log-log slope."""
    rmse = []
    for i, k in enumerate(ks):
        mech = gaussian_mean_mechanism(n, k, target)
        rep = run_attack(AttackConfig(n, k, trials, mech, seed + i))
        rmse.append(math.sqrt(rep.alpha_sq))
    slope = float(np.polyfit(np.log(ks), np.log(rmse), 1)[0])
    return rmse, slope


# --------------------------------------------------------------------------
# Lemma-level checks


def _weight_sums(f: np.ndarray, n: int) -> np.ndarray:
    """Sum of a full truth table over inputs of each Hamming weight."""
    weights = np.array([bin(i).count("1") for i in range(1 << n)])
    return np.bincount(weights, weights=f, minlength=n + 1)


def fingerprinting_identity_check(n: int, trials: int, f: Sequence[float],
                                  seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo estimate of ``E[(f(X)-P) sum_i (X_i-P)] + E_P[(E_X f(X) - P)^2]``.

    ``f`` is either a full table over ``{0,1}^n`` (index bit ``i`` is ``X_i``,
    ``n <= 20``) or a table of ``n + 1`` values indexed by Hamming weight.
    Returns the estimate and its standard error.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0) or np.any(f > 1):
        raise InvalidParameter("f must take values in [0,1]")
    by_weight = f.size == n + 1
    if not by_weight:
        if n > 20 or f.size != 1 << n:
            raise InvalidParameter("f must have 2^n entries (n <= 20) or n+1 entries")
        sums = _weight_sums(f, n)
    else:
        sums = f * np.exp(_log_binom_row(n))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    p = rng.random(trials)
    if by_weight:
        w = rng.binomial(n, p)
        fx = f[w]
    else:
        bits = rng.random((trials, n)) < p[:, None]
        w = bits.sum(axis=1)
        fx = f[bits.astype(np.int64) @ (1 << np.arange(n))]
    # g(P) = E_X f(X) = sum_w sums[w] P^w (1-P)^(n-w)
    ws = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        log_terms = ws * np.log(p[:, None]) + (n - ws) * np.log1p(-p[:, None])
    g = np.exp(log_terms) @ sums
    vals = (fx - p) * (w - n * p) + (g - p) ** 2
    return _mean_se(vals)


def _log_binom_row(n: int) -> np.ndarray:
    return stats.binom.logpmf(np.arange(n + 1), n, 0.5) + n * math.log(2)


class ExpectationCheck(NamedTuple):
    lhs: float
    rhs: float


def indistinguishable_expectation_check(p_dist: DiscreteDist, q_dist: DiscreteDist,
                                        values: Sequence[float], eps: float, delta: float,
                                        bound: float | None = None,
                                        tol: float = 1e-12) -> ExpectationCheck:
    """``E[X] <= E[Y] + (e^eps - 1) E|Y| + 2 delta Delta`` on a finite support."""
    v = np.asarray(values, dtype=float)
    if v.size != len(p_dist) or v.size != len(q_dist):
        raise InvalidParameter("values must match the outcome set")
    span = float(np.max(np.abs(v))) if bound is None else float(bound)
    if np.any(np.abs(v) > span):
        raise InvalidParameter("values exceed the stated bound")
    if (hockey_stick(p_dist, q_dist, eps) > delta + tol
            or hockey_stick(q_dist, p_dist, eps) > delta + tol):
        raise GuaranteeNotSatisfied(f"pair is not ({eps}, {delta})-indistinguishable")
    p, q = p_dist.probs, q_dist.probs
    lhs = math.fsum(p * v)
    rhs = math.fsum(q * v) + math.expm1(eps) * math.fsum(q * np.abs(v)) + 2 * delta * span
    return ExpectationCheck(lhs, rhs)
