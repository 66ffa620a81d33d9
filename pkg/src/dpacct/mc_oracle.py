"""Monte-Carlo estimators of hockey-stick and Renyi divergences.

These are deliberately independent of the analytic code paths: they only
sample from and evaluate densities of Gaussians and finite Gaussian mixtures.

Random numbers come from numpy's ``Philox`` counter-based bit generator
(numpy >= 1.17 stream, pinned through the ``numpy`` requirement).  Samples
are drawn in fixed-size blocks and reduced in block order, so an estimate is
a deterministic function of ``(specs, samples, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .core import InvalidParameter

BLOCK = 1 << 20
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class UnitGaussianShift:
    """``N(shift, sigma^2)``."""

    shift: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameter("sigma must be > 0")


@dataclass(frozen=True)
class Mixture:
    """``weight * a + (1 - weight) * b``."""

    weight: float
    a: "SamplerSpec"
    b: "SamplerSpec"

    def __post_init__(self):
        if not 0 <= self.weight <= 1:
            raise InvalidParameter("weight must be in [0,1]")


SamplerSpec = Union[UnitGaussianShift, Mixture]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample(spec: SamplerSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, UnitGaussianShift):
        return spec.shift + spec.sigma * rng.standard_normal(n)
    pick = rng.random(n) < spec.weight
    out = np.empty(n)
    na = int(pick.sum())
    out[pick] = sample(spec.a, na, rng)
    out[~pick] = sample(spec.b, n - na, rng)
    return out


def log_density(spec: SamplerSpec, y: np.ndarray) -> np.ndarray:
    if isinstance(spec, UnitGaussianShift):
        z = (y - spec.shift) / spec.sigma
        return -0.5 * z * z - _LOG_SQRT_2PI - math.log(spec.sigma)
    if spec.weight == 0:
        return log_density(spec.b, y)
    if spec.weight == 1:
        return log_density(spec.a, y)
    return np.logaddexp(math.log(spec.weight) + log_density(spec.a, y),
                        math.log1p(-spec.weight) + log_density(spec.b, y))


class Estimate(NamedTuple):
    value: float
    stderr: float
    ess: float
    unstable: bool


def _blocks(samples: int):
    full, rest = divmod(samples, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _moments(draw, samples):
    """Blockwise sum, sum of squares and the effective-sample-size of weights."""
    s = s2 = 0.0
    w_max = 0.0
    for n in _blocks(samples):
        w = draw(n)
        s += math.fsum(w)
        s2 += math.fsum(w * w)
        w_max = max(w_max, float(np.max(w)) if w.size else 0.0)
    mean = s / samples
    var = max(0.0, s2 / samples - mean * mean) * samples / max(1, samples - 1)
    ess = (s * s / s2) if s2 > 0 else float(samples)
    return mean, math.sqrt(var / samples), ess, w_max


def mc_hockey_stick(p_spec: SamplerSpec, q_spec: SamplerSpec, eps: float, samples: int,
                    seed: int, form: str = "p") -> Estimate:
    """Estimate ``sup_S P(S) - e^eps Q(S)``.

    ``form="p"`` averages ``max(0, 1 - e^eps q(Y)/p(Y))`` over ``Y ~ P``;
    ``form="q"`` averages ``max(0, p(Y)/q(Y) - e^eps)`` over ``Y ~ Q``.
    """
    if samples < 1000:
        raise InvalidParameter("use at least 1000 samples")
    rng = make_rng(seed)

    def draw(n):
        if form == "p":
            y = sample(p_spec, n, rng)
            return np.clip(-np.expm1(eps + log_density(q_spec, y) - log_density(p_spec, y)),
                           0.0, None)
        y = sample(q_spec, n, rng)
        return np.clip(np.exp(log_density(p_spec, y) - log_density(q_spec, y)) - math.exp(eps),
                       0.0, None)

    if form not in ("p", "q"):
        raise InvalidParameter(f"unknown form {form!r}")
    mean, se, ess, _ = _moments(draw, samples)
    return Estimate(mean, se, ess, ess < 0.01 * samples)


def mc_renyi(p_spec: SamplerSpec, q_spec: SamplerSpec, alpha: float, samples: int,
             seed: int, form: str = "q") -> Estimate:
    """Estimate ``D_alpha(P||Q)`` and a delta-method standard error.

    ``form="q"`` uses ``E_Q[(p/q)^alpha]``; ``form="p"`` uses
    ``E_P[(p/q)^(alpha-1)]``.  Weights are rescaled by a fixed pilot maximum
    to stay in range.  ``unstable`` is set when the effective sample size of
    the weights falls below 1% of the draws.
    """
    if not alpha > 1:
        raise InvalidParameter("alpha must be > 1")
    if samples < 1000:
        raise InvalidParameter("use at least 1000 samples")
    if form not in ("p", "q"):
        raise InvalidParameter(f"unknown form {form!r}")
    power = alpha if form == "q" else alpha - 1
    src = q_spec if form == "q" else p_spec
    rng = make_rng(seed)
    # pilot draws fix a log-scale shift; the estimator is linear so any
    # constant shift is exact
    pilot_rng = make_rng(seed ^ 0x5EED)
    y0 = sample(src, 4096, pilot_rng)
    shift = float(np.max(power * (log_density(p_spec, y0) - log_density(q_spec, y0))))

    def draw(n):
        y = sample(src, n, rng)
        return np.exp(power * (log_density(p_spec, y) - log_density(q_spec, y)) - shift)

    mean, se, ess, _ = _moments(draw, samples)
    value = (math.log(mean) + shift) / (alpha - 1)
    stderr = se / mean / (alpha - 1)
    return Estimate(value, stderr, ess, ess < 0.01 * samples)


def gaussian_renyi(shift: float, sigma: float, alpha: float) -> float:
    """``alpha shift^2 / (2 sigma^2)``, the closed form for two equal-variance Gaussians."""
    return alpha * shift * shift / (2 * sigma * sigma)
