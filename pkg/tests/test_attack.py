import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpacct.attack import (AttackConfig, Constant, EmpiricalMean, bound_rhs, error_scaling,
                           fingerprinting_identity_check, gaussian_mean_mechanism,
                           indistinguishable_expectation_check, run_attack)
from dpacct.core import (DiscreteDist, EpsDelta, Gaussian, GuaranteeNotSatisfied,
                         InvalidParameter)
from dpacct.gaussian import gaussian_delta
from dpacct.pld import hockey_stick
from dpacct.selfcheck import random_dist


def within(mean_se, target, k=4.0):
    mean, se = mean_se
    return abs(mean - target) <= k * se


@pytest.mark.parametrize("f,target", [("mean", 1 / 6), ("half", 1 / 12), ("zero", 1 / 3)])
def test_identity_by_weight(f, target):
    n = 50
    table = {"mean": np.arange(n + 1) / n, "half": np.full(n + 1, 0.5),
             "zero": np.zeros(n + 1)}[f]
    assert within(fingerprinting_identity_check(n, 20_000, table, seed=1), target)


def test_identity_full_table():
    n = 4
    weights = np.array([bin(i).count("1") for i in range(1 << n)])
    assert within(fingerprinting_identity_check(n, 20_000, weights / n, seed=2), 1 / 6)
    # an asymmetric function: the first coordinate
    first = (np.arange(1 << n) & 1).astype(float)
    mean, se = fingerprinting_identity_check(n, 20_000, first, seed=3)
    assert mean >= 1 / 12 - 4 * se


def test_identity_rejects_bad_tables():
    with pytest.raises(InvalidParameter):
        fingerprinting_identity_check(3, 100, [0.5] * 5)
    with pytest.raises(InvalidParameter):
        fingerprinting_identity_check(3, 100, [2.0] * 4)


def test_empirical_mean_correlates():
    rep = run_attack(AttackConfig(20, 50, 2000, EmpiricalMean(), seed=0))
    assert rep.alpha_sq == 0
    assert within((rep.mean_z, rep.se_z), 50 / 6)
    assert within((rep.xbar_sq_error, 1.0), 50 / (6 * 20), k=0.05)


def test_constant_mechanism():
    rep = run_attack(AttackConfig(20, 50, 2000, Constant(0.5), seed=0))
    assert within((rep.mean_z, rep.se_z), 0.0)
    assert rep.combined >= 50 / 12 - 4 * rep.se_combined


def test_run_is_deterministic():
    cfg = AttackConfig(10, 20, 1200, Gaussian(0.1, 0.2), seed=5)
    a, b = run_attack(cfg), run_attack(cfg)
    assert a.to_json() == b.to_json()
    np.testing.assert_array_equal(a.z_samples, b.z_samples)


def test_calibrated_gaussian():
    n, k = 50, 100
    target = EpsDelta(1.0, 1e-5)
    mech = gaussian_mean_mechanism(n, k, target)
    assert mech.sensitivity == pytest.approx(math.sqrt(k) / n)
    rho = mech.sensitivity ** 2 / (2 * mech.sigma ** 2)
    assert gaussian_delta(rho, 1.0) == pytest.approx(1e-5, rel=1e-9)
    rep = run_attack(AttackConfig(n, k, 2000, mech, seed=1, eps=1.0, delta=1e-5))
    assert rep.combined >= k / 12 - 4 * rep.se_combined
    assert rep.bound_rhs == bound_rhs(n, k, 1.0)
    assert set(rep.diagnostics) >= {"target", "k_condition", "delta_condition"}


def test_callable_mechanism_shape_check():
    with pytest.raises(InvalidParameter):
        run_attack(AttackConfig(5, 3, 10, lambda x, rng: x[:, :1], seed=0))


def test_config_validation():
    with pytest.raises(InvalidParameter):
        AttackConfig(0, 3)


def test_bound_rhs():
    assert bound_rhs(50, 500, 0.0) == 0.1
    assert bound_rhs(50, 500, 1.0) == pytest.approx(math.sqrt(500) / (16 * 50 * math.expm1(1)))


def test_error_scaling_slope():
    rmse, slope = error_scaling(10_000, [64, 256, 1024], EpsDelta(1.0, 1e-6), trials=200)
    assert len(rmse) == 3
    assert slope == pytest.approx(0.5, abs=0.05)


def test_expectation_check_violation_raises():
    P, Q = DiscreteDist([0.9, 0.1]), DiscreteDist([0.1, 0.9])
    with pytest.raises(GuaranteeNotSatisfied):
        indistinguishable_expectation_check(P, Q, [1.0, 0.0], 0.1, 0.01)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 2))
def test_expectation_inequality(seed, eps):
    rng = np.random.default_rng(seed)
    P, Q = random_dist(rng, 6), random_dist(rng, 6)
    delta = max(hockey_stick(P, Q, eps), hockey_stick(Q, P, eps))
    values = rng.uniform(-1, 1, 6)
    lhs, rhs = indistinguishable_expectation_check(P, Q, values, eps, delta, bound=1.0)
    assert lhs <= rhs + 1e-12
