import math

import pytest
from hypothesis import given, strategies as st

from dpacct.composition import (advanced_compose, advanced_compose_pure, basic_compose,
                                optimal_compose_homogeneous, optimal_eps)
from dpacct.core import EpsDelta, InvalidParameter
from dpacct.pld import delta_from_pld, laplace_pld, rr_pld, self_convolve

L6 = math.log(1e6)


def test_basic_examples():
    g = basic_compose([EpsDelta(0.1, 0)] * 10)
    assert g.eps == pytest.approx(1.0, rel=1e-15) and g.delta == 0
    assert basic_compose([EpsDelta(0.3, 1e-5)]) == EpsDelta(0.3, 1e-5)
    g = basic_compose([EpsDelta(0.5, 1e-7)] * 3)
    assert g.eps == 1.5 and g.delta == pytest.approx(3e-7, rel=1e-15)


def test_advanced_examples():
    g = advanced_compose([EpsDelta(0.1, 0)] * 100, 1e-6)
    assert g.eps == pytest.approx(0.5 + math.sqrt(2 * L6), rel=1e-14)
    assert g.delta == 1e-6
    assert advanced_compose([EpsDelta(0.1, 0)], 1e-12).eps == 0.1
    g = advanced_compose([EpsDelta(0.1, 1e-8)] * 10, 1e-6)
    assert g.eps == pytest.approx(min(1.0, 0.05 + math.sqrt(0.2 * L6)), rel=1e-14)
    assert g.delta == pytest.approx(1.1e-6, rel=1e-14)
    with pytest.raises(InvalidParameter):
        advanced_compose([EpsDelta(0.1, 0)], 0.0)


def test_optimal_single():
    assert optimal_compose_homogeneous(0.4, 0.01, 1, 0.4) == pytest.approx(0.01, abs=1e-15)


def test_optimal_matches_pld_convolution():
    via_pld = delta_from_pld(self_convolve(rr_pld(0.1), 10), 0.5)
    assert optimal_compose_homogeneous(0.1, 0.0, 10, 0.5) == pytest.approx(via_pld, abs=1e-10)


def test_optimal_beyond_support():
    d0, k = 0.01, 7
    assert optimal_compose_homogeneous(0.2, d0, k, 1.4) == pytest.approx(1 - (1 - d0) ** k,
                                                                         rel=1e-14)


# mpmath bisection on the exact binomial hockey-stick sum at 50 digits
ORACLE_OPTIMAL = {1: 0.099998095160767758942, 10: 0.99937090572175872470,
                  20: 1.7886091174189804519, 100: 4.7745675881079861533}


@pytest.mark.parametrize("k", sorted(ORACLE_OPTIMAL))
def test_optimal_eps_oracle(k):
    assert optimal_eps(0.1, 0.0, k, 1e-6) == pytest.approx(ORACLE_OPTIMAL[k], abs=1e-9)


def test_optimal_eps_limits():
    assert optimal_eps(0.1, 0.0, 5, 0.9) == 0.0
    assert optimal_eps(0.1, 0.01, 5, 1e-3) == math.inf


def test_optimal_precision_at_large_k():
    d = optimal_compose_homogeneous(0.01, 0.0, 10_000, 1.0)
    via = delta_from_pld(self_convolve(rr_pld(0.01), 10_000), 1.0)
    assert d == pytest.approx(via, abs=1e-10)


def test_laplace_basic_composition_witness():
    # k Laplace(k/eps) answers: the composed loss reaches eps with positive mass
    eps, k = 1.0, 4
    pld = self_convolve(laplace_pld(1.0, k / eps, 1e-3), k)
    assert pld.zs.max() == pytest.approx(eps, abs=1e-9)
    assert pld.ps[-1] > 0


def test_advanced_equals_min_of_basic_and_pure():
    for k in (1, 5, 50, 500):
        eps = [0.1] * k
        got = advanced_compose([EpsDelta(0.1, 0)] * k, 1e-6).eps
        assert got == min(basic_compose([EpsDelta(0.1, 0)] * k).eps,
                          advanced_compose_pure(eps, 1e-6))


@given(st.floats(0.001, 1), st.integers(1, 300), st.floats(1e-10, 0.1))
def test_optimal_dominates(eps0, k, delta):
    opt = optimal_eps(eps0, 0.0, k, delta)
    adv = advanced_compose([EpsDelta(eps0, 0)] * k, delta).eps
    assert opt <= adv + 1e-9


@given(st.floats(0.01, 1), st.floats(0, 0.01), st.integers(1, 50), st.floats(0, 5),
       st.floats(0.01, 1))
def test_optimal_delta_monotone_in_eps(eps0, d0, k, e, step):
    assert (optimal_compose_homogeneous(eps0, d0, k, e + step)
            <= optimal_compose_homogeneous(eps0, d0, k, e) + 1e-15)
