import math

import pytest
from hypothesis import given, strategies as st

from dpacct.accountants import (DEFAULT_ORDERS, compose_zcdp, grid, pure_to_zcdp, rdp_compose,
                                rdp_group_shift, rdp_group_shift_opt, rdp_to_adp, zcdp_rho_for,
                                zcdp_to_delta, zcdp_to_eps, zcdp_to_rdp)
from dpacct.core import InvalidParameter, NoCommonOrders, RdpCurve, ZcdpBound

L6 = math.log(1e6)


def test_pure_to_zcdp():
    assert pure_to_zcdp(0.1).rho == pytest.approx(0.005, rel=1e-15)
    assert pure_to_zcdp(0).rho == 0
    assert pure_to_zcdp(1).rho == 0.5


def test_compose_zcdp():
    assert compose_zcdp([0.005] * 100).rho == pytest.approx(0.5, rel=1e-15)
    assert compose_zcdp([]).rho == 0
    assert compose_zcdp([ZcdpBound(0.1), 0.2, 0.3]).rho == pytest.approx(0.6, rel=1e-15)


def test_zcdp_to_delta_boundary():
    d = zcdp_to_delta(0.5, 0.5)
    assert d.loose == 1.0 and d.vacuous


def test_zcdp_to_delta_oracle():
    # mpmath ternary search on the convex log objective
    d = zcdp_to_delta(0.5, 1.5)
    assert d.optimized == pytest.approx(0.12776336232679090127, rel=1e-9)
    assert d.t == pytest.approx(1.5085547240603755, rel=1e-4)
    assert d.loose == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert not d.vacuous


def test_zcdp_to_eps_examples():
    assert zcdp_to_eps(0.5, 1e-6, "remark") == pytest.approx(0.5 + math.sqrt(2 * L6), rel=1e-15)
    assert zcdp_to_eps(0.5, 1e-6, "remark") == pytest.approx(5.7566, abs=1e-4)
    assert zcdp_to_eps(0.5, 1e-6) == pytest.approx(5.2215344445301690442, rel=1e-10)
    assert zcdp_to_eps(0, 1e-3) == 0
    with pytest.raises(InvalidParameter):
        zcdp_to_eps(0.5, 0)


def test_rho_for_inverts_remark():
    rho = zcdp_rho_for(1.0, 1e-6)
    assert zcdp_to_eps(rho, 1e-6, "remark") == pytest.approx(1.0, rel=1e-13)
    assert zcdp_rho_for(0, 1e-6) == 0


def test_zcdp_to_rdp():
    assert zcdp_to_rdp(0.5).at(2) == 1.0
    assert all(e == 0 for e in zcdp_to_rdp(0).eps_at)


def test_rdp_compose():
    c = RdpCurve.linear(0.3, (2, 3, 4))
    assert rdp_compose([c] * 5).eps_at == pytest.approx([3.0, 4.5, 6.0], rel=1e-15)
    zero = RdpCurve((2, 3, 4), (0, 0, 0))
    assert rdp_compose([c, zero]) == c
    both = rdp_compose([zcdp_to_rdp(0.1), zcdp_to_rdp(0.2)])
    assert both.eps_at == pytest.approx(zcdp_to_rdp(compose_zcdp([0.1, 0.2])).eps_at, rel=1e-15)
    with pytest.raises(NoCommonOrders):
        rdp_compose([RdpCurve((2,), (1,)), RdpCurve((3,), (1,))])


def test_rdp_compose_intersects_orders():
    out = rdp_compose([RdpCurve((2, 3), (1, 2)), RdpCurve((3, 4), (1, 2))])
    assert out.orders == (3.0,) and out.eps_at == (3.0,)


def test_rdp_to_adp_single_order():
    c = RdpCurve((2,), (1,))
    assert rdp_to_adp(c, 1e-6, "simple").eps == pytest.approx(1 + L6, rel=1e-15)
    assert rdp_to_adp(c, 1e-6, "simple").eps == pytest.approx(14.8155, abs=1e-4)
    assert rdp_to_adp(c, 1e-6).eps == pytest.approx(13.429216196844383485, rel=1e-14)


def test_rdp_to_adp_delta_near_one():
    c = RdpCurve((2, 3, 8), (0.3, 0.5, 0.9))
    assert rdp_to_adp(c, 1 - 1e-12, "simple").eps == pytest.approx(0.3, abs=1e-9)


def test_rdp_to_adp_linear_vs_tight_zcdp():
    tight = zcdp_to_eps(0.5, 1e-6)
    coarse = rdp_to_adp(zcdp_to_rdp(0.5), 1e-6).eps
    fine = rdp_to_adp(zcdp_to_rdp(0.5, grid(1.001, 20, 1e-3)), 1e-6).eps
    assert tight <= fine <= coarse
    assert fine - tight < 1e-6


def test_group_shift_formula():
    f1 = lambda a: 0.2 * a
    f2 = lambda a: 0.3 * a
    assert rdp_group_shift(f1, f2, 2.0, 4.0) == pytest.approx(4 / 3 * 0.2 * 3 + 1.2)
    with pytest.raises(InvalidParameter):
        rdp_group_shift(f1, f2, 2.0, 2.0)


def test_group_shift_inf_order():
    assert rdp_group_shift(lambda a: a, lambda a: 2.0, 2.0, math.inf) == 4.0


def test_group_shift_optimum_for_zcdp_lines():
    r1, r2, a = 0.2, 0.45, 3.0
    bound, ap = rdp_group_shift_opt(lambda x: r1 * x, lambda x: r2 * x, a)
    assert bound == pytest.approx((math.sqrt(r1) + math.sqrt(r2)) ** 2 * a, rel=1e-9)
    assert ap == pytest.approx((1 + math.sqrt(r1 / r2)) * a, rel=1e-4)


def test_grid():
    assert grid(1.1, 1.5, 0.1) == (1.1, 1.2, 1.3, 1.4, 1.5)


@given(st.floats(1e-4, 5), st.floats(1e-12, 0.5))
def test_tight_zcdp_below_remark(rho, delta):
    tight = zcdp_to_eps(rho, delta)
    assert tight <= zcdp_to_eps(rho, delta, "remark") * (1 + 1e-12)
    assert zcdp_to_delta(rho, tight).optimized <= delta * (1 + 1e-9)


@given(st.floats(1e-3, 3), st.floats(0.01, 10))
def test_sharp_delta_below_loose(rho, gap):
    d = zcdp_to_delta(rho, rho + gap)
    assert d.optimized <= d.loose * (1 + 1e-12)


@given(st.floats(1e-3, 3), st.floats(1e-10, 0.3), st.floats(1.05, 50))
def test_rdp_sharp_equals_zcdp_objective(rho, delta, alpha):
    """At one order alpha, sharp conversion is the zCDP bound at t = alpha - 1."""
    c = RdpCurve.linear(rho, (alpha,))
    eps = rdp_to_adp(c, delta).eps
    t = c.orders[0] - 1
    if eps > c.eps_at[0]:
        log_delta = t * (t + 1) * rho - eps * t - math.log1p(t) + t * (math.log(t) - math.log1p(t))
        assert log_delta == pytest.approx(math.log(delta), abs=1e-9 * max(1, abs(math.log(delta))))


@given(st.floats(1e-3, 2), st.floats(1e-10, 0.3))
def test_sharp_not_above_simple(rho, delta):
    c = zcdp_to_rdp(rho)
    assert rdp_to_adp(c, delta).eps <= rdp_to_adp(c, delta, "simple").eps + 1e-12


def test_default_orders_sorted():
    assert list(DEFAULT_ORDERS) == sorted(set(DEFAULT_ORDERS))
