import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpacct.core import (AssumptionNotMet, DiscreteDist, EpsDelta, InvalidParameter,
                         Neighbouring, RdpCurve)
from dpacct.accountants import rdp_to_adp
from dpacct.pld import renyi_divergence
from dpacct.subsample import (amplify_adp, asymptotic_omega, dpsgd_account,
                              fixed_size_via_group_privacy, flip_bound, naive_dpsgd_eps,
                              rdp_at_order, subsampled_rdp_analytic,
                              subsampled_rdp_analytic_gaussian, subsampled_rdp_exact,
                              subsampled_rdp_large_alpha, subsampled_zcdp_asymptotic)
from dpacct.selfcheck import check_lemma_frac, check_lemma_wtf, random_dist, renyi_plain

gauss = lambda rho: (lambda k: rho * k)


def test_amplify_examples():
    g = EpsDelta(1.0, 1e-6)
    assert amplify_adp(g, 1.0) == g
    assert amplify_adp(g, 0.0) == EpsDelta(0.0, 0.0)
    out = amplify_adp(g, 0.01)
    assert out.eps == pytest.approx(0.017036863236176549786, rel=1e-14)
    assert out.delta == pytest.approx(1e-8, rel=1e-15)


def test_amplify_two_point_ratio():
    # on the two-point pair the mixture's largest likelihood ratio is exactly 1 + p(e^eps - 1)
    eps, p = 1.0, 0.01
    P = DiscreteDist.normalized([math.e, 1.0])
    Q = DiscreteDist.normalized([1.0, math.e])
    mix = p * P.probs + (1 - p) * Q.probs
    assert math.log(np.max(mix / Q.probs)) == pytest.approx(amplify_adp(EpsDelta(eps, 0), p).eps,
                                                            rel=1e-12)


def test_replace_neighbouring_rejected():
    with pytest.raises(InvalidParameter):
        amplify_adp(EpsDelta(1, 0), 0.1, Neighbouring.REPLACE)
    with pytest.raises(InvalidParameter):
        subsampled_rdp_exact(gauss(0.5), 0.1, 4, Neighbouring.REPLACE)


def test_exact_edge_probabilities():
    assert subsampled_rdp_exact(gauss(0.5), 0.0, 5).eps_at == (0.0,) * 4
    assert subsampled_rdp_exact(gauss(0.5), 1.0, 5).eps_at == pytest.approx([1, 1.5, 2, 2.5])


def test_exact_fig2_values():
    curve = subsampled_rdp_exact(gauss(0.5), 0.05, 64)
    assert curve.at(2) == pytest.approx(math.log(1 - 0.05 ** 2 + 0.05 ** 2 * math.e), rel=1e-12)
    assert curve.at(2) == pytest.approx(0.0042865043704189774702, rel=1e-12)
    # 50-digit mpmath evaluations of the binomial series
    assert curve.at(3) == pytest.approx(0.0072612432527814565643, rel=1e-12)
    assert curve.at(10) == pytest.approx(1.6740605637858167443, rel=1e-12)
    assert curve.at(64) == pytest.approx(28.956716420516580578, rel=1e-12)


def test_exact_accepts_curve_and_mapping():
    rho = 0.3
    by_fn = subsampled_rdp_exact(gauss(rho), 0.1, 6)
    by_curve = subsampled_rdp_exact(RdpCurve.linear(rho, range(2, 7)), 0.1, 6)
    by_map = subsampled_rdp_exact({k: rho * k for k in range(2, 7)}, 0.1, 6)
    assert by_fn.eps_at == pytest.approx(by_curve.eps_at, rel=1e-15)
    assert by_fn.eps_at == pytest.approx(by_map.eps_at, rel=1e-15)
    with pytest.raises(InvalidParameter):
        subsampled_rdp_exact({2: 0.1}, 0.1, 3)


def test_exact_small_p_large_alpha():
    curve = subsampled_rdp_exact(gauss(0.5), 1e-3, 256)
    assert all(math.isfinite(e) for e in curve.eps_at)
    assert curve.at(2) == pytest.approx(math.log1p(1e-6 * math.expm1(1.0)), rel=1e-12)


def test_non_integer_order_rounds_up():
    curve = subsampled_rdp_exact(gauss(0.5), 0.05, 8)
    look = rdp_at_order(curve, 2.5)
    assert look.order == 3 and look.rounded_up and look.eps == curve.at(3)
    assert not rdp_at_order(curve, 4).rounded_up


def test_flip_examples():
    assert flip_bound(0.7, 0.7, 0.3, 3.0) == pytest.approx(0.7, rel=1e-15)
    assert flip_bound(0.2, 5.0, 0.0, 3.0) == 0.2


def test_flip_random_pair():
    rng = np.random.default_rng(7)
    P, Q = random_dist(rng, 6), random_dist(rng, 6)
    p, a = 0.3, 3.0
    fwd = renyi_plain(p * P.probs + (1 - p) * Q.probs, Q.probs, a)
    other = renyi_plain(p * Q.probs + (1 - p) * P.probs, P.probs, a)
    rev = renyi_plain(Q.probs, p * P.probs + (1 - p) * Q.probs, a)
    assert rev <= flip_bound(fwd, other, p, a)


def test_analytic_examples():
    assert subsampled_rdp_analytic(1.0, 4.0, 0.0, 2.0, 8.0) == 0.0
    first = 2 * math.e / 2 * 0.05 ** 2 * math.expm1(1.0)
    tail = 0.05 * (0.05 * math.exp(4.0)) ** 7
    assert subsampled_rdp_analytic(1.0, 4.0, 0.05, 2.0, 8.0) == pytest.approx(first + tail, rel=1e-13)
    assert subsampled_rdp_analytic(1.0, 4.0, 0.05, 2.0, 8.0) >= 4.287e-3
    log_form = subsampled_rdp_analytic(1.0, 4.0, 0.05, 2.0, 8.0, "log")
    assert 4.287e-3 <= log_form <= first + tail


def test_analytic_preconditions():
    with pytest.raises(InvalidParameter):
        subsampled_rdp_analytic(1, 4, 0.7, 2, 8)
    with pytest.raises(InvalidParameter):
        subsampled_rdp_analytic(1, 4, 0.05, 3, 2)


def test_analytic_dominates_exact_on_fig2_grid():
    exact = subsampled_rdp_exact(gauss(0.5), 0.05, 64)
    for a in range(2, 65):
        best = subsampled_rdp_analytic_gaussian(0.5, 0.05, a)
        assert exact.at(a) <= best
        for w in (a, a + 1, 2 * a):
            assert exact.at(a) <= subsampled_rdp_analytic(1.0, 0.5 * w, 0.05, a, w)
            assert exact.at(a) <= subsampled_rdp_analytic(1.0, 0.5 * w, 0.05, a, w, "log")


def test_large_alpha_examples():
    assert subsampled_rdp_large_alpha(3.0, 1.0, 4.0) == pytest.approx(3.0, rel=1e-15)
    assert subsampled_rdp_large_alpha(3.0, 0.0, 4.0) == 0.0
    exact = subsampled_rdp_exact(gauss(0.5), 0.05, 40).at(40)
    bound = subsampled_rdp_large_alpha(20.0, 0.05, 40)
    assert exact <= bound
    assert bound - exact < 0.5


def test_asymptotic_examples():
    assert asymptotic_omega(0.1, 0.01) == pytest.approx(1 + math.sqrt(10), rel=1e-15)
    assert subsampled_zcdp_asymptotic(0.1, 0.01, 2) == pytest.approx(2e-4, rel=1e-14)
    with pytest.raises(AssumptionNotMet) as err:
        subsampled_zcdp_asymptotic(1.0, 0.3, 1.5)
    assert err.value.omega == pytest.approx(asymptotic_omega(1.0, 0.3))


def test_asymptotic_dominates_exact():
    for p, rho in ((0.01, 0.1), (0.001, 0.05), (0.005, 0.2)):
        omega = asymptotic_omega(rho, p)
        exact = subsampled_rdp_exact(gauss(rho), p, math.ceil(omega) + 1)
        for a in np.linspace(1.1, omega - 1e-6, 15):
            try:
                bound = subsampled_zcdp_asymptotic(rho, p, a)
            except AssumptionNotMet:
                continue
            assert exact.at(max(2, math.ceil(a))) <= bound * (1 + 1e-12) or a < 2


def test_asymptotic_assumption_reports_omega():
    with pytest.raises(AssumptionNotMet):
        subsampled_zcdp_asymptotic(0.1, 0.01, 5.0)


def test_fixed_size_zero_p():
    assert fixed_size_via_group_privacy(gauss(0.5), 0.0, 2.0, 4.0) == 0.0


def test_fixed_size_reproduces_group_shape():
    rho = 0.3
    # p = 1 leaves the inner lines; alpha' = 2 alpha is the optimum for equal rhos
    got = fixed_size_via_group_privacy(gauss(rho), 1.0, 2.0, 4.0)
    assert got == pytest.approx((2 * math.sqrt(rho)) ** 2 * 2, rel=1e-14)


def test_dpsgd_degenerate():
    r = dpsgd_account(1.0, 2.0, 1.0, 1, 1e-5, naive=False)
    direct = rdp_to_adp(RdpCurve.linear(0.125, r.curve.orders), 1e-5).eps
    assert r.eps == pytest.approx(direct, rel=1e-12)
    assert dpsgd_account(0.0, 1.0, 1.0, 100, 1e-5).eps == 0.0


def test_dpsgd_beats_naive():
    r = dpsgd_account(0.01, 1.0, 1.0, 1000, 1e-5)
    assert r.eps < r.naive_eps
    assert r.eps < 5


def test_naive_split_is_on_grid():
    eps, frac = naive_dpsgd_eps(0.01, 0.5, 100, 1e-5)
    assert 0.05 <= frac <= 0.95 and eps > 0


# --------------------------------------------------------------------------
# properties

@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_amplify_linearisation(p, eps, delta):
    g = amplify_adp(EpsDelta(eps, delta), p)
    assert g.eps <= 2 * p * eps + 1e-15
    assert g.delta <= delta


@given(st.floats(0.01, 2), st.floats(1e-4, 0.99))
def test_exact_nondecreasing_and_below_inner(rho, p):
    curve = subsampled_rdp_exact(gauss(rho), p, 24)
    assert all(b >= a for a, b in zip(curve.eps_at, curve.eps_at[1:]))
    assert all(e <= rho * a + 1e-12 for a, e in zip(curve.orders, curve.eps_at))


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 0.99), st.integers(2, 6))
def test_exact_lower_bound(seed, p, a):
    rng = np.random.default_rng(seed)
    P, Q = random_dist(rng, 5), random_dist(rng, 5)
    d = {k: renyi_divergence(P, Q, k) for k in range(2, 7)}
    eps = subsampled_rdp_exact(d, p, 6).at(a)
    assert eps >= d[a] - a / (a - 1) * math.log(1 / p) - 1e-12
    mix = DiscreteDist.normalized(p * P.probs + (1 - p) * Q.probs)
    assert eps == pytest.approx(renyi_divergence(mix, Q, a), abs=1e-10)


def test_lemma_grids():
    assert check_lemma_frac()[0]
    assert check_lemma_wtf()[0]
