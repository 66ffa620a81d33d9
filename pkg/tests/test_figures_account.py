import math

import pytest

from dpacct.account import compose, to_eps_delta, to_pld, to_rdp
from dpacct.core import (ApproxDp, Composed, Gaussian, InvalidParameter, Laplace,
                         PoissonSubsampled, PureDp, Rdp, Zcdp)
from dpacct.figures import composition_curves, lower_envelope, subsampling_curves
from dpacct.gaussian import gaussian_delta
from dpacct.pld import delta_from_pld


def test_composition_columns_small():
    rows = composition_curves(k_max=30)
    for k, basic, adv, opt, cdp, gauss in rows:
        assert basic == pytest.approx(0.1 * k, rel=1e-15)
        assert opt <= basic and opt < adv
        assert cdp <= adv


def test_subsampling_columns():
    for a, unamp, exact, analytic, limit in subsampling_curves(alpha_max=16):
        assert unamp == 0.5 * a
        assert exact <= analytic and exact <= limit
        assert exact >= lower_envelope(0.05, 0.5, a)


def test_compose_methods_on_pure_parts():
    spec = Composed((PureDp(0.1),) * 10)
    assert compose(spec, "basic", 1e-6).eps == pytest.approx(1.0, rel=1e-15)
    assert compose(spec, "basic", 1e-6).delta == 0
    pld_eps = compose(spec, "pld", 1e-6).eps
    assert pld_eps == pytest.approx(0.99937090572175872470, abs=1e-9)
    assert compose(spec, "rdp", 1e-6).eps >= pld_eps
    with pytest.raises(InvalidParameter):
        compose(spec, "magic", 1e-6)


def test_gaussian_pld_composition():
    spec = Composed((Gaussian(1, 1), Gaussian(1, 2)))
    rho = 0.5 + 0.125
    got = delta_from_pld(to_pld(spec), 1.0)
    assert gaussian_delta(rho, 1.0) <= got <= gaussian_delta(rho, 1.0) + 1e-3


def test_to_rdp_subsampled_rounds_up():
    spec = PoissonSubsampled(0.05, Zcdp(0.5))
    curve = to_rdp(spec, (1.5, 2, 2.5))
    assert curve.at(1.5) == curve.at(2)
    assert curve.at(2) == pytest.approx(math.log(1 - 0.0025 + 0.0025 * math.e), rel=1e-12)


def test_to_rdp_laplace_and_pure():
    assert to_rdp(Laplace(1, 1), (2,)).at(2) == 1.0
    assert to_rdp(PureDp(0.1), (2,)).at(2) == pytest.approx(0.01)


def test_to_eps_delta_dispatch():
    assert to_eps_delta(ApproxDp(1, 1e-6)).eps == 1
    assert to_eps_delta(Rdp((2.0,), (1.0,)), delta=1e-6).eps == pytest.approx(13.4292161968, rel=1e-9)
    with pytest.raises(InvalidParameter):
        to_eps_delta(Gaussian(1, 0))


def test_to_pld_unsupported():
    with pytest.raises(InvalidParameter):
        to_pld(Zcdp(0.5))
