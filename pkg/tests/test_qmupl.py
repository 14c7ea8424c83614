import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mesocollapse.errors import PerturbativeWarning
from mesocollapse.mesons import MesonParams
from mesocollapse.qmupl import (
    QmuplParams,
    dyson_coefficients,
    gaussian_moment_check,
    lambda_qmupl,
    mass_series,
    momentum_integral,
    prob_flavor_qmupl,
    prob_mass_qmupl,
    qmupl_valid,
    zeta,
)

MESON = MesonParams.exact("K", 1.0, 0.4, 3.0)
MASSES = (2.0, 5.0)


def params(lam=1e-3, theta0=0.0, dim=3, alpha=1.0, m0=1.0):
    return QmuplParams(lam, alpha, m0, theta0, dim)


def test_lambda_examples():
    assert lambda_qmupl(params(theta0=0.5), 7.0) == 0.0
    assert lambda_qmupl(params(lam=2.0), 1.0) == 1.0
    assert lambda_qmupl(params(lam=2.0, theta0=1.0), 2.0) == -4.0
    with pytest.raises(ValueError):
        lambda_qmupl(params(), 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        params(lam=-1)
    with pytest.raises(ValueError):
        params(alpha=0)
    with pytest.raises(ValueError):
        params(theta0=1.2)
    with pytest.raises(ValueError):
        params(dim=4)


def test_mass_probability_examples():
    p = params()
    assert prob_mass_qmupl(p, MESON, MASSES, "L", "H", 0.3) == 0.0
    assert np.all(prob_mass_qmupl(p, MESON, MASSES, "H", "L", np.linspace(0, 1, 5)) == 0)
    assert prob_mass_qmupl(p, MESON, MASSES, "H", "H", 0.0) == 1.0
    still = MesonParams.exact("K", 0.0, 0.0, 1.0)
    assert prob_mass_qmupl(params(theta0=0.5), still, MASSES, "L", "L", 2.5) == 1.0


def test_second_order_factor_is_three_halves():
    s = mass_series(params(lam=0.01, theta0=0.1), MESON, MASSES, "H")
    assert s.c2 == pytest.approx(3 * s.c1**2 / 2, rel=1e-15)


def test_flavor_at_zero_time():
    p = params()
    assert prob_flavor_qmupl(p, MESON, MASSES, "same", 0.0) == pytest.approx(1.0)
    assert prob_flavor_qmupl(p, MESON, MASSES, "conjugate", 0.0) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 20))
def test_lambda_zero_is_standard_oscillation(t):
    p = params(lam=0.0)
    gL, gH, dm = MESON.gamma_L.value, MESON.gamma_H.value, MESON.delta_m.value
    env = np.exp(-(gH + gL) * t / 2)
    for target, s in (("same", 1), ("conjugate", -1)):
        expect = 0.25 * (np.exp(-gH * t) + np.exp(-gL * t) + s * 2 * np.cos(dm * t) * env)
        assert prob_flavor_qmupl(p, MESON, MASSES, target, t) == pytest.approx(expect, abs=1e-15)
    total = sum(prob_flavor_qmupl(p, MESON, MASSES, tg, t) for tg in ("same", "conjugate"))
    assert total == pytest.approx(0.5 * (np.exp(-gH * t) + np.exp(-gL * t)), abs=1e-15)


def test_dimension_independence():
    t = np.linspace(0, 2, 9)
    ref = prob_flavor_qmupl(params(dim=1), MESON, MASSES, "same", t)
    for d in (2, 3):
        np.testing.assert_array_equal(prob_flavor_qmupl(params(dim=d), MESON, MASSES, "same", t), ref)
        assert prob_mass_qmupl(params(dim=d), MESON, MASSES, "L", "L", 0.7) == prob_mass_qmupl(
            params(dim=1), MESON, MASSES, "L", "L", 0.7
        )


def test_half_theta_leaves_interference_damping():
    # Taylor coefficients of the collapse factors, read off by polynomial fit
    lam, alpha, m0 = 0.02, 1.5, 1.0
    p = params(lam=lam, alpha=alpha, theta0=0.5, m0=m0)
    still = MesonParams.exact("K", 0.0, 0.0, 0.0)
    t = np.linspace(0, 0.5, 11)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeWarning)
        same = prob_flavor_qmupl(p, still, MASSES, "same", t)
        conj = prob_flavor_qmupl(p, still, MASSES, "conjugate", t)
    diag = same + conj
    inter = same - conj
    np.testing.assert_allclose(diag, 1.0, atol=1e-15)
    dm = MASSES[1] - MASSES[0]
    c = np.polynomial.polynomial.polyfit(t, inter, 2)
    assert c[0] == pytest.approx(1.0)
    assert c[1] == pytest.approx(-(alpha * lam / 2) * dm**2 / (2 * m0**2), rel=1e-9)


def test_perturbative_warning():
    p = params(lam=1.0)
    with pytest.warns(PerturbativeWarning):
        prob_flavor_qmupl(p, MESON, MASSES, "same", 5.0)
    with pytest.warns(PerturbativeWarning):
        prob_mass_qmupl(p, MESON, MASSES, "H", "H", 5.0)
    assert not qmupl_valid(p, MASSES, 5.0)
    assert qmupl_valid(params(lam=1e-6), MASSES, 5.0)


def test_series_is_not_resummed():
    p = params(lam=1.0, theta0=0.0)
    with pytest.warns(PerturbativeWarning):
        v = prob_mass_qmupl(p, MesonParams.exact("K", 0.0, 0.0, 1.0), (1.0, 1.1), "L", "L", 3.0)
    assert v == pytest.approx(1 - 0.5 * 3.0 + 1.5 * 0.25 * 9.0)
    assert v > 1.0


def test_zeta_table():
    assert zeta(0, 0.7, 1.3) == 1
    assert zeta(2, 0.7, 0.0) == pytest.approx(0.7)
    assert zeta(4, 0.7, 0.0) == pytest.approx(3 * 0.49)
    assert zeta(1, 2.0, 0.5) == pytest.approx(-1j)
    with pytest.raises(ValueError):
        zeta(5, 1.0, 0.0)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.5])
def test_gaussian_moments_by_quadrature(alpha):
    assert momentum_integral(0, 0, alpha) == pytest.approx(1.0, rel=1e-10)
    m2 = gaussian_moment_check(2, alpha)
    assert m2["02"] == pytest.approx(alpha, rel=1e-10)
    assert m2["11"] == pytest.approx(alpha / 2, rel=1e-10)
    m4 = gaussian_moment_check(4, alpha)
    assert m4["04"] == pytest.approx(1.5 * alpha**2, rel=1e-10)
    assert m4["13"] == pytest.approx(1.5 * alpha**2, rel=1e-10)
    assert m4["22"] == pytest.approx(0.75 * alpha**2, rel=1e-10)


@pytest.mark.parametrize("theta0", [0.0, 0.2, 0.5, 0.9])
def test_dyson_coefficients_match_closed_form(theta0):
    alpha = 1.7
    p1, p2 = dyson_coefficients(alpha, theta0)
    v = 1 - 2 * theta0
    assert p1 == pytest.approx(-(alpha / 2) * v, rel=1e-10, abs=1e-12)
    assert p2 == pytest.approx(3 * alpha**2 / 8 * v**2, rel=1e-10, abs=1e-12)


def test_gaussian_moment_bad_order():
    with pytest.raises(ValueError):
        gaussian_moment_check(3, 1.0)
