"""Mass-proportional CSL predictions for neutral meson oscillations.

Collapse acts in two ways. Each mass eigenstate gets an extra decay rate
Gamma^CSL_mu = lambda (m_mu/m0)^2 (1 - 2 theta0), and the interference term
between eigenstates is damped at lambda (delta_m)^2 / (2 m0^2), which does not
depend on theta0. In the inverted scenario every ratio m_mu/m0 becomes m0/m_mu.

Probabilities come in two forms: ``series``, the expansion to second order
in t, and ``exponential``, its resummation. Both accept complex ``t`` so
their Taylor coefficients can be compared on a contour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import inference
from ._common import Eigen, Target, check_time, flavor_combination, mass_pair, scalar_or_array, series_factors
from .correlators import validate_theta0
from .mesons import MesonParams
from .units import LAMBDA_ADLER, LAMBDA_GRW

LAMBDA_PRESETS = {"adler": LAMBDA_ADLER, "grw": LAMBDA_GRW}


def resolve_lambda(choice) -> float:
    if isinstance(choice, str) and choice.lower() in LAMBDA_PRESETS:
        return LAMBDA_PRESETS[choice.lower()]
    lam = float(choice)
    if not lam >= 0:
        raise ValueError("lambda must be non-negative")
    return lam


@dataclass(frozen=True)
class CslParams:
    lambda_csl: float
    m0: float
    theta0: float
    inverted_ratio: bool = False
    dim: int = 3
    gamma_strength: float | None = None
    r_c: float | None = None

    def __post_init__(self):
        if self.lambda_csl < 0:
            raise ValueError("lambda_csl must be non-negative")
        if self.m0 <= 0:
            raise ValueError("m0 must be positive")
        validate_theta0(self.theta0)
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if (self.gamma_strength is None) != (self.r_c is None):
            raise ValueError("gamma_strength and r_c must be given together")
        if self.gamma_strength is not None:
            implied = self.gamma_strength / (math.sqrt(4 * math.pi) * self.r_c) ** self.dim
            if abs(implied - self.lambda_csl) > 1e-12 * max(abs(implied), abs(self.lambda_csl)):
                raise ValueError(f"lambda_csl = {self.lambda_csl!r} inconsistent with gamma/(sqrt(4 pi) r_C)^d = {implied!r}")

    @classmethod
    def from_gamma(cls, gamma_strength: float, r_c: float, dim: int, m0: float, theta0: float, inverted_ratio=False):
        lam = gamma_strength / (math.sqrt(4 * math.pi) * r_c) ** dim
        return cls(lam, m0, theta0, inverted_ratio, dim, gamma_strength, r_c)

    def weights(self, masses) -> tuple[float, float]:
        """Collapse weights (g_L, g_H): m/m0, or m0/m when inverted."""
        m_L, m_H = mass_pair(masses)
        if self.inverted_ratio:
            return self.m0 / m_L, self.m0 / m_H
        return m_L / self.m0, m_H / self.m0


@dataclass(frozen=True)
class CslRates:
    gamma_csl_L: float
    gamma_csl_H: float
    interference_damping: float


def csl_rates(params: CslParams, meson: MesonParams, masses) -> CslRates:
    g_L, g_H = params.weights(masses)
    v = 1 - 2 * params.theta0
    lam = params.lambda_csl
    return CslRates(lam * g_L**2 * v, lam * g_H**2 * v, 0.5 * lam * (g_H - g_L) ** 2)


def _total_widths(params, meson, masses):
    rates = csl_rates(params, meson, masses)
    return (
        meson.gamma_L.value + rates.gamma_csl_L,
        meson.gamma_H.value + rates.gamma_csl_H,
        rates,
    )


def _check_form(form):
    if form not in ("series", "exponential"):
        raise ValueError("form must be 'series' or 'exponential'")


def prob_mass_csl(params: CslParams, meson: MesonParams, masses, mu, nu, t, form: str):
    _check_form(form)
    t = check_time(t)
    if Eigen(mu) is not Eigen(nu):
        return scalar_or_array(np.zeros(np.shape(t)))
    rates = csl_rates(params, meson, masses)
    if Eigen(mu) is Eigen.H:
        gamma, gc = meson.gamma_H.value, rates.gamma_csl_H
    else:
        gamma, gc = meson.gamma_L.value, rates.gamma_csl_L
    if form == "exponential":
        return scalar_or_array(np.exp(-(gamma + gc) * t))
    return scalar_or_array((1 - gc * t + 0.5 * gc * gc * t * t) * np.exp(-gamma * t))


def prob_flavor_csl(params: CslParams, meson: MesonParams, masses, target, t, form: str):
    """Probability to find M0 (``same``) or anti-M0 (``conjugate``) at t, starting from M0."""
    _check_form(form)
    t = check_time(t)
    target = Target(target)
    if form == "series":
        g_L, g_H = params.weights(masses)
        dH, dL, inter = series_factors(params.lambda_csl, g_H, g_L, params.theta0, 0.5, t)
        p = flavor_combination(
            target, dH, dL, inter, meson.gamma_H.value, meson.gamma_L.value, meson.delta_m.value, t
        )
        return scalar_or_array(p)
    wL, wH, _ = _total_widths(params, meson, masses)
    sign = 1.0 if target is Target.SAME else -1.0
    p = 0.25 * (np.exp(-wL * t) + np.exp(-wH * t)) * (1 + sign * _asym(params, meson, masses, t))
    return scalar_or_array(p)


def _asym(params, meson, masses, t):
    wL, wH, rates = _total_widths(params, meson, masses)
    return (
        np.cos(meson.delta_m.value * t)
        / np.cosh(0.5 * (wL - wH) * t)
        * np.exp(-rates.interference_damping * t)
    )


def asymmetry(params: CslParams, meson: MesonParams, masses, t):
    """A(t) = (P_same - P_conj) / (P_same + P_conj) for the exponential form."""
    t = check_time(t)
    return scalar_or_array(_asym(params, meson, masses, t))


@dataclass(frozen=True)
class InvertedInterference:
    """Interference damping of the inverted scenario, in three equivalent forms.

    ``from_ratio`` is None when theta0 = 1/2, where that form divides by zero;
    ``flagged`` records this.
    """

    from_masses: float
    from_widths: float
    from_ratio: float | None
    flagged: bool

    @property
    def value(self) -> float:
        return self.from_masses


def inverted_interference_factor(params: CslParams, meson: MesonParams) -> InvertedInterference:
    gl, gh, dm = meson.gamma_L.value, meson.gamma_H.value, meson.delta_m.value
    if gl <= 0 or gh <= 0:
        raise ValueError("widths must be positive")
    lam, m0 = params.lambda_csl, params.m0
    if gl == gh:
        return InvertedInterference(0.0, 0.0, 0.0, False)
    masses = inference.solve_masses(meson, inference.Scenario.INVERTED).require()
    m_L, m_H = masses.m_L.value, masses.m_H.value
    f1 = 0.5 * lam * dm**2 * m0**2 / (m_H**2 * m_L**2)
    f2 = 0.5 * lam * m0**2 / dm**2 * gh * gl * (1 / math.sqrt(gl) - 1 / math.sqrt(gh)) ** 4
    if params.theta0 == 0.5:
        return InvertedInterference(f1, f2, None, True)
    lam_est = inference.lambda_estimated(meson, m0, params.theta0, check=False).lam.value
    f3 = 0.5 * (lam / lam_est) / (1 - 2 * params.theta0) * (math.sqrt(gl) - math.sqrt(gh)) ** 2
    return InvertedInterference(f1, f2, f3, False)
