"""Position-localisation (QMUPL) collapse: second-order-in-time predictions.

Only the product alpha * lambda reaches observables. The QMUPL series is
asymptotic, so no resummed (exponential) form is provided; evaluating it
where |Lambda t| > 0.1 raises a :class:`PerturbativeWarning`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import correlators
from ._common import Eigen, check_time, flavor_combination, mass_pair, scalar_or_array
from ._common import series_factors, warn_if_nonperturbative
from .mesons import MesonParams


@dataclass(frozen=True)
class QmuplParams:
    lam: float
    alpha: float
    m0: float
    theta0: float
    dim: int = 3

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.m0 <= 0:
            raise ValueError("m0 must be positive")
        correlators.validate_theta0(self.theta0)
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")

    @property
    def rate(self) -> float:
        """alpha * lambda / 2, the rate prefactor at unit mass ratio."""
        return 0.5 * self.alpha * self.lam


@dataclass(frozen=True)
class ProbSeries:
    """(c0 + c1 t + c2 t^2) * exp(-decay t)"""

    c0: float
    c1: float
    c2: float
    decay: float = 0.0

    def __call__(self, t):
        t = np.asarray(t)
        return (self.c0 + self.c1 * t + self.c2 * t * t) * np.exp(-self.decay * t)


def lambda_qmupl(params: QmuplParams, m_mu: float) -> float:
    """Lambda_mu = (alpha lambda / 2) (m_mu/m0)^2 (1 - 2 theta0); negative for theta0 > 1/2."""
    if m_mu <= 0:
        raise ValueError("mass must be positive")
    return params.rate * (m_mu / params.m0) ** 2 * (1 - 2 * params.theta0)


def mass_series(params: QmuplParams, meson: MesonParams, masses, mu) -> ProbSeries:
    m_L, m_H = mass_pair(masses)
    mu = Eigen(mu)
    lam = lambda_qmupl(params, m_H if mu is Eigen.H else m_L)
    gamma = (meson.gamma_H if mu is Eigen.H else meson.gamma_L).value
    return ProbSeries(1.0, -lam, 1.5 * (lam * lam), gamma)


def prob_mass_qmupl(params: QmuplParams, meson: MesonParams, masses, mu, nu, t):
    """Mass-eigenstate transition probability; mass eigenstates never mix."""
    t = check_time(t)
    if Eigen(mu) is not Eigen(nu):
        return scalar_or_array(np.zeros(np.shape(t)))
    series = mass_series(params, meson, masses, mu)
    warn_if_nonperturbative([series.c1], t)
    return scalar_or_array(series(t))


def prob_flavor_qmupl(params: QmuplParams, meson: MesonParams, masses, target, t):
    """Flavour transition probability from an initial M0, including decay."""
    t = check_time(t)
    m_L, m_H = mass_pair(masses)
    g_L, g_H = m_L / params.m0, m_H / params.m0
    dH, dL, inter = series_factors(params.rate, g_H, g_L, params.theta0, 1.5, t)
    u = 1 - params.theta0
    warn_if_nonperturbative(
        [params.rate * g * g * (1 - 2 * params.theta0) for g in (g_L, g_H)]
        + [params.rate * ((g_H**2 + g_L**2) * u - g_H * g_L)],
        t,
    )
    p = flavor_combination(
        target, dH, dL, inter, meson.gamma_H.value, meson.gamma_L.value, meson.delta_m.value, t
    )
    return scalar_or_array(p)


def qmupl_valid(params: QmuplParams, masses, t, limit: float = 0.1) -> bool:
    """Whether every first-order collapse coefficient satisfies |c1 t| <= limit."""
    m_L, m_H = mass_pair(masses)
    g_L, g_H = m_L / params.m0, m_H / params.m0
    u = 1 - params.theta0
    coeffs = [params.rate * g * g * (1 - 2 * params.theta0) for g in (g_L, g_H)]
    coeffs.append(params.rate * ((g_H**2 + g_L**2) * u - g_H * g_L))
    return max(abs(c) for c in coeffs) * abs(t) <= limit


# --- Gaussian matrix elements ----------------------------------------------


def zeta(n: int, alpha: float, dp):
    """Polynomial factor of <p_f| q^n |p_i, alpha> for a Gaussian packet.

    The full matrix element is sqrt(2 sqrt(alpha pi)) exp(-alpha dp^2 / 2)
    times this factor, with dp = p_f - p_i (hbar = 1).
    """
    if n == 0:
        return 1.0 + 0j * dp
    if n == 1:
        return -1j * alpha * dp
    if n == 2:
        return alpha * (1 - alpha * dp**2) + 0j
    if n == 3:
        return -1j * alpha**2 * (3 * dp - alpha * dp**3)
    if n == 4:
        return alpha**2 * (3 - 6 * alpha * dp**2 + alpha**2 * dp**4) + 0j
    raise ValueError("n must be in 0..4")


def momentum_integral(a: int, b: int, alpha: float) -> float:
    """(1/2pi) int dp |<p|psi>|^2-weighted conj(zeta_a) zeta_b, by adaptive quadrature."""
    norm = 2 * np.sqrt(alpha * np.pi) / (2 * np.pi)

    def part(fn):
        val, err = integrate.quad(lambda x: norm * np.exp(-alpha * x * x) * fn(x), -np.inf, np.inf,
                                  epsabs=0, epsrel=1e-12, limit=200)
        if not np.isfinite(val) or err > 1e-8 * max(abs(val), alpha ** ((a + b) / 2)):
            raise ArithmeticError(f"quadrature did not converge for ({a}, {b})")
        return val

    re = part(lambda x: (np.conj(zeta(a, alpha, x)) * zeta(b, alpha, x)).real)
    im = part(lambda x: (np.conj(zeta(a, alpha, x)) * zeta(b, alpha, x)).imag)
    if abs(im) > 1e-9 * max(abs(re), 1.0):
        raise ArithmeticError("momentum integral has an imaginary part")
    return re


def gaussian_moment_check(n: int, alpha: float) -> dict[str, float]:
    """Momentum integrals entering the order-n/2 probability coefficient.

    Pairs (a, b) with a != b include their complex-conjugate partner, so the
    returned values multiply the correlator integrals directly.
    """
    pairs = {0: [(0, 0)], 2: [(0, 2), (1, 1)], 4: [(0, 4), (1, 3), (2, 2)]}
    if n not in pairs:
        raise ValueError("n must be 0, 2 or 4")
    out = {}
    for a, b in pairs[n]:
        val = momentum_integral(a, b, alpha)
        out[f"{a}{b}"] = val if a == b else val + momentum_integral(b, a, alpha)
    return out


def dyson_coefficients(alpha: float, theta0: float) -> tuple[float, float]:
    """First- and second-order diagonal coefficients per unit (lambda g^2) from quadrature.

    Combines the Gaussian momentum integrals with the noise correlator
    integrals at t = 1. The closed forms are -(alpha/2)(1 - 2 theta0) and
    (3 alpha^2 / 8)(1 - 2 theta0)^2; their ratio is the factor 3/2.
    """
    i2 = gaussian_moment_check(2, alpha)
    i4 = gaussian_moment_check(4, alpha)
    c = {k: correlators.closed_form(k, theta0).coefficient for k in correlators.Kind}
    p1 = -i2["02"] * c[correlators.Kind.C1_20] + i2["11"] * c[correlators.Kind.C1_11]
    p2 = (
        i4["04"] * c[correlators.Kind.C2_40]
        - i4["13"] * c[correlators.Kind.C2_31]
        + i4["22"] * c[correlators.Kind.C2_22]
    )
    return p1, p2
