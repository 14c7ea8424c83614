"""Infer absolute meson masses and the implied collapse rate from measured widths.

If the measured widths are entirely due to collapse, Gamma_mu is
proportional to (m_mu/m0)^2, or to (m0/m_mu)^2 in the inverted scenario.
Then R = (Gamma_L - Gamma_H)/(Gamma_L + Gamma_H) fixes the ratio m_H/m_L,
and m_H - m_L = delta_m fixes the scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .correlators import validate_theta0
from .errors import InfeasiblePhysicsError, NumericalError
from .mesons import Dataset, MesonParams, Species
from .quantities import Quantity
from .units import NUCLEON_MASS


class Scenario(str, Enum):
    DIRECT = "direct"
    INVERTED = "inverted"


def _sign(scenario: Scenario) -> int:
    return 1 if Scenario(scenario) is Scenario.INVERTED else -1


@dataclass(frozen=True)
class AbsoluteMasses:
    scenario: Scenario
    feasible: bool
    m_L: Quantity | None = None
    m_H: Quantity | None = None
    reason: str = ""

    def require(self) -> "AbsoluteMasses":
        if not self.feasible:
            raise InfeasiblePhysicsError(f"no positive mass solution ({self.reason})")
        return self


def light_mass(R, delta_m, scenario=Scenario.INVERTED):
    """m_L = delta_m ((1 - r) + sqrt((1 - r)(1 + r))) / (2 r) with r = +-R.

    The factored form stays accurate as r -> 1. Valid only for 0 < r < 1.
    """
    r = _sign(scenario) * R
    return delta_m * ((1 - r) + np.sqrt((1 - r) * (1 + r))) / (2 * r)


def quadratic_coefficients(R: float, delta_m: float, scenario=Scenario.INVERTED) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of a m_L^2 + b m_L + c = 0."""
    r = _sign(scenario) * R
    return 2 * r, 2 * (r - 1) * delta_m, (r - 1) * delta_m**2


def solve_masses(meson: MesonParams, scenario) -> AbsoluteMasses:
    scenario = Scenario(scenario)
    gl, gh, dm = meson.gamma_L.value, meson.gamma_H.value, meson.delta_m.value
    if gl <= 0 or gh <= 0 or dm <= 0:
        raise ValueError("mass inference needs positive widths and delta_m")
    R = (gl - gh) / (gl + gh)
    if R == 0:
        return AbsoluteMasses(scenario, False, reason="degenerate widths: R = 0, masses unbounded")
    r = _sign(scenario) * R
    if not 0 < r < 1:
        return AbsoluteMasses(scenario, False, reason=f"{scenario.value} scenario with R = {R:.6g} has no positive root")

    def m_light(gl_, gh_, dm_):
        return light_mass((gl_ - gh_) / (gl_ + gh_), dm_, scenario)

    m_L = meson.propagate(m_light, "s^-1")
    m_H = meson.propagate(lambda a, b, c: m_light(a, b, c) + c, "s^-1")
    return AbsoluteMasses(scenario, True, m_L, m_H)


@dataclass(frozen=True)
class LambdaEstimate:
    theta0: float
    lam: Quantity


def _lambda_closed(gl, gh, dm, m0, theta0):
    return dm**2 / (m0**2 * (1 - 2 * theta0) * (1 / np.sqrt(gh) - 1 / np.sqrt(gl)) ** 2)


def lambda_estimated(meson: MesonParams, m0: float, theta0: float, check: bool = True) -> LambdaEstimate:
    """Collapse rate implied by attributing the widths to collapse (inverted scenario).

    With ``check``, the closed form is compared against Gamma_mu m_mu^2 /
    (m0^2 (1 - 2 theta0)) for both eigenstates, using the inverted masses.
    """
    theta0 = validate_theta0(theta0)
    if theta0 == 0.5:
        raise ValueError("lambda_estimated is undefined at theta0 = 1/2")
    if m0 <= 0:
        raise ValueError("m0 must be positive")
    if meson.gamma_L.value <= 0 or meson.gamma_H.value <= 0:
        raise ValueError("widths must be positive")
    if meson.gamma_L.value == meson.gamma_H.value:
        raise ValueError("widths must be distinct")
    lam = meson.propagate(lambda gl, gh, dm: _lambda_closed(gl, gh, dm, m0, theta0), "s^-1")
    if check:
        masses = solve_masses(meson, Scenario.INVERTED)
        if masses.feasible:
            for gamma, m in ((meson.gamma_L, masses.m_L), (meson.gamma_H, masses.m_H)):
                alt = gamma.value * m.value**2 / (m0**2 * (1 - 2 * theta0))
                if abs(alt - lam.value) > 1e-9 * abs(lam.value):
                    raise NumericalError(f"lambda identity violated: {alt!r} vs {lam.value!r}")
    return LambdaEstimate(theta0, lam)


def resolve_m0(choice, meson: MesonParams | None = None) -> float:
    """Reference mass in s^-1 from 'nucleon', 'rest' or an explicit number."""
    if isinstance(choice, str):
        key = choice.lower()
        if key == "nucleon":
            return NUCLEON_MASS
        if key == "rest":
            if meson is None:
                raise ValueError("m0 = 'rest' needs a meson")
            return meson.rest_mass.value
        choice = float(choice)
    m0 = float(choice)
    if not m0 > 0:
        raise ValueError("m0 must be positive")
    return m0


@dataclass(frozen=True)
class Figure1Row:
    species: Species
    theta0: float
    lam: float
    lam_plus: float
    lam_minus: float


def figure1_data(mesons, m0_choice, theta0_grid, include_errors: bool = True) -> list[Figure1Row]:
    """lambda_estimated(theta0) per species; bands propagate Gamma_L, Gamma_H and delta_m."""
    grid = [validate_theta0(x) for x in theta0_grid]
    if any(x >= 0.5 for x in grid):
        raise ValueError("theta0 grid must lie in [0, 1/2)")
    if isinstance(mesons, Dataset):
        mesons = mesons.all_params()
    rows = []
    for meson in mesons:
        m0 = resolve_m0(m0_choice, meson)
        for th in grid:
            est = lambda_estimated(meson, m0, th).lam
            if include_errors:
                rows.append(Figure1Row(meson.species, th, est.value, est.upper, est.lower))
            else:
                rows.append(Figure1Row(meson.species, th, est.value, est.value, est.value))
    return rows


@dataclass(frozen=True)
class Table1Row:
    species: Species
    gamma_L: Quantity
    gamma_H: Quantity
    delta_m: Quantity
    m_L: Quantity
    m_H: Quantity

    def values(self) -> tuple[float, float, float, float, float]:
        return tuple(q.value for q in (self.gamma_L, self.gamma_H, self.delta_m, self.m_L, self.m_H))


TABLE1_COLUMNS = ("gamma_L", "gamma_H", "delta_m", "m_L", "m_H")


def table1(dataset: Dataset) -> list[Table1Row]:
    """Decay widths, mass difference and inverted-scenario masses for K, D, Bd, Bs."""
    rows = []
    for species in (Species.K, Species.D, Species.BD, Species.BS):
        if species not in dataset.raw:
            raise KeyError(f"dataset lacks species {species.value}")
        meson = dataset.params(species)
        masses = solve_masses(meson, Scenario.INVERTED).require()
        rows.append(Table1Row(species, meson.gamma_L, meson.gamma_H, meson.delta_m, masses.m_L, masses.m_H))
    return rows
