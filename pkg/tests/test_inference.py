import csv
import math
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mesocollapse.errors import InfeasiblePhysicsError, NumericalError
from mesocollapse.inference import (
    Scenario,
    figure1_data,
    lambda_estimated,
    light_mass,
    quadratic_coefficients,
    resolve_m0,
    solve_masses,
    table1,
)
from mesocollapse.mesons import MesonParams, Species, width_asymmetry
from mesocollapse.units import ADLER_BAND, LAMBDA_GRW, NUCLEON_MASS

GOLDEN = Path(__file__).parent / "golden" / "table1_printed.csv"
SPECIES = ["K", "D", "Bd", "Bs"]


def printed_rows():
    with open(GOLDEN, newline="") as fh:
        return {row.pop("species"): row for row in csv.DictReader(fh)}


def printed_tolerance(text):
    """Half a unit in the last printed digit, floored at 5e-4 relative."""
    d = Decimal(text)
    half_ulp = float(Decimal(1).scaleb(d.as_tuple().exponent)) / 2
    return max(half_ulp, 5e-4 * abs(float(d)))


def test_kaon_masses(dataset):
    m = solve_masses(dataset.params("K"), "inverted").require()
    assert m.m_L.value == pytest.approx(2.311e8, rel=5e-3)
    assert m.m_H.value == pytest.approx(5.524e9, rel=5e-3)
    assert m.m_H.value - m.m_L.value == pytest.approx(dataset.params("K").delta_m.value, rel=1e-12)


def test_bd_masses(dataset):
    m = solve_masses(dataset.params("Bd"), "inverted").require()
    assert m.m_L.value == pytest.approx(1.020e15, rel=5e-3)
    assert m.m_H.value == pytest.approx(1.020e15, rel=5e-3)


@pytest.mark.parametrize("species", SPECIES)
def test_direct_scenario_infeasible(dataset, species):
    m = solve_masses(dataset.params(species), Scenario.DIRECT)
    assert not m.feasible and m.m_L is None
    with pytest.raises(InfeasiblePhysicsError):
        m.require()


def test_degenerate_widths():
    m = solve_masses(MesonParams.exact("K", 1.0, 1.0, 1.0), "inverted")
    assert not m.feasible and "degenerate" in m.reason


def test_inference_needs_positive_inputs():
    with pytest.raises(ValueError):
        solve_masses(MesonParams.exact("K", 1.0, 0.0, 1.0), "inverted")


@pytest.mark.parametrize("species", SPECIES)
def test_closed_form_root_matches_polynomial_solver(dataset, species):
    meson = dataset.params(species)
    R = width_asymmetry(meson).value
    dm = meson.delta_m.value
    roots = np.roots(quadratic_coefficients(R, dm))
    positive = [r.real for r in roots if abs(r.imag) < 1e-9 * abs(r) and r.real > 0]
    assert len(positive) == 1
    assert light_mass(R, dm) == pytest.approx(positive[0], rel=1e-9)


@pytest.mark.parametrize("species", SPECIES)
def test_back_substitution(dataset, species):
    meson = dataset.params(species)
    m = solve_masses(meson, "inverted").require()
    mL, mH = m.m_L.value, m.m_H.value
    R = width_asymmetry(meson).value
    assert (mH**2 - mL**2) / (mH**2 + mL**2) == pytest.approx(R, rel=1e-9)


@given(st.floats(0.01, 0.98), st.floats(1e-3, 1e3))
def test_light_mass_decreasing_in_R(R, dm):
    assert light_mass(R + 0.01, dm) < light_mass(R, dm)


def test_light_mass_near_one_stays_accurate():
    R = 1 - 1e-12
    m = light_mass(R, 1.0)
    assert (( (m + 1) ** 2 - m**2) / ((m + 1) ** 2 + m**2)) == pytest.approx(R, rel=1e-12)


@pytest.mark.parametrize("species", SPECIES)
@pytest.mark.parametrize("theta0", [0.0, 0.2, 0.45])
def test_lambda_identity(dataset, species, theta0):
    meson = dataset.params(species)
    est = lambda_estimated(meson, NUCLEON_MASS, theta0)
    m = solve_masses(meson, "inverted").require()
    for gamma, mass in ((meson.gamma_L, m.m_L), (meson.gamma_H, m.m_H)):
        alt = gamma.value * mass.value**2 / (NUCLEON_MASS**2 * (1 - 2 * theta0))
        assert alt == pytest.approx(est.lam.value, rel=1e-9)


def test_lambda_pole_and_errors(dataset):
    d = dataset.params("D")
    vals = [lambda_estimated(d, NUCLEON_MASS, th).lam.value for th in (0.49, 0.499, 0.4999)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] / vals[0] == pytest.approx(100, rel=1e-6)
    with pytest.raises(ValueError):
        lambda_estimated(d, NUCLEON_MASS, 0.5)
    with pytest.raises(ValueError):
        lambda_estimated(MesonParams.exact("K", 1.0, 1.0, 1.0), 1.0, 0.0)


def test_identity_check_raises_on_mismatch(dataset, monkeypatch):
    import mesocollapse.inference as inf

    monkeypatch.setattr(inf, "_lambda_closed", lambda *a: 1.0 + 0j)
    with pytest.raises(NumericalError):
        lambda_estimated(dataset.params("K"), NUCLEON_MASS, 0.0)


def test_kaon_rest_mass_weaker_than_grw(dataset):
    k = dataset.params("K")
    lam = lambda_estimated(k, resolve_m0("rest", k), 0.0).lam.value
    assert lam < LAMBDA_GRW


def test_resolve_m0(dataset):
    assert resolve_m0("nucleon") == NUCLEON_MASS
    assert resolve_m0("2.5") == 2.5
    with pytest.raises(ValueError):
        resolve_m0("rest")
    with pytest.raises(ValueError):
        resolve_m0(-1.0)


def test_figure1_monotone_and_doubling(dataset):
    grid = np.linspace(0, 0.45, 10)
    rows = figure1_data(dataset, "nucleon", list(grid) + [0.25])
    for s in Species:
        lams = [r.lam for r in rows if r.species is s][:10]
        assert all(b > a for a, b in zip(lams, lams[1:]))
        at = {r.theta0: r for r in rows if r.species is s}
        assert at[0.0].lam == pytest.approx(at[0.25].lam / 2, rel=1e-14)
        assert all(r.lam_minus <= r.lam <= r.lam_plus for r in rows if r.species is s)


def test_figure1_bands_at_zero(dataset):
    rows = {r.species: r.lam for r in figure1_data(dataset, "rest", [0.0])}
    lo, hi = ADLER_BAND
    assert lo <= rows[Species.BD] <= hi
    assert lo <= rows[Species.BS] <= hi


def test_figure1_rejects_half(dataset):
    with pytest.raises(ValueError):
        figure1_data(dataset, "nucleon", [0.1, 0.5])


def test_figure1_without_errors(dataset):
    rows = figure1_data(dataset, "nucleon", [0.1], include_errors=False)
    assert all(r.lam_plus == r.lam == r.lam_minus for r in rows)


def test_table1_matches_printed_values(dataset):
    golden = printed_rows()
    rows = {r.species.value: r for r in table1(dataset)}
    assert list(rows) == SPECIES
    for name, printed in golden.items():
        for col, text in printed.items():
            got = getattr(rows[name], col).value
            assert abs(got - float(text)) <= printed_tolerance(text), (name, col, got, text)


def test_table1_asymmetry_roundtrip(dataset):
    for row in table1(dataset):
        R = (row.gamma_L.value - row.gamma_H.value) / (row.gamma_L.value + row.gamma_H.value)
        ref = width_asymmetry(dataset.params(row.species)).value
        assert float(f"{R:.4g}") == pytest.approx(float(f"{ref:.4g}"))


def test_table1_missing_species(dataset):
    from dataclasses import replace

    raw = dict(dataset.raw)
    raw.pop(Species.BS)
    with pytest.raises(KeyError):
        table1(replace(dataset, raw=raw))


def test_printed_tolerance_helper():
    assert printed_tolerance("0.529e10") == pytest.approx(5e6)
    assert printed_tolerance("2.311e8") == pytest.approx(5e-4 * 2.311e8)
    assert math.isclose(printed_tolerance("1.0"), 0.05)
