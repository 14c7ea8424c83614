"""End-to-end acceptance checks, one group per criterion.

Verdicts are collected with the ``record`` fixture and printed as one
PASS/FAIL line per criterion at the end of the session.
"""

import csv
import math
import time
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest

from mesocollapse import correlators, inference
from mesocollapse.csl import CslParams, csl_rates, prob_flavor_csl
from mesocollapse.gkls import BlockDensity, GklsGenerators, check_dd_identity, evolve, kick_channel_equivalence
from mesocollapse.mesons import MesonParams, Species, width_asymmetry
from mesocollapse.qmupl import QmuplParams, gaussian_moment_check, mass_series
from mesocollapse.stochastic import SimConfig, fit_coherence_damping, run_kicks, run_trajectories
from mesocollapse.units import ADLER_BAND, LAMBDA_ADLER, LAMBDA_GRW, NUCLEON_MASS

GOLDEN = Path(__file__).parent / "golden" / "table1_printed.csv"
SPECIES = ["K", "D", "Bd", "Bs"]


def digits_tolerance(text):
    """Half a unit in the last printed digit."""
    return float(Decimal(1).scaleb(Decimal(text).as_tuple().exponent)) / 2


def agree(value, text, scale=1.0):
    return abs(value / scale - float(text)) <= digits_tolerance(text) * (1 + 1e-9)


# --- 1 ----------------------------------------------------------------------


def test_c01_table_reproduction(dataset, record):
    start = time.perf_counter()
    rows = {r.species.value: r for r in inference.table1(dataset)}
    elapsed = time.perf_counter() - start
    with open(GOLDEN, newline="") as fh:
        printed = {row.pop("species"): row for row in csv.DictReader(fh)}
    bad = []
    for name, cols in printed.items():
        for col, text in cols.items():
            got = getattr(rows[name], col).value
            p = float(text)
            if abs(got - p) > max(5e-4 * abs(p), digits_tolerance(text)):
                bad.append(f"{name}.{col}={got:.5g} vs {text}")
    ok = not bad and elapsed < 1.0
    record(1, "table", ok, "; ".join(bad) + (f" runtime {elapsed:.2f}s" if elapsed >= 1 else ""))
    assert not bad, bad
    assert elapsed < 1.0


# --- 2 ----------------------------------------------------------------------

ASYMMETRY = {
    "K": ("0.996506", 1.2760e-5, 1.2760e-5),
    "D": ("0.00645", 0.0007, 0.0009),
    "Bd": ("0.0005", 0.0050, 0.0050),
    "Bs": ("0.06912", 7.7058e-4, 7.7058e-4),
}


def two_sig(x):
    return float(f"{x:.2g}")


@pytest.mark.parametrize("species", SPECIES)
def test_c02_width_asymmetry(dataset, record, species):
    R = width_asymmetry(dataset.params(species))
    text, ep, em = ASYMMETRY[species]
    ok = agree(R.value, text) and two_sig(R.err_plus) == two_sig(ep) and two_sig(R.err_minus) == two_sig(em)
    record(2, species, ok, f"{R}")
    assert ok, str(R)


# --- 3 ----------------------------------------------------------------------

# (species, column, scale, value, err_plus, err_minus) as printed
DECAY_CONSTANTS = [
    ("D", "gamma_L", 1e12, "2.4542", "0.006782", "0.007270"),
    ("D", "gamma_H", 1e12, "2.4227", "0.011056", "0.010568"),
    ("Bd", "gamma_L", 1e12, "0.6582", "0.001557", "0.001557"),
    ("Bd", "gamma_H", 1e12, "0.6576", "0.005020", "0.005020"),
    ("K", "gamma_L", 1e10, "1.1168", "0.0005", "0.0005"),
    ("K", "gamma_H", 1e7, "1.9547", "0.0500", "0.0500"),
    ("Bs", "gamma_L", 1e11, "7.0721", "0.010", "0.010"),
    ("Bs", "gamma_H", 1e11, "6.1576", "0.0531", "0.0531"),
]


@pytest.mark.parametrize("species,column,scale,value,ep,em", DECAY_CONSTANTS,
                         ids=[f"{s}-{c}" for s, c, *_ in DECAY_CONSTANTS])
def test_c03_decay_constants(dataset, record, species, column, scale, value, ep, em):
    q = getattr(dataset.params(species), column)
    checks = {
        "value": agree(q.value, value, scale),
        "err+": agree(q.err_plus, ep, scale),
        "err-": agree(q.err_minus, em, scale),
    }
    ok = all(checks.values())
    detail = (f"{column} = {q.value / scale:.5f} +{q.err_plus / scale:.5f}/-{q.err_minus / scale:.5f}"
              f" vs {value} +{ep}/-{em}")
    record(3, f"{species}.{column}", ok, detail)
    assert ok, detail


# --- 4 ----------------------------------------------------------------------

DAMPING_DECADES = {"K": (-38, -46), "D": (-34, -42), "Bd": (-30, -38), "Bs": (-30, -38)}


@pytest.mark.parametrize("species", SPECIES)
@pytest.mark.parametrize("preset", ["adler", "grw"])
def test_c04_damping_orders(dataset, record, species, preset):
    meson = dataset.params(species)
    lam, decade = (LAMBDA_ADLER, DAMPING_DECADES[species][0]) if preset == "adler" else (
        LAMBDA_GRW, DAMPING_DECADES[species][1])
    masses = inference.solve_masses(meson, "inverted").require()
    damping = csl_rates(CslParams(lam, NUCLEON_MASS, 0.0), meson, masses).interference_damping
    ok = abs(math.log10(damping) - decade) <= 1.0
    record(4, f"{species}/{preset}", ok, f"{damping:.2e} vs 1e{decade}")
    assert ok, f"{damping:.3e} not within x10 of 1e{decade}"


# --- 5 ----------------------------------------------------------------------


def test_c05_correlator_oracle(record):
    start = time.perf_counter()
    bad = []
    for theta0 in (0.0, 0.25, 0.5, 0.75, 1.0):
        for kind in correlators.Kind:
            exact = correlators.closed_form(kind, theta0)(1.0)
            est = correlators.oracle_c_integrals(kind, 1 - theta0, 256, 4096, 1.0, seed=2016)
            if abs(est.mean - exact) > 4 * est.stderr:
                bad.append(f"{kind.value}@{theta0}: {est.mean:.4f}+-{est.stderr:.4f} vs {exact:.4f}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    record(5, "oracle", ok, "; ".join(bad) + f" runtime {elapsed:.1f}s")
    assert not bad, bad
    assert elapsed < 60


# --- 6 ----------------------------------------------------------------------


def taylor(f, order=2, r=0.05, n=64):
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    c = np.fft.fft(f(z)) / n
    return (c[: order + 1] / r ** np.arange(order + 1)).real


def test_c06_series_exponential_consistency(record):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        gl, gh, dm = rng.uniform(0.05, 3.0, 3)
        m_L = rng.uniform(0.2, 3.0)
        masses = (m_L, m_L + rng.uniform(0.05, 2.0))
        p = CslParams(rng.uniform(0, 1.5), rng.uniform(0.5, 3.0), rng.uniform(0, 1), bool(rng.integers(2)))
        meson = MesonParams.exact("K", gl, gh, dm)
        for target in ("same", "conjugate"):
            s = taylor(lambda z: prob_flavor_csl(p, meson, masses, target, z, "series"))
            e = taylor(lambda z: prob_flavor_csl(p, meson, masses, target, z, "exponential"))
            rel = np.abs(s - e) / np.maximum(np.abs(e), 1e-3)
            worst = max(worst, float(rel.max()))
    ok = worst < 1e-9
    record(6, "taylor", ok, f"worst {worst:.2e}")
    assert ok


# --- 7 ----------------------------------------------------------------------


def test_c07_factor_three(record):
    rng = np.random.default_rng(7)
    exact = True
    for _ in range(200):
        p = QmuplParams(rng.uniform(0, 1), rng.uniform(0.1, 3), rng.uniform(0.5, 2), rng.uniform(0, 1))
        meson = MesonParams.exact("K", 1.0, 0.5, 1.0)
        for mu in ("L", "H"):
            s = mass_series(p, meson, (1.0, 1.7), mu)
            exact &= s.c2 == 1.5 * s.c1**2
    worst = 0.0
    for alpha in (0.25, 1.0, 4.0):
        m4 = gaussian_moment_check(4, alpha)
        for key, coeff in (("04", 1.5), ("13", 1.5), ("22", 0.75)):
            worst = max(worst, abs(m4[key] / (coeff * alpha**2) - 1))
    ok = exact and worst < 1e-6
    record(7, "factor", ok, f"exact={exact} quadrature {worst:.1e}")
    assert exact
    assert worst < 1e-6


# --- 8 ----------------------------------------------------------------------


def kaon_desk_config(dataset, lam_scale=1.0, **kw):
    k = dataset.params("K")
    dm = k.delta_m.value / 1e6
    m_L = inference.solve_masses(k, "inverted").require().m_L.value / 1e6
    gamma_avg = k.gamma_avg
    lam = lam_scale * 2 * 0.1 * gamma_avg / (dm / NUCLEON_MASS) ** 2
    base = dict(lambda_eff=lam, m_L=m_L, m_H=m_L + dm, m0=NUCLEON_MASS, gamma_L=k.gamma_L.value,
                gamma_H=k.gamma_H.value, dt=4e-12, t_max=1.8e-9, n_traj=10_000, seed=88, record_every=5,
                workers=4)
    base.update(kw)
    return SimConfig(**base)


def test_c08_sde_oracle(dataset, record):
    start = time.perf_counter()
    cfg = kaon_desk_config(dataset)
    out = run_trajectories(cfg, ["coherence_mag", "P_LL", "P_HH"])
    fit = fit_coherence_damping(out["coherence_mag"], cfg)
    expect = cfg.lambda_eff * cfg.delta_g**2 / 2
    rel = fit.rate / expect - 1
    quiet = run_trajectories(kaon_desk_config(dataset, lam_scale=0.0), ["P_LL", "P_HH"])
    pops_ok = all(
        np.all(np.abs(out[n].mean - quiet[n].mean) <= 3 * np.hypot(out[n].stderr, quiet[n].stderr) + 1e-12)
        for n in ("P_LL", "P_HH")
    )
    elapsed = time.perf_counter() - start
    ok = abs(rel) < 0.05 and pops_ok and elapsed < 300
    record(8, "sde", ok, f"damping {rel:+.2%}, populations {'ok' if pops_ok else 'shifted'}, {elapsed:.1f}s")
    assert abs(rel) < 0.05
    assert pops_ok
    assert elapsed < 300


# --- 9 ----------------------------------------------------------------------


def gkls_case(meson, theta0):
    masses = inference.solve_masses(meson, "inverted").require()
    m_L, m_H = masses.m_L.value, masses.m_H.value
    gl = meson.gamma_L.value
    if theta0 == 0.5:
        lam = gl / (meson.delta_m.value / NUCLEON_MASS) ** 2
    else:
        lam = 0.5 * gl / ((m_H / NUCLEON_MASS) ** 2 * (1 - 2 * theta0))
    return CslParams(lam, NUCLEON_MASS, theta0), (m_L, m_H)


@pytest.mark.parametrize("species", SPECIES)
@pytest.mark.parametrize("theta0", [0.5, 0.25])
def test_c09_master_equation(dataset, record, species, theta0):
    meson = dataset.params(species)
    params, masses = gkls_case(meson, theta0)
    gen = GklsGenerators.from_csl(params, meson, masses)
    t_max = 5 / meson.gamma_L.value
    # resolve the oscillation for the quadrature in the dd identity
    n = int(math.ceil(meson.delta_m.value * t_max / 0.03))
    n = max(n + (n % 2 == 1), 400) + 1
    t = np.linspace(0, t_max, n)
    hist = evolve(gen, BlockDensity.flavor("same"), t)
    worst = 0.0
    for target, attr in (("same", "p_same"), ("conjugate", "p_conj")):
        got = np.array([getattr(s, attr)() for s in hist])
        ref = prob_flavor_csl(params, meson, masses, target, t, "exponential")
        mask = np.abs(ref) > 1e-12
        worst = max(worst, float(np.max(np.abs(got[mask] - ref[mask]) / np.abs(ref[mask]))))
    drift = max(abs(s.trace() - 1) for s in hist)
    dd = check_dd_identity(hist, gen)
    ok = worst < 1e-6 and drift < 1e-9 and dd < 1e-6
    record(9, f"{species}@{theta0}", ok, f"rel {worst:.1e}, trace {drift:.1e}, dd {dd:.1e}")
    assert worst < 1e-6
    assert drift < 1e-9
    assert dd < 1e-6


# --- 10 ---------------------------------------------------------------------


def test_c10_kick_channel(record):
    gen = GklsGenerators.from_csl(CslParams(0.6, 1.0, 0.5), MesonParams.exact("K", 0.3, 0.1, 1.0), (2.0, 3.0))
    rho = BlockDensity.flavor("same")
    ratios = [kick_channel_equivalence(gen, rho, dt) / kick_channel_equivalence(gen, rho, dt / 2)
              for dt in (0.04, 0.02, 0.01)]
    lindblad_ok = all(abs(r - 4) < 0.2 for r in ratios)

    cfg = SimConfig(lambda_eff=0.6, m_L=2.0, m_H=3.0, m0=1.0, gamma_L=0.3, gamma_H=0.1, dt=0.01, t_max=4.0,
                    n_traj=10_000, seed=10, record_every=10, workers=4)
    kicks = run_kicks(cfg, ["P_same", "P_conj", "coherence_mag"])
    sde = run_trajectories(cfg, ["P_same", "P_conj", "coherence_mag"])
    sde_ok = all(
        np.all(np.abs(kicks[n].mean - sde[n].mean) <= 3 * np.hypot(kicks[n].stderr, sde[n].stderr) + 1e-12)
        for n in kicks
    )
    ok = lindblad_ok and sde_ok
    record(10, "kicks", ok, f"ratios {[round(r, 3) for r in ratios]}, sde {'ok' if sde_ok else 'off'}")
    assert lindblad_ok, ratios
    assert sde_ok


# --- 11 ---------------------------------------------------------------------


def test_c11_direct_scenario_infeasible(dataset, record):
    cases = [dataset.params(s) for s in Species]
    rng = np.random.default_rng(11)
    while len(cases) < 4 + 100:
        gh, gl = np.sort(10 ** rng.uniform(-3, 3, 2))
        if gl > gh:
            cases.append(MesonParams.exact("K", gl, gh, 10 ** rng.uniform(-3, 3)))
    feasible = [c for c in cases if inference.solve_masses(c, "direct").feasible]
    ok = not feasible and all(c.gamma_L.value > c.gamma_H.value for c in cases)
    record(11, "direct", ok, f"{len(feasible)} feasible of {len(cases)}")
    assert ok


# --- 12 ---------------------------------------------------------------------


@pytest.mark.parametrize("species", SPECIES)
def test_c12_rate_bands(dataset, record, species):
    meson = dataset.params(species)
    lam = inference.lambda_estimated(meson, inference.resolve_m0("rest", meson), 0.0).lam.value
    if species == "K":
        ok = lam < LAMBDA_GRW
        want = "< 1e-16"
    else:
        lo, hi = ADLER_BAND
        ok = lo <= lam <= hi
        want = f"in [{lo:.0e}, {hi:.0e}]"
    record(12, species, ok, f"{lam:.2e}, want {want}")
    assert ok, f"{lam:.3e} not {want}"
