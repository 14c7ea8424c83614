"""Monte Carlo trajectories for collapse noise acting on a decaying two-level meson.

Each trajectory evolves the mass-basis amplitudes (psi_H, psi_L) under

    d psi_mu = (-i m_mu - Gamma_mu/2) psi_mu dt + i sqrt(lambda) g_mu psi_mu o dW,

with g_mu = m_mu/m0 and a Stratonovich product. Everything is diagonal, so
the mean mass and the mean noise weight only contribute a global phase. They
are removed before integrating: absolute meson masses (~1e23 s^-1) would
otherwise swamp the relative phase in double precision.

Noise enters as a pure phase, so the populations |psi_mu|^2 decay exactly as
exp(-Gamma_mu t) and only the H-L coherence feels the collapse. This is the
theta0 = 1/2 behaviour of the analytic formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels, rng
from .ensemble import EnsembleEstimate
from .errors import GuardViolation, NumericalError

OBSERVABLES = ("P_same", "P_conj", "P_LL", "P_HH", "coherence_mag", "norm")
SCHEMES = {"exact_phase": kernels.SCHEME_EXACT, "stratonovich_heun": kernels.SCHEME_HEUN}
GUARD = 0.05


@dataclass(frozen=True)
class SimConfig:
    lambda_eff: float
    m_L: float
    m_H: float
    m0: float
    gamma_L: float
    gamma_H: float
    dt: float
    t_max: float
    n_traj: int
    seed: int
    scheme: str = "exact_phase"
    record_every: int = 1
    workers: int = 1
    chunk: int = 512

    @property
    def delta_m(self) -> float:
        return self.m_H - self.m_L

    @property
    def delta_g(self) -> float:
        return (self.m_H - self.m_L) / self.m0

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def guard_value(self, dt: float | None = None) -> float:
        dt = self.dt if dt is None else dt
        return dt * max(abs(self.delta_m), self.gamma_L, self.gamma_H, self.lambda_eff * self.delta_g**2)

    def validate(self) -> "SimConfig":
        if self.lambda_eff < 0 or self.gamma_L < 0 or self.gamma_H < 0:
            raise ValueError("rates must be non-negative")
        if self.m_L <= 0 or self.m_H <= 0 or self.m0 <= 0:
            raise ValueError("masses must be positive")
        if self.dt <= 0 or self.t_max <= 0:
            raise ValueError("dt and t_max must be positive")
        if self.n_traj < 2:
            raise ValueError("need at least two trajectories")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {sorted(SCHEMES)}")
        n = self.n_steps
        if n < 1 or abs(n * self.dt - self.t_max) > 1e-9 * self.t_max:
            raise ValueError("t_max must be an integer multiple of dt")
        if self.record_every < 1 or n % self.record_every:
            raise ValueError("record_every must divide the number of steps")
        g = self.guard_value()
        if not g < GUARD:
            raise GuardViolation(
                f"dt = {self.dt:.3g} too coarse: dt * max(delta_m, Gamma, lambda dg^2) = {g:.3g} >= {GUARD}"
            )
        return self

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps // self.record_every + 1) * (self.record_every * self.dt)

    def analytic_coherence(self, t) -> np.ndarray:
        """E[psi_H conj(psi_L)] for psi(0) = M0."""
        t = np.asarray(t)
        return 0.5 * np.exp(
            (-1j * self.delta_m - 0.5 * (self.gamma_H + self.gamma_L) - 0.5 * self.lambda_eff * self.delta_g**2) * t
        )


def _generators(config: SimConfig):
    """Relative-frame drift and noise weights in (H, L) order."""
    half_dm = 0.5 * config.delta_m
    a = np.array([-1j * half_dm - 0.5 * config.gamma_H, 1j * half_dm - 0.5 * config.gamma_L])
    half_dg = 0.5 * config.delta_g
    b = math.sqrt(config.lambda_eff) * np.array([half_dg, -half_dg])
    return a, b


PSI0 = np.array([1.0, 1.0]) / math.sqrt(2.0)


class _Moments:
    """Count, mean and centred second moment, merged with Chan's update."""

    def __init__(self):
        self.n = 0
        self.mean = None
        self.m2 = None

    def add(self, x: np.ndarray):
        n_b = x.shape[0]
        mean_b = x.mean(axis=0)
        m2_b = ((x - mean_b) ** 2).sum(axis=0)
        if self.n == 0:
            self.n, self.mean, self.m2 = n_b, mean_b, m2_b
            return
        n = self.n + n_b
        delta = mean_b - self.mean
        self.mean = self.mean + delta * (n_b / n)
        self.m2 = self.m2 + m2_b + delta**2 * (self.n * n_b / n)
        self.n = n

    @property
    def var(self):
        return self.m2 / (self.n - 1)


def _per_traj(psi: np.ndarray) -> dict[str, np.ndarray]:
    h, l_ = psi[..., 0], psi[..., 1]
    coh = h * np.conj(l_)
    return {
        "P_same": 0.5 * np.abs(h + l_) ** 2,
        "P_conj": 0.5 * np.abs(h - l_) ** 2,
        "P_HH": 2 * np.abs(h) ** 2,
        "P_LL": 2 * np.abs(l_) ** 2,
        "norm": np.abs(h) ** 2 + np.abs(l_) ** 2,
        "coh_re": coh.real,
        "coh_im": coh.imag,
        "coh_sum": coh.real + coh.imag,
    }


def _reduce(chunks, observables, config: SimConfig, times) -> dict[str, EnsembleEstimate]:
    moments = {}
    for part in chunks:
        for k, v in part.items():
            moments.setdefault(k, _Moments()).add(v)
    n = config.n_traj
    out = {}
    for name in observables:
        if name == "coherence_mag":
            re, im, sm = moments["coh_re"], moments["coh_im"], moments["coh_sum"]
            mag = np.hypot(re.mean, im.mean)
            phi = np.arctan2(im.mean, re.mean)
            cov = 0.5 * (sm.var - re.var - im.var)
            var = np.cos(phi) ** 2 * re.var + np.sin(phi) ** 2 * im.var + 2 * np.sin(phi) * np.cos(phi) * cov
            out[name] = EnsembleEstimate(name, mag, np.sqrt(np.maximum(var, 0) / n), n, config.seed, times)
        else:
            m = moments[name]
            out[name] = EnsembleEstimate(name, m.mean, np.sqrt(np.maximum(m.var, 0) / n), n, config.seed, times)
    return out


def _run(config: SimConfig, observables, tag: int, scheme_code: int, b_factor) -> dict[str, EnsembleEstimate]:
    config.validate()
    observables = list(observables)
    for name in observables:
        if name not in OBSERVABLES:
            raise ValueError(f"unknown observable {name!r}; expected one of {OBSERVABLES}")
    a, b = _generators(config)
    b = b * b_factor
    n_steps = config.n_steps
    scale = math.sqrt(config.dt) if tag == rng.TAG_SDE else math.sqrt(config.lambda_eff * config.dt)

    def work(start, count):
        incr = rng.normal_block(config.seed, tag, start, count, n_steps, scale)
        psi = kernels.evolve_diagonal(PSI0, a, b, incr, config.dt, config.record_every, scheme_code)
        bad = ~np.isfinite(psi).all(axis=(1, 2))
        if bad.any():
            idx = (np.nonzero(bad)[0] + start).tolist()
            raise NumericalError(f"non-finite amplitudes in trajectories {idx[:10]}")
        return _per_traj(psi)

    starts = list(range(0, config.n_traj, config.chunk))
    counts = [min(config.chunk, config.n_traj - s) for s in starts]
    if config.workers > 1 and len(starts) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(work, starts, counts))
    else:
        chunks = [work(s, c) for s, c in zip(starts, counts)]
    return _reduce(chunks, observables, config, config.times())


def run_trajectories(config: SimConfig, observables=OBSERVABLES) -> dict[str, EnsembleEstimate]:
    """Integrate the stochastic Schroedinger equation for ``n_traj`` trajectories."""
    config.validate()
    return _run(config, observables, rng.TAG_SDE, SCHEMES[config.scheme], 1.0)


def run_kicks(config: SimConfig, observables=OBSERVABLES) -> dict[str, EnsembleEstimate]:
    """Random unitary kicks exp(-i phi G) with phi ~ N(0, lambda dt), between decay half-steps.

    ``config.scheme`` is ignored; each kick is applied exactly.
    """
    if config.lambda_eff == 0:
        # sigma = 0: the kicks are identities
        return _run(replace(config, lambda_eff=0.0), observables, rng.TAG_KICKS, kernels.SCHEME_KICKS, 0.0)
    factor = -1.0 / math.sqrt(config.lambda_eff)
    return _run(config, observables, rng.TAG_KICKS, kernels.SCHEME_KICKS, factor)


@dataclass(frozen=True)
class DampingFit:
    rate: float
    rate_err: float
    r2: float
    n_points: int


def fit_coherence_damping(estimate: EnsembleEstimate, config: SimConfig, min_snr: float = 5.0) -> DampingFit:
    """Extra decay rate of |E[psi_H conj(psi_L)]| beyond exp(-Gamma_avg t).

    Weighted linear fit of log(2 |c| exp(Gamma_avg t)) against t, through
    the origin since the coherence starts at exactly 1/2.
    """
    t = np.asarray(estimate.times)
    mean = np.asarray(estimate.mean)
    err = np.asarray(estimate.stderr)
    keep = (t > 0) & (mean > min_snr * err)
    if keep.sum() < 3:
        raise ValueError("too few resolved points to fit")
    t, mean, err = t[keep], mean[keep], err[keep]
    y = np.log(2 * mean) + 0.5 * (config.gamma_L + config.gamma_H) * t
    sigma = np.maximum(err / mean, 1e-15)
    w = 1 / sigma**2
    slope = np.sum(w * t * y) / np.sum(w * t * t)
    resid = y - slope * t
    ss_res = np.sum(w * resid**2)
    ss_tot = np.sum(w * y**2)
    r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
    # points share trajectories, so this underestimates the true error
    rate_err = 1 / np.sqrt(np.sum(w * t * t))
    return DampingFit(-slope, rate_err, r2, int(keep.sum()))


@dataclass(frozen=True)
class ConvergenceRow:
    scheme: str
    dt: float
    n_steps: int
    coherence: complex
    stderr: float
    error_vs_analytic: float
    deviation_from_exact: float
    deviation_stderr: float


def convergence_report(config: SimConfig, dt_grid) -> list[ConvergenceRow]:
    """Coherence at t_max for each scheme and step size, on shared Brownian paths.

    Coarse increments are sums of the finest ones, so scheme differences are
    not masked by sampling noise. ``deviation_from_exact`` compares a scheme
    to ``exact_phase`` on the same paths.
    """
    dt_grid = [float(x) for x in dt_grid]
    if any(b >= a for a, b in zip(dt_grid, dt_grid[1:])):
        raise ValueError("dt_grid must be strictly descending")
    fine = dt_grid[-1]
    for dt in dt_grid:
        replace(config, dt=dt, record_every=1).validate()
        ratio = dt / fine
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError("every dt must be an integer multiple of the finest dt")
    fine_cfg = replace(config, dt=fine, record_every=1)
    n_fine = fine_cfg.n_steps
    a, b = _generators(config)
    exact_c = config.analytic_coherence(config.t_max)
    dW = rng.normal_block(config.seed, rng.TAG_SDE, 0, config.n_traj, n_fine, math.sqrt(fine))
    rows = []
    for dt in dt_grid:
        k = int(round(dt / fine))
        incr = dW.reshape(config.n_traj, n_fine // k, k).sum(axis=2)
        n = incr.shape[1]
        finals = {}
        for name, code in SCHEMES.items():
            psi = kernels.evolve_diagonal(PSI0, a, b, incr, dt, n, code)[:, -1]
            finals[name] = psi[:, 0] * np.conj(psi[:, 1])
        for name, c in finals.items():
            diff = c - finals["exact_phase"]
            rows.append(
                ConvergenceRow(
                    scheme=name,
                    dt=dt,
                    n_steps=n,
                    coherence=complex(c.mean()),
                    stderr=float(np.sqrt((np.var(c.real, ddof=1) + np.var(c.imag, ddof=1)) / len(c))),
                    error_vs_analytic=float(abs(c.mean() - exact_c)),
                    deviation_from_exact=float(abs(diff.mean())),
                    deviation_stderr=float(np.sqrt((np.var(diff.real, ddof=1) + np.var(diff.imag, ddof=1)) / len(c))),
                )
            )
    return rows
