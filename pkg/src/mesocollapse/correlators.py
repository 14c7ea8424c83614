"""Time integrals of white-noise correlation functions.

Expanding transition probabilities in the collapse coupling produces nested
time integrals over products of white noises w(t). Their expectation values
depend on a single convention: the value theta0 = theta(0) given to the
Heaviside step at coinciding times. For t > 0 the step is 1.

Closed forms are exact. The Monte Carlo oracle discretises the same
integrals with Gaussian increments and weights every coincident index pair
by ``diag_weight``; in the continuum limit this realises
theta0 = 1 - diag_weight. That mapping is a construction of this package,
not a statement about any particular stochastic calculus.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels, rng
from .ensemble import EnsembleEstimate, map_chunks, summarize


class Kind(str, Enum):
    C1_20 = "C1_20"
    C1_11 = "C1_11"
    C2_40 = "C2_40"
    C2_31 = "C2_31"
    C2_22 = "C2_22"


FIRST_ORDER = (Kind.C1_20, Kind.C1_11)
SECOND_ORDER = (Kind.C2_40, Kind.C2_31, Kind.C2_22)
FAMILIES = {"40": Kind.C2_40, "31": Kind.C2_31, "22": Kind.C2_22}


def validate_theta0(theta0: float) -> float:
    theta0 = float(theta0)
    if not 0.0 <= theta0 <= 1.0:
        raise ValueError(f"theta0 must lie in [0, 1], got {theta0}")
    return theta0


def _check_t(t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")


@dataclass(frozen=True)
class CorrelatorResult:
    """``coefficient * t**time_power``"""

    kind: str
    coefficient: float
    time_power: int

    def __call__(self, t):
        return self.coefficient * np.asarray(t) ** self.time_power


def closed_form(kind: Kind | str, theta0: float) -> CorrelatorResult:
    kind = Kind(kind)
    u = 1.0 - validate_theta0(theta0)
    coeff = {
        Kind.C1_20: u,
        Kind.C1_11: 1.0,
        Kind.C2_40: 0.5 * u * u,
        Kind.C2_31: u,
        Kind.C2_22: u * u + 0.5,
    }[kind]
    return CorrelatorResult(kind.value, coeff, 1 if kind in FIRST_ORDER else 2)


def c1(kind, theta0, t):
    """First-order integrals: C1_20 = (1 - theta0) t, C1_11 = t."""
    if Kind(kind) not in FIRST_ORDER:
        raise ValueError(f"{kind} is not a first-order integral")
    _check_t(t)
    return closed_form(kind, theta0)(t)


def c2(kind, theta0, t):
    """Second-order integrals, summed over Wick pairings."""
    if Kind(kind) not in SECOND_ORDER:
        raise ValueError(f"{kind} is not a second-order integral")
    _check_t(t)
    return closed_form(kind, theta0)(t)


def u_terms(family, theta0, t):
    """The three Wick-pairing contributions of a second-order family."""
    family = str(family)
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {sorted(FAMILIES)}")
    _check_t(t)
    u = 1.0 - validate_theta0(theta0)
    t2 = np.asarray(t) ** 2
    coeffs = {
        "40": (0.5 * u * u, 0.0, 0.0),
        "31": (0.5 * u, 0.0, 0.5 * u),
        "22": (u * u, 0.5, 0.0),
    }[family]
    return tuple(c * t2 for c in coeffs)


# --- Monte Carlo oracle --------------------------------------------------


def estimator(kind: Kind | str, sums: np.ndarray) -> np.ndarray:
    """Per-sample estimate of ``kind`` from iterated sums (S1, S2, S3, S4)."""
    s1, s2, s3, s4 = sums.T
    return {
        Kind.C1_20: s2,
        Kind.C1_11: s1 * s1,
        Kind.C2_40: s4,
        Kind.C2_31: s3 * s1,
        Kind.C2_22: s2 * s2,
    }[Kind(kind)]


def oracle_c_integrals(
    kind,
    diag_weight: float,
    n_steps: int,
    n_samples: int,
    t: float,
    seed: int,
    workers: int = 1,
    chunk: int = 1024,
) -> EnsembleEstimate:
    """Monte Carlo estimate of a correlator integral.

    Per sample, white noise is discretised as i.i.d. w_i ~ N(0, 1/dt) and the
    ordered integrals become ordered sums over the products w_i dt. Sums are
    accumulated with running prefix sums, so each sample costs O(n_steps).
    """
    kind = Kind(kind)
    if not 0.0 <= diag_weight <= 1.0:
        raise ValueError("diag_weight must lie in [0, 1]")
    if n_steps < 16:
        raise ValueError("n_steps must be >= 16")
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    if t <= 0:
        raise ValueError("t must be positive")
    dt = t / n_steps
    sqdt = np.sqrt(dt)

    def work(start, count):
        dW = rng.normal_block(seed, rng.TAG_CORRELATORS, start, count, n_steps, sqdt)
        return estimator(kind, kernels.iterated_sums(dW, diag_weight))

    samples = map_chunks(work, n_samples, chunk, workers)
    return summarize(kind.value, samples, seed)


def brute_force_sums(dW: np.ndarray, diag_weight: float) -> np.ndarray:
    """Iterated sums by explicit enumeration of ordered index tuples.

    Cross-check for :func:`kernels.iterated_sums`; only for short paths.
    """
    dW = np.atleast_2d(dW)
    n = dW.shape[1]
    if n > 32:
        raise ValueError("brute-force enumeration limited to n_steps <= 32")
    out = np.zeros((dW.shape[0], 4))
    out[:, 0] = dW.sum(axis=1)
    for order in (2, 3, 4):
        for idx in itertools.combinations_with_replacement(range(n), order):
            ties = sum(a == b for a, b in zip(idx, idx[1:]))
            out[:, order - 1] += diag_weight**ties * np.prod(dW[:, idx], axis=1)
    return out
