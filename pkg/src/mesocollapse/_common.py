"""Helpers shared by the closed-form models."""

from __future__ import annotations

import warnings
from enum import Enum

import numpy as np

from .errors import PerturbativeWarning


class Eigen(str, Enum):
    L = "L"
    H = "H"


class Target(str, Enum):
    SAME = "same"
    CONJUGATE = "conjugate"


def mass_pair(masses) -> tuple[float, float]:
    """(m_L, m_H) from a tuple or an object exposing ``m_L``/``m_H``."""
    if hasattr(masses, "m_L"):
        m_L, m_H = masses.m_L, masses.m_H
        m_L = getattr(m_L, "value", m_L)
        m_H = getattr(m_H, "value", m_H)
    else:
        m_L, m_H = masses
    m_L, m_H = float(m_L), float(m_H)
    if m_L <= 0 or m_H <= 0:
        raise ValueError("masses must be positive")
    return m_L, m_H


def check_time(t):
    """Reject negative real times; complex times pass (used for Taylor contours)."""
    t = np.asarray(t)
    if not np.iscomplexobj(t) and np.any(t < 0):
        raise ValueError("t must be non-negative")
    return t


def scalar_or_array(x):
    return x.item() if np.ndim(x) == 0 else x


def series_factors(rate, g_H, g_L, theta0, second_order_factor, t):
    """Collapse factors multiplying each decay envelope in a flavour probability.

    ``rate * g**2`` is the first-order diagonal collapse rate at theta0 = 0.
    Returns (diag_H, diag_L, interference) as truncated polynomials in t.
    """
    u = 1.0 - theta0
    v = 1.0 - 2.0 * theta0
    dH = 1 - rate * g_H**2 * v * t + second_order_factor * rate**2 * g_H**4 * v**2 * t**2
    dL = 1 - rate * g_L**2 * v * t + second_order_factor * rate**2 * g_L**4 * v**2 * t**2
    first = (g_H**2 + g_L**2) * u - g_H * g_L
    second = (
        (g_H**4 + g_L**4) * u**2
        - 2 * g_H * g_L * (g_H**2 + g_L**2) * u
        + 2 * g_H**2 * g_L**2 * (u**2 + 0.5)
    )
    inter = 1 - rate * first * t + second_order_factor * rate**2 * second * t**2
    return dH, dL, inter


def flavor_combination(target, dH, dL, inter, gamma_H, gamma_L, delta_m, t):
    sign = 1.0 if Target(target) is Target.SAME else -1.0
    return 0.25 * (
        dH * np.exp(-gamma_H * t)
        + dL * np.exp(-gamma_L * t)
        + sign * 2 * inter * np.cos(delta_m * t) * np.exp(-0.5 * (gamma_H + gamma_L) * t)
    )


def warn_if_nonperturbative(rates, t, limit=0.1):
    tmax = np.max(np.abs(np.asarray(t))) if np.size(t) else 0.0
    worst = max(abs(r) for r in rates) * tmax
    if worst > limit:
        warnings.warn(
            f"series evaluated at |rate*t| = {worst:.3g} > {limit}; truncation is unreliable",
            PerturbativeWarning,
            stacklevel=3,
        )
        return False
    return True
