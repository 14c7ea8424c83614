"""Scalars with asymmetric uncertainties and first-order error propagation.

Uncertainties of all inputs are treated as fully correlated in the sense
of a signed linear sum: moving every input to its upper bound moves the
result by ``sum_i df/dx_i * e_i^+``, moving every input to its lower bound
moves it by ``-sum_i df/dx_i * e_i^-``. The result's upper (lower) error is
whichever of the two shifts is positive (negative). This is the convention
under which the published width and mass tables are reproduced.

Derivatives come from complex-step differentiation, so the function being
propagated must be built from operations that accept complex arguments
(arithmetic, ``numpy.sqrt``, ``numpy.exp`` and so on) and must not branch
on the value of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

_STEP = 1e-30


@dataclass(frozen=True)
class Quantity:
    """A value with non-negative upper and lower uncertainties."""

    value: float
    err_plus: float = 0.0
    err_minus: float | None = None
    unit: str = ""

    def __post_init__(self):
        if self.err_minus is None:
            object.__setattr__(self, "err_minus", self.err_plus)
        for name in ("value", "err_plus", "err_minus"):
            x = getattr(self, name)
            if not math.isfinite(x):
                raise ValueError(f"{name} must be finite, got {x!r}")
        if self.err_plus < 0 or self.err_minus < 0:
            raise ValueError("uncertainties must be non-negative")

    @property
    def symmetric(self) -> bool:
        return self.err_plus == self.err_minus

    @property
    def upper(self) -> float:
        return self.value + self.err_plus

    @property
    def lower(self) -> float:
        return self.value - self.err_minus

    def scaled(self, factor: float, unit: str | None = None) -> "Quantity":
        """Multiply by a positive exact constant."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Quantity(
            self.value * factor,
            self.err_plus * factor,
            self.err_minus * factor,
            self.unit if unit is None else unit,
        )

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "err_plus": self.err_plus,
            "err_minus": self.err_minus,
            "unit": self.unit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Quantity":
        return cls(
            float(d["value"]),
            float(d.get("err_plus", 0.0)),
            None if d.get("err_minus") is None else float(d["err_minus"]),
            d.get("unit", ""),
        )

    def __str__(self):
        unit = f" {self.unit}" if self.unit else ""
        if self.symmetric:
            return f"{self.value:.6g} +/- {self.err_plus:.3g}{unit}"
        return f"{self.value:.6g} +{self.err_plus:.3g}/-{self.err_minus:.3g}{unit}"


def gradient(func: Callable[..., complex], values: Sequence[float]) -> np.ndarray:
    """Complex-step gradient of a real scalar function at ``values``."""
    x = np.asarray(values, dtype=float)
    grad = np.empty(len(x))
    for i, xi in enumerate(x):
        h = _STEP * (abs(xi) if xi != 0 else 1.0)
        z = x.astype(complex)
        z[i] += 1j * h
        grad[i] = np.imag(func(*z)) / h
    return grad


def propagate(func: Callable[..., complex], inputs: Sequence[Quantity], unit: str = "") -> Quantity:
    """Evaluate ``func`` on the central values and propagate uncertainties.

    >>> a = Quantity(2.0, 0.1)
    >>> propagate(lambda x: 1 / x, [a]).err_plus
    0.025
    """
    values = [q.value for q in inputs]
    central = complex(func(*[complex(v) for v in values]))
    if abs(central.imag) > 1e-12 * max(abs(central.real), 1e-300):
        raise ValueError("propagated function returned a complex value")
    grad = gradient(func, values)
    up = float(sum(g * q.err_plus for g, q in zip(grad, inputs)))
    down = float(-sum(g * q.err_minus for g, q in zip(grad, inputs)))
    err_plus = max(up, down, 0.0)
    err_minus = max(-up, -down, 0.0)
    return Quantity(central.real, err_plus, err_minus, unit)
