"""Tiny dense complex linear algebra for 2x2 and 4x4 operators.

The operators here are small enough that plain Python tuples beat array
dispatch, and keeping them hand-rolled makes every product explicit.

Two-level states are stored in the mass basis ordered (H, L). Flavour
states are M = (H + L)/sqrt(2) and Mbar = (H - L)/sqrt(2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

_INV_SQRT2 = 1 / math.sqrt(2)


def _rows(entries) -> tuple[tuple[complex, ...], ...]:
    rows = tuple(tuple(complex(x) for x in row) for row in entries)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError("operator must be a non-empty square matrix")
    return rows


@dataclass(frozen=True)
class ComplexOp:
    """Square complex matrix with value semantics."""

    entries: tuple[tuple[complex, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", _rows(self.entries))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def zeros(cls, n: int) -> "ComplexOp":
        return cls(tuple((0j,) * n for _ in range(n)))

    @classmethod
    def identity(cls, n: int) -> "ComplexOp":
        return cls.diag([1.0] * n)

    @classmethod
    def diag(cls, values: Sequence[complex]) -> "ComplexOp":
        n = len(values)
        return cls(tuple(tuple(values[i] if i == j else 0j for j in range(n)) for i in range(n)))

    @classmethod
    def outer(cls, a: "ComplexState", b: "ComplexState") -> "ComplexOp":
        """|a><b|"""
        return cls(tuple(tuple(x * y.conjugate() for y in b.amplitudes) for x in a.amplitudes))

    def _check(self, other: "ComplexOp"):
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "ComplexOp") -> "ComplexOp":
        self._check(other)
        return ComplexOp(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __sub__(self, other: "ComplexOp") -> "ComplexOp":
        self._check(other)
        return ComplexOp(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __neg__(self) -> "ComplexOp":
        return self * -1

    def __mul__(self, c: complex) -> "ComplexOp":
        return ComplexOp(tuple(tuple(c * a for a in r) for r in self.entries))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, ComplexState):
            if len(other.amplitudes) != self.dim:
                raise ValueError("dimension mismatch")
            return ComplexState(tuple(sum(a * x for a, x in zip(r, other.amplitudes)) for r in self.entries))
        self._check(other)
        cols = tuple(zip(*other.entries))
        return ComplexOp(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.entries))

    def dagger(self) -> "ComplexOp":
        return ComplexOp(tuple(tuple(a.conjugate() for a in c) for c in zip(*self.entries)))

    def trace(self) -> complex:
        return sum(self.entries[i][i] for i in range(self.dim))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.max_abs_diff(self.dagger()) <= tol

    def max_abs_diff(self, other: "ComplexOp") -> float:
        self._check(other)
        return max(abs(a - b) for r, s in zip(self.entries, other.entries) for a, b in zip(r, s))

    def expectation(self, psi: "ComplexState") -> complex:
        return psi.inner(self @ psi)

    def block(self, rows: slice, cols: slice) -> "ComplexOp":
        return ComplexOp(tuple(r[cols] for r in self.entries[rows]))

    def tolist(self) -> list[list[complex]]:
        return [list(r) for r in self.entries]


@dataclass(frozen=True)
class ComplexState:
    amplitudes: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in self.amplitudes))

    def inner(self, other: "ComplexState") -> complex:
        """<self|other>"""
        return sum(a.conjugate() * b for a, b in zip(self.amplitudes, other.amplitudes))

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes))

    def normalized(self) -> "ComplexState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalise the zero vector")
        return ComplexState(tuple(a / n for a in self.amplitudes))

    def __mul__(self, c: complex) -> "ComplexState":
        return ComplexState(tuple(c * a for a in self.amplitudes))

    __rmul__ = __mul__


def commutator(a: ComplexOp, b: ComplexOp) -> ComplexOp:
    return a @ b - b @ a


def anticommutator(a: ComplexOp, b: ComplexOp) -> ComplexOp:
    return a @ b + b @ a


def block_matrix(blocks: Sequence[Sequence[ComplexOp]]) -> ComplexOp:
    """Assemble a matrix from a square grid of equally sized blocks."""
    rows = []
    for brow in blocks:
        for i in range(brow[0].dim):
            rows.append(tuple(x for b in brow for x in b.entries[i]))
    return ComplexOp(tuple(rows))


# flavour <-> mass basis; the map is its own inverse
BASIS_MAP = ComplexOp(((_INV_SQRT2, _INV_SQRT2), (_INV_SQRT2, -_INV_SQRT2)))

MASS_H = ComplexState((1, 0))
MASS_L = ComplexState((0, 1))
FLAVOR_M = ComplexState((_INV_SQRT2, _INV_SQRT2))
FLAVOR_MBAR = ComplexState((_INV_SQRT2, -_INV_SQRT2))


def to_flavor_basis(state_mass: ComplexState) -> ComplexState:
    """Components (M, Mbar) of a state given in the (H, L) mass basis."""
    return BASIS_MAP @ state_mass


def to_mass_basis(state_flavor: ComplexState) -> ComplexState:
    return BASIS_MAP @ state_flavor


def expm_diag(eigenvalues: Iterable[complex], t: complex) -> ComplexOp:
    """exp(t * diag(eigenvalues))"""
    return ComplexOp.diag([cmath.exp(t * e) for e in eigenvalues])


def effective_hamiltonian(m_H: float, m_L: float, gamma_H: float, gamma_L: float) -> ComplexOp:
    """Non-hermitian Weisskopf-Wigner generator in the (H, L) basis."""
    return ComplexOp.diag([m_H - 0.5j * gamma_H, m_L - 0.5j * gamma_L])


def propagator(m_H: float, m_L: float, gamma_H: float, gamma_L: float, t: complex) -> ComplexOp:
    """exp(-i H_eff t) for the diagonal effective Hamiltonian."""
    return expm_diag([-1j * (m_H - 0.5j * gamma_H), -1j * (m_L - 0.5j * gamma_L)], t)
