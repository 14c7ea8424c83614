"""Master-equation model of decay plus collapse-induced dephasing.

The state lives on a 4-dimensional space: two surviving mass eigenstates
(H, L) and two decay products. Decay is the Lindblad operator L0, which maps
surviving to decayed amplitudes, so the total trace stays 1. Collapse is
L1 = sqrt(lambda) diag(g_H, g_L) acting on the surviving block.

Internally the generator is a 16x16 real matrix acting on the independent
entries of the density matrix (diagonal, real and imaginary parts of the
upper triangle), with time measured in units of 1/Gamma_L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import solve_ivp

from .errors import GuardViolation, NumericalError
from .linalg import FLAVOR_M, FLAVOR_MBAR, ComplexOp, anticommutator, block_matrix, commutator

GUARD = 0.05
_UPPER = [(i, j) for i in range(4) for j in range(i + 1, 4)]


@dataclass(frozen=True)
class GklsGenerators:
    """Generators in (L, H) order for rates and weights; H is a 2x2 operator in (H, L) order."""

    H: ComplexOp
    L0_rates: tuple[float, float]
    L1_strength: float
    L1_weights: tuple[float, float]

    def __post_init__(self):
        if self.H.dim != 2 or not self.H.is_hermitian():
            raise ValueError("H must be a hermitian 2x2 operator")
        if min(self.L0_rates) < 0 or self.L1_strength < 0:
            raise ValueError("rates must be non-negative")

    @classmethod
    def from_csl(cls, params, meson, masses) -> "GklsGenerators":
        """Generators matching a CSL parameter set; H is the mass operator minus its mean."""
        from .csl import csl_rates

        rates = csl_rates(params, meson, masses)
        dm = meson.delta_m.value
        return cls(
            H=ComplexOp.diag([0.5 * dm, -0.5 * dm]),
            L0_rates=(meson.gamma_L.value + rates.gamma_csl_L, meson.gamma_H.value + rates.gamma_csl_H),
            L1_strength=params.lambda_csl,
            L1_weights=params.weights(masses),
        )

    def l0(self) -> ComplexOp:
        """2x2 decay amplitude operator in (H, L) order."""
        gl, gh = self.L0_rates
        return ComplexOp.diag([math.sqrt(gh), math.sqrt(gl)])

    def l1(self) -> ComplexOp:
        wl, wh = self.L1_weights
        s = math.sqrt(self.L1_strength)
        return ComplexOp.diag([s * wh, s * wl])

    def full_operators(self) -> tuple[ComplexOp, list[ComplexOp]]:
        z = ComplexOp.zeros(2)
        h4 = block_matrix([[self.H, z], [z, z]])
        l0 = block_matrix([[z, z], [self.l0(), z]])
        l1 = block_matrix([[self.l1(), z], [z, z]])
        return h4, [l0, l1]

    def time_scale(self) -> float:
        """Rate used to make time dimensionless."""
        if self.L0_rates[0] > 0:
            return self.L0_rates[0]
        cands = [abs(self.H[0, 0] - self.H[1, 1]), *self.L0_rates, self.L1_strength * max(self.L1_weights) ** 2]
        return max(cands) or 1.0


def gkls_rhs(h: ComplexOp, lindblads: list[ComplexOp], rho: ComplexOp) -> ComplexOp:
    """-i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho})"""
    out = commutator(h, rho) * -1j
    for op in lindblads:
        dag = op.dagger()
        out = out + op @ rho @ dag - anticommutator(dag @ op, rho) * 0.5
    return out


def ss_block_rhs(gen: GklsGenerators, rho_ss: ComplexOp) -> ComplexOp:
    """Surviving-block equation with hermitian generators:
    -i[H, rho] - 1/2 {L0^2, rho} - 1/2 {L1^2, rho} + L1 rho L1."""
    l0, l1 = gen.l0(), gen.l1()
    return (
        commutator(gen.H, rho_ss) * -1j
        - anticommutator(l0 @ l0, rho_ss) * 0.5
        - anticommutator(l1 @ l1, rho_ss) * 0.5
        + l1 @ rho_ss @ l1
    )


@dataclass(frozen=True)
class BlockDensity:
    rho_ss: ComplexOp
    rho_sd: ComplexOp
    rho_dd: ComplexOp
    t: float = 0.0

    @classmethod
    def flavor(cls, which: str = "same") -> "BlockDensity":
        """Pure surviving M0 (``same``) or anti-M0 (``conjugate``)."""
        psi = FLAVOR_M if which == "same" else FLAVOR_MBAR
        z = ComplexOp.zeros(2)
        return cls(ComplexOp.outer(psi, psi), z, z)

    @classmethod
    def from_full(cls, rho: ComplexOp, t: float = 0.0) -> "BlockDensity":
        return cls(rho.block(slice(0, 2), slice(0, 2)), rho.block(slice(0, 2), slice(2, 4)),
                   rho.block(slice(2, 4), slice(2, 4)), t)

    def assemble(self) -> ComplexOp:
        return block_matrix([[self.rho_ss, self.rho_sd], [self.rho_sd.dagger(), self.rho_dd]])

    def trace(self) -> float:
        return (self.rho_ss.trace() + self.rho_dd.trace()).real

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(np.array(self.assemble().tolist())).min())

    def p_same(self) -> float:
        return self.rho_ss.expectation(FLAVOR_M).real

    def p_conj(self) -> float:
        return self.rho_ss.expectation(FLAVOR_MBAR).real


def _vec(rho: ComplexOp) -> np.ndarray:
    diag = [rho[i, i].real for i in range(4)]
    re = [rho[i, j].real for i, j in _UPPER]
    im = [rho[i, j].imag for i, j in _UPPER]
    return np.array(diag + re + im)


def _unvec(y: np.ndarray) -> ComplexOp:
    m = [[0j] * 4 for _ in range(4)]
    for i in range(4):
        m[i][i] = complex(y[i])
    for k, (i, j) in enumerate(_UPPER):
        z = complex(y[4 + k], y[10 + k])
        m[i][j] = z
        m[j][i] = z.conjugate()
    return ComplexOp(m)


def _basis(k: int) -> ComplexOp:
    y = np.zeros(16)
    y[k] = 1.0
    return _unvec(y)


def liouvillian(gen: GklsGenerators) -> np.ndarray:
    """Real 16x16 matrix of the generator on the upper-triangle coordinates."""
    h4, ls = gen.full_operators()
    return np.column_stack([_vec(gkls_rhs(h4, ls, _basis(k))) for k in range(16)])


def evolve(
    gen: GklsGenerators,
    rho0: BlockDensity,
    t_grid,
    rtol: float = 1e-12,
    atol: float = 1e-18,
    positivity_tol: float = 1e-10,
) -> list[BlockDensity]:
    """Integrate the master equation with an adaptive Runge-Kutta (8th order) scheme.

    Trace drift is left uncorrected so it can be monitored.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or t_grid[0] != 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly ascending and start at 0")
    rho = rho0.assemble()
    if not rho.is_hermitian(1e-12):
        raise ValueError("initial state must be hermitian")
    scale = gen.time_scale()
    gen_matrix = liouvillian(gen) / scale
    y0 = _vec(rho)
    tau = t_grid * scale
    if tau.size == 1:
        ys = y0[:, None]
    else:
        sol = solve_ivp(
            lambda _t, y: gen_matrix @ y,
            (0.0, tau[-1]),
            y0,
            method="DOP853",
            t_eval=tau,
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise NumericalError(f"master-equation integration failed: {sol.message}")
        ys = sol.y
    history = [BlockDensity.from_full(_unvec(ys[:, k]), float(t)) for k, t in enumerate(t_grid)]
    for state in history:
        ev = state.min_eigenvalue()
        if ev < -positivity_tol:
            raise NumericalError(f"density matrix lost positivity at t = {state.t:.6g}: min eigenvalue {ev:.3g}")
    return history


def _cumulative_simpson(values: np.ndarray, h: float):
    """Trapezoid cumulative integral at even indices, Richardson-refined (= Simpson)."""
    n = values.shape[0]
    idx = np.arange(0, n, 2)
    zero = np.zeros_like(values[:1])
    trap = np.concatenate([zero, np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0)])
    coarse = np.concatenate([zero, np.cumsum(h * (values[2::2] + values[:-2:2]), axis=0)])
    return idx, (4 * trap[idx] - coarse) / 3


def check_dd_identity(history: list[BlockDensity], gen: GklsGenerators) -> float:
    """Max elementwise |rho_dd(t) - L0 (int_0^t rho_ss) L0^dag| on the output grid.

    Needs a uniform grid; the refined integral exists at every other point,
    which is where the residual is evaluated.
    """
    t = np.array([s.t for s in history])
    if t.size < 3:
        raise ValueError("need at least three grid points")
    h = t[1] - t[0]
    if np.max(np.abs(np.diff(t) - h)) > 1e-9 * h:
        raise ValueError("check_dd_identity needs a uniform time grid")
    ss = np.array([s.rho_ss.tolist() for s in history])
    dd = np.array([s.rho_dd.tolist() for s in history])
    idx, integral = _cumulative_simpson(ss, h)
    l = np.sqrt(np.array(gen.L0_rates[::-1]))  # (H, L)
    predicted = integral * np.outer(l, l)[None]
    return float(np.max(np.abs(dd[idx] - predicted)))


def kick_channel(gen: GklsGenerators, rho_ss: ComplexOp, dt: float, method: str = "closed") -> ComplexOp:
    """Average of U(phi) rho U(phi)^dag over phi ~ N(0, lambda dt), U = exp(-i phi G).

    ``closed`` uses the Gaussian characteristic function on the off-diagonal
    entries; ``quadrature`` averages the conjugation with Gauss-Hermite nodes.
    """
    wl, wh = gen.L1_weights
    g = (wh, wl)
    sigma2 = gen.L1_strength * dt
    if method == "closed":
        m = [[rho_ss[i, j] * math.exp(-0.5 * sigma2 * (g[i] - g[j]) ** 2) for j in range(2)] for i in range(2)]
        return ComplexOp(m)
    if method == "quadrature":
        nodes, weights = hermegauss(60)
        weights = weights / weights.sum()
        acc = ComplexOp.zeros(2)
        for x, w in zip(nodes, weights):
            u = ComplexOp.diag([np.exp(-1j * math.sqrt(sigma2) * x * gi) for gi in g])
            acc = acc + (u @ rho_ss @ u.dagger()) * w
        return acc
    raise ValueError("method must be 'closed' or 'quadrature'")


def kick_channel_equivalence(gen: GklsGenerators, rho0: BlockDensity, dt: float) -> float:
    """Max deviation between one kick and one Euler step of the L1 dissipator."""
    wl, wh = gen.L1_weights
    if gen.L1_strength * (wh - wl) ** 2 * dt >= GUARD:
        raise GuardViolation(f"dt = {dt:.3g} too coarse for the dephasing rate")
    rho = rho0.rho_ss
    l1 = gen.l1()
    euler = rho + (l1 @ rho @ l1 - anticommutator(l1 @ l1, rho) * 0.5) * dt
    return kick_channel(gen, rho, dt).max_abs_diff(euler)
