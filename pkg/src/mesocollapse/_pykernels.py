"""Vectorised numpy implementations of the hot loops.

These are the reference semantics for the compiled versions in
``_kernels.pyx`` and the fallback when the extension is unavailable.
"""

import numpy as np

SCHEME_EXACT = 0
SCHEME_HEUN = 1
SCHEME_KICKS = 2


def _exclusive_cumsum(x):
    out = np.cumsum(x, axis=1)
    out -= x
    return out


def iterated_sums(dW, diag_weight):
    """Ordered iterated sums of Brownian increments, one row per sample.

    Returns columns (S1, S2, S3, S4), where S_k sums dW_{i1} ... dW_{ik} over
    i1 >= i2 >= ... >= ik and each coincident pair of indices carries the
    weight ``diag_weight``.
    """
    dW = np.ascontiguousarray(dW, dtype=np.float64)
    out = np.empty((dW.shape[0], 4))
    out[:, 0] = dW.sum(axis=1)
    level = np.ones_like(dW)
    for k in range(1, 4):
        weighted = dW * level
        level = _exclusive_cumsum(weighted) + diag_weight * weighted
        out[:, k] = (dW * level).sum(axis=1)
    return out


def evolve_diagonal(psi0, a, b, incr, dt, record_every, scheme):
    """Integrate d psi_mu = a_mu psi_mu dt + i b_mu psi_mu o dW for each trajectory.

    ``incr`` holds one row of noise increments per trajectory. Returns the
    state at steps 0, record_every, 2*record_every, ... with shape
    (n_traj, n_records, 2).
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.float64)
    incr = np.asarray(incr, dtype=np.float64)
    n_traj, n_steps = incr.shape
    n_rec = n_steps // record_every + 1
    out = np.empty((n_traj, n_rec, 2), dtype=np.complex128)
    psi = np.broadcast_to(psi0, (n_traj, 2)).copy()
    out[:, 0] = psi
    drift = a * dt
    half = np.exp(0.5 * drift)
    for step in range(n_steps):
        dw = incr[:, step, None]
        if scheme == SCHEME_EXACT:
            psi *= np.exp(drift + 1j * b * dw)
        elif scheme == SCHEME_HEUN:
            z = drift + 1j * b * dw
            psi *= 1 + z + 0.5 * z * z
        elif scheme == SCHEME_KICKS:
            psi *= half
            psi *= np.exp(1j * b * dw)
            psi *= half
        else:
            raise ValueError(f"unknown scheme code {scheme}")
        if (step + 1) % record_every == 0:
            out[:, (step + 1) // record_every] = psi
    return out
