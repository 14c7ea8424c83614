"""Monte Carlo summaries shared by the correlator oracle and the simulators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnsembleEstimate:
    """Sample mean and standard error of an observable.

    ``times`` is None for scalar observables; otherwise ``mean`` and
    ``stderr`` are arrays aligned with it.
    """

    observable: str
    mean: float | np.ndarray
    stderr: float | np.ndarray
    n_samples: int
    seed: int
    times: np.ndarray | None = None

    def within(self, target, n_sigma: float, slack: float = 0.0):
        """Whether |mean - target| <= n_sigma * stderr + slack (elementwise)."""
        return np.abs(np.asarray(self.mean) - target) <= n_sigma * np.asarray(self.stderr) + slack


def map_chunks(fn, n: int, chunk: int, workers: int = 1) -> np.ndarray:
    """Apply ``fn(start, count)`` over [0, n) in chunks and concatenate in order.

    With ``workers > 1`` chunks run on a thread pool; the compiled kernels
    release the GIL. Concatenation is by chunk index, never by completion
    order, so the output is identical for any worker count.
    """
    starts = list(range(0, n, chunk))
    counts = [min(chunk, n - s) for s in starts]
    if workers <= 1 or len(starts) == 1:
        parts = [fn(s, c) for s, c in zip(starts, counts)]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, starts, counts))
    return np.concatenate(parts, axis=0)


def summarize(observable: str, samples: np.ndarray, seed: int, times=None) -> EnsembleEstimate:
    """Reduce per-sample values (first axis) to mean and standard error.

    The reduction order is fixed by sample index, so results do not depend on
    how the samples were produced.
    """
    samples = np.asarray(samples)
    n = samples.shape[0]
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(n)
    if np.ndim(mean) == 0:
        mean, stderr = float(mean), float(stderr)
    return EnsembleEstimate(observable, mean, stderr, n, seed, None if times is None else np.asarray(times))
