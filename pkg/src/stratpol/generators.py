"""Synthetic instance families.

Randomness comes from ``numpy.random.Generator(PCG64)`` seeded through
``SeedSequence(seed)``; :func:`split_seed` derives independent per-cell
seeds for experiment sweeps.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Instance

RNG_NAME = "numpy.PCG64/SeedSequence"


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def split_seed(seed: int, *key: int) -> int:
    """Deterministic 63-bit child seed for ``(seed, *key)``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return int(ss.generate_state(2, np.uint64)[0] >> np.uint64(1))


def _masses(rng: np.random.Generator, m: int) -> np.ndarray:
    # Normal(0.5, 0.1) truncated below at zero, by rejection
    t = rng.normal(0.5, 0.1, size=m)
    while np.any(bad := t < 0):
        t[bad] = rng.normal(0.5, 0.1, size=int(bad.sum()))
    return t / t.sum()


def _quantize_up(x: np.ndarray, quantum: float) -> np.ndarray:
    return np.maximum(np.ceil(x / quantum - 1e-12), 1.0) * quantum


def toy_instance() -> Instance:
    """Three-value example whose optimum is stochastic."""
    return Instance(
        p=[0.1, 0.4, 0.5],
        q=[1.0, 0.7, 0.4],
        gamma=0.1,
        cost=[[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [1.2, 0.3, 0.0]],
        meta={"family": "toy"},
    )


def nonmonotone_instance() -> Instance:
    """Toy population with costs whose optimum is not outcome monotonic."""
    return Instance(
        p=[0.1, 0.4, 0.5],
        q=[1.0, 0.7, 0.4],
        gamma=0.1,
        cost=[[0.0, 0.2, 0.3], [0.3, 0.0, 0.7], [1.2, 1.1, 0.0]],
        meta={"family": "nonmonotone"},
    )


def gen_1d_random(
    m: int,
    kappa: float,
    gamma: float = 0.3,
    seed: int = 0,
    cost_quantum: float | None = None,
) -> Instance:
    """Random one-dimensional population with sparse uniform costs.

    A uniformly chosen fraction ``kappa`` of the ordered off-diagonal pairs
    gets a ``Uniform[0, 1]`` cost; the rest are ``inf``. With
    ``cost_quantum`` the finite costs are rounded up to positive multiples
    of it, which makes exhaustive grid search exact.
    """
    if m < 1 or not 0 <= kappa <= 1:
        raise ValueError("need m >= 1 and kappa in [0, 1]")
    rng = rng_for(seed)
    p = _masses(rng, m)
    q = rng.uniform(0.0, 1.0, size=m)
    cost = np.full((m, m), np.inf)
    np.fill_diagonal(cost, 0.0)
    rows, cols = np.nonzero(~np.eye(m, dtype=bool))
    n_pairs = rows.size
    k = int(round(kappa * n_pairs))
    pick = rng.choice(n_pairs, size=k, replace=False)
    vals = rng.uniform(0.0, 1.0, size=k)
    if cost_quantum is not None:
        vals = _quantize_up(vals, cost_quantum)
    cost[rows[pick], cols[pick]] = vals
    return Instance(
        p=p,
        q=q,
        gamma=gamma,
        cost=cost,
        meta={
            "family": "1d_random",
            "m": m,
            "kappa": kappa,
            "gamma": gamma,
            "seed": seed,
            "cost_quantum": cost_quantum,
            "rng": RNG_NAME,
        },
    )


def gen_additive_monotonic(
    m: int,
    kappa: float,
    gamma: float = 0.15,
    seed: int = 0,
    cost_quantum: float | None = None,
) -> Instance:
    """Canonically ordered population with additive outcome-monotonic costs.

    Moving to a worse outcome is free. The costs of reaching each better
    value from the worst one are ``m - 1`` sorted ``Uniform[0, 1/kappa]``
    draws (farther is dearer); every other improving cost follows by
    additivity, ``cost[i, j] = cost[m-1, j] - cost[m-1, i]``.
    """
    if m < 2 or not 0 < kappa <= 1:
        raise ValueError("need m >= 2 and kappa in (0, 1]")
    if cost_quantum is not None and (1 / kappa) / cost_quantum < m - 1:
        raise ValueError("cost_quantum too coarse for m - 1 distinct costs")
    rng = rng_for(seed)
    p = _masses(rng, m)
    q = np.sort(rng.uniform(0.0, 1.0, size=m))[::-1]
    while True:
        draws = rng.uniform(0.0, 1.0 / kappa, size=m - 1)
        if cost_quantum is not None:
            draws = _quantize_up(draws, cost_quantum)
        if np.unique(draws).size == m - 1 and np.all(draws > 0):
            break
    from_worst = np.zeros(m)
    from_worst[: m - 1] = np.sort(draws)[::-1]  # index 0 (best) is farthest
    cost = np.zeros((m, m))
    for i in range(m):
        for j in range(i):
            cost[i, j] = from_worst[j] - from_worst[i]
    return Instance(
        p=p,
        q=q,
        gamma=gamma,
        cost=cost,
        meta={
            "family": "additive_monotonic",
            "m": m,
            "kappa": kappa,
            "gamma": gamma,
            "seed": seed,
            "cost_quantum": cost_quantum,
            "rng": RNG_NAME,
        },
    )


def _grid_instance(density, lo, hi, outcome, alpha: float, gamma: float, family: str) -> Instance:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = 7
    # cell centres in original coordinates; cell mass by centre-point rule
    c1 = lo[0] + (np.arange(n) + 0.5) * (hi[0] - lo[0]) / n
    c2 = lo[1] + (np.arange(n) + 0.5) * (hi[1] - lo[1]) / n
    X1, X2 = np.meshgrid(c1, c2, indexing="ij")
    area = (hi[0] - lo[0]) * (hi[1] - lo[1]) / n**2
    mass = density(X1, X2) * area
    p = (mass / mass.sum()).ravel()
    a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a, b = a.ravel().astype(float), b.ravel().astype(float)
    q = outcome(a, b)
    cost = (np.abs(a[:, None] - a[None, :]) + np.abs(b[:, None] - b[None, :])) / alpha
    return Instance(
        p=p,
        q=q,
        gamma=gamma,
        cost=cost,
        meta={
            "family": family,
            "alpha": alpha,
            "gamma": gamma,
            "coords": [[int(x), int(y)] for x, y in zip(a, b)],
        },
    )


def _normal2(x1, x2, mu, var):
    return np.exp(-((x1 - mu[0]) ** 2 + (x2 - mu[1]) ** 2) / (2 * var)) / (2 * math.pi * var)


def gen_2d_mixture_grid(alpha: float, gamma: float = 0.2) -> Instance:
    """7x7 grid from an equal mixture of two unit-covariance Gaussians."""

    def density(x1, x2):
        return 0.5 * _normal2(x1, x2, (4.0, 4.0), 1.0) + 0.5 * _normal2(x1, x2, (7.0, 10.0), 1.0)

    def outcome(x1, x2):
        return (np.abs(x1) + np.abs(3 - x2)) / 24 + (np.abs(x1) + np.abs(7 - x2)) / 24

    return _grid_instance(density, (2.0, 3.0), (3.0, 14.0), outcome, alpha, gamma, "2d_mixture")


def gen_2d_unimodal_grid(alpha: float, gamma: float = 0.2) -> Instance:
    """7x7 grid from one Gaussian with a bimodal outcome surface."""

    def density(x1, x2):
        return _normal2(x1, x2, (2.5, 2.5), 1.4)

    def outcome(x1, x2):
        return np.maximum((x1 + x2) / 12, (np.abs(6 - x1) + np.abs(6 - x2)) / 12)

    return _grid_instance(density, (-3.0, -1.0), (6.3, 7.5), outcome, alpha, gamma, "2d_unimodal")


FAMILIES = {
    "1d_random": gen_1d_random,
    "additive_monotonic": gen_additive_monotonic,
    "2d_mixture": gen_2d_mixture_grid,
    "2d_unimodal": gen_2d_unimodal_grid,
}
