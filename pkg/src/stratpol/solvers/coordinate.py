"""Coordinate-wise policy search (sequential and snapshot-parallel)."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np

from ..core import TIE_TOL, Instance, as_policy, gains_matrix, utility
from .result import SolveResult

IMPROVE_TOL = 1e-12
DEDUP_TOL = 1e-12


def default_workers() -> int:
    return max(1, int(os.environ.get("STRATPOL_WORKERS", "1")))


def candidate_values(inst: Instance, pi: Any, i: int) -> np.ndarray:
    """Values of ``pi[i]`` at which some source's best response can change.

    For each source ``s`` that can reach ``i``, the threshold is the best
    gain it gets elsewhere plus its cost to reach ``i``. Thresholds are
    clipped to ``[0, 1]`` and joined with the endpoints.
    """
    pi = as_policy(pi, inst.m)
    g = gains_matrix(inst.cost, pi)
    g[:, i] = -np.inf
    best_else = g.max(axis=1)
    ci = inst.cost[:, i]
    ok = np.isfinite(ci)
    th = np.clip(best_else[ok] + ci[ok], 0.0, 1.0)
    vals = np.sort(np.concatenate(([0.0, 1.0], th)))
    keep = np.concatenate(([True], np.diff(vals) > DEDUP_TOL))
    return vals[keep]


def coordinate_targets(
    inst: Instance, pi: np.ndarray, i: int, values: np.ndarray, tie_tol: float = TIE_TOL
) -> np.ndarray:
    """Best-response targets when ``pi[i]`` is replaced by each of ``values``.

    Agrees exactly with :func:`stratpol.core.best_response` but costs
    ``O(m^2 + K m)`` instead of ``O(K m^2)``.
    """
    prio = inst.priority()
    cost = inst.cost
    others = gains_matrix(cost, pi)
    others[:, i] = -np.inf
    best_else = others.max(axis=1)
    near = np.isfinite(others) & (others >= (best_else - tie_tol)[:, None])
    runner = np.where(near, prio[None, :], -1).argmax(axis=1)

    ci = cost[:, i]
    reach = np.isfinite(ci)
    h = np.full((values.size, inst.m), -np.inf)
    h[:, reach] = values[:, None] - ci[None, reach]

    tgt = np.broadcast_to(runner, h.shape).copy()
    wins_tie = prio[i] > prio[runner]
    joins = np.isfinite(h) & (h <= best_else) & (h >= best_else - tie_tol) & wins_tie
    beats = h > best_else + tie_tol
    tgt[joins | beats] = i
    # i is the new maximum but others remain within tolerance of it
    for k, s in np.argwhere((h > best_else) & ~beats):
        cand = np.isfinite(others[s]) & (others[s] >= h[k, s] - tie_tol)
        alt = int(np.where(cand, prio, -1).argmax()) if cand.any() else -1
        tgt[k, s] = i if alt < 0 or prio[i] > prio[alt] else alt
    return tgt


def coordinate_utilities(
    inst: Instance, pi: Any, i: int, values: Any, tie_tol: float = TIE_TOL
) -> np.ndarray:
    """Utility of the policy with ``pi[i]`` set to each entry of ``values``."""
    pi = as_policy(pi, inst.m)
    values = np.asarray(values, dtype=float)
    tgt = coordinate_targets(inst, pi, i, values, tie_tol)
    val = np.where(tgt == i, values[:, None], pi[tgt])
    return (inst.reward[tgt] * val) @ inst.p


def solve_coordinate(
    inst: Instance, pi: Any, i: int, tie_tol: float = TIE_TOL
) -> tuple[float, float]:
    """Best value for coordinate ``i`` with the others fixed.

    Keeps the incumbent unless some candidate is better by more than
    ``IMPROVE_TOL``; otherwise returns the smallest best candidate.
    """
    pi = as_policy(pi, inst.m)
    inc = float(pi[i])
    vals = candidate_values(inst, pi, i)
    vals = np.unique(np.append(vals, inc))
    us = coordinate_utilities(inst, pi, i, vals, tie_tol)
    u_inc = float(us[np.flatnonzero(vals == inc)[0]])
    top = us.max()
    if u_inc >= top - IMPROVE_TOL:
        return inc, u_inc
    k = int(np.flatnonzero(us >= top - IMPROVE_TOL)[0])
    return float(vals[k]), float(us[k])


def _sweep_order(inst: Instance) -> np.ndarray:
    return np.argsort(-inst.outcome, kind="stable")


def iterative_search(
    inst: Instance,
    init: Any = None,
    max_sweeps: int = 1000,
    tie_tol: float = TIE_TOL,
) -> SolveResult:
    """Sequential coordinate ascent until a full sweep changes nothing.

    Coordinates are visited in decreasing outcome order. ``iterations``
    counts sweeps that changed the policy; ``extra["updates"]`` counts the
    individual coordinate changes, each a strict utility improvement.
    """
    t0 = time.perf_counter()
    pi = np.zeros(inst.m) if init is None else as_policy(init, inst.m).copy()
    order = _sweep_order(inst)
    u = utility(inst, pi, tie_tol)
    history = [u]
    iterations = updates = sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        changed = False
        for i in order:
            v, uv = solve_coordinate(inst, pi, int(i), tie_tol)
            if v != pi[i]:
                pi[i] = v
                u = uv
                history.append(uv)
                updates += 1
                changed = True
        if not changed:
            converged = True
            break
        iterations += 1
    return SolveResult(
        algorithm="iter",
        policy=pi,
        utility=utility(inst, pi, tie_tol),
        iterations=iterations,
        sweeps=sweeps,
        converged=converged,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        history=history,
        extra={"updates": updates},
    )


def parallel_iterative_search(
    inst: Instance,
    init: Any = None,
    max_sweeps: int = 20,
    workers: int | None = None,
    tie_tol: float = TIE_TOL,
) -> SolveResult:
    """Jacobi-style variant: every coordinate is solved against the same
    snapshot and all updates are applied together.

    No convergence guarantee; after ``max_sweeps`` the best policy seen is
    returned with ``converged=False``.
    """
    t0 = time.perf_counter()
    pi = np.zeros(inst.m) if init is None else as_policy(init, inst.m).copy()
    workers = default_workers() if workers is None else workers
    best_pi, best_u = pi.copy(), utility(inst, pi, tie_tol)
    history = [best_u]
    iterations = sweeps = 0
    converged = False
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while sweeps < max_sweeps:
            sweeps += 1
            snap = pi.copy()
            solve = lambda i: solve_coordinate(inst, snap, i, tie_tol)[0]  # noqa: E731
            idx = range(inst.m)
            vals = list(pool.map(solve, idx)) if pool else [solve(i) for i in idx]
            new = np.asarray(vals)
            if np.array_equal(new, snap):
                converged = True
                break
            iterations += 1
            pi = new
            u = utility(inst, pi, tie_tol)
            history.append(u)
            if u > best_u + IMPROVE_TOL:
                best_pi, best_u = pi.copy(), u
    finally:
        if pool:
            pool.shutdown()
    return SolveResult(
        algorithm="par-iter",
        policy=best_pi,
        utility=best_u,
        iterations=iterations,
        sweeps=sweeps,
        converged=converged,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        history=history,
        extra={"workers": workers},
    )
