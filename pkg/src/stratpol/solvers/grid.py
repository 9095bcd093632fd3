"""Value-grid arithmetic and exhaustive search over grid policies."""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from ..core import TIE_TOL, Instance, batch_utility
from .result import BudgetExceededError, SolveResult

DEFAULT_BUDGET = 50_000_000
SATURATED = 2**63 - 1


def _rationalize(x: float, max_den: int, tol: float) -> Fraction | None:
    fr = Fraction(x).limit_denominator(max_den)
    if abs(float(fr) - x) > tol:
        return None
    return fr


def common_step(inst: Instance, max_den: int = 1000, tol: float = 1e-9) -> float | None:
    """Largest ``u`` dividing 1 and every within-row cost difference.

    Returns ``None`` when some difference is not rational with denominator
    at most ``max_den``.
    """
    # Every row holds a zero on the diagonal, so the differences within a
    # row generate the same lattice as the finite entries themselves.
    vals = np.unique(inst.cost[np.isfinite(inst.cost)])
    fracs = [Fraction(1)]
    for v in vals:
        if v == 0:
            continue
        fr = _rationalize(float(v), max_den, tol)
        if fr is None:
            return None
        fracs.append(fr)
    den = math.lcm(*(f.denominator for f in fracs))
    num = 0
    for f in fracs:
        num = math.gcd(num, f.numerator * (den // f.denominator))
    return num / den


def termination_bound(m: int, u_bar: float) -> int:
    """``m ** (1 + 1/u_bar) - 1``, saturating at ``2**63 - 1``."""
    n = round(1 / u_bar)
    if abs(n * u_bar - 1) > 1e-9:
        raise ValueError(f"{u_bar} does not divide 1")
    if m <= 1:
        return 0
    if (n + 1) * math.log2(m) >= 63:
        return SATURATED
    return m ** (n + 1) - 1


def grid_size(step: float) -> int:
    n = round(1 / step)
    if n < 1 or abs(n * step - 1) > 1e-9:
        raise ValueError(f"step {step} does not divide 1")
    return n


def brute_force(
    inst: Instance,
    step: float,
    budget: int = DEFAULT_BUDGET,
    tie_tol: float = TIE_TOL,
    keep_ties: int = 10_000,
    coords: np.ndarray | None = None,
) -> SolveResult:
    """Evaluate every policy on the grid ``{0, step, ..., 1}^m``.

    ``coords`` restricts the search to a subset of coordinates (others fixed
    at 0). The maximizer returned is the first in lexicographic grid order
    among those within 1e-12 of the best utility; up to ``keep_ties`` such
    co-optima are kept.
    """
    t0 = time.perf_counter()
    n = grid_size(step)
    m = inst.m
    free = np.arange(m) if coords is None else np.asarray(coords, dtype=np.int64)
    k = free.size
    count = (n + 1) ** k
    if count > budget:
        raise BudgetExceededError(count, budget)

    values = np.arange(n + 1) / n
    radix = (n + 1) ** np.arange(k - 1, -1, -1, dtype=np.int64)
    chunk = max(1, 2_000_000 // max(1, m * m))
    best_u = -np.inf
    ties: list[np.ndarray] = []
    kept = n_ties = 0
    for lo in range(0, count, chunk):
        idx = np.arange(lo, min(count, lo + chunk), dtype=np.int64)
        digits = (idx[:, None] // radix[None, :]) % (n + 1)
        pis = np.zeros((idx.size, m))
        pis[:, free] = values[digits]
        u = batch_utility(inst, pis, tie_tol)
        top = u.max()
        if top > best_u + 1e-12:
            best_u = top
            ties, kept, n_ties = [], 0, 0
        if top >= best_u - 1e-12:
            hit = pis[u >= best_u - 1e-12]
            n_ties += hit.shape[0]
            if kept < keep_ties:
                ties.append(hit[: keep_ties - kept])
                kept += ties[-1].shape[0]
    co = np.concatenate(ties)
    u_co = batch_utility(inst, co, tie_tol)
    co = co[u_co >= u_co.max() - 1e-12]
    policy = co[0]

    u_bar = common_step(inst)
    exact = u_bar is not None and abs(round(u_bar / step) * step - u_bar) < 1e-9
    return SolveResult(
        algorithm="brute",
        policy=policy,
        utility=float(batch_utility(inst, policy[None])[0]),
        iterations=count,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        exact=bool(exact),
        co_optima=co,
        extra={"policies": count, "n_co_optima": n_ties},
    )
