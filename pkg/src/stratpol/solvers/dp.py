"""Dynamic-programming heuristic over outcome-monotonic binary policies.

Works on a canonical instance (values sorted by decreasing outcome) with
additive, outcome-monotonic costs. Such policies are described by which
values are *blocking* (``pi[k] == pi[k-1]``) and which drop by exactly the
adjacent cost (``pi[k] == pi[k-1] - cost[k, k-1]``).

A round anchors value ``A`` at index ``s`` and fills a table of
subpolicies ``sub[i, j]``: ``j`` is the last blocking state (value ``A``),
``j+1..i-1`` are non-blocking, and the decisions from ``i`` on are
optimized. Blocking at ``i`` reuses the best tail anchored at ``i`` lowered
by ``cost[i-1, j]``. When lowering pushes values below zero they are
flattened into blocking states and the region from the last blocking state
at or before the cut is re-solved in a later round with its true anchor.

Index conventions:

* tables run over ``j in [s, r]`` and ``i in (j, r + 1]`` where ``r`` is the
  last positive-reward index; ``i == r + 1`` is the all-decided base case;
* the block/no-block comparison uses utilities of whole subpolicies from
  ``j`` down, evaluated by the single-pass rule, so the anchor value
  multiplies the mass that stays at ``j`` in later rounds too;
* the revisit index is the last blocking state at or before the cut.
"""

from __future__ import annotations

import time

import numpy as np

from ..core import (
    TIE_TOL,
    Instance,
    PreconditionError,
    canonicalize,
    cost_profile,
    is_canonical,
    last_positive,
    omb_utility,
    utility,
)
from .result import SolveResult


def _lower(tail: np.ndarray, i: int, r: int, sigma: float, tol: float) -> tuple[np.ndarray, int | None]:
    """Shift ``tail[i..r]`` down by ``sigma``; flatten the part that would go
    negative. Returns the lowered vector and the revisit index (``None`` if
    nothing was flattened)."""
    out = tail.copy()
    seg = tail[i : r + 1] - sigma
    ok = np.flatnonzero(seg >= -tol)
    d = i + int(ok.max())
    out[i : r + 1] = np.maximum(seg, 0.0)
    if d == r:
        return out, None
    out[d + 1 : r + 1] = out[d]
    v = d
    while v > i and abs(out[v] - out[v - 1]) > tol:
        v -= 1
    return out, v


class _Round:
    def __init__(self, inst: Instance, s: int, anchor: float, r: int, tol: float):
        self.inst, self.s, self.A, self.r, self.tol = inst, s, anchor, r, tol
        self.m = inst.m
        # sub[(i, j)] -> (values, F, V); V == m means nothing to revisit
        self.diag: dict[int, tuple[np.ndarray, float, int]] = {}

    def chain(self, j: int, stop: int) -> np.ndarray:
        """Values with ``j`` at the anchor and ``j+1..stop`` non-blocking."""
        vals = np.zeros(self.m)
        c = self.inst.cost
        vals[j] = self.A
        vals[j + 1 : stop + 1] = np.maximum(self.A - c[j + 1 : stop + 1, j], 0.0)
        return vals

    def feasible(self, i: int, j: int) -> bool:
        # chain j..i-1 stays non-negative
        return self.inst.cost[i - 1, j] <= self.A + self.tol

    def solve(self) -> tuple[np.ndarray, float, int]:
        s, r, m, inst, tol = self.s, self.r, self.m, self.inst, self.tol
        if s >= r:
            vals = self.chain(s, s)
            return vals, omb_utility(inst, vals, s, tol), m
        row: dict[int, tuple[np.ndarray, float, int]] = {}
        for j in range(s, r + 1):
            if self.feasible(r + 1, j):
                vals = self.chain(j, r)
                row[j] = (vals, omb_utility(inst, vals, j, tol), m)
        self.diag[r] = row[r]
        for i in range(r, s, -1):
            nxt = row
            row = {}
            tail, _, tail_v = self.diag[i]
            for j in range(i - 1, s - 1, -1):
                if not self.feasible(i, j):
                    continue
                sigma = inst.cost[i - 1, j]
                lowered, v_cut = _lower(tail, i, r, sigma, tol)
                vals = self.chain(j, i - 1)
                vals[i:] = lowered[i:]
                f_block = omb_utility(inst, vals, j, tol)
                keep = nxt.get(j)
                if keep is not None and keep[1] >= f_block:
                    row[j] = keep
                else:
                    v = tail_v if v_cut is None else min(v_cut, tail_v)
                    row[j] = (vals, f_block, v)
            if i - 1 in row:
                self.diag[i - 1] = row[i - 1]
        return row[s]


def dp_search(inst: Instance, tol: float = TIE_TOL, max_rounds: int | None = None) -> SolveResult:
    """Search outcome-monotonic binary policies round by round.

    Non-canonical instances are sorted internally and the policy is mapped
    back to the caller's order. Raises :class:`PreconditionError` unless the
    costs are additive and outcome monotonic.
    """
    t0 = time.perf_counter()
    if inst.q is None:
        raise PreconditionError("dynamic programming needs outcome probabilities q")
    order = None
    work = inst
    if not is_canonical(inst):
        work, order = canonicalize(inst)
    prof = cost_profile(work, tol)
    if not (prof.additive and prof.outcome_monotonic):
        raise PreconditionError("costs must be additive and outcome monotonic")

    m = work.m
    r = last_positive(work)
    pi = np.zeros(m)
    rounds = 0
    starts: list[int] = []
    if r >= 0:
        cap = m if max_rounds is None else max_rounds
        s, anchor = 0, 1.0
        while True:
            if rounds >= cap:
                raise RuntimeError(f"dynamic program exceeded {cap} rounds")
            rounds += 1
            starts.append(s)
            vals, _, v = _Round(work, s, anchor, r, tol).solve()
            if v >= m:
                pi[s:] = vals[s:]
                break
            pi[s : v + 1] = vals[s : v + 1]
            s, anchor = v, float(pi[v])
    pi[r + 1 :] = 0.0

    if order is not None:
        back = np.empty(m)
        back[order] = pi
        pi = back
    return SolveResult(
        algorithm="dp",
        policy=pi,
        utility=utility(inst, pi, tol),
        rounds=rounds,
        iterations=rounds,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        extra={"round_starts": starts},
    )
