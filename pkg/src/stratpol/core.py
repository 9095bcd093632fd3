"""Population model, best responses, induced distributions and utilities.

Feature values are indexed ``0..m-1``. A policy is a float vector ``pi`` of
acceptance probabilities in ``[0, 1]``. Individuals at ``x_i`` move to the
value maximizing ``pi[k] - cost[i, k]``; argmax ties within ``tie_tol`` go to
the destination with the highest outcome, then the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

TIE_TOL = 1e-9


class PreconditionError(ValueError):
    """An operation was called on an instance or policy outside its domain."""


@dataclass(eq=False)
class Instance:
    """A discrete population facing a decision maker.

    Exactly one of ``q`` (outcome probabilities) or ``reward`` (explicit
    per-value profit of a positive decision) is given. With ``q`` the reward
    is ``q - gamma``. ``cost`` may hold ``+inf`` for forbidden moves.
    """

    p: np.ndarray
    cost: np.ndarray
    q: np.ndarray | None = None
    gamma: float | None = None
    explicit_reward: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.p = _frozen(self.p)
        self.cost = _frozen(self.cost)
        m = self.p.shape[0]
        if self.p.ndim != 1 or m == 0:
            raise ValueError("p must be a non-empty vector")
        if self.cost.shape != (m, m):
            raise ValueError(f"cost must be {m}x{m}, got {self.cost.shape}")
        if (self.q is None) == (self.explicit_reward is None):
            raise ValueError("exactly one of q and reward must be given")
        if self.q is not None:
            self.q = _frozen(self.q)
            if self.q.shape != (m,):
                raise ValueError(f"q must have length {m}")
            if self.gamma is None:
                raise ValueError("gamma is required when q is given")
            self.gamma = float(self.gamma)
        else:
            self.explicit_reward = _frozen(self.explicit_reward)
            if self.explicit_reward.shape != (m,):
                raise ValueError(f"reward must have length {m}")
            if self.gamma is not None:
                self.gamma = float(self.gamma)

    @property
    def m(self) -> int:
        return int(self.p.shape[0])

    @property
    def reward(self) -> np.ndarray:
        if self.explicit_reward is not None:
            return self.explicit_reward
        return self.q - self.gamma

    @property
    def outcome(self) -> np.ndarray:
        """Ordering key for outcome-based tie breaking (q, else reward)."""
        return self.q if self.q is not None else self.reward

    def priority(self) -> np.ndarray:
        """Unique rank per value: higher outcome first, then lower index."""
        order = np.lexsort((np.arange(self.m), -self.outcome))
        prio = np.empty(self.m, dtype=np.int64)
        prio[order] = np.arange(self.m, 0, -1)
        return prio

    def replace(self, **changes: Any) -> Instance:
        kw = dict(
            p=self.p,
            cost=self.cost,
            q=self.q,
            gamma=self.gamma,
            explicit_reward=self.explicit_reward,
            meta=dict(self.meta),
        )
        kw.update(changes)
        return Instance(**kw)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            np.array_equal(self.p, other.p)
            and np.array_equal(self.cost, other.cost)
            and _opt_equal(self.q, other.q)
            and _opt_equal(self.explicit_reward, other.explicit_reward)
            and self.gamma == other.gamma
            and self.meta == other.meta
        )

    __hash__ = None  # type: ignore[assignment]


def _frozen(a: Any) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _opt_equal(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


def as_policy(pi: Any, m: int | None = None) -> np.ndarray:
    """Coerce ``pi`` to a float vector and check it lies in ``[0, 1]^m``."""
    arr = np.asarray(pi, dtype=float)
    if arr.ndim != 1:
        raise ValueError("policy must be a vector")
    if m is not None and arr.shape[0] != m:
        raise ValueError(f"policy has length {arr.shape[0]}, expected {m}")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("policy entries must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    severity: str = "error"  # or "warning"


def validate_instance(inst: Instance, tol: float = 1e-9) -> list[Violation]:
    """Diagnose an instance. Errors break the model; warnings do not.

    Triangle-inequality failures are warnings. The positive-improvement
    assumption (moving to an outcome at least as good costs something) is an
    error for outcome-form instances and a warning for reward-form ones,
    since it is phrased in terms of outcomes.
    """
    out: list[Violation] = []
    p, c = inst.p, inst.cost
    total = float(p.sum())
    if not np.all(np.isfinite(p)):
        out.append(Violation("mass", "mass vector has non-finite entries"))
    elif abs(total - 1.0) > 1e-12:
        out.append(Violation("mass", f"mass sums to {total:.12g}"))
    if np.any(p < 0):
        out.append(Violation("mass", f"negative mass at {np.flatnonzero(p < 0).tolist()}"))
    if inst.q is not None:
        bad = np.flatnonzero(~((inst.q >= 0) & (inst.q <= 1)))
        if bad.size:
            out.append(Violation("outcome", f"q outside [0,1] at {bad.tolist()}"))
        if not 0 < inst.gamma < 1:
            out.append(Violation("gamma", f"gamma={inst.gamma} not in (0,1)"))
    elif not np.all(np.isfinite(inst.explicit_reward)):
        out.append(Violation("reward", "reward has non-finite entries"))
    if np.any(np.isnan(c)):
        out.append(Violation("cost", "cost has NaN entries"))
    diag = np.diag(c)
    if np.any(diag != 0):
        out.append(Violation("cost", f"non-zero diagonal at {np.flatnonzero(diag != 0).tolist()}"))
    if np.any(c < 0):
        out.append(Violation("cost", "negative cost entries"))
    if np.any(c == -np.inf):
        out.append(Violation("cost", "cost of -inf"))
    if out:
        return out

    r = inst.reward
    off = ~np.eye(inst.m, dtype=bool)
    free_up = off & (r[None, :] >= r[:, None]) & (c <= tol)
    if free_up.any():
        i, j = np.argwhere(free_up)[0]
        sev = "error" if inst.q is not None else "warning"
        out.append(
            Violation(
                "positive_improvement",
                f"{int(free_up.sum())} free moves to no-worse values, e.g. cost[{i}][{j}]={c[i, j]}",
                sev,
            )
        )
    tri = _triangle_failures(c, tol)
    if tri:
        out.append(Violation("triangle", f"{tri} triples violate the triangle inequality", "warning"))
    return out


def has_errors(violations: list[Violation]) -> bool:
    return any(v.severity == "error" for v in violations)


def _triangle_failures(c: np.ndarray, tol: float) -> int:
    # c[i,j] + c[j,k] >= c[i,k]; inf on the left always satisfies it.
    via = c[:, :, None] + c[None, :, :]
    return int(np.count_nonzero(via < c[:, None, :] - tol))


def canonicalize(inst: Instance) -> tuple[Instance, np.ndarray]:
    """Reorder values by non-increasing outcome (stable).

    Returns the reordered instance and ``order`` with
    ``new[k] == old[order[k]]``.
    """
    if inst.q is None:
        raise PreconditionError("canonical ordering needs outcome probabilities q")
    order = np.argsort(-inst.q, kind="stable")
    meta = dict(inst.meta)
    if "labels" in meta:
        meta["labels"] = [meta["labels"][k] for k in order]
    new = inst.replace(
        p=inst.p[order],
        q=inst.q[order],
        cost=inst.cost[np.ix_(order, order)],
        meta=meta,
    )
    return new, order


def is_canonical(inst: Instance) -> bool:
    return inst.q is not None and bool(np.all(np.diff(inst.q) <= 0))


@dataclass(frozen=True)
class ResponseProfile:
    target: np.ndarray
    gain: np.ndarray
    tied: np.ndarray


def gains_matrix(cost: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """``pi[k] - cost[i, k]`` with ``-inf`` for forbidden moves."""
    with np.errstate(invalid="ignore"):
        g = pi[None, :] - cost
    g[np.isinf(cost)] = -np.inf
    return g


def batch_targets(
    cost: np.ndarray, prio: np.ndarray, pis: np.ndarray, tie_tol: float = TIE_TOL
) -> np.ndarray:
    """Best-response targets for a batch of policies, shape ``(B, m)``."""
    forbidden = np.isinf(cost)
    g = pis[:, None, :] - np.where(forbidden, 0.0, cost)[None]
    g[:, forbidden] = -np.inf
    best = g.max(axis=2, keepdims=True)
    cand = g >= best - tie_tol
    score = np.where(cand, prio[None, None, :], -1)
    return score.argmax(axis=2)


def best_response(inst: Instance, pi: Any, tie_tol: float = TIE_TOL) -> ResponseProfile:
    pi = as_policy(pi, inst.m)
    g = gains_matrix(inst.cost, pi)
    best = g.max(axis=1)
    cand = g >= best[:, None] - tie_tol
    score = np.where(cand, inst.priority()[None, :], -1)
    target = score.argmax(axis=1)
    return ResponseProfile(
        target=target,
        gain=g[np.arange(inst.m), target],
        tied=cand.sum(axis=1) > 1,
    )


def induced_distribution(inst: Instance, pi: Any, tie_tol: float = TIE_TOL) -> np.ndarray:
    target = best_response(inst, pi, tie_tol).target
    return np.bincount(target, weights=inst.p, minlength=inst.m)


def utility(inst: Instance, pi: Any, tie_tol: float = TIE_TOL) -> float:
    """Expected profit when everyone best-responds to ``pi``."""
    pi = as_policy(pi, inst.m)
    t = best_response(inst, pi, tie_tol).target
    return float(np.sum(inst.p * inst.reward[t] * pi[t]))


def utility_from_distribution(inst: Instance, pi: Any, dist: np.ndarray) -> float:
    pi = as_policy(pi, inst.m)
    return float(np.sum(dist * pi * inst.reward))


def batch_utility(
    inst: Instance, pis: np.ndarray, tie_tol: float = TIE_TOL, chunk_elems: int = 4_000_000
) -> np.ndarray:
    """Utilities of many policies (rows of ``pis``)."""
    pis = np.atleast_2d(np.asarray(pis, dtype=float))
    m = inst.m
    prio = inst.priority()
    out = np.empty(pis.shape[0])
    step = max(1, chunk_elems // (m * m))
    for lo in range(0, pis.shape[0], step):
        block = pis[lo : lo + step]
        t = batch_targets(inst.cost, prio, block, tie_tol)
        val = inst.reward[t] * np.take_along_axis(block, t, axis=1)
        out[lo : lo + step] = val @ inst.p
    return out


def non_strategic_policy(inst: Instance) -> np.ndarray:
    """Deterministic threshold rule: accept iff the reward is non-negative."""
    return (inst.reward >= 0).astype(float)


@dataclass(frozen=True)
class FamilyReport:
    weakly_monotonic: bool
    omb: bool
    subadditive_family: bool


def policy_family_report(inst: Instance, pi: Any, tol: float = TIE_TOL) -> FamilyReport:
    """Check which structured policy families ``pi`` belongs to.

    Expects a canonical instance (outcomes non-increasing in the index).
    """
    if not is_canonical(inst):
        raise PreconditionError("instance is not in canonical (decreasing outcome) order")
    pi = as_policy(pi, inst.m)
    q, c, r = inst.q, inst.cost, inst.reward

    higher = q[:, None] > q[None, :]
    weak = not np.any(higher & (pi[:, None] < pi[None, :] - tol))

    omb = True
    sub = True
    for i in range(1, inst.m):
        if r[i] <= 0:
            continue
        prev = pi[i - 1]
        if abs(pi[i] - prev) <= tol:
            continue
        if abs(pi[i] - (prev - c[i, i - 1])) > tol:
            omb = False
        # Admissible sources j >= i are those whose step down to i-1 keeps
        # the value non-negative (chains may reach exactly zero).
        steps = prev - c[i:, i - 1]
        ok = np.flatnonzero(steps > -tol)
        if ok.size == 0:
            sub = False
            continue
        k = i + ok.max()
        if not np.any(np.abs(pi[i] - (prev - c[i : k + 1, i - 1])) <= tol):
            sub = False
    return FamilyReport(weakly_monotonic=bool(weak), omb=omb, subadditive_family=sub)


def last_positive(inst: Instance) -> int:
    """Largest index with positive reward in a canonical instance, or -1."""
    pos = np.flatnonzero(inst.reward > 0)
    return int(pos.max()) if pos.size else -1


def _omb_preconditions(inst: Instance, pi: np.ndarray, tol: float) -> None:
    if not is_canonical(inst):
        raise PreconditionError("instance is not canonical")
    prof = cost_profile(inst, tol)
    if not (prof.additive and prof.outcome_monotonic):
        raise PreconditionError("costs must be additive and outcome monotonic")
    if not policy_family_report(inst, pi, tol).omb:
        raise PreconditionError("policy is not outcome monotonic binary")
    r = last_positive(inst)
    if np.any(pi[r + 1 :] > tol):
        raise PreconditionError("policy must be zero where reward <= 0")


def omb_assignment(inst: Instance, pi: np.ndarray, start: int = 0, tol: float = TIE_TOL) -> np.ndarray:
    """Single-pass best responses for an outcome-monotonic binary policy.

    Only sources ``>= start`` are assigned; ``start`` is treated as a
    blocking state. Returns targets (``-1`` for sources above ``start``).
    """
    m = inst.m
    r = last_positive(inst)
    target = np.full(m, -1, dtype=np.int64)
    block = start
    for k in range(start, min(r, m - 1) + 1):
        if k > start and abs(pi[k] - pi[k - 1]) <= tol:
            block = k
        target[k] = block
    lo = max(start, r + 1)
    if r < start:
        # no positive-reward state below the anchor
        target[lo:] = np.arange(lo, m)
        return target
    for k in range(lo, m):
        target[k] = block if pi[block] - inst.cost[k, block] >= -tol else k
    return target


def omb_utility(inst: Instance, pi: np.ndarray, start: int = 0, tol: float = TIE_TOL) -> float:
    """Utility contributed by sources ``>= start`` under an OMB policy."""
    t = omb_assignment(inst, pi, start, tol)
    src = np.arange(start, inst.m)
    tt = t[start:]
    return float(np.sum(inst.p[src] * inst.reward[tt] * pi[tt]))


def best_response_omb(inst: Instance, pi: Any, tol: float = TIE_TOL) -> ResponseProfile:
    """Best responses via the blocking-state characterization.

    Valid for canonical instances with additive, outcome-monotonic costs and
    an outcome-monotonic binary policy that is zero where the reward is not
    positive. A source with positive reward moves to the nearest blocking
    state at or above it; others move to the last blocking state among the
    positive-reward values if they can afford it.
    """
    pi = as_policy(pi, inst.m)
    _omb_preconditions(inst, pi, tol)
    t = omb_assignment(inst, pi, 0, tol)
    rows = np.arange(inst.m)
    g = gains_matrix(inst.cost, pi)
    best = g[rows, t]
    tied = (g >= best[:, None] - tol).sum(axis=1) > 1
    return ResponseProfile(target=t, gain=best, tied=tied)


@dataclass(frozen=True)
class CostProfile:
    triangle: bool
    additive: bool
    outcome_monotonic: bool
    positive_improvement: bool
    tolerance: float


def cost_profile(inst: Instance, tol: float = TIE_TOL) -> CostProfile:
    """Classify the cost matrix against the structural assumptions."""
    c = inst.cost
    m = inst.m
    key = inst.outcome
    off = ~np.eye(m, dtype=bool)
    triangle = _triangle_failures(c, tol) == 0
    positive = not np.any(off & (key[None, :] >= key[:, None]) & (c <= tol))

    order = np.argsort(-key, kind="stable")
    cc = c[np.ix_(order, order)]
    kk = key[order]
    additive = True
    if m >= 3:
        # positions x < y < z (x has the best outcome)
        x, y, z = _ordered_triples(m)
        with np.errstate(invalid="ignore"):
            up = np.abs(cc[z, x] - (cc[z, y] + cc[y, x]))
            down = np.abs(cc[x, z] - (cc[x, y] + cc[y, z]))
        up = np.where(np.isinf(cc[z, x]) & np.isinf(cc[z, y] + cc[y, x]), 0.0, up)
        down = np.where(np.isinf(cc[x, z]) & np.isinf(cc[x, y] + cc[y, z]), 0.0, down)
        additive = bool(np.all(up <= tol) and np.all(down <= tol))
    # additivity along the order only implies the triangle inequality
    # together with it, so report both conjointly
    additive = additive and triangle

    worse = kk[:, None] > kk[None, :]  # moving from row to col worsens
    om = bool(np.all(np.abs(cc[worse]) <= tol)) and bool(np.all(cc[~worse & off[np.ix_(order, order)]] > tol))
    if om and m >= 3:
        x, y, z = _ordered_triples(m)
        strict = (kk[x] > kk[y]) & (kk[y] > kk[z])
        # improving from z: going farther costs more
        om = bool(np.all(cc[z, x][strict] > cc[z, y][strict] + tol))
        # reaching x: starting farther costs more
        om = om and bool(np.all(cc[z, x][strict] > cc[y, x][strict] + tol))
    return CostProfile(
        triangle=bool(triangle),
        additive=bool(additive),
        outcome_monotonic=om,
        positive_improvement=bool(positive),
        tolerance=tol,
    )


def _ordered_triples(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, y, z = np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij")
    keep = (x < y) & (y < z)
    return x[keep], y[keep], z[keep]
