"""CNF formulas and their encoding as strategic-decision instances.

Each variable ``v_i`` gets a gadget of seven values ``y_i, ybar_i, a_i, b_i,
z1_i, z2_i, z3_i`` and each clause one value ``k_j``. Only the ``z`` and
``k`` values carry mass; only ``y, ybar`` (reward 1) and ``a, b`` (reward
``2(s+1)``) pay off. Setting exactly one of ``y_i, ybar_i`` to 1 is worth
more than any other gadget configuration, and every clause whose literal
is switched on adds its mass on top, so an optimal 0/1 policy encodes a
satisfying assignment whenever one exists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Instance

INERT = 2.0


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.clauses:
            raise ValueError("formula has no clauses")
        for cl in self.clauses:
            if not cl:
                raise ValueError("empty clause")
            for lit in cl:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    def evaluate(self, assignment: dict[int, bool] | list[bool]) -> bool:
        val = assignment if isinstance(assignment, dict) else dict(enumerate(assignment, 1))
        return all(any(val[abs(l)] == (l > 0) for l in cl) for cl in self.clauses)

    def satisfiable(self) -> bool:
        return any(
            self.evaluate(list(bits))
            for bits in itertools.product([False, True], repeat=self.num_vars)
        )


def parse_dimacs(text: str) -> CnfFormula:
    nvars = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad problem line {line!r}")
            nvars = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ValueError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(tuple(cur))
    if nvars is None:
        nvars = max((abs(l) for cl in clauses for l in cl), default=0)
    return CnfFormula(nvars, tuple(clauses))


def to_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.num_vars} {len(f.clauses)}"]
    lines += [" ".join(map(str, cl)) + " 0" for cl in f.clauses]
    return "\n".join(lines) + "\n"


def sat_labels(l: int, s: int) -> list[str]:
    groups = ["y", "ybar", "a", "b", "z1", "z2", "z3"]
    return [f"{g}{i}" for g in groups for i in range(1, l + 1)] + [f"k{j}" for j in range(1, s + 1)]


def from_sat(formula: CnfFormula, epsilon: float = 0.01) -> Instance:
    """Encode ``formula`` as a reward-form instance with ``7l + s`` values.

    Masses are proportional to ``3(s+1)`` for each ``z1`` and 1 for each
    ``z2``, ``z3`` and clause value, normalized to sum to one.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    l, s = formula.num_vars, len(formula.clauses)
    labels = sat_labels(l, s)
    at = {lab: k for k, lab in enumerate(labels)}
    m = len(labels)

    p = np.zeros(m)
    reward = np.zeros(m)
    for i in range(1, l + 1):
        p[at[f"z1{i}"]] = 3 * (s + 1)
        p[at[f"z2{i}"]] = 1
        p[at[f"z3{i}"]] = 1
        reward[at[f"y{i}"]] = reward[at[f"ybar{i}"]] = 1
        reward[at[f"a{i}"]] = reward[at[f"b{i}"]] = 2 * (s + 1)
    for j in range(1, s + 1):
        p[at[f"k{j}"]] = 1
    p /= p.sum()

    cost = np.full((m, m), np.inf)
    np.fill_diagonal(cost, 0.0)
    kinds = ("y", "ybar", "a", "b")
    sources = [f"z{g}{i}" for g in (1, 2, 3) for i in range(1, l + 1)]
    sources += [f"k{j}" for j in range(1, s + 1)]
    for src in sources:
        for kind in kinds:
            for j in range(1, l + 1):
                cost[at[src], at[f"{kind}{j}"]] = INERT
    for i in range(1, l + 1):
        cost[at[f"z1{i}"], at[f"y{i}"]] = 0.0
        cost[at[f"z1{i}"], at[f"ybar{i}"]] = 0.0
        cost[at[f"z2{i}"], at[f"y{i}"]] = 0.0
        cost[at[f"z2{i}"], at[f"a{i}"]] = 1 - epsilon
        cost[at[f"z3{i}"], at[f"ybar{i}"]] = 0.0
        cost[at[f"z3{i}"], at[f"b{i}"]] = 1 - epsilon
    for j, clause in enumerate(formula.clauses, 1):
        for lit in clause:
            dest = f"y{lit}" if lit > 0 else f"ybar{-lit}"
            cost[at[f"k{j}"], at[dest]] = 0.0

    return Instance(
        p=p,
        cost=cost,
        explicit_reward=reward,
        meta={
            "family": "sat",
            "labels": labels,
            "num_vars": l,
            "clauses": [list(cl) for cl in formula.clauses],
            "epsilon": epsilon,
        },
    )


def payoff_coords(inst: Instance) -> np.ndarray:
    """Indices with positive reward (the only ones worth searching)."""
    return np.flatnonzero(inst.reward > 0)


def decode_assignment(inst: Instance, pi, tol: float = 1e-9) -> list[bool] | None:
    """Read ``v_i = pi(y_i) >= 0.5``; ``None`` unless every ``y_i, ybar_i``
    pair is complementary."""
    labels = inst.meta["labels"]
    at = {lab: k for k, lab in enumerate(labels)}
    pi = np.asarray(pi, dtype=float)
    out = []
    for i in range(1, inst.meta["num_vars"] + 1):
        y, yb = pi[at[f"y{i}"]], pi[at[f"ybar{i}"]]
        if abs(y - (1 - yb)) > tol:
            return None
        out.append(bool(y >= 0.5))
    return out
