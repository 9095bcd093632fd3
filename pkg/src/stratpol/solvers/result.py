from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


class BudgetExceededError(RuntimeError):
    def __init__(self, count: int, budget: int):
        super().__init__(f"{count} policies exceed the evaluation budget of {budget}")
        self.count = count
        self.budget = budget


@dataclass
class SolveResult:
    algorithm: str
    policy: np.ndarray
    utility: float
    iterations: int = 0
    sweeps: int = 0
    rounds: int = 0
    converged: bool = True
    wall_ms: float = 0.0
    exact: bool = False
    history: list[float] = field(default_factory=list)
    co_optima: np.ndarray | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "policy": [float(v) for v in self.policy],
            "utility": self.utility,
            "iterations": self.iterations,
            "sweeps": self.sweeps,
            "rounds": self.rounds,
            "converged": self.converged,
            "wall_ms": self.wall_ms,
            "exact": self.exact,
        }
