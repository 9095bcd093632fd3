from .coordinate import (
    candidate_values,
    iterative_search,
    parallel_iterative_search,
    solve_coordinate,
)
from .dp import dp_search
from .grid import DEFAULT_BUDGET, brute_force, common_step, grid_size, termination_bound
from .result import BudgetExceededError, SolveResult

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceededError",
    "SolveResult",
    "brute_force",
    "candidate_values",
    "common_step",
    "dp_search",
    "grid_size",
    "iterative_search",
    "parallel_iterative_search",
    "solve_coordinate",
    "termination_bound",
]
