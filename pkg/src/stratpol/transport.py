"""Best response as a transport of mass between feature values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .core import TIE_TOL, Instance, best_response, induced_distribution


@dataclass(frozen=True)
class TransportPlan:
    flow: np.ndarray
    objective: float

    @property
    def induced(self) -> np.ndarray:
        return self.flow.sum(axis=0)


def transport_plan(inst: Instance, pi: Any, tie_tol: float = TIE_TOL) -> TransportPlan:
    """Optimal plan for maximizing ``sum f_ij (pi_j - cost_ij)`` with row sums ``p``.

    Rows only interact through non-negativity, so each row sends all its
    mass to its best response (ties follow the best-response rule).
    """
    prof = best_response(inst, pi, tie_tol)
    m = inst.m
    flow = np.zeros((m, m))
    flow[np.arange(m), prof.target] = inst.p
    return TransportPlan(flow=flow, objective=float(inst.p @ prof.gain))


def check_transport_consistency(
    inst: Instance, pi: Any, tol: float = 1e-9, tie_tol: float = TIE_TOL
) -> bool:
    plan = transport_plan(inst, pi, tie_tol)
    return bool(np.allclose(plan.induced, induced_distribution(inst, pi, tie_tol), rtol=0, atol=tol))
