"""Decision policies for populations that strategically best-respond."""

from .core import (
    TIE_TOL,
    CostProfile,
    FamilyReport,
    Instance,
    PreconditionError,
    ResponseProfile,
    Violation,
    best_response,
    best_response_omb,
    canonicalize,
    cost_profile,
    induced_distribution,
    non_strategic_policy,
    policy_family_report,
    utility,
    validate_instance,
)
from .transport import TransportPlan, check_transport_consistency, transport_plan

__version__ = "0.1.0"
