from .arcs import ExtremalArc, FlowPath, TransportArc, arc_to_csv, flow_to_csv
from .errors import IntegrationDiagnosticError
from .integrate import (
    AdjointBoundReport,
    FlowLipschitzReport,
    GrowthReport,
    check_flow_lipschitz,
    integrate_frozen_flow,
    rho_of_s,
    shoot_extremal,
    shoot_from_terminal,
    transport_adjoint,
    verify_adjoint_bounds,
    verify_growth_bounds,
)

__all__ = [
    "AdjointBoundReport",
    "ExtremalArc",
    "FlowLipschitzReport",
    "FlowPath",
    "GrowthReport",
    "IntegrationDiagnosticError",
    "TransportArc",
    "arc_to_csv",
    "check_flow_lipschitz",
    "flow_to_csv",
    "integrate_frozen_flow",
    "rho_of_s",
    "shoot_extremal",
    "shoot_from_terminal",
    "transport_adjoint",
    "verify_adjoint_bounds",
    "verify_growth_bounds",
]
