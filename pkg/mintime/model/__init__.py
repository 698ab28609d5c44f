from .errors import (
    ConstantsValidationError,
    DegenerateCovectorError,
    EmptyBoundaryError,
    EstimationError,
)
from .hypotheses import (
    C1Verdict,
    PetrovReport,
    PropertyCheck,
    SupportReport,
    check_c1_criterion,
    check_petrov,
    check_subgradient_inequality,
    check_support_properties,
    estimate_constants,
    eval_argmax,
    eval_hamiltonian,
    grad_x_hamiltonian,
    one_sided_grad_x_hamiltonian,
    sample_target_boundary,
)
from .inclusion import (
    Constants,
    InclusionModel,
    TargetSet,
    ball_complement_target,
    ball_model,
    box_model,
    halfspace_target,
    point_target,
    polytope_model,
)

__all__ = [
    "C1Verdict",
    "Constants",
    "ConstantsValidationError",
    "DegenerateCovectorError",
    "EmptyBoundaryError",
    "EstimationError",
    "InclusionModel",
    "PetrovReport",
    "PropertyCheck",
    "SupportReport",
    "TargetSet",
    "ball_complement_target",
    "ball_model",
    "box_model",
    "check_c1_criterion",
    "check_petrov",
    "check_subgradient_inequality",
    "check_support_properties",
    "estimate_constants",
    "eval_argmax",
    "eval_hamiltonian",
    "grad_x_hamiltonian",
    "halfspace_target",
    "one_sided_grad_x_hamiltonian",
    "point_target",
    "polytope_model",
    "sample_target_boundary",
]
